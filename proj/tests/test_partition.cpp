// Copyright 2026 The ltm-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "ltm/partition.hpp"
#include "oracles.hpp"

namespace ltm {
namespace {

TEST(Partition, PatternDimsAndCounts) {
    const Partition p({2, 3});
    EXPECT_EQ(p.dim(), 6u);
    EXPECT_EQ(p.num_patterns(), 4u);
    EXPECT_DOUBLE_EQ(p.pattern_dim(0b00), 1.0);
    EXPECT_DOUBLE_EQ(p.pattern_dim(0b01), 3.0);
    EXPECT_DOUBLE_EQ(p.pattern_dim(0b10), 8.0);
    EXPECT_DOUBLE_EQ(p.pattern_dim(0b11), 24.0);
    std::size_t total = 0;
    for (Pattern k = 0; k < 4; ++k) {
        EXPECT_EQ(static_cast<double>(p.pattern_count(k)), p.pattern_dim(k));
        total += p.pattern_count(k);
    }
    EXPECT_EQ(total, p.operator_dim());
}

TEST(Partition, FlattenRoundTrip) {
    const Partition p({2, 3, 2});
    for (std::size_t flat = 0; flat < p.operator_dim(); ++flat) {
        const auto j = p.unflatten(flat);
        EXPECT_EQ(p.flatten(j), flat);
        EXPECT_EQ(p.pattern_of(j), p.pattern_of_flat(flat));
    }
}

TEST(Partition, RejectsBadInput) {
    EXPECT_THROW(Partition({1, 2}), std::invalid_argument);
    EXPECT_THROW(Partition(std::vector<int>{}), std::invalid_argument);
    const Partition p({2, 2});
    const std::vector<int> bits{1, 0, 1};
    EXPECT_THROW(p.pattern_from_bits(bits), std::invalid_argument);
    EXPECT_THROW(p.check_pattern(4), std::invalid_argument);
}

TEST(LocalBasis, OrthonormalAndHermitian) {
    for (const auto &dims : {std::vector<int>{2, 2}, std::vector<int>{3}, std::vector<int>{2, 3}}) {
        const Partition p(dims);
        const LocalBasis basis = LocalBasis::standard(p);
        std::vector<CMatrix> elems;
        for (std::size_t f = 0; f < p.operator_dim(); ++f) {
            elems.push_back(basis.element(p.unflatten(f)));
            EXPECT_TRUE(is_hermitian(elems.back(), 1e-12));
        }
        for (std::size_t a = 0; a < elems.size(); ++a) {
            for (std::size_t b = 0; b < elems.size(); ++b) {
                const cplx ip = (elems[a].adjoint() * elems[b]).trace();
                EXPECT_NEAR(std::abs(ip - cplx(a == b ? 1.0 : 0.0)), 0.0, 1e-12);
            }
        }
    }
}

TEST(LocalBasis, FastCoefficientsMatchExplicitTraces) {
    std::mt19937_64 rng(3);
    const Partition p({2, 3});
    const LocalBasis basis = LocalBasis::standard(p);
    const CMatrix a = oracle::random_hermitian(6, rng, false) + cplx(0, 1) * oracle::random_hermitian(6, rng, false);
    const auto c = basis.coefficients(a);
    for (std::size_t f = 0; f < p.operator_dim(); ++f) {
        const cplx direct = (basis.element(p.unflatten(f)) * a).trace();
        EXPECT_NEAR(std::abs(c[f] - direct), 0.0, 1e-12);
    }
    const CMatrix back = basis.synthesize(c);
    EXPECT_LT((back - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LocalityVector, MassAndPatternPlacement) {
    const Partition p = Partition::qubits(3);
    // Z on qubit 1 only: all mass on pattern 0b010.
    const CMatrix z1 = kron_all(std::vector<CMatrix>{CMatrix::Identity(2, 2), gates::z(), CMatrix::Identity(2, 2)});
    const LocalityVector l = locality_vector(z1, p);
    EXPECT_NEAR(l[0b010], 8.0, 1e-12);
    EXPECT_NEAR(l.total(), hs_norm_sq(z1), 1e-12);
    for (Pattern k = 0; k < 8; ++k) {
        if (k != 0b010) {
            EXPECT_NEAR(l[k], 0.0, 1e-12);
        }
    }
}

TEST(LocalityVector, TotalEqualsHilbertSchmidtNorm) {
    std::mt19937_64 rng(11);
    for (const auto &dims : {std::vector<int>{2, 2, 2}, std::vector<int>{3, 2}}) {
        const Partition p(dims);
        const CMatrix a = oracle::random_hermitian(static_cast<int>(p.dim()), rng, false);
        const LocalityVector l = locality_vector(a, p);
        EXPECT_NEAR(l.total(), hs_norm_sq(a), 1e-10);
        EXPECT_NEAR(l[0], std::norm(a.trace()) / static_cast<double>(p.dim()), 1e-10);
        EXPECT_GE(l.weights().minCoeff(), 0.0);
    }
}

TEST(LocalityVector, InvariantUnderLocalUnitaries) {
    std::mt19937_64 rng(5);
    const Partition p({2, 3});
    const CMatrix a = oracle::random_hermitian(6, rng, false);
    const CMatrix u = kron(oracle::random_unitary(2, rng), oracle::random_unitary(3, rng));
    const LocalityVector l1 = locality_vector(a, p);
    const LocalityVector l2 = locality_vector(u * a * u.adjoint(), p);
    EXPECT_LT((l1.weights() - l2.weights()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LocalityVector, RotatedBasisGivesSameVector) {
    std::mt19937_64 rng(21);
    const Partition p({2, 2, 3});
    const LocalBasis std_basis = LocalBasis::standard(p);
    const std::vector<CMatrix> us{oracle::random_unitary(2, rng), oracle::random_unitary(2, rng),
                                  oracle::random_unitary(3, rng)};
    const LocalBasis rot = std_basis.rotated(us);
    const CMatrix a = oracle::random_hermitian(12, rng, false);
    const auto l1 = locality_vector(a, std_basis);
    const auto l2 = locality_vector(a, rot);
    EXPECT_LT((l1.weights() - l2.weights()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LocalityVector, WeightedDotMatchesFullTrace) {
    // l_11 = ||ZZ||^2 = 4 and d_11 = 9.
    const Partition p = Partition::qubits(2);
    const CMatrix zz = kron(gates::z(), gates::z());
    const LocalityVector l = locality_vector(zz, p);
    EXPECT_NEAR(weighted_dot(l, l), 16.0 / 9.0, 1e-12);
}

TEST(LocalityVector, NegativeWeightsRejected) {
    const Partition p = Partition::qubits(1);
    RVector w(2);
    w << 1.0, -0.5;
    EXPECT_THROW(LocalityVector(p, w), std::invalid_argument);
}

} // namespace
} // namespace ltm
