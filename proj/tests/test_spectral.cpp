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

#include "ltm/gates.hpp"
#include "ltm/spectral.hpp"
#include "oracles.hpp"

namespace ltm {
namespace {

RMatrix random_positive(int n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    RMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = u(rng);
        }
    }
    return m;
}

TEST(Spectral, SwapHasPeriodTwoBlock) {
    const Ltm t = ltm_exact(gates::swap_circuit(), true, Partition::qubits(2));
    const CanonicalDecomposition dec = decompose(t);
    bool found = false;
    for (const auto &b : dec.blocks) {
        if (b.indices == std::vector<std::size_t>{1, 2}) {
            found = true;
            EXPECT_TRUE(b.essential);
            EXPECT_TRUE(b.unit_radius);
            EXPECT_EQ(b.period, 2);
            EXPECT_NEAR(b.perron.right[0], 0.5, 1e-12);
            EXPECT_NEAR(b.perron.right[1], 0.5, 1e-12);
            EXPECT_NE(b.cyclic_class[0], b.cyclic_class[1]);
        }
    }
    EXPECT_TRUE(found);
    EXPECT_EQ(dec.period(), 2);
}

TEST(Spectral, CyclicPermutationPeriods) {
    for (int k = 2; k <= 6; ++k) {
        RMatrix m = RMatrix::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            m((i + 1) % k, i) = 1.0;
        }
        EXPECT_EQ(period_of(m), k);
    }
}

TEST(Spectral, PositiveMatricesArePrimitive) {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        EXPECT_EQ(period_of(random_positive(2 + rep % 7, rng)), 1);
    }
}

TEST(Spectral, PeriodOfRejectsReducible) {
    RMatrix m = RMatrix::Zero(2, 2);
    m(1, 0) = 1.0;
    EXPECT_THROW(period_of(m), std::invalid_argument);
}

TEST(Spectral, PerronMatchesDenseEigenvalues) {
    std::mt19937_64 rng(2);
    for (int n : {3, 10, 80, 150}) {
        const RMatrix m = random_positive(n, rng);
        const PerronPair pp = perron(m);
        EXPECT_NEAR(pp.radius, spectral_radius(m), 1e-9 * pp.radius);
        EXPECT_LT((m * pp.right - pp.radius * pp.right).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((m.transpose() * pp.left - pp.radius * pp.left).cwiseAbs().maxCoeff(), 1e-9 * pp.left.maxCoeff());
        EXPECT_NEAR(pp.right.sum(), 1.0, 1e-12);
        EXPECT_NEAR(pp.left.dot(pp.right), 1.0, 1e-12);
    }
}

TEST(Spectral, PeriodicLargeBlockUsesShiftedIteration) {
    const int n = 90;
    RMatrix m = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m((i + 1) % n, i) = 1.0;
    }
    const PerronPair pp = perron(m);
    EXPECT_NEAR(pp.radius, 1.0, 1e-10);
    EXPECT_NEAR(pp.right.maxCoeff(), 1.0 / n, 1e-10);
}

TEST(Spectral, CanonicalFormReassembles) {
    std::mt19937_64 rng(3);
    const Ltm t = ltm_exact(Channel::mixture_with_replacement(0.2, oracle::random_state(8, rng, 1),
                                                              gates::crx_cascade(3, 0.5)),
                            true, Partition::qubits(3));
    const CanonicalDecomposition dec = decompose(t);
    EXPECT_LT((dec.reassemble() - dec.matrix).cwiseAbs().maxCoeff(), 1e-15);
    const RMatrix perm = dec.permuted();
    const auto nr = static_cast<Eigen::Index>(dec.recurrent_indices.size());
    // Nothing flows from the recurrent part into the transient part.
    EXPECT_EQ(perm.bottomLeftCorner(perm.rows() - nr, nr).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT(dec.q_radius, 1.0);
}

TEST(Spectral, AbsorptionMatchesNeumannSeries) {
    std::mt19937_64 rng(4);
    const Ltm t = ltm_exact(Channel::tensor_single_qubit({depolarizing(0.3), amplitude_damping(0.4)}), true,
                            Partition::qubits(2));
    const CanonicalDecomposition dec = decompose(t);
    RMatrix series = RMatrix::Zero(dec.R.rows(), dec.R.cols());
    RMatrix qk = RMatrix::Identity(dec.Q.rows(), dec.Q.cols());
    for (int k = 0; k < 400; ++k) {
        series += dec.R * qk;
        qk = qk * dec.Q;
    }
    EXPECT_LT((absorption_raw(dec) - series).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Spectral, DeepLimitMatchesMatrixPowers) {
    std::mt19937_64 rng(5);
    const Ltm t = ltm_exact(Channel::mixture_with_replacement(0.3, oracle::random_state(4, rng, 1),
                                                              Channel::unitary(gates::cnot())),
                            true, Partition::qubits(2));
    const CanonicalDecomposition dec = decompose(t);
    const DeepLimit lim = deep_limit_matrix(dec);
    EXPECT_TRUE(lim.converged);
    EXPECT_LT((lim.limit - matrix_power(t.entries, 400)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Spectral, PeriodicDeepLimitIsCesaroAverage) {
    const Ltm t = ltm_exact(gates::swap_circuit(), true, Partition::qubits(2));
    const DeepLimit lim = deep_limit_matrix(decompose(t));
    EXPECT_FALSE(lim.converged);
    EXPECT_EQ(lim.period, 2);
    ASSERT_EQ(lim.residue_limits.size(), 2u);
    const RMatrix avg = 0.5 * (matrix_power(t.entries, 100) + matrix_power(t.entries, 101));
    EXPECT_LT((lim.limit - avg).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Spectral, SingularAbsorptionDetected) {
    // A transient block with radius one feeding an absorbing state.
    RMatrix m = RMatrix::Zero(3, 3);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(0, 1) = 1e-3;
    m(2, 2) = 0.5;
    const CanonicalDecomposition dec = decompose(m);
    EXPECT_THROW(absorption(dec), SingularAbsorption);
}

TEST(Spectral, RejectsNegativeOrNonFinite) {
    RMatrix m = RMatrix::Identity(2, 2);
    m(0, 1) = -0.1;
    EXPECT_THROW(decompose(m), std::invalid_argument);
    m(0, 1) = std::nan("");
    EXPECT_THROW(decompose(m), std::invalid_argument);
}

} // namespace
} // namespace ltm
