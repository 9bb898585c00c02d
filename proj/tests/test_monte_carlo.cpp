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
#include "ltm/monte_carlo.hpp"
#include "oracles.hpp"

namespace ltm {
namespace {

CMatrix ket0_density(int d) {
    CMatrix rho = CMatrix::Zero(d, d);
    rho(0, 0) = 1.0;
    return rho;
}

TEST(Haar, FirstAndSecondMoments) {
    const Partition p = Partition::qubits(1);
    std::vector<double> overlap;
    std::vector<double> z_twirl;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        Rng rng = make_rng(17, 1, i);
        const CMatrix u = haar_unitary(2, rng);
        overlap.push_back(std::norm(u(0, 0)));
        z_twirl.push_back((gates::z() * u.adjoint() * gates::z() * u).trace().real());
    }
    const MCEstimate a = estimate_from_samples(overlap, 17);
    const MCEstimate b = estimate_from_samples(z_twirl, 17);
    EXPECT_LE(std::abs(a.mean - 0.5), 4.0 * a.se_mean);
    EXPECT_LE(std::abs(b.mean), 4.0 * b.se_mean);
}

TEST(Haar, LocalUnitariesAreTensorProducts) {
    const Partition p({2, 3});
    Rng r1(5);
    Rng r2(5);
    const auto factors = haar_local_factors(p, r1);
    const CMatrix u = haar_local_unitary(p, r2);
    EXPECT_LT((u - kron(factors[0], factors[1])).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_TRUE(is_unitary(u, 1e-12));
}

TEST(Haar, WeingartenSecondMomentEntries) {
    // E[Tr[P_i U^dag P_j U] Tr[P_k U^dag P_l U]] with normalized Paulis.
    const auto &ps = normalized_paulis();
    std::vector<double> diag;
    std::vector<double> off;
    for (std::uint64_t s = 0; s < 100000; ++s) {
        Rng rng = make_rng(23, 2, s);
        const CMatrix u = haar_unitary(2, rng);
        auto r = [&](int i, int j) { return (ps[i] * u.adjoint() * ps[j] * u).trace().real(); };
        diag.push_back(r(1, 3) * r(1, 3));
        off.push_back(r(1, 3) * r(2, 3));
    }
    const MCEstimate d = estimate_from_samples(diag, 23);
    const MCEstimate o = estimate_from_samples(off, 23);
    EXPECT_LE(std::abs(d.mean - 1.0 / 3.0), 4.0 * d.se_mean);
    EXPECT_LE(std::abs(o.mean), 4.0 * o.se_mean);
}

TEST(EstimateVariance, SingleQubitNoEntangler) {
    LayeredCircuitSpec spec{Partition::qubits(1), 0, {}, gates::z(), ket0_density(2)};
    const MCEstimate e = estimate_variance(spec, 20000, 3);
    EXPECT_LE(std::abs(e.variance - 1.0 / 3.0), 4.0 * e.se_variance);
    EXPECT_LE(std::abs(e.mean), 4.0 * e.se_mean);
}

TEST(EstimateVariance, SwapOddDepthVanishes) {
    const CMatrix rho = kron(CMatrix::Identity(2, 2) / 2.0, ket0_density(2));
    const CMatrix h = kron(CMatrix::Identity(2, 2), gates::z());
    LayeredCircuitSpec spec{Partition::qubits(2), 3, {gates::swap_circuit()}, h, rho};
    const MCEstimate e = estimate_variance(spec, 1000, 4);
    EXPECT_LT(e.variance, 1e-12);
}

TEST(EstimateVariance, FullDepolarizationGivesZero) {
    std::mt19937_64 rng(1);
    const CMatrix h = oracle::random_hermitian(4, rng);
    LayeredCircuitSpec spec{Partition::qubits(2), 2, {replacement(1.0, CMatrix::Identity(4, 4) / 4.0)}, h,
                            oracle::random_state(4, rng)};
    EXPECT_LT(estimate_variance(spec, 200, 5).variance, 1e-20);
}

TEST(EstimateVariance, DeterministicAcrossThreadCounts) {
    std::mt19937_64 rng(2);
    LayeredCircuitSpec spec{Partition::qubits(2), 2, {oracle::random_channel(4, 2, rng)},
                            oracle::random_hermitian(4, rng), oracle::random_state(4, rng)};
    McOptions one;
    McOptions four;
    four.threads = 4;
    const MCEstimate a = estimate_variance(spec, 500, 77, one);
    const MCEstimate b = estimate_variance(spec, 500, 77, four);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.variance, b.variance);
    EXPECT_EQ(a.se_variance, b.se_variance);
}

TEST(EstimateVariance, MeanIsTraceAverage) {
    std::mt19937_64 rng(3);
    const CMatrix h = oracle::random_hermitian(8, rng, false);
    LayeredCircuitSpec spec{Partition::qubits(3), 1, {gates::cnot_double_cascade(3)}, h, oracle::random_state(8, rng)};
    const MCEstimate e = estimate_variance(spec, 2000, 6);
    EXPECT_LE(std::abs(e.mean - h.trace().real() / 8.0), 4.0 * e.se_mean);
}

TEST(EstimateVariance, Refusals) {
    LayeredCircuitSpec spec{Partition::qubits(1), 0, {}, gates::z(), ket0_density(2)};
    EXPECT_THROW(estimate_variance(spec, 50, 1), std::invalid_argument);
    McOptions small;
    small.max_dim = 1;
    EXPECT_THROW(estimate_variance(spec, 100, 1, small), LimitExceeded);
    LayeredCircuitSpec bad = spec;
    bad.layers = 2;
    EXPECT_THROW(estimate_variance(bad, 100, 1), std::invalid_argument);
}

TEST(Qresnet, ZeroSpreadIsIdentityEntangler) {
    const Partition p = Partition::qubits(2);
    const CMatrix g = kron(gates::z(), gates::z());
    const CMatrix h = kron(gates::z(), CMatrix::Identity(2, 2));
    LayeredCircuitSpec spec{p, 3, {Channel::identity(4)}, h, ket0_density(4)};
    const MCEstimate q = qresnet_estimate(spec, g, 0.0, 3000, 8);
    const MCEstimate e = estimate_variance(spec, 3000, 9);
    EXPECT_LE(std::abs(q.variance - e.variance), 4.0 * std::hypot(q.se_variance, e.se_variance));
    EXPECT_THROW(qresnet_estimate(spec, CMatrix::Identity(4, 4) * cplx(0, 1), 0.1, 100, 1), std::invalid_argument);
    EXPECT_THROW(qresnet_estimate(spec, g, -1.0, 100, 1), std::invalid_argument);
}

TEST(GlobalHaar, MatchesClosedForm) {
    std::mt19937_64 rng(4);
    const int d = 4;
    const CMatrix rho = oracle::random_state(d, rng, 1);
    const CMatrix h = oracle::random_hermitian(d, rng);
    const double expect = ((rho * rho).trace().real() - 1.0 / d) * ((h * h).trace().real()) / (d * d - 1.0);
    const MCEstimate e = estimate_global_haar_variance(rho, h, 20000, 10);
    EXPECT_LE(std::abs(e.variance - expect), 4.0 * e.se_variance);
}

} // namespace
} // namespace ltm
