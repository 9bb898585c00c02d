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
#include "ltm/ltm.hpp"
#include "ltm/pauli_propagation.hpp"
#include "oracles.hpp"

namespace ltm {
namespace {

double max_abs(const RMatrix &m) { return m.cwiseAbs().maxCoeff(); }

TEST(Ltm, CnotEntries) {
    // Control on subsystem 1, target on subsystem 0.
    const Partition p = Partition::qubits(2);
    const Channel ch = Channel::gate_sequence({2, 2}, {gates::on("cnot", gates::cnot(), {1, 0})});
    const Ltm t = ltm_exact(ch, true, p);
    EXPECT_NEAR(t(0b01, 0b01), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(t(0b11, 0b01), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(t(0, 0), 1.0, 1e-12);
}

TEST(Ltm, ExactMatchesBruteForceDefinition) {
    std::mt19937_64 rng(1);
    std::vector<Channel> chans{gates::cnot_double_cascade(3), gates::crx_cascade(3, 0.4),
                               oracle::random_channel(8, 2, rng),
                               Channel::tensor_single_qubit({amplitude_damping(0.3), depolarizing(0.2), dephasing(0.5)})};
    for (const auto &ch : chans) {
        for (bool adjoint : {true, false}) {
            const Ltm t = ltm_exact(ch, adjoint, Partition::qubits(3));
            EXPECT_LT(max_abs(t.entries - oracle::brute_force_ltm(ch, 3, adjoint)), 1e-10) << ch.kind_name();
        }
    }
}

TEST(Ltm, StructuredMatchesExact) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> angle(0.0, 6.28);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<Gate> list;
        for (int g = 0; g < 6; ++g) {
            const int a = static_cast<int>(rng() % 4);
            const int b = (a + 1 + static_cast<int>(rng() % 3)) % 4;
            switch (g % 3) {
            case 0: list.push_back(gates::on("crx", gates::crx(angle(rng)), {a, b})); break;
            case 1: list.push_back(gates::on("cnot", gates::cnot(), {a, b})); break;
            default: list.push_back(gates::on("ry", gates::ry(angle(rng)), {a})); break;
            }
        }
        const Channel ch = Channel::gate_sequence({2, 2, 2, 2}, list);
        const Partition p = Partition::qubits(4);
        ASSERT_TRUE(supports_structured(ch, p));
        for (bool adjoint : {true, false}) {
            const Ltm s = ltm_structured(ch, adjoint, p);
            const Ltm e = ltm_exact(ch, adjoint, p);
            EXPECT_LT(max_abs(s.entries - e.entries), 1e-10);
        }
    }
}

TEST(Ltm, StructuredOnGroupedQubits) {
    // Two subsystems of dimension 4 built from qubit pairs.
    std::mt19937_64 rng(12);
    const Channel ch = Channel::gate_sequence({4, 4}, {gates::on("u", oracle::random_unitary(4, rng), {1}),
                                                       gates::on("v", oracle::random_unitary(16, rng), {0, 1})});
    const Partition p({4, 4});
    ASSERT_TRUE(supports_structured(ch, p));
    EXPECT_LT(max_abs(ltm_structured(ch, true, p).entries - ltm_exact(ch, true, p).entries), 1e-10);
}

TEST(Ltm, ColumnSumsAndStochasticity) {
    std::mt19937_64 rng(3);
    const Partition p({2, 3});
    for (int rep = 0; rep < 5; ++rep) {
        const Ltm tu = ltm_exact(Channel::unitary(oracle::random_unitary(6, rng)), true, p);
        EXPECT_LT((column_sums(tu).array() - 1.0).abs().maxCoeff(), 1e-9);
        const Ltm tc = ltm_exact(oracle::random_channel(6, 3, rng), true, p);
        EXPECT_LE(column_sums(tc).maxCoeff(), 1.0 + 1e-8);
        EXPECT_GE(tc.entries.minCoeff(), 0.0);
    }
}

TEST(Ltm, Duality) {
    std::mt19937_64 rng(4);
    const Partition p = Partition::qubits(2);
    for (int rep = 0; rep < 5; ++rep) {
        const Channel ch = oracle::random_channel(4, 2, rng);
        EXPECT_LT(duality_defect(ltm_exact(ch, false, p), ltm_exact(ch, true, p)), 1e-8);
    }
}

TEST(Ltm, BasisInvariance) {
    std::mt19937_64 rng(5);
    const Partition p({2, 3});
    const LocalBasis rot =
        LocalBasis::standard(p).rotated(std::vector<CMatrix>{oracle::random_unitary(2, rng), oracle::random_unitary(3, rng)});
    LtmOptions opts;
    opts.basis = &rot;
    const Channel ch = oracle::random_channel(6, 2, rng);
    EXPECT_LT(max_abs(ltm_exact(ch, true, p).entries - ltm_exact(ch, true, p, opts).entries), 1e-9);
}

TEST(Ltm, MixtureAssemblyMatchesExact) {
    std::mt19937_64 rng(6);
    const Partition p = Partition::qubits(3);
    const Channel inner = gates::crx_cascade(3, 0.9);
    const CMatrix fixed = oracle::random_state(8, rng, 1);
    const double prob = 0.35;
    const Ltm assembled = mixture_ltm(ltm_exact(inner, true, p), prob, locality_vector(fixed, p));
    const Ltm direct = ltm_exact(Channel::mixture_with_replacement(prob, fixed, inner), true, p);
    EXPECT_LT(max_abs(assembled.entries - direct.entries), 1e-10);
    EXPECT_EQ(assembled.method, LtmMethod::assembled);
    EXPECT_THROW(mixture_ltm(ltm_exact(amplitude_damping(0.3), true, Partition::qubits(1)), 0.1,
                             locality_vector(fixed.topLeftCorner(2, 2) / fixed.topLeftCorner(2, 2).trace(),
                                             Partition::qubits(1))),
                 std::invalid_argument);
}

TEST(Ltm, SampledWithinStandardError) {
    std::mt19937_64 rng(7);
    const Partition p = Partition::qubits(3);
    const Channel ch = oracle::random_channel(8, 2, rng);
    const Ltm exact = ltm_exact(ch, true, p);
    const Ltm sampled = ltm_sampled(ch, true, p, 200, 99);
    int outside = 0;
    int total = 0;
    for (Eigen::Index r = 0; r < exact.entries.rows(); ++r) {
        for (Eigen::Index c = 0; c < exact.entries.cols(); ++c) {
            const double se = sampled.standard_error(r, c);
            if (se > 0.0) {
                ++total;
                outside += std::abs(sampled.entries(r, c) - exact.entries(r, c)) > 4.0 * se;
            } else {
                EXPECT_NEAR(sampled.entries(r, c), exact.entries(r, c), 1e-10);
            }
        }
    }
    EXPECT_LE(outside, std::max(1, total / 50));
    // Same seed reproduces bit for bit.
    EXPECT_EQ(max_abs(sampled.entries - ltm_sampled(ch, true, p, 200, 99).entries), 0.0);
}

TEST(Ltm, ExactRefusesHugeDimensions) {
    std::mt19937_64 rng(1);
    LtmOptions opts;
    opts.max_dense_dim = 4;
    EXPECT_THROW(ltm_exact(oracle::random_channel(8, 2, rng), true, Partition::qubits(3), opts), LimitExceeded);
}

TEST(Ltm, EnsembleMeanDominatesAverage) {
    std::mt19937_64 rng(8);
    const Partition p = Partition::qubits(2);
    std::vector<WeightedChannel> members;
    for (int k = 0; k < 4; ++k) {
        members.emplace_back(0.25, Channel::unitary(oracle::random_unitary(4, rng)));
    }
    const Ltm mean = mean_ltm_over_ensemble(members, true, p);
    const Ltm avg = ltm_exact(average_channel(members), true, p);
    EXPECT_GE((mean.entries - avg.entries).minCoeff(), -1e-9);
    const std::vector<WeightedChannel> single{{1.0, members.front().second}};
    EXPECT_LT(max_abs(mean_ltm_over_ensemble(single, true, p).entries -
                      ltm_exact(average_channel(single), true, p).entries),
              1e-10);
    std::vector<WeightedChannel> bad = members;
    bad.front().first = 0.5;
    EXPECT_THROW(mean_ltm_over_ensemble(bad, true, p), std::invalid_argument);
}

TEST(PauliPropagator, HadamardMapsXToZ) {
    const Channel ch = Channel::gate_sequence({2}, {gates::on("h", gates::h(), {0})});
    const PauliPropagator prop(ch, true);
    const auto terms = prop.propagate(1);  // X
    ASSERT_EQ(terms.size(), 1u);
    EXPECT_EQ(terms.front().first, PauliCode{3});
    EXPECT_NEAR(terms.front().second, 1.0, 1e-12);
}

} // namespace
} // namespace ltm
