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
#include "ltm/variance.hpp"
#include "oracles.hpp"

namespace ltm {
namespace {

struct Scenario {
    Partition partition;
    CMatrix rho;
    CMatrix h;
    LocalityVector l_rho;
    LocalityVector l_h;
};

Scenario make_setup(int n, std::mt19937_64 &rng, bool traceless = true) {
    Scenario s;
    s.partition = Partition::qubits(n);
    const int d = 1 << n;
    s.rho = oracle::random_state(d, rng);
    s.h = oracle::random_hermitian(d, rng, traceless);
    s.l_rho = locality_vector(s.rho, s.partition);
    s.l_h = locality_vector(s.h, s.partition);
    return s;
}

TEST(VarianceExact, MatchesCliffordSecondMoment) {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 6; ++rep) {
        const Scenario s = make_setup(2, rng, rep % 2 == 0);
        std::vector<Channel> chans;
        std::vector<Ltm> ltms;
        for (int l = 0; l < 1 + rep % 3; ++l) {
            const Channel ch = rep % 3 == 0 ? Channel::unitary(oracle::random_unitary(4, rng))
                                            : oracle::random_channel(4, 2, rng);
            chans.push_back(ch);
            ltms.push_back(ltm_exact(ch, true, s.partition));
        }
        const double expect = oracle::second_moment_variance(s.rho, s.h, chans, 2);
        const VarianceReport r = variance_exact(s.l_rho, ltms, s.l_h, s.h.trace().real());
        EXPECT_NEAR(r.value, expect, 1e-10);
    }
}

TEST(VarianceExact, SingleLayerQubitValue) {
    const Partition p = Partition::qubits(1);
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    const std::vector<Ltm> none;
    const VarianceReport r =
        variance_exact(locality_vector(rho, p), none, locality_vector(gates::z(), p), 0.0);
    EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-14);
}

TEST(VarianceExact, FullReplacementForgetsTheInput) {
    std::mt19937_64 rng(2);
    const Scenario s = make_setup(2, rng);
    const CMatrix sigma = oracle::random_state(4, rng);
    const Ltm t = ltm_exact(replacement(1.0, sigma), true, s.partition);
    const std::vector<Ltm> none;
    const double fresh = variance_exact(locality_vector(sigma, s.partition), none, s.l_h, 0.0).value;
    for (std::size_t l = 1; l <= 3; ++l) {
        const std::vector<Ltm> chain(l, t);
        EXPECT_NEAR(variance_exact(s.l_rho, chain, s.l_h, 0.0).value, fresh, 1e-12);
    }
    const Ltm mixed = ltm_exact(replacement(1.0, CMatrix::Identity(4, 4) / 4.0), true, s.partition);
    const std::vector<Ltm> chain(3, mixed);
    EXPECT_NEAR(variance_exact(s.l_rho, chain, s.l_h, 0.0).value, 0.0, 1e-14);
}

TEST(VarianceExact, RequiresAdjointLtms) {
    std::mt19937_64 rng(3);
    const Scenario s = make_setup(2, rng);
    const std::vector<Ltm> chain{ltm_exact(Channel::unitary(gates::cnot()), false, s.partition)};
    EXPECT_THROW(variance_exact(s.l_rho, chain, s.l_h, 0.0), std::invalid_argument);
}

TEST(VarianceDeep, MatchesLongSequenceForNoisyChannels) {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 5; ++rep) {
        const Scenario s = make_setup(2, rng);
        const Channel ch = Channel::mixture_with_replacement(0.2, oracle::random_state(4, rng, 1),
                                                             Channel::unitary(oracle::random_unitary(4, rng)));
        const Ltm t = ltm_exact(ch, true, s.partition);
        const VarianceReport deep = variance_deep(decompose(t), s.l_rho, s.l_h);
        const auto seq = variance_sequence(s.l_rho, t, s.l_h, 0.0, 600);
        EXPECT_TRUE(deep.converged);
        EXPECT_NEAR(deep.value, seq.back(), 1e-10);
        ASSERT_TRUE(deep.beta.has_value());
        EXPECT_GT(*deep.beta, 0.0);
    }
}

TEST(VarianceDeep, UnitaryBlockSumAgreesWithDeepValue) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        const Scenario s = make_setup(3, rng);
        const Ltm t = ltm_exact(Channel::unitary(oracle::random_unitary(8, rng)), true, s.partition);
        const CanonicalDecomposition dec = decompose(t);
        const VarianceReport deep = variance_deep(dec, s.l_rho, s.l_h);
        const VarianceReport unit = variance_deep_unitary(dec, s.l_rho, s.l_h);
        EXPECT_NEAR(deep.value, unit.value, 1e-9);
        for (const auto &b : deep.blocks) {
            EXPECT_NEAR(b.absorbed, 0.0, 1e-9);
        }
    }
}

TEST(VarianceDeep, UnitaryFormulaRejectsNoisyChannels) {
    std::mt19937_64 rng(6);
    const Scenario s = make_setup(2, rng);
    const Ltm t = ltm_exact(oracle::random_channel(4, 2, rng), true, s.partition);
    EXPECT_THROW(variance_deep_unitary(decompose(t), s.l_rho, s.l_h), std::invalid_argument);
}

TEST(VarianceDeep, UnitalContractiveChannelsConcentrate) {
    std::mt19937_64 rng(7);
    const Scenario s = make_setup(3, rng);
    const Channel noise = Channel::tensor_single_qubit({depolarizing(0.2), dephasing(0.3), depolarizing(0.05)});
    const Channel ch = Channel::composition({gates::cnot_double_cascade(3), noise});
    const VarianceReport deep = variance_deep(decompose(ltm_exact(ch, true, s.partition)), s.l_rho, s.l_h);
    EXPECT_NEAR(deep.value, 0.0, 1e-10);
}

TEST(NoiseModel, AgreesWithDecompositionAndProjectionForm) {
    std::mt19937_64 rng(8);
    const Partition p = Partition::qubits(3);
    const CMatrix fixed = oracle::random_state(8, rng, 1);
    const CMatrix h = oracle::random_hermitian(8, rng);
    const CMatrix rho = oracle::random_state(8, rng);
    const LocalityVector lf = locality_vector(fixed, p);
    const LocalityVector lh = locality_vector(h, p);
    const Ltm tu = ltm_structured(gates::crx_cascade(3, 0.6), true, p);
    for (double prob : {0.05, 0.3, 0.9}) {
        const VarianceReport nm = noise_model_deep(prob, tu, lf, lh);
        const VarianceReport deep =
            variance_deep(decompose(mixture_ltm(tu, prob, lf)), locality_vector(rho, p), lh);
        EXPECT_NEAR(nm.value, deep.value, 1e-10);
    }
    // The identity map is a projection, so the closed form applies.
    const Ltm id = ltm_exact(Channel::identity(8), true, p);
    const VarianceReport nm = noise_model_deep(0.4, id, lf, lh);
    ASSERT_TRUE(nm.cross_check.has_value());
    EXPECT_NEAR(nm.value, *nm.cross_check, 1e-12);
    EXPECT_NEAR(nm.value, 0.4 / 1.6 * weighted_dot(lf, lh.without_identity()), 1e-12);
    EXPECT_THROW(noise_model_deep(0.0, tu, lf, lh), std::invalid_argument);
}

TEST(LowerBound, NeverExceedsExactValue) {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 40; ++rep) {
        const Scenario s = make_setup(2, rng);
        const Channel ch = rep % 2 ? oracle::random_channel(4, 2, rng) : Channel::unitary(oracle::random_unitary(4, rng));
        const std::vector<Ltm> chain(1 + rep % 4, ltm_exact(ch, true, s.partition));
        std::vector<Pattern> keep;
        for (Pattern k = 1; k < 4; ++k) {
            if (rng() % 2) {
                keep.push_back(k);
            }
        }
        if (keep.empty()) {
            keep.push_back(3);
        }
        const LowerBound lb = lower_bound(s.l_rho, chain, s.l_h, keep);
        EXPECT_LE(lb.bound, variance_exact(s.l_rho, chain, s.l_h, 0.0).value + 1e-9);
        EXPECT_GE(lb.alpha, 0.0);
        EXPECT_LE(lb.alpha, 1.0 + 1e-12);
    }
}

TEST(ScalingCheck, DistinguishesPowerLawFromExponential) {
    std::vector<ScalingSample> power;
    std::vector<ScalingSample> expo;
    for (double n : {4.0, 8.0, 16.0, 32.0, 64.0}) {
        const double depth = 2.0 * std::log(n);
        power.push_back({n, depth, std::pow(n, -1.0 / depth)});
        expo.push_back({n, depth, std::exp(-n / depth)});
    }
    const Corollary3Report rp = check_corollary3(power);
    EXPECT_TRUE(rp.passes);
    EXPECT_NEAR(rp.fitted_k, 1.0, 1e-9);
    EXPECT_FALSE(check_corollary3(expo).passes);
    EXPECT_THROW(check_corollary3(std::span<const ScalingSample>(power.data(), 2)), std::invalid_argument);
}

TEST(HoelderBound, IsSquaredOperatorNorm) {
    const CMatrix z = gates::z();
    EXPECT_NEAR(hoelder_bound(z), 1.0, 1e-12);
}

} // namespace
} // namespace ltm
