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

#include "ltm/channel.hpp"
#include "ltm/gates.hpp"
#include "oracles.hpp"

namespace ltm {
namespace {

std::vector<Channel> channel_catalog(std::mt19937_64 &rng) {
    std::vector<Channel> out;
    out.push_back(depolarizing(0.3));
    out.push_back(amplitude_damping(0.4));
    out.push_back(dephasing(0.2));
    out.push_back(replacement(0.5, oracle::random_state(2, rng)));
    out.push_back(Channel::unitary(oracle::random_unitary(4, rng)));
    out.push_back(oracle::random_channel(4, 3, rng));
    out.push_back(Channel::mixture_with_replacement(0.3, oracle::random_state(4, rng, 1),
                                                    Channel::unitary(gates::cnot())));
    out.push_back(Channel::tensor_single_qubit({amplitude_damping(0.2), depolarizing(0.5)}));
    out.push_back(Channel::composition({Channel::unitary(gates::cnot()), oracle::random_channel(4, 2, rng)}));
    out.push_back(gates::cnot_double_cascade(3));
    out.push_back(gates::crx_cascade(3, 0.7));
    return out;
}

TEST(Channel, ChoiIsPositiveSemidefinite) {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 5; ++rep) {
        for (const auto &ch : channel_catalog(rng)) {
            EXPECT_GE(min_eigenvalue_hermitian(choi(ch)), -1e-9) << ch.kind_name();
        }
    }
}

TEST(Channel, TracePreservingAndAdjointDuality) {
    std::mt19937_64 rng(2);
    for (const auto &ch : channel_catalog(rng)) {
        const int d = static_cast<int>(ch.dim());
        const CMatrix rho = oracle::random_state(d, rng);
        const CMatrix a = oracle::random_hermitian(d, rng, false);
        EXPECT_NEAR(ch.apply(rho).trace().real(), 1.0, 1e-10) << ch.kind_name();
        const cplx lhs = (ch.apply(rho) * a).trace();
        const cplx rhs = (rho * ch.apply_adjoint(a)).trace();
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10) << ch.kind_name();
    }
}

TEST(Channel, KadisonSchwarzOnAdjoint) {
    std::mt19937_64 rng(3);
    const auto catalog = channel_catalog(rng);
    for (int rep = 0; rep < 10; ++rep) {
        for (const auto &ch : catalog) {
            const int d = static_cast<int>(ch.dim());
            const CMatrix a = oracle::random_hermitian(d, rng, false);
            const CMatrix la = ch.apply_adjoint(a);
            const CMatrix diff = ch.apply_adjoint(a * a) - la * la;
            EXPECT_GE(min_eigenvalue_hermitian(0.5 * (diff + diff.adjoint())), -1e-8) << ch.kind_name();
        }
    }
}

TEST(Channel, TraceNormContractive) {
    std::mt19937_64 rng(4);
    const auto catalog = channel_catalog(rng);
    for (int rep = 0; rep < 10; ++rep) {
        for (const auto &ch : catalog) {
            const int d = static_cast<int>(ch.dim());
            const CMatrix diff = oracle::random_state(d, rng) - oracle::random_state(d, rng, 1);
            EXPECT_LE(trace_norm_hermitian(ch.apply(diff)), trace_norm_hermitian(diff) + 1e-9) << ch.kind_name();
        }
    }
}

TEST(Channel, ValidationErrors) {
    EXPECT_THROW(Channel::unitary(2.0 * CMatrix::Identity(2, 2)), std::invalid_argument);
    EXPECT_THROW(Channel::kraus({CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)}), std::invalid_argument);
    EXPECT_THROW(Channel::mixture_with_replacement(1.5, CMatrix::Identity(2, 2) / 2.0, Channel::identity(2)),
                 std::invalid_argument);
    EXPECT_THROW(depolarizing(-0.1), std::invalid_argument);
    EXPECT_THROW(Channel::composition({Channel::identity(2), Channel::identity(4)}), std::invalid_argument);
}

TEST(Channel, MixtureMatchesDefinition) {
    std::mt19937_64 rng(8);
    const CMatrix fixed = oracle::random_state(4, rng, 1);
    const Channel inner = Channel::unitary(oracle::random_unitary(4, rng));
    const Channel mix = Channel::mixture_with_replacement(0.25, fixed, inner);
    const CMatrix rho = oracle::random_state(4, rng);
    const CMatrix expect = 0.75 * inner.apply(rho) + 0.25 * fixed;
    EXPECT_LT((mix.apply(rho) - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_FALSE(mix.is_unitary());
}

TEST(Channel, GateSequenceMatchesDenseProduct) {
    const Channel seq = gates::cnot_double_cascade(3);
    const CMatrix i2 = CMatrix::Identity(2, 2);
    const CMatrix c01 = kron(gates::cnot(), i2);
    const CMatrix c12 = kron(i2, gates::cnot());
    const CMatrix ladder = c12 * c01;
    const CMatrix u = ladder * ladder;
    const auto as_u = as_unitary(seq);
    ASSERT_TRUE(as_u.has_value());
    EXPECT_LT((*as_u - u).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Channel, ToKrausRefusesLargeCompositions) {
    std::mt19937_64 rng(9);
    std::vector<Channel> stages;
    for (int i = 0; i < 4; ++i) {
        stages.push_back(oracle::random_channel(2, 4, rng));
    }
    const Channel comp = Channel::composition(stages);
    EXPECT_THROW(to_kraus(comp, 64), LimitExceeded);
    EXPECT_EQ(to_kraus(comp, 256).size(), 256u);
}

TEST(NormalForm, ReconstructsQubitChannels) {
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 20; ++rep) {
        const Channel ch = rep % 2 ? oracle::random_channel(2, 2, rng) : amplitude_damping(0.1 * rep / 2.0);
        const SingleQubitNormalForm nf = normal_form(ch);
        EXPECT_LT(nf.reconstruction_error, 1e-8);
        EXPECT_TRUE(is_unitary(nf.pre_u, 1e-10));
        EXPECT_TRUE(is_unitary(nf.post_v, 1e-10));
        // Singular values sorted in descending order of magnitude.
        EXPECT_GE(std::abs(nf.lambda[0]) + 1e-12, std::abs(nf.lambda[1]));
        EXPECT_GE(std::abs(nf.lambda[1]) + 1e-12, std::abs(nf.lambda[2]));
    }
}

TEST(NormalForm, DepolarizingIsAlreadyDiagonal) {
    const SingleQubitNormalForm nf = normal_form(depolarizing(0.4));
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(std::abs(nf.lambda[i]), 0.6, 1e-12);
        EXPECT_NEAR(nf.t[i], 0.0, 1e-12);
    }
}

TEST(NormalForm, RejectsWrongInput) {
    EXPECT_THROW(normal_form(Channel::identity(4)), std::invalid_argument);
}

} // namespace
} // namespace ltm
