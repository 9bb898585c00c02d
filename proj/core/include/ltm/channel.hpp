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

#ifndef LTM_CHANNEL_HPP
#define LTM_CHANNEL_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ltm/common.hpp"
#include "ltm/local_ops.hpp"
#include "ltm/partition.hpp"

namespace ltm {

/// Small unitary acting on an ordered list of subsystems.
struct Gate {
    std::string name;
    CMatrix matrix;
    std::vector<int> subsystems;
};

/// Immutable completely positive map. Copies share the underlying
/// representation.
class Channel {
  public:
    struct Repr;

    static Channel identity(std::size_t dim);
    static Channel unitary(CMatrix u);
    /// Trace-preserving Kraus channel; sum_i K_i^dagger K_i = 1 is checked.
    static Channel kraus(std::vector<CMatrix> ops);
    /// Kraus map without the trace-preservation check (unravelling members,
    /// trace-decreasing instruments).
    static Channel cp_map(std::vector<CMatrix> ops);
    /// rho -> (1 - p) inner(rho) + p Tr[rho] fixed_point.
    static Channel mixture_with_replacement(double p, CMatrix fixed_point, Channel inner);
    /// Independent single-qubit channels, factor q acting on qubit q.
    static Channel tensor_single_qubit(std::vector<Channel> factors);
    /// stages[0] acts first.
    static Channel composition(std::vector<Channel> stages);
    /// Unitary circuit on a partitioned space; gates[0] acts first.
    static Channel gate_sequence(std::vector<int> dims, std::vector<Gate> gates);

    std::size_t dim() const;
    bool is_unitary() const;
    bool is_trace_preserving() const;
    std::string kind_name() const;

    CMatrix apply(const CMatrix &rho) const;
    CMatrix apply_adjoint(const CMatrix &a) const;

    const Repr &repr() const { return *repr_; }

  private:
    explicit Channel(std::shared_ptr<const Repr> repr) : repr_(std::move(repr)) {}
    std::shared_ptr<const Repr> repr_;
};

struct UnitaryMap {
    CMatrix u;
};

struct KrausMap {
    std::vector<CMatrix> ops;
    bool trace_preserving = true;
};

struct MixtureMap {
    double p = 0.0;
    CMatrix fixed_point;
    Channel inner;
};

struct TensorSingleQubitMap {
    std::vector<Channel> factors;
    std::vector<std::vector<CMatrix>> factor_kraus;
    std::vector<SubsystemAction> actions;
};

struct CompositionMap {
    std::vector<Channel> stages;
};

struct GateSequenceMap {
    std::vector<int> dims;
    std::vector<Gate> gates;
    std::vector<SubsystemAction> actions;
};

struct Channel::Repr {
    std::variant<UnitaryMap, KrausMap, MixtureMap, TensorSingleQubitMap, CompositionMap, GateSequenceMap> map;
    std::size_t dim = 0;
};

DenseOperator apply(const Channel &ch, const DenseOperator &rho);
DenseOperator apply_adjoint(const Channel &ch, const DenseOperator &a);

/// Flattened Kraus representation. Refuses (LimitExceeded) when the
/// operator count would exceed max_ops.
std::vector<CMatrix> to_kraus(const Channel &ch, std::size_t max_ops = 64);

/// Dense unitary when the channel is unitary, empty otherwise.
std::optional<CMatrix> as_unitary(const Channel &ch);

/// Choi matrix sum_{ij} |i><j| (x) E(|i><j|).
CMatrix choi(const Channel &ch);

/// Real Pauli transfer matrix R_ij = Tr[P_i E(P_j)] in the normalized
/// Pauli basis, for qubit channels (dim a power of two).
RMatrix pauli_transfer_matrix(const Channel &ch, bool adjoint = false);

/// Canonical single-qubit form N'(rho) = pre_u^dagger N(post_v rho post_v^dagger) pre_u
/// with N'(P_0) = P_0 + sum_i t_i P_i and N'(P_i) = lambda_i P_i.
struct SingleQubitNormalForm {
    Eigen::Vector3d t;
    Eigen::Vector3d lambda;
    CMatrix pre_u;
    CMatrix post_v;
    double reconstruction_error = 0.0;
};

SingleQubitNormalForm normal_form(const Channel &ch);

// Single-qubit noise library.
Channel depolarizing(double p);
Channel amplitude_damping(double gamma);
Channel dephasing(double p);
/// rho -> (1 - p) rho + p Tr[rho] fixed_point on one qubit.
Channel replacement(double p, const CMatrix &fixed_point);

} // namespace ltm

#endif
