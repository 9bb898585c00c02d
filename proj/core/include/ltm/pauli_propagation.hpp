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

#ifndef LTM_PAULI_PROPAGATION_HPP
#define LTM_PAULI_PROPAGATION_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "ltm/channel.hpp"
#include "ltm/partition.hpp"

namespace ltm {

/// Pauli string packed two bits per qubit (0 = I, 1 = X, 2 = Y, 3 = Z),
/// qubit q at bits 2q and 2q + 1.
using PauliCode = std::uint64_t;
using PauliTerm = std::pair<PauliCode, double>;

/// Heisenberg- or Schroedinger-picture propagation of normalized Pauli
/// strings through a gate sequence on subsystems whose dimensions are
/// powers of two. Every gate is converted once into its real Pauli
/// transfer matrix; Clifford gates have exactly one output per input.
class PauliPropagator {
  public:
    PauliPropagator(const Channel &gate_sequence, bool adjoint);

    int num_qubits() const { return num_qubits_; }
    const Partition &partition() const { return partition_; }

    /// Output expansion of the normalized Pauli string `code`, sorted by code.
    std::vector<PauliTerm> propagate(PauliCode code) const;

    /// Code of a local-basis multi-index where every subsystem uses the
    /// Pauli-string basis of its qubits (first qubit most significant).
    PauliCode code_of(std::span<const int> multi_index) const;
    Pattern pattern_of(PauliCode code) const;

    static bool supports(const Channel &ch);

  private:
    struct SparseGate {
        std::vector<int> qubits;
        // columns[a] = list of (b, R_ba) with R_ba != 0.
        std::vector<std::vector<std::pair<int, double>>> columns;
    };

    Partition partition_;
    int num_qubits_ = 0;
    std::vector<int> first_qubit_;
    std::vector<PauliCode> subsystem_masks_;
    std::vector<SparseGate> gates_;
};

/// Flattens nested compositions of gate sequences into one gate list.
/// Returns an empty optional when the channel is not of that form.
std::optional<Channel> flatten_gate_sequence(const Channel &ch);

} // namespace ltm

#endif
