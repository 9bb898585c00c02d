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

#include "ltm/pauli_propagation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ltm {

namespace {

constexpr int kMaxQubits = 32;
constexpr int kMaxGateQubits = 4;

int log2_if_power(int d) {
    int k = 0;
    while ((1 << k) < d) {
        ++k;
    }
    return (1 << k) == d ? k : -1;
}

CMatrix pauli_string(int index, int k) {
    CMatrix out = CMatrix::Ones(1, 1);
    for (int t = k - 1; t >= 0; --t) {
        out = kron(out, pauli((index >> (2 * t)) & 3));
    }
    return out;
}

const GateSequenceMap *as_sequence(const Channel &ch) { return std::get_if<GateSequenceMap>(&ch.repr().map); }

} // namespace

std::optional<Channel> flatten_gate_sequence(const Channel &ch) {
    if (as_sequence(ch) != nullptr) {
        return ch;
    }
    const auto *comp = std::get_if<CompositionMap>(&ch.repr().map);
    if (comp == nullptr) {
        return std::nullopt;
    }
    std::vector<int> dims;
    std::vector<Gate> gates;
    for (const auto &stage : comp->stages) {
        auto flat = flatten_gate_sequence(stage);
        if (!flat) {
            return std::nullopt;
        }
        const auto &seq = *as_sequence(*flat);
        if (dims.empty()) {
            dims = seq.dims;
        } else if (dims != seq.dims) {
            return std::nullopt;
        }
        gates.insert(gates.end(), seq.gates.begin(), seq.gates.end());
    }
    return Channel::gate_sequence(std::move(dims), std::move(gates));
}

bool PauliPropagator::supports(const Channel &ch) {
    auto flat = flatten_gate_sequence(ch);
    if (!flat) {
        return false;
    }
    const auto &seq = *as_sequence(*flat);
    int qubits = 0;
    for (int d : seq.dims) {
        const int k = log2_if_power(d);
        if (k < 1) {
            return false;
        }
        qubits += k;
    }
    if (qubits > kMaxQubits) {
        return false;
    }
    for (const auto &g : seq.gates) {
        int k = 0;
        for (int s : g.subsystems) {
            k += log2_if_power(seq.dims[static_cast<std::size_t>(s)]);
        }
        if (k > kMaxGateQubits) {
            return false;
        }
    }
    return true;
}

PauliPropagator::PauliPropagator(const Channel &gate_sequence, bool adjoint) {
    if (!supports(gate_sequence)) {
        throw std::invalid_argument("Pauli propagation needs a gate sequence on power-of-two subsystems with at most " +
                                    std::to_string(kMaxQubits) + " qubits and gates of at most " +
                                    std::to_string(kMaxGateQubits) + " qubits");
    }
    const Channel flat = *flatten_gate_sequence(gate_sequence);
    const auto &seq = *as_sequence(flat);
    partition_ = Partition(seq.dims);
    for (int d : seq.dims) {
        first_qubit_.push_back(num_qubits_);
        const int k = log2_if_power(d);
        PauliCode mask = 0;
        for (int t = 0; t < k; ++t) {
            mask |= PauliCode{3} << (2 * (num_qubits_ + t));
        }
        subsystem_masks_.push_back(mask);
        num_qubits_ += k;
    }
    std::vector<std::size_t> order(seq.gates.size());
    for (std::size_t g = 0; g < order.size(); ++g) {
        order[g] = adjoint ? order.size() - 1 - g : g;
    }
    for (std::size_t g : order) {
        const Gate &gate = seq.gates[g];
        SparseGate sg;
        for (int s : gate.subsystems) {
            const int k = log2_if_power(seq.dims[static_cast<std::size_t>(s)]);
            for (int t = 0; t < k; ++t) {
                sg.qubits.push_back(first_qubit_[static_cast<std::size_t>(s)] + t);
            }
        }
        const int k = static_cast<int>(sg.qubits.size());
        const int n_local = 1 << (2 * k);
        const double norm = static_cast<double>(1 << k);
        const CMatrix u = adjoint ? CMatrix(gate.matrix.adjoint()) : gate.matrix;
        std::vector<CMatrix> strings;
        for (int a = 0; a < n_local; ++a) {
            strings.push_back(pauli_string(a, k));
        }
        sg.columns.resize(static_cast<std::size_t>(n_local));
        for (int a = 0; a < n_local; ++a) {
            const CMatrix image = u * strings[static_cast<std::size_t>(a)] * u.adjoint();
            for (int b = 0; b < n_local; ++b) {
                const double r = (strings[static_cast<std::size_t>(b)] * image).trace().real() / norm;
                if (std::abs(r) > 1e-14) {
                    sg.columns[static_cast<std::size_t>(a)].emplace_back(b, r);
                }
            }
        }
        gates_.push_back(std::move(sg));
    }
}

PauliCode PauliPropagator::code_of(std::span<const int> multi_index) const {
    if (multi_index.size() != first_qubit_.size()) {
        throw std::invalid_argument("multi-index length does not match the partition");
    }
    PauliCode code = 0;
    for (std::size_t m = 0; m < multi_index.size(); ++m) {
        const int k = log2_if_power(partition_.dims()[m]);
        for (int t = 0; t < k; ++t) {
            const auto digit = static_cast<PauliCode>((multi_index[m] >> (2 * (k - 1 - t))) & 3);
            code |= digit << (2 * (first_qubit_[m] + t));
        }
    }
    return code;
}

Pattern PauliPropagator::pattern_of(PauliCode code) const {
    Pattern kappa = 0;
    for (std::size_t m = 0; m < subsystem_masks_.size(); ++m) {
        if ((code & subsystem_masks_[m]) != 0) {
            kappa |= Pattern{1} << m;
        }
    }
    return kappa;
}

std::vector<PauliTerm> PauliPropagator::propagate(PauliCode code) const {
    std::vector<PauliTerm> terms{{code, 1.0}};
    std::vector<PauliTerm> next;
    for (const auto &g : gates_) {
        next.clear();
        const int k = static_cast<int>(g.qubits.size());
        PauliCode clear_mask = 0;
        for (int q : g.qubits) {
            clear_mask |= PauliCode{3} << (2 * q);
        }
        for (const auto &[c, w] : terms) {
            int a = 0;
            for (int t = 0; t < k; ++t) {
                a = (a << 2) | static_cast<int>((c >> (2 * g.qubits[static_cast<std::size_t>(t)])) & 3);
            }
            const PauliCode base = c & ~clear_mask;
            for (const auto &[b, r] : g.columns[static_cast<std::size_t>(a)]) {
                PauliCode out = base;
                for (int t = 0; t < k; ++t) {
                    out |= static_cast<PauliCode>((b >> (2 * (k - 1 - t))) & 3) << (2 * g.qubits[static_cast<std::size_t>(t)]);
                }
                next.emplace_back(out, w * r);
            }
        }
        if (next.size() > 1) {
            std::sort(next.begin(), next.end(), [](const PauliTerm &x, const PauliTerm &y) { return x.first < y.first; });
            std::size_t w = 0;
            for (std::size_t r = 0; r < next.size(); ++r) {
                if (w > 0 && next[w - 1].first == next[r].first) {
                    next[w - 1].second += next[r].second;
                } else {
                    next[w++] = next[r];
                }
            }
            next.resize(w);
            next.erase(std::remove_if(next.begin(), next.end(),
                                      [](const PauliTerm &t) { return std::abs(t.second) < 1e-15; }),
                       next.end());
        }
        terms.swap(next);
    }
    return terms;
}

} // namespace ltm
