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

#include "ltm/gates.hpp"

#include <cmath>

namespace ltm::gates {

namespace {

const cplx kI(0.0, 1.0);

CMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
    CMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

CMatrix controlled(const CMatrix &u) {
    CMatrix m = CMatrix::Identity(4, 4);
    m.block(2, 2, 2, 2) = u;
    return m;
}

} // namespace

CMatrix x() { return mat2(0, 1, 1, 0); }
CMatrix y() { return mat2(0, -kI, kI, 0); }
CMatrix z() { return mat2(1, 0, 0, -1); }
CMatrix h() { return mat2(1, 1, 1, -1) / std::sqrt(2.0); }
CMatrix s() { return mat2(1, 0, 0, kI); }

CMatrix rx(double theta) {
    return mat2(std::cos(theta / 2), kI * std::sin(theta / 2), kI * std::sin(theta / 2), std::cos(theta / 2));
}

CMatrix ry(double theta) {
    return mat2(std::cos(theta / 2), std::sin(theta / 2), -std::sin(theta / 2), std::cos(theta / 2));
}

CMatrix rz(double theta) { return mat2(std::exp(kI * (theta / 2)), 0, 0, std::exp(-kI * (theta / 2))); }

CMatrix cnot() { return controlled(x()); }
CMatrix cz() { return controlled(z()); }
CMatrix crx(double theta) { return controlled(rx(theta)); }

CMatrix swap() {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 2) = 1;
    m(2, 1) = 1;
    m(3, 3) = 1;
    return m;
}

Gate on(const char *name, CMatrix matrix, std::vector<int> subsystems) {
    return Gate{name, std::move(matrix), std::move(subsystems)};
}

std::vector<Gate> cnot_ladder(int n) {
    if (n < 2) {
        throw std::invalid_argument("a CNOT ladder needs at least two qubits");
    }
    std::vector<Gate> out;
    for (int k = 0; k + 1 < n; ++k) {
        out.push_back(on("cnot", cnot(), {k, k + 1}));
    }
    return out;
}

Channel cnot_double_cascade(int n) {
    std::vector<Gate> gates = cnot_ladder(n);
    std::vector<Gate> second = cnot_ladder(n);
    gates.insert(gates.end(), second.begin(), second.end());
    return Channel::gate_sequence(std::vector<int>(static_cast<std::size_t>(n), 2), std::move(gates));
}

Channel crx_cascade(int n, double theta) {
    if (n < 2) {
        throw std::invalid_argument("a CRX cascade needs at least two qubits");
    }
    std::vector<Gate> gates;
    for (int k = 0; k + 1 < n; ++k) {
        gates.push_back(on("crx", crx(theta), {k, k + 1}));
    }
    return Channel::gate_sequence(std::vector<int>(static_cast<std::size_t>(n), 2), std::move(gates));
}

Channel swap_circuit() { return Channel::gate_sequence({2, 2}, {on("swap", swap(), {0, 1})}); }

} // namespace ltm::gates
