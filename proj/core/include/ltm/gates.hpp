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

#ifndef LTM_GATES_HPP
#define LTM_GATES_HPP

#include <vector>

#include "ltm/channel.hpp"

namespace ltm::gates {

CMatrix x();
CMatrix y();
CMatrix z();
CMatrix h();
CMatrix s();
/// RX(theta) = exp(i theta X / 2).
CMatrix rx(double theta);
CMatrix ry(double theta);
CMatrix rz(double theta);
/// Control is the first (most significant) factor.
CMatrix cnot();
CMatrix cz();
CMatrix swap();
/// |0><0| (x) 1 + |1><1| (x) RX(theta).
CMatrix crx(double theta);

Gate on(const char *name, CMatrix matrix, std::vector<int> subsystems);

/// CNOT(k, k+1) for k = 0..n-2.
std::vector<Gate> cnot_ladder(int n);
/// Two consecutive forward CNOT ladders.
Channel cnot_double_cascade(int n);
/// CRX(theta) with control k and target k+1, for k = 0..n-2.
Channel crx_cascade(int n, double theta);
/// SWAP of the two qubits of a two-qubit register.
Channel swap_circuit();

} // namespace ltm::gates

#endif
