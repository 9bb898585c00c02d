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

#ifndef LTM_LOCAL_OPS_HPP
#define LTM_LOCAL_OPS_HPP

#include <span>
#include <vector>

#include "ltm/common.hpp"

namespace ltm {

/// Index bookkeeping for acting with a small operator on a subset of
/// subsystems of a dense operator. The operator's kron order follows the
/// order of `subsystems`.
class SubsystemAction {
  public:
    SubsystemAction(const std::vector<int> &dims, std::vector<int> subsystems);

    std::size_t local_dim() const { return offsets_.size(); }
    std::size_t full_dim() const { return full_dim_; }
    const std::vector<int> &subsystems() const { return subsystems_; }

    /// a <- G a (G embedded on the subsystems).
    void left(CMatrix &a, const CMatrix &g) const;
    /// a <- a G^dagger.
    void right_adjoint(CMatrix &a, const CMatrix &g) const;
    /// G a G^dagger.
    CMatrix conjugate(const CMatrix &a, const CMatrix &g) const;
    /// Dense embedding G (x) identity.
    CMatrix embed(const CMatrix &g) const;

  private:
    std::vector<int> subsystems_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> bases_;
    std::size_t full_dim_ = 1;
};

CMatrix kron(const CMatrix &a, const CMatrix &b);
CMatrix kron_all(std::span<const CMatrix> factors);

bool is_unitary(const CMatrix &u, double tol = 1e-10);
bool is_hermitian(const CMatrix &a, double tol = 1e-10);
/// PSD (min eigenvalue >= -tol), Hermitian and unit trace within tol.
bool is_density_matrix(const CMatrix &rho, double tol = 1e-10);

double hs_norm_sq(const CMatrix &a);
/// Largest absolute eigenvalue of a Hermitian matrix.
double operator_norm_hermitian(const CMatrix &a);
double trace_norm_hermitian(const CMatrix &a);
double min_eigenvalue_hermitian(const CMatrix &a);

/// exp(i * phi * G) for Hermitian G.
CMatrix exp_i_hermitian(const CMatrix &g, double phi);

} // namespace ltm

#endif
