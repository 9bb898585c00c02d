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

#include "ltm/local_ops.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Eigenvalues>

namespace ltm {

SubsystemAction::SubsystemAction(const std::vector<int> &dims, std::vector<int> subsystems)
    : subsystems_(std::move(subsystems)) {
    const int m_count = static_cast<int>(dims.size());
    if (subsystems_.empty()) {
        throw std::invalid_argument("operator must act on at least one subsystem");
    }
    std::vector<bool> used(dims.size(), false);
    for (int s : subsystems_) {
        if (s < 0 || s >= m_count) {
            throw std::invalid_argument("subsystem index " + std::to_string(s) + " out of range");
        }
        if (used[static_cast<std::size_t>(s)]) {
            throw std::invalid_argument("repeated subsystem index " + std::to_string(s));
        }
        used[static_cast<std::size_t>(s)] = true;
    }
    std::vector<std::size_t> stride(dims.size(), 1);
    for (int m = m_count - 1; m > 0; --m) {
        stride[static_cast<std::size_t>(m - 1)] = stride[static_cast<std::size_t>(m)] * static_cast<std::size_t>(dims[static_cast<std::size_t>(m)]);
    }
    for (int dm : dims) {
        full_dim_ *= static_cast<std::size_t>(dm);
    }
    offsets_.assign(1, 0);
    for (int s : subsystems_) {
        std::vector<std::size_t> next;
        const auto ds = static_cast<std::size_t>(dims[static_cast<std::size_t>(s)]);
        for (std::size_t o : offsets_) {
            for (std::size_t v = 0; v < ds; ++v) {
                next.push_back(o + v * stride[static_cast<std::size_t>(s)]);
            }
        }
        offsets_ = std::move(next);
    }
    bases_.assign(1, 0);
    for (int m = 0; m < m_count; ++m) {
        if (used[static_cast<std::size_t>(m)]) {
            continue;
        }
        std::vector<std::size_t> next;
        for (std::size_t b : bases_) {
            for (std::size_t v = 0; v < static_cast<std::size_t>(dims[static_cast<std::size_t>(m)]); ++v) {
                next.push_back(b + v * stride[static_cast<std::size_t>(m)]);
            }
        }
        bases_ = std::move(next);
    }
}

void SubsystemAction::left(CMatrix &a, const CMatrix &g) const {
    const auto k = static_cast<Eigen::Index>(offsets_.size());
    if (g.rows() != k || g.cols() != k) {
        throw std::invalid_argument("local operator dimension mismatch");
    }
    if (static_cast<std::size_t>(a.rows()) != full_dim_) {
        throw std::invalid_argument("operator dimension mismatch");
    }
    CMatrix gather(k, a.cols());
    for (std::size_t b : bases_) {
        for (Eigen::Index t = 0; t < k; ++t) {
            gather.row(t) = a.row(static_cast<Eigen::Index>(b + offsets_[static_cast<std::size_t>(t)]));
        }
        const CMatrix out = g * gather;
        for (Eigen::Index t = 0; t < k; ++t) {
            a.row(static_cast<Eigen::Index>(b + offsets_[static_cast<std::size_t>(t)])) = out.row(t);
        }
    }
}

void SubsystemAction::right_adjoint(CMatrix &a, const CMatrix &g) const {
    const auto k = static_cast<Eigen::Index>(offsets_.size());
    if (g.rows() != k || g.cols() != k) {
        throw std::invalid_argument("local operator dimension mismatch");
    }
    if (static_cast<std::size_t>(a.cols()) != full_dim_) {
        throw std::invalid_argument("operator dimension mismatch");
    }
    CMatrix gather(a.rows(), k);
    const CMatrix gd = g.adjoint();
    for (std::size_t b : bases_) {
        for (Eigen::Index t = 0; t < k; ++t) {
            gather.col(t) = a.col(static_cast<Eigen::Index>(b + offsets_[static_cast<std::size_t>(t)]));
        }
        const CMatrix out = gather * gd;
        for (Eigen::Index t = 0; t < k; ++t) {
            a.col(static_cast<Eigen::Index>(b + offsets_[static_cast<std::size_t>(t)])) = out.col(t);
        }
    }
}

CMatrix SubsystemAction::conjugate(const CMatrix &a, const CMatrix &g) const {
    CMatrix out = a;
    left(out, g);
    right_adjoint(out, g);
    return out;
}

CMatrix SubsystemAction::embed(const CMatrix &g) const {
    CMatrix out = CMatrix::Identity(static_cast<Eigen::Index>(full_dim_), static_cast<Eigen::Index>(full_dim_));
    left(out, g);
    return out;
}

CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        }
    }
    return out;
}

CMatrix kron_all(std::span<const CMatrix> factors) {
    CMatrix out = CMatrix::Ones(1, 1);
    for (const auto &f : factors) {
        out = kron(out, f);
    }
    return out;
}

bool is_unitary(const CMatrix &u, double tol) {
    if (u.rows() != u.cols()) {
        return false;
    }
    return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const CMatrix &a, double tol) {
    if (a.rows() != a.cols()) {
        return false;
    }
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue_hermitian(const CMatrix &a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_density_matrix(const CMatrix &rho, double tol) {
    if (!is_hermitian(rho, tol)) {
        return false;
    }
    if (std::abs(rho.trace() - cplx(1.0, 0.0)) > tol) {
        return false;
    }
    return min_eigenvalue_hermitian(rho) >= -tol;
}

double hs_norm_sq(const CMatrix &a) { return a.squaredNorm(); }

double operator_norm_hermitian(const CMatrix &a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double trace_norm_hermitian(const CMatrix &a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

CMatrix exp_i_hermitian(const CMatrix &g, double phi) {
    if (!is_hermitian(g, 1e-10)) {
        throw std::invalid_argument("generator must be Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (g + g.adjoint()));
    const CVector phases = (es.eigenvalues().cast<cplx>() * cplx(0.0, phi)).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace ltm
