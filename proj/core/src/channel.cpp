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

#include "ltm/channel.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace ltm {

namespace {

void require_square(const CMatrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument(std::string(what) + " must be a non-empty square matrix");
    }
}

bool is_power_of_two(std::size_t d) { return d >= 2 && (d & (d - 1)) == 0; }

int log2_exact(std::size_t d) {
    int n = 0;
    while ((std::size_t{1} << n) < d) {
        ++n;
    }
    return n;
}

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

} // namespace

Channel Channel::identity(std::size_t dim) {
    return unitary(CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

Channel Channel::unitary(CMatrix u) {
    require_square(u, "unitary");
    if (!ltm::is_unitary(u, 1e-10)) {
        throw std::invalid_argument("matrix is not unitary within 1e-10");
    }
    auto repr = std::make_shared<Repr>();
    repr->dim = static_cast<std::size_t>(u.rows());
    repr->map = UnitaryMap{std::move(u)};
    return Channel(std::move(repr));
}

Channel Channel::cp_map(std::vector<CMatrix> ops) {
    if (ops.empty()) {
        throw std::invalid_argument("Kraus list is empty");
    }
    const Eigen::Index d = ops.front().rows();
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto &k : ops) {
        require_square(k, "Kraus operator");
        if (k.rows() != d) {
            throw std::invalid_argument("Kraus operators have inconsistent dimensions");
        }
        sum += k.adjoint() * k;
    }
    auto repr = std::make_shared<Repr>();
    repr->dim = static_cast<std::size_t>(d);
    const bool tp = (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10;
    repr->map = KrausMap{std::move(ops), tp};
    return Channel(std::move(repr));
}

Channel Channel::kraus(std::vector<CMatrix> ops) {
    Channel ch = cp_map(std::move(ops));
    if (!std::get<KrausMap>(ch.repr().map).trace_preserving) {
        throw std::invalid_argument("Kraus operators violate sum K^dagger K = 1 beyond 1e-10");
    }
    return ch;
}

Channel Channel::mixture_with_replacement(double p, CMatrix fixed_point, Channel inner) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("replacement probability must lie in [0, 1]");
    }
    require_square(fixed_point, "fixed point");
    if (static_cast<std::size_t>(fixed_point.rows()) != inner.dim()) {
        throw std::invalid_argument("fixed point dimension does not match the inner channel");
    }
    if (!is_density_matrix(fixed_point, 1e-10)) {
        throw std::invalid_argument("fixed point is not a density matrix within 1e-10");
    }
    auto repr = std::make_shared<Repr>();
    repr->dim = inner.dim();
    repr->map = MixtureMap{p, std::move(fixed_point), std::move(inner)};
    return Channel(std::move(repr));
}

Channel Channel::tensor_single_qubit(std::vector<Channel> factors) {
    if (factors.empty()) {
        throw std::invalid_argument("tensor product needs at least one factor");
    }
    if (factors.size() > 20) {
        throw LimitExceeded("tensor product limited to 20 qubits for dense application");
    }
    TensorSingleQubitMap map;
    const std::vector<int> dims(factors.size(), 2);
    for (std::size_t q = 0; q < factors.size(); ++q) {
        if (factors[q].dim() != 2) {
            throw std::invalid_argument("tensor factor " + std::to_string(q) + " is not a single-qubit channel");
        }
        map.factor_kraus.push_back(to_kraus(factors[q], 64));
        map.actions.emplace_back(dims, std::vector<int>{static_cast<int>(q)});
    }
    map.factors = std::move(factors);
    auto repr = std::make_shared<Repr>();
    repr->dim = std::size_t{1} << map.factors.size();
    repr->map = std::move(map);
    return Channel(std::move(repr));
}

Channel Channel::composition(std::vector<Channel> stages) {
    if (stages.empty()) {
        throw std::invalid_argument("composition needs at least one stage");
    }
    const std::size_t d = stages.front().dim();
    for (const auto &s : stages) {
        if (s.dim() != d) {
            throw std::invalid_argument("composition stages have inconsistent dimensions");
        }
    }
    auto repr = std::make_shared<Repr>();
    repr->dim = d;
    repr->map = CompositionMap{std::move(stages)};
    return Channel(std::move(repr));
}

Channel Channel::gate_sequence(std::vector<int> dims, std::vector<Gate> gates) {
    const Partition partition(dims);
    GateSequenceMap map;
    for (const auto &g : gates) {
        map.actions.emplace_back(dims, g.subsystems);
        const auto k = static_cast<Eigen::Index>(map.actions.back().local_dim());
        if (g.matrix.rows() != k || g.matrix.cols() != k) {
            throw std::invalid_argument("gate '" + g.name + "' has dimension " + std::to_string(g.matrix.rows()) +
                                        " but acts on subsystems of total dimension " + std::to_string(k));
        }
        if (!ltm::is_unitary(g.matrix, 1e-10)) {
            throw std::invalid_argument("gate '" + g.name + "' is not unitary");
        }
    }
    map.dims = std::move(dims);
    map.gates = std::move(gates);
    auto repr = std::make_shared<Repr>();
    repr->dim = partition.dim();
    repr->map = std::move(map);
    return Channel(std::move(repr));
}

std::size_t Channel::dim() const { return repr_->dim; }

bool Channel::is_unitary() const {
    return std::visit(Overloaded{
                          [](const UnitaryMap &) { return true; },
                          [](const GateSequenceMap &) { return true; },
                          [](const CompositionMap &m) {
                              for (const auto &s : m.stages) {
                                  if (!s.is_unitary()) {
                                      return false;
                                  }
                              }
                              return true;
                          },
                          [](const MixtureMap &m) { return m.p == 0.0 && m.inner.is_unitary(); },
                          [](const auto &) { return false; },
                      },
                      repr_->map);
}

bool Channel::is_trace_preserving() const {
    return std::visit(Overloaded{
                          [](const KrausMap &m) { return m.trace_preserving; },
                          [](const MixtureMap &m) { return m.inner.is_trace_preserving(); },
                          [](const TensorSingleQubitMap &m) {
                              for (const auto &f : m.factors) {
                                  if (!f.is_trace_preserving()) {
                                      return false;
                                  }
                              }
                              return true;
                          },
                          [](const CompositionMap &m) {
                              for (const auto &s : m.stages) {
                                  if (!s.is_trace_preserving()) {
                                      return false;
                                  }
                              }
                              return true;
                          },
                          [](const auto &) { return true; },
                      },
                      repr_->map);
}

std::string Channel::kind_name() const {
    return std::visit(Overloaded{
                          [](const UnitaryMap &) { return std::string("unitary"); },
                          [](const KrausMap &) { return std::string("kraus"); },
                          [](const MixtureMap &) { return std::string("mixture-with-replacement"); },
                          [](const TensorSingleQubitMap &) { return std::string("tensor-single-qubit"); },
                          [](const CompositionMap &) { return std::string("composition"); },
                          [](const GateSequenceMap &) { return std::string("gate-sequence"); },
                      },
                      repr_->map);
}

namespace {

void check_operand(const Channel &ch, const CMatrix &a) {
    if (static_cast<std::size_t>(a.rows()) != ch.dim() || static_cast<std::size_t>(a.cols()) != ch.dim()) {
        throw std::invalid_argument("operand is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " but channel dimension is " + std::to_string(ch.dim()));
    }
}

CMatrix apply_local_kraus(const CMatrix &a, const std::vector<CMatrix> &ops, const SubsystemAction &act,
                          bool adjoint) {
    CMatrix out = CMatrix::Zero(a.rows(), a.cols());
    for (const auto &k : ops) {
        out += act.conjugate(a, adjoint ? CMatrix(k.adjoint()) : k);
    }
    return out;
}

} // namespace

CMatrix Channel::apply(const CMatrix &rho) const {
    check_operand(*this, rho);
    return std::visit(Overloaded{
                          [&](const UnitaryMap &m) -> CMatrix { return m.u * rho * m.u.adjoint(); },
                          [&](const KrausMap &m) -> CMatrix {
                              CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
                              for (const auto &k : m.ops) {
                                  out += k * rho * k.adjoint();
                              }
                              return out;
                          },
                          [&](const MixtureMap &m) -> CMatrix {
                              return (1.0 - m.p) * m.inner.apply(rho) + (m.p * rho.trace()) * m.fixed_point;
                          },
                          [&](const TensorSingleQubitMap &m) -> CMatrix {
                              CMatrix out = rho;
                              for (std::size_t q = 0; q < m.factors.size(); ++q) {
                                  out = apply_local_kraus(out, m.factor_kraus[q], m.actions[q], false);
                              }
                              return out;
                          },
                          [&](const CompositionMap &m) -> CMatrix {
                              CMatrix out = rho;
                              for (const auto &s : m.stages) {
                                  out = s.apply(out);
                              }
                              return out;
                          },
                          [&](const GateSequenceMap &m) -> CMatrix {
                              CMatrix out = rho;
                              for (std::size_t g = 0; g < m.gates.size(); ++g) {
                                  out = m.actions[g].conjugate(out, m.gates[g].matrix);
                              }
                              return out;
                          },
                      },
                      repr_->map);
}

CMatrix Channel::apply_adjoint(const CMatrix &a) const {
    check_operand(*this, a);
    return std::visit(Overloaded{
                          [&](const UnitaryMap &m) -> CMatrix { return m.u.adjoint() * a * m.u; },
                          [&](const KrausMap &m) -> CMatrix {
                              CMatrix out = CMatrix::Zero(a.rows(), a.cols());
                              for (const auto &k : m.ops) {
                                  out += k.adjoint() * a * k;
                              }
                              return out;
                          },
                          [&](const MixtureMap &m) -> CMatrix {
                              const cplx overlap = (m.fixed_point * a).trace();
                              CMatrix out = (1.0 - m.p) * m.inner.apply_adjoint(a);
                              out.diagonal().array() += m.p * overlap;
                              return out;
                          },
                          [&](const TensorSingleQubitMap &m) -> CMatrix {
                              CMatrix out = a;
                              for (std::size_t q = 0; q < m.factors.size(); ++q) {
                                  out = apply_local_kraus(out, m.factor_kraus[q], m.actions[q], true);
                              }
                              return out;
                          },
                          [&](const CompositionMap &m) -> CMatrix {
                              CMatrix out = a;
                              for (auto it = m.stages.rbegin(); it != m.stages.rend(); ++it) {
                                  out = it->apply_adjoint(out);
                              }
                              return out;
                          },
                          [&](const GateSequenceMap &m) -> CMatrix {
                              CMatrix out = a;
                              for (std::size_t g = m.gates.size(); g-- > 0;) {
                                  out = m.actions[g].conjugate(out, m.gates[g].matrix.adjoint());
                              }
                              return out;
                          },
                      },
                      repr_->map);
}

DenseOperator apply(const Channel &ch, const DenseOperator &rho) {
    return DenseOperator(ch.apply(rho.matrix()), rho.partition());
}

DenseOperator apply_adjoint(const Channel &ch, const DenseOperator &a) {
    return DenseOperator(ch.apply_adjoint(a.matrix()), a.partition());
}

namespace {

std::vector<CMatrix> kraus_product(const std::vector<CMatrix> &later, const std::vector<CMatrix> &earlier,
                                   std::size_t max_ops) {
    if (later.size() * earlier.size() > max_ops) {
        throw LimitExceeded("Kraus flattening would produce " + std::to_string(later.size() * earlier.size()) +
                            " operators (limit " + std::to_string(max_ops) + ")");
    }
    std::vector<CMatrix> out;
    for (const auto &b : later) {
        for (const auto &a : earlier) {
            out.push_back(b * a);
        }
    }
    return out;
}

} // namespace

std::vector<CMatrix> to_kraus(const Channel &ch, std::size_t max_ops) {
    return std::visit(
        Overloaded{
            [&](const UnitaryMap &m) -> std::vector<CMatrix> { return {m.u}; },
            [&](const KrausMap &m) -> std::vector<CMatrix> {
                if (m.ops.size() > max_ops) {
                    throw LimitExceeded("Kraus list exceeds limit");
                }
                return m.ops;
            },
            [&](const MixtureMap &m) -> std::vector<CMatrix> {
                std::vector<CMatrix> out;
                if (m.p < 1.0) {
                    for (const auto &k : to_kraus(m.inner, max_ops)) {
                        out.push_back(std::sqrt(1.0 - m.p) * k);
                    }
                }
                if (m.p > 0.0) {
                    Eigen::SelfAdjointEigenSolver<CMatrix> es(m.fixed_point);
                    const auto d = static_cast<Eigen::Index>(ch.dim());
                    for (Eigen::Index e = 0; e < d; ++e) {
                        const double lam = es.eigenvalues()[e];
                        if (lam <= 1e-15) {
                            continue;
                        }
                        for (Eigen::Index i = 0; i < d; ++i) {
                            CMatrix k = CMatrix::Zero(d, d);
                            k.col(i) = std::sqrt(m.p * lam) * es.eigenvectors().col(e);
                            out.push_back(std::move(k));
                        }
                    }
                }
                if (out.size() > max_ops) {
                    throw LimitExceeded("Kraus flattening of mixture exceeds limit");
                }
                return out;
            },
            [&](const TensorSingleQubitMap &m) -> std::vector<CMatrix> {
                std::vector<CMatrix> out{CMatrix::Ones(1, 1)};
                for (const auto &fk : m.factor_kraus) {
                    if (out.size() * fk.size() > max_ops) {
                        throw LimitExceeded("Kraus flattening of tensor product exceeds limit");
                    }
                    std::vector<CMatrix> next;
                    for (const auto &a : out) {
                        for (const auto &b : fk) {
                            next.push_back(kron(a, b));
                        }
                    }
                    out = std::move(next);
                }
                return out;
            },
            [&](const CompositionMap &m) -> std::vector<CMatrix> {
                std::vector<CMatrix> out = to_kraus(m.stages.front(), max_ops);
                for (std::size_t s = 1; s < m.stages.size(); ++s) {
                    out = kraus_product(to_kraus(m.stages[s], max_ops), out, max_ops);
                }
                return out;
            },
            [&](const GateSequenceMap &m) -> std::vector<CMatrix> {
                const auto d = static_cast<Eigen::Index>(ch.dim());
                CMatrix u = CMatrix::Identity(d, d);
                for (std::size_t g = 0; g < m.gates.size(); ++g) {
                    m.actions[g].left(u, m.gates[g].matrix);
                }
                return {u};
            },
        },
        ch.repr().map);
}

std::optional<CMatrix> as_unitary(const Channel &ch) {
    if (!ch.is_unitary()) {
        return std::nullopt;
    }
    const auto ops = to_kraus(ch, 1);
    return ops.front();
}

CMatrix choi(const Channel &ch) {
    const auto d = static_cast<Eigen::Index>(ch.dim());
    CMatrix j = CMatrix::Zero(d * d, d * d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            CMatrix e = CMatrix::Zero(d, d);
            e(r, c) = 1.0;
            j.block(r * d, c * d, d, d) = ch.apply(e);
        }
    }
    return j;
}

RMatrix pauli_transfer_matrix(const Channel &ch, bool adjoint) {
    if (!is_power_of_two(ch.dim())) {
        throw std::invalid_argument("Pauli transfer matrix needs a qubit channel");
    }
    const Partition partition = Partition::qubits(log2_exact(ch.dim()));
    const LocalBasis basis = LocalBasis::standard(partition);
    const std::size_t n_ops = partition.operator_dim();
    RMatrix r(static_cast<Eigen::Index>(n_ops), static_cast<Eigen::Index>(n_ops));
    for (std::size_t j = 0; j < n_ops; ++j) {
        const CMatrix b = basis.element(partition.unflatten(j));
        const CMatrix out = adjoint ? ch.apply_adjoint(b) : ch.apply(b);
        const auto c = basis.coefficients(out);
        for (std::size_t i = 0; i < n_ops; ++i) {
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c[i].real();
        }
    }
    return r;
}

namespace {

CMatrix su2_from_rotation(const Eigen::Matrix3d &rot) {
    const Eigen::AngleAxisd aa(rot);
    const double half = 0.5 * aa.angle();
    const Eigen::Vector3d n = aa.axis();
    CMatrix u = std::cos(half) * pauli(0);
    for (int k = 0; k < 3; ++k) {
        u += cplx(0.0, -std::sin(half) * n[k]) * pauli(k + 1);
    }
    return u;
}

} // namespace

SingleQubitNormalForm normal_form(const Channel &ch) {
    if (ch.dim() != 2) {
        throw std::invalid_argument("normal form is defined for single-qubit channels only");
    }
    const RMatrix r = pauli_transfer_matrix(ch);
    if (std::abs(r(0, 0) - 1.0) > 1e-10 || r.block(0, 1, 1, 3).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("normal form requires a trace-preserving channel");
    }
    const Eigen::Matrix3d lam_block = r.block(1, 1, 3, 3);
    const Eigen::Vector3d t_raw = r.block(1, 0, 3, 1);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(lam_block, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d ou = svd.matrixU();
    Eigen::Matrix3d ov = svd.matrixV();
    Eigen::Vector3d s = svd.singularValues();
    if (ou.determinant() < 0) {
        ou.col(2) *= -1.0;
        s[2] *= -1.0;
    }
    if (ov.determinant() < 0) {
        ov.col(2) *= -1.0;
        s[2] *= -1.0;
    }
    SingleQubitNormalForm nf;
    nf.lambda = s;
    nf.t = ou.transpose() * t_raw;
    nf.pre_u = su2_from_rotation(ou);
    nf.post_v = su2_from_rotation(ov);

    const CMatrix pu = nf.pre_u;
    const CMatrix pv = nf.post_v;
    const Channel conjugated = Channel::composition(
        {Channel::unitary(pv), ch, Channel::unitary(pu.adjoint())});
    const RMatrix rc = pauli_transfer_matrix(conjugated);
    RMatrix expected = RMatrix::Zero(4, 4);
    expected(0, 0) = 1.0;
    for (int k = 0; k < 3; ++k) {
        expected(k + 1, 0) = nf.t[k];
        expected(k + 1, k + 1) = nf.lambda[k];
    }
    nf.reconstruction_error = (rc - expected).cwiseAbs().maxCoeff();
    if (!(nf.reconstruction_error <= 1e-8)) {
        std::ostringstream msg;
        msg << "normal form reconstruction error " << nf.reconstruction_error << " exceeds 1e-8; singular values "
            << s.transpose();
        throw NumericalFailure(msg.str(), nf.reconstruction_error);
    }
    return nf;
}

Channel depolarizing(double p) {
    if (!(p >= 0.0 && p <= 4.0 / 3.0)) {
        throw std::invalid_argument("depolarizing parameter must lie in [0, 4/3]");
    }
    return Channel::kraus({std::sqrt(1.0 - 0.75 * p) * pauli(0), std::sqrt(p / 4.0) * pauli(1),
                           std::sqrt(p / 4.0) * pauli(2), std::sqrt(p / 4.0) * pauli(3)});
}

Channel amplitude_damping(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("damping rate must lie in [0, 1]");
    }
    CMatrix k0 = CMatrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - gamma);
    CMatrix k1 = CMatrix::Zero(2, 2);
    k1(0, 1) = std::sqrt(gamma);
    return Channel::kraus({k0, k1});
}

Channel dephasing(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("dephasing probability must lie in [0, 1]");
    }
    return Channel::kraus({std::sqrt(1.0 - p) * pauli(0), std::sqrt(p) * pauli(3)});
}

Channel replacement(double p, const CMatrix &fixed_point) {
    return Channel::mixture_with_replacement(p, fixed_point, Channel::identity(static_cast<std::size_t>(fixed_point.rows())));
}

} // namespace ltm
