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

#include "ltm/partition.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace ltm {

namespace {

using RowMajorC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr int kMaxSubsystems = 24;

} // namespace

Partition::Partition(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
        throw std::invalid_argument("partition needs at least one subsystem");
    }
    if (dims_.size() > kMaxSubsystems) {
        throw std::invalid_argument("partition has more than " + std::to_string(kMaxSubsystems) +
                                    " subsystems");
    }
    dim_ = 1;
    for (int dm : dims_) {
        if (dm < 2) {
            throw std::invalid_argument("subsystem dimension must be >= 2, got " + std::to_string(dm));
        }
        dim_ *= static_cast<std::size_t>(dm);
    }
    const std::size_t m_count = dims_.size();
    pattern_dims_.resize(static_cast<Eigen::Index>(num_patterns()));
    for (std::size_t k = 0; k < num_patterns(); ++k) {
        double v = 1.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            if ((k >> m) & 1U) {
                v *= static_cast<double>(dims_[m]) * dims_[m] - 1.0;
            }
        }
        pattern_dims_[static_cast<Eigen::Index>(k)] = v;
    }
    strides_.assign(m_count, 1);
    for (std::size_t m = m_count - 1; m > 0; --m) {
        strides_[m - 1] = strides_[m] * static_cast<std::size_t>(dims_[m]) * dims_[m];
    }
}

Partition Partition::qubits(int n) { return Partition(std::vector<int>(static_cast<std::size_t>(n), 2)); }

double Partition::pattern_dim(Pattern kappa) const {
    check_pattern(kappa);
    return pattern_dims_[kappa];
}

std::size_t Partition::pattern_count(Pattern kappa) const {
    check_pattern(kappa);
    std::size_t v = 1;
    for (std::size_t m = 0; m < dims_.size(); ++m) {
        if ((kappa >> m) & 1U) {
            v *= static_cast<std::size_t>(dims_[m]) * dims_[m] - 1;
        }
    }
    return v;
}

Pattern Partition::pattern_of_flat(std::size_t flat) const {
    Pattern kappa = 0;
    for (std::size_t m = 0; m < dims_.size(); ++m) {
        if ((flat / strides_[m]) % (static_cast<std::size_t>(dims_[m]) * dims_[m]) != 0) {
            kappa |= Pattern{1} << m;
        }
    }
    return kappa;
}

Pattern Partition::pattern_of(std::span<const int> multi_index) const {
    if (multi_index.size() != dims_.size()) {
        throw std::invalid_argument("multi-index length does not match the partition");
    }
    Pattern kappa = 0;
    for (std::size_t m = 0; m < dims_.size(); ++m) {
        if (multi_index[m] != 0) {
            kappa |= Pattern{1} << m;
        }
    }
    return kappa;
}

std::vector<int> Partition::unflatten(std::size_t flat) const {
    std::vector<int> out(dims_.size());
    for (std::size_t m = 0; m < dims_.size(); ++m) {
        out[m] = static_cast<int>((flat / strides_[m]) % (static_cast<std::size_t>(dims_[m]) * dims_[m]));
    }
    return out;
}

std::size_t Partition::flatten(std::span<const int> multi_index) const {
    if (multi_index.size() != dims_.size()) {
        throw std::invalid_argument("multi-index length does not match the partition");
    }
    std::size_t flat = 0;
    for (std::size_t m = 0; m < dims_.size(); ++m) {
        if (multi_index[m] < 0 || multi_index[m] >= dims_[m] * dims_[m]) {
            throw std::invalid_argument("multi-index entry out of range");
        }
        flat += static_cast<std::size_t>(multi_index[m]) * strides_[m];
    }
    return flat;
}

Pattern Partition::pattern_from_bits(std::span<const int> bits) const {
    if (bits.size() != dims_.size()) {
        throw std::invalid_argument("pattern has length " + std::to_string(bits.size()) + " but partition has " +
                                    std::to_string(dims_.size()) + " subsystems");
    }
    Pattern kappa = 0;
    for (std::size_t m = 0; m < bits.size(); ++m) {
        if (bits[m] != 0 && bits[m] != 1) {
            throw std::invalid_argument("pattern entries must be 0 or 1");
        }
        kappa |= static_cast<Pattern>(bits[m]) << m;
    }
    return kappa;
}

void Partition::check_pattern(Pattern kappa) const {
    if (kappa >= num_patterns()) {
        throw std::invalid_argument("pattern " + std::to_string(kappa) + " out of range for " +
                                    std::to_string(dims_.size()) + " subsystems");
    }
}

// ---------------------------------------------------------------------------

CMatrix pauli(int index) {
    CMatrix p(2, 2);
    const cplx i(0.0, 1.0);
    switch (index) {
    case 0:
        p << 1.0, 0.0, 0.0, 1.0;
        break;
    case 1:
        p << 0.0, 1.0, 1.0, 0.0;
        break;
    case 2:
        p << 0.0, -i, i, 0.0;
        break;
    case 3:
        p << 1.0, 0.0, 0.0, -1.0;
        break;
    default:
        throw std::invalid_argument("pauli index must be in 0..3");
    }
    return p;
}

const std::vector<CMatrix> &normalized_paulis() {
    static const std::vector<CMatrix> basis = [] {
        std::vector<CMatrix> out;
        for (int k = 0; k < 4; ++k) {
            out.push_back(pauli(k) / std::sqrt(2.0));
        }
        return out;
    }();
    return basis;
}

std::vector<CMatrix> gell_mann_basis(int d) {
    if (d < 2) {
        throw std::invalid_argument("Gell-Mann basis needs d >= 2");
    }
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(d) * d);
    out.push_back(CMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
    const double s = 1.0 / std::sqrt(2.0);
    const cplx i(0.0, 1.0);
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            CMatrix sym = CMatrix::Zero(d, d);
            sym(a, b) = s;
            sym(b, a) = s;
            out.push_back(sym);
            CMatrix anti = CMatrix::Zero(d, d);
            anti(a, b) = -i * s;
            anti(b, a) = i * s;
            out.push_back(anti);
        }
    }
    for (int l = 1; l < d; ++l) {
        CMatrix diag = CMatrix::Zero(d, d);
        const double c = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        for (int a = 0; a < l; ++a) {
            diag(a, a) = c;
        }
        diag(l, l) = -c * l;
        out.push_back(diag);
    }
    return out;
}

LocalBasis::LocalBasis(Partition partition, std::vector<std::vector<CMatrix>> local)
    : partition_(std::move(partition)), local_(std::move(local)) {
    build_transforms();
}

LocalBasis LocalBasis::standard(const Partition &partition) {
    std::vector<std::vector<CMatrix>> local;
    for (int dm : partition.dims()) {
        local.push_back(dm == 2 ? normalized_paulis() : gell_mann_basis(dm));
    }
    return LocalBasis(partition, std::move(local));
}

LocalBasis LocalBasis::rotated(std::span<const CMatrix> unitaries) const {
    if (unitaries.size() != local_.size()) {
        throw std::invalid_argument("need one rotation per subsystem");
    }
    std::vector<std::vector<CMatrix>> local = local_;
    for (std::size_t m = 0; m < local.size(); ++m) {
        const CMatrix &v = unitaries[m];
        const int dm = partition_.dims()[m];
        if (v.rows() != dm || v.cols() != dm) {
            throw std::invalid_argument("rotation has wrong dimension for subsystem " + std::to_string(m));
        }
        if ((v.adjoint() * v - CMatrix::Identity(dm, dm)).cwiseAbs().maxCoeff() > 1e-10) {
            throw std::invalid_argument("rotation is not unitary");
        }
        for (auto &b : local[m]) {
            b = v * b * v.adjoint();
        }
    }
    return LocalBasis(partition_, std::move(local));
}

void LocalBasis::build_transforms() {
    transform_.clear();
    for (std::size_t m = 0; m < local_.size(); ++m) {
        const int dm = partition_.dims()[m];
        CMatrix g(dm * dm, dm * dm);
        for (int k = 0; k < dm * dm; ++k) {
            for (int i = 0; i < dm; ++i) {
                for (int j = 0; j < dm; ++j) {
                    g(k, i * dm + j) = std::conj(local_[m][static_cast<std::size_t>(k)](i, j));
                }
            }
        }
        transform_.push_back(std::move(g));
    }
}

CMatrix LocalBasis::element(std::span<const int> multi_index) const {
    const auto &dims = partition_.dims();
    if (multi_index.size() != dims.size()) {
        throw std::invalid_argument("multi-index length does not match the partition");
    }
    CMatrix out = CMatrix::Ones(1, 1);
    for (std::size_t m = 0; m < dims.size(); ++m) {
        if (multi_index[m] < 0 || multi_index[m] >= dims[m] * dims[m]) {
            throw std::invalid_argument("multi-index entry out of range");
        }
        const CMatrix &b = local_[m][static_cast<std::size_t>(multi_index[m])];
        CMatrix next(out.rows() * b.rows(), out.cols() * b.cols());
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            for (Eigen::Index c = 0; c < out.cols(); ++c) {
                next.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = out(r, c) * b;
            }
        }
        out = std::move(next);
    }
    return out;
}

namespace {

// Offsets such that the interleaved index of (i, j) is row_part[i] + col_part[j].
void interleave_offsets(const std::vector<int> &dims, std::vector<std::size_t> &row_part,
                        std::vector<std::size_t> &col_part) {
    const std::size_t m_count = dims.size();
    std::vector<std::size_t> stride(m_count, 1);
    for (std::size_t m = m_count - 1; m > 0; --m) {
        stride[m - 1] = stride[m] * static_cast<std::size_t>(dims[m]) * dims[m];
    }
    std::size_t d = 1;
    for (int dm : dims) {
        d *= static_cast<std::size_t>(dm);
    }
    row_part.assign(d, 0);
    col_part.assign(d, 0);
    for (std::size_t x = 0; x < d; ++x) {
        std::size_t rem = x;
        std::size_t r = 0;
        std::size_t c = 0;
        for (std::size_t m = m_count; m-- > 0;) {
            const auto dm = static_cast<std::size_t>(dims[m]);
            const std::size_t digit = rem % dm;
            rem /= dm;
            r += digit * dm * stride[m];
            c += digit * stride[m];
        }
        row_part[x] = r;
        col_part[x] = c;
    }
}

void mode_products(std::vector<cplx> &buf, const std::vector<int> &dims, const std::vector<CMatrix> &mats) {
    const std::size_t total = buf.size();
    std::vector<cplx> scratch(total);
    std::size_t left = 1;
    for (std::size_t m = 0; m < dims.size(); ++m) {
        const auto mid = static_cast<std::size_t>(dims[m]) * dims[m];
        const std::size_t right = total / (left * mid);
        for (std::size_t l = 0; l < left; ++l) {
            Eigen::Map<RowMajorC> in(buf.data() + l * mid * right, static_cast<Eigen::Index>(mid),
                                     static_cast<Eigen::Index>(right));
            Eigen::Map<RowMajorC> out(scratch.data() + l * mid * right, static_cast<Eigen::Index>(mid),
                                      static_cast<Eigen::Index>(right));
            out.noalias() = mats[m] * in;
        }
        buf.swap(scratch);
        left *= mid;
    }
}

} // namespace

std::vector<cplx> LocalBasis::coefficients(const CMatrix &a) const {
    const std::size_t d = partition_.dim();
    if (static_cast<std::size_t>(a.rows()) != d || static_cast<std::size_t>(a.cols()) != d) {
        throw std::invalid_argument("operator dimension " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " does not match partition dimension " + std::to_string(d));
    }
    std::vector<std::size_t> row_part;
    std::vector<std::size_t> col_part;
    interleave_offsets(partition_.dims(), row_part, col_part);
    std::vector<cplx> buf(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            buf[row_part[i] + col_part[j]] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    mode_products(buf, partition_.dims(), transform_);
    return buf;
}

CMatrix LocalBasis::synthesize(std::span<const cplx> c) const {
    const std::size_t d = partition_.dim();
    if (c.size() != d * d) {
        throw std::invalid_argument("coefficient vector has wrong length");
    }
    std::vector<CMatrix> inverse;
    for (const auto &g : transform_) {
        inverse.push_back(g.adjoint());
    }
    std::vector<cplx> buf(c.begin(), c.end());
    mode_products(buf, partition_.dims(), inverse);
    std::vector<std::size_t> row_part;
    std::vector<std::size_t> col_part;
    interleave_offsets(partition_.dims(), row_part, col_part);
    CMatrix out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[row_part[i] + col_part[j]];
        }
    }
    return out;
}

std::vector<LocalBasisElement> enumerate_basis(const Partition &partition, Pattern kappa) {
    partition.check_pattern(kappa);
    const auto &dims = partition.dims();
    std::vector<LocalBasisElement> out;
    out.reserve(partition.pattern_count(kappa));
    std::vector<int> idx(dims.size(), 0);
    for (std::size_t m = 0; m < dims.size(); ++m) {
        idx[m] = ((kappa >> m) & 1U) ? 1 : 0;
    }
    while (true) {
        out.push_back({idx, kappa});
        // Odometer over the active subsystems, last subsystem fastest.
        std::size_t m = dims.size();
        while (m-- > 0) {
            if (!((kappa >> m) & 1U)) {
                continue;
            }
            if (++idx[m] < dims[m] * dims[m]) {
                break;
            }
            idx[m] = 1;
        }
        if (m == static_cast<std::size_t>(-1)) {
            break;
        }
    }
    return out;
}

std::vector<LocalBasisElement> enumerate_basis(const Partition &partition, std::span<const int> kappa_bits) {
    return enumerate_basis(partition, partition.pattern_from_bits(kappa_bits));
}

DenseOperator::DenseOperator(CMatrix matrix, Partition partition)
    : matrix_(std::move(matrix)), partition_(std::move(partition)) {
    const auto d = static_cast<Eigen::Index>(partition_.dim());
    if (matrix_.rows() != d || matrix_.cols() != d) {
        throw std::invalid_argument("operator shape does not match partition dimension");
    }
}

LocalityVector::LocalityVector(Partition partition, RVector weights)
    : partition_(std::move(partition)), weights_(std::move(weights)) {
    if (static_cast<std::size_t>(weights_.size()) != partition_.num_patterns()) {
        throw std::invalid_argument("locality vector length must be 2^M");
    }
    for (Eigen::Index k = 0; k < weights_.size(); ++k) {
        if (!(weights_[k] >= 0.0)) {
            if (weights_[k] > -1e-12) {
                weights_[k] = 0.0;
            } else {
                throw std::invalid_argument("locality weights must be non-negative");
            }
        }
    }
}

LocalityVector LocalityVector::unit(const Partition &partition, Pattern kappa, double mass) {
    partition.check_pattern(kappa);
    RVector w = RVector::Zero(static_cast<Eigen::Index>(partition.num_patterns()));
    w[kappa] = mass;
    return LocalityVector(partition, std::move(w));
}

LocalityVector LocalityVector::restricted(std::span<const Pattern> keep) const {
    RVector w = RVector::Zero(weights_.size());
    for (Pattern k : keep) {
        partition_.check_pattern(k);
        w[k] = weights_[k];
    }
    return LocalityVector(partition_, std::move(w));
}

LocalityVector LocalityVector::without_identity() const {
    RVector w = weights_;
    w[0] = 0.0;
    return LocalityVector(partition_, std::move(w));
}

LocalityVector locality_vector(const CMatrix &a, const LocalBasis &basis) {
    const Partition &partition = basis.partition();
    const std::vector<cplx> c = basis.coefficients(a);
    RVector w = RVector::Zero(static_cast<Eigen::Index>(partition.num_patterns()));
    for (std::size_t k = 0; k < c.size(); ++k) {
        w[partition.pattern_of_flat(k)] += std::norm(c[k]);
    }
    return LocalityVector(partition, std::move(w));
}

LocalityVector locality_vector(const CMatrix &a, const Partition &partition) {
    return locality_vector(a, LocalBasis::standard(partition));
}

LocalityVector locality_vector(const DenseOperator &a) { return locality_vector(a.matrix(), a.partition()); }

double weighted_dot(const Partition &partition, const RVector &a, const RVector &b) {
    const RVector &dk = partition.pattern_dims();
    if (a.size() != dk.size() || b.size() != dk.size()) {
        throw std::invalid_argument("locality vectors have wrong length for the partition");
    }
    return (a.array() * b.array() / dk.array()).sum();
}

double weighted_dot(const LocalityVector &a, const LocalityVector &b) {
    if (a.partition() != b.partition()) {
        throw std::invalid_argument("weighted_dot: partition mismatch");
    }
    return weighted_dot(a.partition(), a.weights(), b.weights());
}

} // namespace ltm
