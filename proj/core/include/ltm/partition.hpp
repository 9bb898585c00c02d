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

#ifndef LTM_PARTITION_HPP
#define LTM_PARTITION_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "ltm/common.hpp"

namespace ltm {

/// Grouping of a composite Hilbert space into M subsystems of dimensions
/// d_0, ..., d_{M-1}. Subsystem 0 is the leftmost tensor factor.
class Partition {
  public:
    Partition() = default;
    explicit Partition(std::vector<int> dims);

    static Partition qubits(int n);

    const std::vector<int> &dims() const { return dims_; }
    int num_subsystems() const { return static_cast<int>(dims_.size()); }
    std::size_t dim() const { return dim_; }
    std::size_t operator_dim() const { return dim_ * dim_; }
    std::size_t num_patterns() const { return std::size_t{1} << dims_.size(); }

    /// d_kappa = prod_m (d_m^2 - 1)^{kappa_m}.
    double pattern_dim(Pattern kappa) const;
    const RVector &pattern_dims() const { return pattern_dims_; }

    /// Number of basis elements with the given pattern, as an integer.
    std::size_t pattern_count(Pattern kappa) const;

    /// Pattern of a flat basis index (row-major over j_0, ..., j_{M-1},
    /// j_m in [0, d_m^2)).
    Pattern pattern_of_flat(std::size_t flat) const;
    Pattern pattern_of(std::span<const int> multi_index) const;
    std::vector<int> unflatten(std::size_t flat) const;
    std::size_t flatten(std::span<const int> multi_index) const;

    /// Parses a pattern given as a bit list (kappa_0, ..., kappa_{M-1}).
    Pattern pattern_from_bits(std::span<const int> bits) const;
    void check_pattern(Pattern kappa) const;

    bool operator==(const Partition &other) const { return dims_ == other.dims_; }
    bool operator!=(const Partition &other) const { return !(*this == other); }

  private:
    std::vector<int> dims_;
    std::size_t dim_ = 1;
    RVector pattern_dims_;
    std::vector<std::size_t> strides_;  // operator-index strides, d_m^2 based
};

/// Multi-index j = (j_0, ..., j_{M-1}) of a local basis element.
struct LocalBasisElement {
    std::vector<int> multi_index;
    Pattern pattern = 0;
};

/// Orthonormal Hermitian operator basis built as tensor products of local
/// bases. Element 0 of every local basis is identity / sqrt(d_m).
class LocalBasis {
  public:
    /// Normalized Pauli matrices for d_m = 2, normalized generalized
    /// Gell-Mann matrices otherwise.
    static LocalBasis standard(const Partition &partition);

    /// Basis {V_m B V_m^dagger} obtained by conjugating every local element
    /// of this basis by the given per-subsystem unitaries.
    LocalBasis rotated(std::span<const CMatrix> unitaries) const;

    const Partition &partition() const { return partition_; }
    const std::vector<CMatrix> &local(int m) const { return local_[m]; }

    /// Dense d x d matrix of a basis element.
    CMatrix element(std::span<const int> multi_index) const;
    CMatrix element(const LocalBasisElement &e) const { return element(e.multi_index); }

    /// Coefficients c_k = Tr[B_k A] for every flat index k, computed by a
    /// sequence of per-subsystem transforms in O(d^2 sum_m d_m^2).
    std::vector<cplx> coefficients(const CMatrix &a) const;

    /// Inverse of coefficients: sum_k c_k B_k.
    CMatrix synthesize(std::span<const cplx> c) const;

  private:
    LocalBasis(Partition partition, std::vector<std::vector<CMatrix>> local);
    void build_transforms();

    Partition partition_;
    std::vector<std::vector<CMatrix>> local_;
    // transform_[m](k, i * d_m + j) = conj(B_k(i, j)) so that
    // sum_{ij} transform_[m](k, ij) A(i, j) = Tr[B_k^dagger A] = Tr[B_k A].
    std::vector<CMatrix> transform_;
};

/// Locally normalized single-qubit Pauli matrices {1, X, Y, Z} / sqrt(2).
const std::vector<CMatrix> &normalized_paulis();

/// Unnormalized Pauli matrix by index 0..3 = I, X, Y, Z.
CMatrix pauli(int index);

/// Normalized generalized Gell-Mann basis of dimension d (d^2 elements).
std::vector<CMatrix> gell_mann_basis(int d);

/// All basis elements with pattern kappa, in ascending flat-index order.
std::vector<LocalBasisElement> enumerate_basis(const Partition &partition, Pattern kappa);
std::vector<LocalBasisElement> enumerate_basis(const Partition &partition, std::span<const int> kappa_bits);

/// Operator paired with the partition it lives on.
class DenseOperator {
  public:
    DenseOperator(CMatrix matrix, Partition partition);
    const CMatrix &matrix() const { return matrix_; }
    const Partition &partition() const { return partition_; }

  private:
    CMatrix matrix_;
    Partition partition_;
};

/// Squared Hilbert-Schmidt mass of an operator per support pattern.
class LocalityVector {
  public:
    LocalityVector() = default;
    LocalityVector(Partition partition, RVector weights);

    static LocalityVector unit(const Partition &partition, Pattern kappa, double mass = 1.0);

    const Partition &partition() const { return partition_; }
    const RVector &weights() const { return weights_; }
    double operator[](Pattern kappa) const { return weights_[kappa]; }
    double total() const { return weights_.sum(); }

    /// Copy with every pattern outside the mask set to zero.
    LocalityVector restricted(std::span<const Pattern> keep) const;
    LocalityVector without_identity() const;

  private:
    Partition partition_;
    RVector weights_;
};

LocalityVector locality_vector(const DenseOperator &a);
LocalityVector locality_vector(const CMatrix &a, const Partition &partition);
LocalityVector locality_vector(const CMatrix &a, const LocalBasis &basis);

/// sum_kappa a_kappa b_kappa / d_kappa.
double weighted_dot(const LocalityVector &a, const LocalityVector &b);
double weighted_dot(const Partition &partition, const RVector &a, const RVector &b);

} // namespace ltm

#endif
