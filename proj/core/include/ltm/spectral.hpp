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

#ifndef LTM_SPECTRAL_HPP
#define LTM_SPECTRAL_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "ltm/common.hpp"
#include "ltm/ltm.hpp"

namespace ltm {

struct SpectralOptions {
    /// Entries at or below this value are treated as absent edges and
    /// zeroed in the working copy.
    double edge_threshold = 1e-12;
    /// |r - 1| below this classifies a block as unit radius.
    double unit_tolerance = 1e-9;
    double negative_tolerance = 1e-12;
    /// Contractive blocks with r in (1 - warning_band, 1 - unit_tolerance]
    /// produce a warning.
    double warning_band = 1e-6;
    std::size_t dense_limit = 64;
    std::size_t max_iterations = 100000;
    double tolerance = 1e-12;
};

struct PerronPair {
    double radius = 0.0;
    RVector left;
    RVector right;  // sums to 1; left.dot(right) == 1
    double residual = 0.0;
};

struct IrreducibleBlock {
    std::vector<std::size_t> indices;  // ascending original indices
    bool essential = false;            // no edges leaving the block
    bool unit_radius = false;
    bool trivial = false;  // singleton without a self-loop (nilpotent)
    int period = 1;        // 0 for trivial blocks
    PerronPair perron;
    double block_dim = 0.0;  // sum of d_kappa over the block, LTM inputs only
    std::vector<int> cyclic_class;  // per member, in [0, period)
};

/// Column convention: edge lambda -> kappa iff T(kappa, lambda) > threshold.
/// Canonical order lists the recurrent blocks (essential, unit radius)
/// first, then every other index, so that the permuted matrix reads
/// [[diag(T_z), R], [0, Q]].
struct CanonicalDecomposition {
    RMatrix matrix;  // clamped input
    std::vector<IrreducibleBlock> blocks;  // downstream components first
    std::vector<std::size_t> recurrent_blocks;
    std::vector<std::size_t> recurrent_indices;
    std::vector<std::size_t> transient_indices;
    std::vector<std::size_t> permutation;  // canonical position -> original index
    RMatrix Q;
    RMatrix R;
    double q_radius = 0.0;
    std::vector<std::string> warnings;

    RMatrix permuted() const;
    /// Rebuilds the original-order matrix from the recurrent blocks, R and Q.
    RMatrix reassemble() const;
    /// Least common multiple of the recurrent block periods (1 when none).
    int period() const;
};

CanonicalDecomposition decompose(const RMatrix &t, const SpectralOptions &options = {});
/// Same, with block_dim filled from the LTM partition.
CanonicalDecomposition decompose(const Ltm &t, const SpectralOptions &options = {});

/// gcd of cycle lengths of an irreducible non-negative matrix.
int period_of(const RMatrix &block, double threshold = 1e-12);

PerronPair perron(const RMatrix &block, const SpectralOptions &options = {});

/// Largest eigenvalue modulus via a dense eigensolve.
double spectral_radius(const RMatrix &m);

/// Limiting coupling block P R (1 - Q)^{-1} where P is the Cesaro limit of
/// the recurrent part. Rows follow recurrent_indices, columns
/// transient_indices.
RMatrix absorption(const CanonicalDecomposition &dec);
/// R (1 - Q)^{-1}.
RMatrix absorption_raw(const CanonicalDecomposition &dec);

struct DeepLimit {
    RMatrix limit;  // Cesaro limit, original order
    bool converged = true;
    int period = 1;
    /// residue_limits[m] = lim_N T^{period * N + m}, original order.
    std::vector<RMatrix> residue_limits;
};

DeepLimit deep_limit_matrix(const CanonicalDecomposition &dec);

RMatrix matrix_power(const RMatrix &m, std::size_t exponent);

} // namespace ltm

#endif
