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

#ifndef LTM_LTM_HPP
#define LTM_LTM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ltm/channel.hpp"
#include "ltm/partition.hpp"

namespace ltm {

enum class LtmMethod { exact, sampled, structured, ensemble, assembled };

std::string to_string(LtmMethod method);

/// Locality transfer matrix. entries(kappa, lambda) is the mass moved from
/// input pattern lambda (column) to output pattern kappa (row):
///   T(kappa, lambda) = (1 / d_lambda) sum_{j in lambda} (l_{Map(B_j)})_kappa.
/// Adjoint-map LTMs of trace-preserving channels are column substochastic.
struct Ltm {
    Partition partition;
    RMatrix entries;
    RMatrix standard_error;  // empty unless sampled
    bool adjoint = true;
    LtmMethod method = LtmMethod::exact;
    std::size_t samples_per_block = 0;
    std::uint64_t seed = 0;

    double operator()(Pattern out, Pattern in) const { return entries(out, in); }
    std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

struct LtmOptions {
    /// Largest Hilbert-space dimension accepted by the dense exact path.
    std::size_t max_dense_dim = 128;
    int threads = 1;
    /// Basis used by the dense paths; the standard basis when null.
    const LocalBasis *basis = nullptr;
};

/// Enumerates the whole local basis and applies the map densely.
Ltm ltm_exact(const Channel &map, bool adjoint, const Partition &partition, const LtmOptions &options = {});

/// Stratified estimator: samples_per_block uniform basis indices per input
/// pattern. Block lambda uses the stream derive_seed(seed, lambda).
Ltm ltm_sampled(const Channel &map, bool adjoint, const Partition &partition, std::size_t samples_per_block,
                std::uint64_t seed, const LtmOptions &options = {});

/// Exact LTM of a gate sequence (or a replacement mixture around one) via
/// Pauli-string propagation; no dense operators are formed.
Ltm ltm_structured(const Channel &map, bool adjoint, const Partition &partition, const LtmOptions &options = {});
bool supports_structured(const Channel &map, const Partition &partition);

/// Structured path when available, dense exact path otherwise.
Ltm ltm_auto(const Channel &map, bool adjoint, const Partition &partition, const LtmOptions &options = {});

/// LTM of rho -> (1 - p) E(rho) + p Tr[rho] fixed_point assembled from the
/// LTM of a unital, trace-preserving E and the locality vector of the
/// fixed point.
Ltm mixture_ltm(const Ltm &inner, double p, const LocalityVector &fixed_point);

using WeightedChannel = std::pair<double, Channel>;

/// sum_i w_i T(E_i).
Ltm mean_ltm_over_ensemble(std::span<const WeightedChannel> members, bool adjoint, const Partition &partition,
                           const LtmOptions &options = {});

/// Average channel sum_i w_i E_i as a single channel.
Channel average_channel(std::span<const WeightedChannel> members);

/// max |T D - (T_dual D)^t| with D = diag(d_kappa).
double duality_defect(const Ltm &t, const Ltm &t_dual);

RVector column_sums(const Ltm &t);

/// Product T_1 T_2 ... T_L applied to v (T_L acts first).
RVector apply_chain(std::span<const Ltm> chain, const RVector &v);

} // namespace ltm

#endif
