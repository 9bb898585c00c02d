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

#ifndef LTM_MONTE_CARLO_HPP
#define LTM_MONTE_CARLO_HPP

#include <cstdint>
#include <vector>

#include "ltm/channel.hpp"
#include "ltm/partition.hpp"
#include "ltm/rng.hpp"

namespace ltm {

/// rho -> U_{L+1} E_L U_L ... E_1 U_1 (rho), U_l independent local Haar
/// unitaries. `intermediate` holds one channel (homogeneous) or L channels.
struct LayeredCircuitSpec {
    Partition partition;
    std::size_t layers = 0;
    std::vector<Channel> intermediate;
    CMatrix observable;
    CMatrix initial_state;

    void validate() const;
    const Channel &channel(std::size_t layer) const;
};

struct MCEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double se_variance = 0.0;
    double se_mean = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

struct McOptions {
    /// Dense simulation cap (4096 = 12 qubits).
    std::size_t max_dim = 4096;
    int threads = 1;
};

/// Haar unitary on U(d): Ginibre matrix, QR, phases of diag(R) removed.
CMatrix haar_unitary(int d, Rng &rng);
std::vector<CMatrix> haar_local_factors(const Partition &partition, Rng &rng);
/// Dense tensor product of independent Haar factors.
CMatrix haar_local_unitary(const Partition &partition, Rng &rng);

MCEstimate estimate_variance(const LayeredCircuitSpec &spec, std::size_t n_samples, std::uint64_t seed,
                             const McOptions &options = {});

/// Layers use E_l = exp(i phi_l G) with phi_l ~ N(0, sigma^2) drawn per
/// layer and sample; spec.intermediate is ignored.
MCEstimate qresnet_estimate(const LayeredCircuitSpec &spec, const CMatrix &generator, double sigma,
                            std::size_t n_samples, std::uint64_t seed, const McOptions &options = {});

/// Tr[U rho U^dagger H] over global Haar U on the full space.
MCEstimate estimate_global_haar_variance(const CMatrix &rho, const CMatrix &h, std::size_t n_samples,
                                         std::uint64_t seed, const McOptions &options = {});

MCEstimate estimate_from_samples(const std::vector<double> &values, std::uint64_t seed);

} // namespace ltm

#endif
