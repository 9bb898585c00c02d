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

#include "ltm/ltm.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "ltm/parallel.hpp"
#include "ltm/pauli_propagation.hpp"
#include "ltm/rng.hpp"

namespace ltm {

std::string to_string(LtmMethod method) {
    switch (method) {
    case LtmMethod::exact:
        return "exact";
    case LtmMethod::sampled:
        return "sampled";
    case LtmMethod::structured:
        return "structured";
    case LtmMethod::ensemble:
        return "ensemble";
    case LtmMethod::assembled:
        return "assembled";
    }
    return "unknown";
}

namespace {

// Adds the locality vector of the image of B_j to `acc`.
using ColumnOracle = std::function<void(std::span<const int>, RVector &)>;

void check_map(const Channel &map, const Partition &partition) {
    if (map.dim() != partition.dim()) {
        throw std::invalid_argument("map dimension " + std::to_string(map.dim()) +
                                    " does not match partition dimension " + std::to_string(partition.dim()));
    }
}

ColumnOracle dense_oracle(const Channel &map, bool adjoint, const LocalBasis &basis) {
    return [&map, adjoint, &basis](std::span<const int> j, RVector &acc) {
        const CMatrix b = basis.element(j);
        const CMatrix image = adjoint ? map.apply_adjoint(b) : map.apply(b);
        acc += locality_vector(image, basis).weights();
    };
}

ColumnOracle pauli_oracle(const PauliPropagator &prop) {
    return [&prop](std::span<const int> j, RVector &acc) {
        for (const auto &[code, c] : prop.propagate(prop.code_of(j))) {
            acc[prop.pattern_of(code)] += c * c;
        }
    };
}

Ltm exact_from_oracle(const ColumnOracle &oracle, const Partition &partition, int threads) {
    const auto n_pat = static_cast<Eigen::Index>(partition.num_patterns());
    RMatrix t = RMatrix::Zero(n_pat, n_pat);
    parallel_chunks(partition.num_patterns(), partition.num_patterns(), threads,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        for (std::size_t lam = begin; lam < end; ++lam) {
                            RVector col = RVector::Zero(n_pat);
                            for (const auto &e : enumerate_basis(partition, static_cast<Pattern>(lam))) {
                                oracle(e.multi_index, col);
                            }
                            t.col(static_cast<Eigen::Index>(lam)) = col / partition.pattern_dims()[static_cast<Eigen::Index>(lam)];
                        }
                    });
    Ltm out;
    out.partition = partition;
    out.entries = std::move(t);
    return out;
}

std::vector<int> sample_index(const Partition &partition, Pattern lam, Rng &rng) {
    std::vector<int> j(partition.dims().size(), 0);
    for (std::size_t m = 0; m < j.size(); ++m) {
        if ((lam >> m) & 1U) {
            const int dm = partition.dims()[m];
            std::uniform_int_distribution<int> pick(1, dm * dm - 1);
            j[m] = pick(rng);
        }
    }
    return j;
}

} // namespace

Ltm ltm_exact(const Channel &map, bool adjoint, const Partition &partition, const LtmOptions &options) {
    check_map(map, partition);
    if (partition.dim() > options.max_dense_dim) {
        throw LimitExceeded("dense exact LTM refused for dimension " + std::to_string(partition.dim()) + " (limit " +
                            std::to_string(options.max_dense_dim) +
                            "); raise max_dense_dim, use ltm_sampled, or the structured path for gate sequences");
    }
    const LocalBasis standard = LocalBasis::standard(partition);
    const LocalBasis &basis = options.basis != nullptr ? *options.basis : standard;
    if (basis.partition() != partition) {
        throw std::invalid_argument("basis partition does not match");
    }
    Ltm out = exact_from_oracle(dense_oracle(map, adjoint, basis), partition, options.threads);
    out.adjoint = adjoint;
    out.method = LtmMethod::exact;
    return out;
}

Ltm ltm_sampled(const Channel &map, bool adjoint, const Partition &partition, std::size_t samples_per_block,
                std::uint64_t seed, const LtmOptions &options) {
    check_map(map, partition);
    if (samples_per_block < 1) {
        throw std::invalid_argument("samples_per_block must be >= 1");
    }
    const LocalBasis standard = LocalBasis::standard(partition);
    const LocalBasis &basis = options.basis != nullptr ? *options.basis : standard;
    std::optional<PauliPropagator> prop;
    ColumnOracle oracle;
    if (options.basis == nullptr && supports_structured(map, partition)) {
        prop.emplace(map, adjoint);
        oracle = pauli_oracle(*prop);
    } else {
        if (partition.dim() > 4096) {
            throw LimitExceeded("dense sampling refused above dimension 4096");
        }
        oracle = dense_oracle(map, adjoint, basis);
    }
    const auto n_pat = static_cast<Eigen::Index>(partition.num_patterns());
    RMatrix t = RMatrix::Zero(n_pat, n_pat);
    RMatrix se = RMatrix::Zero(n_pat, n_pat);
    parallel_chunks(partition.num_patterns(), partition.num_patterns(), options.threads,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        for (std::size_t lam = begin; lam < end; ++lam) {
                            const auto col = static_cast<Eigen::Index>(lam);
                            if (partition.pattern_count(static_cast<Pattern>(lam)) == 1) {
                                RVector x = RVector::Zero(n_pat);
                                oracle(partition.unflatten(0), x);
                                t.col(col) = x;
                                continue;
                            }
                            Rng rng = make_rng(seed, lam);
                            RVector sum = RVector::Zero(n_pat);
                            RVector sum_sq = RVector::Zero(n_pat);
                            RVector x(n_pat);
                            for (std::size_t s = 0; s < samples_per_block; ++s) {
                                x.setZero();
                                oracle(sample_index(partition, static_cast<Pattern>(lam), rng), x);
                                sum += x;
                                sum_sq += x.cwiseProduct(x);
                            }
                            const auto ns = static_cast<double>(samples_per_block);
                            const RVector mean = sum / ns;
                            t.col(col) = mean;
                            if (samples_per_block < 2) {
                                se.col(col).setConstant(std::numeric_limits<double>::infinity());
                            } else {
                                const RVector var = ((sum_sq - ns * mean.cwiseProduct(mean)) / (ns - 1.0)).cwiseMax(0.0);
                                se.col(col) = (var / ns).cwiseSqrt();
                            }
                        }
                    });
    Ltm out;
    out.partition = partition;
    out.entries = std::move(t);
    out.standard_error = std::move(se);
    out.adjoint = adjoint;
    out.method = LtmMethod::sampled;
    out.samples_per_block = samples_per_block;
    out.seed = seed;
    return out;
}

bool supports_structured(const Channel &map, const Partition &partition) {
    if (const auto *mix = std::get_if<MixtureMap>(&map.repr().map)) {
        return supports_structured(mix->inner, partition) && partition.dim() <= 4096;
    }
    if (!PauliPropagator::supports(map)) {
        return false;
    }
    const auto flat = flatten_gate_sequence(map);
    return std::get<GateSequenceMap>(flat->repr().map).dims == partition.dims();
}

Ltm ltm_structured(const Channel &map, bool adjoint, const Partition &partition, const LtmOptions &options) {
    check_map(map, partition);
    if (!supports_structured(map, partition)) {
        throw std::invalid_argument("structured LTM needs a gate sequence on power-of-two subsystems matching the "
                                    "partition, optionally wrapped in a replacement mixture");
    }
    if (const auto *mix = std::get_if<MixtureMap>(&map.repr().map)) {
        const Ltm inner = ltm_structured(mix->inner, adjoint, partition, options);
        return mixture_ltm(inner, mix->p, locality_vector(mix->fixed_point, partition));
    }
    const PauliPropagator prop(map, adjoint);
    Ltm out = exact_from_oracle(pauli_oracle(prop), partition, options.threads);
    out.adjoint = adjoint;
    out.method = LtmMethod::structured;
    return out;
}

Ltm ltm_auto(const Channel &map, bool adjoint, const Partition &partition, const LtmOptions &options) {
    if (options.basis == nullptr && supports_structured(map, partition)) {
        return ltm_structured(map, adjoint, partition, options);
    }
    return ltm_exact(map, adjoint, partition, options);
}

Ltm mixture_ltm(const Ltm &inner, double p, const LocalityVector &fixed_point) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("replacement probability must lie in [0, 1]");
    }
    if (inner.partition != fixed_point.partition()) {
        throw std::invalid_argument("fixed point partition does not match the LTM");
    }
    const RMatrix &e = inner.entries;
    const Eigen::Index n = e.rows();
    const double tol = 1e-9;
    const bool unital_tp = std::abs(e(0, 0) - 1.0) <= tol &&
                           (n == 1 || (e.col(0).tail(n - 1).cwiseAbs().maxCoeff() <= tol &&
                                       e.row(0).tail(n - 1).cwiseAbs().maxCoeff() <= tol));
    if (!unital_tp) {
        throw std::invalid_argument("mixture assembly needs the LTM of a unital trace-preserving inner map");
    }
    const Partition &partition = inner.partition;
    const double d = static_cast<double>(partition.dim());
    RMatrix t = (1.0 - p) * (1.0 - p) * e;
    t.row(0).setZero();
    t.col(0).setZero();
    t(0, 0) = 1.0;
    for (Eigen::Index k = 1; k < n; ++k) {
        const double mass = p * p * d * fixed_point.weights()[k];
        if (inner.adjoint) {
            t(0, k) = mass / partition.pattern_dims()[k];
        } else {
            t(k, 0) = mass;
        }
    }
    Ltm out;
    out.partition = partition;
    out.entries = std::move(t);
    out.adjoint = inner.adjoint;
    out.method = LtmMethod::assembled;
    return out;
}

Channel average_channel(std::span<const WeightedChannel> members) {
    if (members.empty()) {
        throw std::invalid_argument("ensemble is empty");
    }
    std::vector<CMatrix> ops;
    for (const auto &[w, ch] : members) {
        if (w == 0.0) {
            continue;
        }
        for (const auto &k : to_kraus(ch, 4096)) {
            ops.push_back(std::sqrt(w) * k);
        }
    }
    return Channel::cp_map(std::move(ops));
}

Ltm mean_ltm_over_ensemble(std::span<const WeightedChannel> members, bool adjoint, const Partition &partition,
                           const LtmOptions &options) {
    if (members.empty()) {
        throw std::invalid_argument("ensemble is empty");
    }
    double total = 0.0;
    for (const auto &[w, ch] : members) {
        if (!(w >= 0.0)) {
            throw std::invalid_argument("ensemble weights must be non-negative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-10) {
        throw std::invalid_argument("ensemble weights sum to " + std::to_string(total) + ", expected 1");
    }
    const auto n_pat = static_cast<Eigen::Index>(partition.num_patterns());
    Ltm out;
    out.partition = partition;
    out.entries = RMatrix::Zero(n_pat, n_pat);
    for (const auto &[w, ch] : members) {
        if (w == 0.0) {
            continue;
        }
        out.entries += w * ltm_auto(ch, adjoint, partition, options).entries;
    }
    out.adjoint = adjoint;
    out.method = LtmMethod::ensemble;
    return out;
}

double duality_defect(const Ltm &t, const Ltm &t_dual) {
    if (t.partition != t_dual.partition) {
        throw std::invalid_argument("duality check needs LTMs on the same partition");
    }
    const auto dk = t.partition.pattern_dims().asDiagonal();
    const RMatrix lhs = t.entries * dk;
    const RMatrix rhs = (t_dual.entries * dk).transpose();
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

RVector column_sums(const Ltm &t) { return t.entries.colwise().sum().transpose(); }

RVector apply_chain(std::span<const Ltm> chain, const RVector &v) {
    RVector out = v;
    for (std::size_t l = chain.size(); l-- > 0;) {
        if (chain[l].entries.cols() != out.size()) {
            throw std::invalid_argument("LTM chain has inconsistent sizes");
        }
        out = chain[l].entries * out;
    }
    return out;
}

} // namespace ltm
