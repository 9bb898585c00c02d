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

#include "ltm/monte_carlo.hpp"

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/QR>

#include "ltm/local_ops.hpp"
#include "ltm/parallel.hpp"
#include "ltm/stats.hpp"

namespace ltm {

namespace {

constexpr std::size_t kChunks = 256;
constexpr std::uint64_t kLayerStream = 0x51ED270B27CULL;

using SampleFn = std::function<double(Rng &)>;

std::vector<double> run_samples(std::size_t n_samples, std::uint64_t seed, int threads, const SampleFn &fn) {
    std::vector<double> values(n_samples);
    parallel_chunks(n_samples, kChunks, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = make_rng(seed, kLayerStream, i);
            values[i] = fn(rng);
        }
    });
    return values;
}

class LocalLayer {
  public:
    explicit LocalLayer(const Partition &partition) : partition_(partition) {
        for (int m = 0; m < partition.num_subsystems(); ++m) {
            actions_.emplace_back(partition.dims(), std::vector<int>{m});
        }
    }

    void apply_random(CMatrix &rho, Rng &rng) const {
        for (std::size_t m = 0; m < actions_.size(); ++m) {
            const CMatrix u = haar_unitary(partition_.dims()[m], rng);
            rho = actions_[m].conjugate(rho, u);
        }
    }

  private:
    Partition partition_;
    std::vector<SubsystemAction> actions_;
};

void check_samples(std::size_t n_samples) {
    if (n_samples < 100) {
        throw std::invalid_argument("Monte Carlo estimates need at least 100 samples");
    }
}

} // namespace

void LayeredCircuitSpec::validate() const {
    const auto d = static_cast<Eigen::Index>(partition.dim());
    if (observable.rows() != d || observable.cols() != d) {
        throw std::invalid_argument("observable dimension does not match the partition");
    }
    if (initial_state.rows() != d || initial_state.cols() != d) {
        throw std::invalid_argument("initial state dimension does not match the partition");
    }
    if (!is_hermitian(observable, 1e-10)) {
        throw std::invalid_argument("observable is not Hermitian within 1e-10");
    }
    if (!is_density_matrix(initial_state, 1e-10)) {
        throw std::invalid_argument("initial state is not a density matrix within 1e-10");
    }
    if (layers > 0 && intermediate.size() != 1 && intermediate.size() != layers) {
        throw std::invalid_argument("need one homogeneous intermediate channel or one per layer");
    }
    for (const auto &ch : intermediate) {
        if (ch.dim() != partition.dim()) {
            throw std::invalid_argument("intermediate channel dimension does not match the partition");
        }
    }
}

const Channel &LayeredCircuitSpec::channel(std::size_t layer) const {
    return intermediate.size() == 1 ? intermediate.front() : intermediate.at(layer);
}

CMatrix haar_unitary(int d, Rng &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix z(d, d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(r, c) = cplx(re, im) / std::sqrt(2.0);
        }
    }
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < d; ++k) {
        const cplx diag = r(k, k);
        const double mag = std::abs(diag);
        q.col(k) *= mag > 0.0 ? diag / mag : cplx(1.0, 0.0);
    }
    return q;
}

std::vector<CMatrix> haar_local_factors(const Partition &partition, Rng &rng) {
    std::vector<CMatrix> out;
    for (int dm : partition.dims()) {
        out.push_back(haar_unitary(dm, rng));
    }
    return out;
}

CMatrix haar_local_unitary(const Partition &partition, Rng &rng) {
    const auto factors = haar_local_factors(partition, rng);
    return kron_all(factors);
}

MCEstimate estimate_from_samples(const std::vector<double> &values, std::uint64_t seed) {
    const MomentSummary s = summarize_moments(values);
    MCEstimate e;
    e.mean = s.mean;
    e.variance = s.variance;
    e.se_variance = s.se_variance;
    e.se_mean = s.se_mean;
    e.samples = values.size();
    e.seed = seed;
    return e;
}

MCEstimate estimate_variance(const LayeredCircuitSpec &spec, std::size_t n_samples, std::uint64_t seed,
                             const McOptions &options) {
    check_samples(n_samples);
    spec.validate();
    if (spec.partition.dim() > options.max_dim) {
        throw LimitExceeded("dense simulation refused for dimension " + std::to_string(spec.partition.dim()) +
                            " (cap " + std::to_string(options.max_dim) + ")");
    }
    const LocalLayer layer(spec.partition);
    const auto values = run_samples(n_samples, seed, options.threads, [&](Rng &rng) {
        CMatrix rho = spec.initial_state;
        layer.apply_random(rho, rng);
        for (std::size_t l = 0; l < spec.layers; ++l) {
            rho = spec.channel(l).apply(rho);
            layer.apply_random(rho, rng);
        }
        return (rho.cwiseProduct(spec.observable.transpose())).sum().real();
    });
    return estimate_from_samples(values, seed);
}

MCEstimate qresnet_estimate(const LayeredCircuitSpec &spec, const CMatrix &generator, double sigma,
                            std::size_t n_samples, std::uint64_t seed, const McOptions &options) {
    check_samples(n_samples);
    if (!is_hermitian(generator, 1e-10)) {
        throw std::invalid_argument("generator is not Hermitian within 1e-10");
    }
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("sigma must be non-negative");
    }
    LayeredCircuitSpec base = spec;
    base.intermediate.clear();
    base.layers = 0;
    base.validate();
    if (generator.rows() != static_cast<Eigen::Index>(spec.partition.dim())) {
        throw std::invalid_argument("generator dimension does not match the partition");
    }
    if (spec.partition.dim() > options.max_dim) {
        throw LimitExceeded("dense simulation refused above the configured cap");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (generator + generator.adjoint()));
    const CMatrix vecs = es.eigenvectors();
    const RVector vals = es.eigenvalues();
    const LocalLayer layer(spec.partition);
    const auto values = run_samples(n_samples, seed, options.threads, [&](Rng &rng) {
        std::normal_distribution<double> normal(0.0, 1.0);
        CMatrix rho = spec.initial_state;
        layer.apply_random(rho, rng);
        for (std::size_t l = 0; l < spec.layers; ++l) {
            const double phi = sigma * normal(rng);
            const CVector phases = (vals.cast<cplx>() * cplx(0.0, phi)).array().exp();
            const CMatrix u = vecs * phases.asDiagonal() * vecs.adjoint();
            rho = u * rho * u.adjoint();
            layer.apply_random(rho, rng);
        }
        return (rho.cwiseProduct(spec.observable.transpose())).sum().real();
    });
    return estimate_from_samples(values, seed);
}

MCEstimate estimate_global_haar_variance(const CMatrix &rho, const CMatrix &h, std::size_t n_samples,
                                         std::uint64_t seed, const McOptions &options) {
    check_samples(n_samples);
    if (rho.rows() != h.rows() || rho.rows() != rho.cols() || h.rows() != h.cols()) {
        throw std::invalid_argument("state and observable shapes differ");
    }
    if (static_cast<std::size_t>(rho.rows()) > options.max_dim) {
        throw LimitExceeded("dense simulation refused above the configured cap");
    }
    const int d = static_cast<int>(rho.rows());
    const auto values = run_samples(n_samples, seed, options.threads, [&](Rng &rng) {
        const CMatrix u = haar_unitary(d, rng);
        const CMatrix out = u * rho * u.adjoint();
        return (out.cwiseProduct(h.transpose())).sum().real();
    });
    return estimate_from_samples(values, seed);
}

} // namespace ltm
