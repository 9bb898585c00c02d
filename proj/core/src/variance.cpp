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

#include "ltm/variance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "ltm/local_ops.hpp"
#include "ltm/stats.hpp"

namespace ltm {

std::string to_string(VarianceMethod method) {
    switch (method) {
    case VarianceMethod::exact_finite_l:
        return "exact-finite-L";
    case VarianceMethod::deep_limit:
        return "deep-limit";
    case VarianceMethod::deep_cesaro:
        return "deep-cesaro";
    case VarianceMethod::lower_bound:
        return "lower-bound";
    case VarianceMethod::noise_model:
        return "noise-model";
    }
    return "unknown";
}

namespace {

constexpr double kNegativeTolerance = 1e-10;

double clamp_value(double v, std::vector<std::string> *notes) {
    if (!std::isfinite(v)) {
        throw NumericalFailure("variance evaluated to a non-finite value");
    }
    if (v < -kNegativeTolerance) {
        std::ostringstream msg;
        msg << "variance evaluated to " << v << " below the -1e-10 tolerance";
        throw NumericalFailure(msg.str(), v);
    }
    if (v < 0.0) {
        if (notes != nullptr) {
            notes->push_back("clamped small negative value to zero");
        }
        return 0.0;
    }
    return v;
}

void require_same_partition(const Partition &a, const Partition &b, const char *what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": partition mismatch");
    }
}

RVector traceless(const LocalityVector &h) {
    RVector out = h.weights();
    out[0] = 0.0;
    return out;
}

std::optional<LinearFit> fit_decay(const std::vector<double> &sequence, double limit, double floor) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t l = 1; l < sequence.size(); ++l) {
        const double dev = std::abs(sequence[l] - limit);
        if (!(dev > floor)) {
            break;
        }
        xs.push_back(static_cast<double>(l));
        ys.push_back(std::log(dev));
    }
    if (xs.size() < 3) {
        return std::nullopt;
    }
    return fit_linear(xs, ys);
}

} // namespace

VarianceReport variance_exact(const LocalityVector &rho, std::span<const Ltm> ltms, const LocalityVector &h,
                              double trace_h) {
    const Partition &partition = rho.partition();
    require_same_partition(partition, h.partition(), "variance_exact");
    for (const auto &t : ltms) {
        require_same_partition(partition, t.partition, "variance_exact");
        if (!t.adjoint) {
            throw std::invalid_argument("variance_exact needs adjoint-map LTMs");
        }
    }
    const double d = static_cast<double>(partition.dim());
    VarianceReport report;
    report.method = VarianceMethod::exact_finite_l;
    const RVector chained = apply_chain(ltms, h.weights());
    report.value = clamp_value(weighted_dot(partition, rho.weights(), chained) - trace_h * trace_h / (d * d),
                               &report.notes);
    return report;
}

std::vector<double> variance_sequence(const LocalityVector &rho, const Ltm &t, const LocalityVector &h,
                                      double trace_h, std::size_t max_depth) {
    const Partition &partition = rho.partition();
    require_same_partition(partition, h.partition(), "variance_sequence");
    require_same_partition(partition, t.partition, "variance_sequence");
    const double d = static_cast<double>(partition.dim());
    const double offset = trace_h * trace_h / (d * d);
    std::vector<double> out;
    RVector v = h.weights();
    for (std::size_t l = 0; l <= max_depth; ++l) {
        out.push_back(weighted_dot(partition, rho.weights(), v) - offset);
        if (l < max_depth) {
            v = t.entries * v;
        }
    }
    return out;
}

VarianceReport variance_deep(const CanonicalDecomposition &dec, const LocalityVector &rho, const LocalityVector &h,
                             const DeepOptions &options) {
    const Partition &partition = rho.partition();
    require_same_partition(partition, h.partition(), "variance_deep");
    if (static_cast<std::size_t>(dec.matrix.rows()) != partition.num_patterns()) {
        throw std::invalid_argument("decomposition size does not match the partition");
    }
    const RVector &dk = partition.pattern_dims();
    const RVector hz = traceless(h);
    const RMatrix a_raw = absorption_raw(dec);
    RVector hq(static_cast<Eigen::Index>(dec.transient_indices.size()));
    for (std::size_t i = 0; i < dec.transient_indices.size(); ++i) {
        hq[static_cast<Eigen::Index>(i)] = hz[static_cast<Eigen::Index>(dec.transient_indices[i])];
    }
    const RVector ah = dec.transient_indices.empty()
                           ? RVector::Zero(static_cast<Eigen::Index>(dec.recurrent_indices.size()))
                           : RVector(a_raw * hq);

    VarianceReport report;
    report.numerical_weights = !options.single_qubit_noise;
    std::size_t offset = 0;
    double total = 0.0;
    for (std::size_t c : dec.recurrent_blocks) {
        const IrreducibleBlock &b = dec.blocks[c];
        const std::size_t sz = b.indices.size();
        double dz = 0.0;
        for (std::size_t k : b.indices) {
            dz += dk[static_cast<Eigen::Index>(k)];
        }
        double rho_w = 0.0;
        double v_h = 0.0;
        double v_ah = 0.0;
        for (std::size_t i = 0; i < sz; ++i) {
            const auto k = static_cast<Eigen::Index>(b.indices[i]);
            const double w = options.single_qubit_noise ? dk[k] / dz : b.perron.right[static_cast<Eigen::Index>(i)];
            const double v = options.single_qubit_noise ? 1.0 : b.perron.left[static_cast<Eigen::Index>(i)];
            rho_w += rho.weights()[k] * w / dk[k];
            v_h += v * hz[k];
            v_ah += v * ah[static_cast<Eigen::Index>(offset + i)];
        }
        BlockContribution bc;
        bc.indices = b.indices;
        bc.period = b.period;
        bc.direct = rho_w * v_h;
        bc.absorbed = rho_w * v_ah;
        total += bc.direct + bc.absorbed;
        report.blocks.push_back(std::move(bc));
        offset += sz;
    }
    report.value = clamp_value(total, &report.notes);

    const DeepLimit lim = deep_limit_matrix(dec);
    report.converged = lim.converged;
    report.method = lim.converged ? VarianceMethod::deep_limit : VarianceMethod::deep_cesaro;
    for (const auto &m : lim.residue_limits) {
        report.residue_values.push_back(weighted_dot(partition, rho.weights(), m * hz));
    }
    if (options.fit_beta && lim.converged) {
        const Ltm chain{partition, dec.matrix, {}, true, LtmMethod::exact, 0, 0};
        const LocalityVector h0(partition, hz);
        const auto seq = variance_sequence(rho, chain, h0, 0.0, options.beta_max_depth);
        if (const auto fit = fit_decay(seq, report.value, options.beta_floor)) {
            report.beta = -fit->slope;
            report.beta_r2 = fit->r2;
        } else {
            report.notes.push_back("too few depths above the numerical floor to fit a mixing rate");
        }
    }
    return report;
}

VarianceReport variance_deep_unitary(const CanonicalDecomposition &dec, const LocalityVector &rho,
                                     const LocalityVector &h) {
    const Partition &partition = rho.partition();
    require_same_partition(partition, h.partition(), "variance_deep_unitary");
    if (static_cast<std::size_t>(dec.matrix.rows()) != partition.num_patterns()) {
        throw std::invalid_argument("decomposition size does not match the partition");
    }
    const RVector sums = dec.matrix.colwise().sum().transpose();
    if ((sums.array() - 1.0).abs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("intermediate channel is not unitary: LTM column sums deviate from 1 by " +
                                    std::to_string((sums.array() - 1.0).abs().maxCoeff()));
    }
    if (!dec.transient_indices.empty() && dec.R.size() > 0 && dec.R.cwiseAbs().maxCoeff() > 1e-9) {
        throw NumericalFailure("unitary LTM has a non-zero absorption block");
    }
    const RVector &dk = partition.pattern_dims();
    VarianceReport report;
    double total = 0.0;
    for (std::size_t c : dec.recurrent_blocks) {
        const IrreducibleBlock &b = dec.blocks[c];
        if (std::find(b.indices.begin(), b.indices.end(), std::size_t{0}) != b.indices.end()) {
            continue;
        }
        double rz = 0.0;
        double hzv = 0.0;
        double dz = 0.0;
        for (std::size_t k : b.indices) {
            const auto i = static_cast<Eigen::Index>(k);
            rz += rho.weights()[i];
            hzv += h.weights()[i];
            dz += dk[i];
        }
        BlockContribution bc;
        bc.indices = b.indices;
        bc.period = b.period;
        bc.direct = rz * hzv / dz;
        total += bc.direct;
        report.blocks.push_back(std::move(bc));
    }
    report.value = clamp_value(total, &report.notes);
    const DeepLimit lim = deep_limit_matrix(dec);
    report.converged = lim.converged;
    report.method = lim.converged ? VarianceMethod::deep_limit : VarianceMethod::deep_cesaro;
    const RVector hz = traceless(h);
    for (const auto &m : lim.residue_limits) {
        report.residue_values.push_back(weighted_dot(partition, rho.weights(), m * hz));
    }
    return report;
}

LowerBound lower_bound(const LocalityVector &rho, std::span<const Ltm> ltms, const LocalityVector &h,
                       std::span<const Pattern> keep) {
    if (keep.empty()) {
        throw std::invalid_argument("lower bound needs a non-empty pattern subset");
    }
    const Partition &partition = rho.partition();
    require_same_partition(partition, h.partition(), "lower_bound");
    for (Pattern k : keep) {
        partition.check_pattern(k);
    }
    LowerBound out;
    double product = 1.0;
    for (const auto &t : ltms) {
        require_same_partition(partition, t.partition, "lower_bound");
        double a = std::numeric_limits<double>::infinity();
        for (Pattern k : keep) {
            a = std::min(a, t.entries(k, k));
        }
        a = std::max(a, 0.0);
        out.layer_alphas.push_back(a);
        product *= a;
    }
    out.alpha = ltms.empty() ? 1.0 : std::pow(product, 1.0 / static_cast<double>(ltms.size()));
    out.bound = product * weighted_dot(rho, h.restricted(keep));
    return out;
}

Corollary3Report check_corollary3(std::span<const ScalingSample> samples) {
    if (samples.size() < 3) {
        throw std::invalid_argument("corollary check needs at least three scaling samples");
    }
    Corollary3Report r;
    r.min_alpha = std::numeric_limits<double>::infinity();
    std::vector<double> log_n;
    std::vector<double> n;
    std::vector<double> log_f;
    bool any_zero = false;
    for (const auto &s : samples) {
        if (!(s.alpha >= 0.0 && s.alpha <= 1.0) || !(s.n > 1.0) || !(s.depth >= 0.0)) {
            throw std::invalid_argument("scaling samples need alpha in [0, 1], n > 1 and L >= 0");
        }
        const double f = std::pow(s.alpha, s.depth);
        r.f_values.push_back(f);
        r.min_alpha = std::min(r.min_alpha, s.alpha);
        r.max_depth_over_log_n = std::max(r.max_depth_over_log_n, s.depth / std::log(s.n));
        r.max_deficit_ratio = std::max(r.max_deficit_ratio, (1.0 - s.alpha) * s.depth / std::log(s.n));
        if (f <= 0.0) {
            any_zero = true;
            continue;
        }
        log_n.push_back(std::log(s.n));
        n.push_back(s.n);
        log_f.push_back(std::log(f));
    }
    if (any_zero || log_f.size() < 3) {
        r.passes = false;
        r.fitted_k = std::numeric_limits<double>::infinity();
        return r;
    }
    const LinearFit power = fit_linear(log_n, log_f);
    const LinearFit expo = fit_linear(n, log_f);
    r.fitted_k = -power.slope;
    r.fitted_c = std::exp(power.intercept);
    r.power_law_ssr = power.ssr;
    r.exponential_ssr = expo.ssr;
    r.passes = power.ssr <= expo.ssr + 1e-12;
    return r;
}

VarianceReport noise_model_deep(double p, const Ltm &t_unitary, const LocalityVector &fixed_point,
                                const LocalityVector &h) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("noise model needs 0 < p <= 1");
    }
    const Partition &partition = t_unitary.partition;
    require_same_partition(partition, fixed_point.partition(), "noise_model_deep");
    require_same_partition(partition, h.partition(), "noise_model_deep");
    const Eigen::Index n = t_unitary.entries.rows() - 1;
    const RMatrix t = t_unitary.entries.bottomRightCorner(n, n);
    const RVector hv = h.weights().tail(n);
    const RVector rv = fixed_point.weights().tail(n);
    const RVector dk = partition.pattern_dims().tail(n);
    const double q = (1.0 - p) * (1.0 - p);
    const RMatrix m = RMatrix::Identity(n, n) - q * t;
    const RVector x = m.partialPivLu().solve(hv);
    VarianceReport report;
    report.method = VarianceMethod::noise_model;
    report.value = clamp_value(p * p * (rv.array() * x.array() / dk.array()).sum(), &report.notes);
    const RMatrix idem = t * t - t;
    const double defect = idem.size() == 0 ? 0.0 : idem.cwiseAbs().rowwise().sum().maxCoeff();
    if (defect < 1e-8) {
        const RVector th = t * hv;
        const double dot_th = (rv.array() * th.array() / dk.array()).sum();
        const double dot_h = (rv.array() * hv.array() / dk.array()).sum();
        report.cross_check = (p / (2.0 - p) - p * p) * dot_th + p * p * dot_h;
    }
    return report;
}

double hoelder_bound(const CMatrix &h) {
    const double norm = operator_norm_hermitian(h);
    return norm * norm;
}

} // namespace ltm
