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

#ifndef LTM_VARIANCE_HPP
#define LTM_VARIANCE_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltm/ltm.hpp"
#include "ltm/partition.hpp"
#include "ltm/spectral.hpp"

namespace ltm {

enum class VarianceMethod { exact_finite_l, deep_limit, deep_cesaro, lower_bound, noise_model };

std::string to_string(VarianceMethod method);

struct BlockContribution {
    std::vector<std::size_t> indices;
    int period = 1;
    double direct = 0.0;    // (l_rho, w_z) v_z^t (l_H)_z
    double absorbed = 0.0;  // (l_rho, w_z) v_z^t (A l_H)_z
};

struct VarianceReport {
    double value = 0.0;
    VarianceMethod method = VarianceMethod::exact_finite_l;
    bool converged = true;
    std::vector<BlockContribution> blocks;
    /// residue_values[m]: deep limit along depths L = m (mod period).
    std::vector<double> residue_values;
    /// Fitted exponential mixing rate of |Var_L - Var_inf|.
    std::optional<double> beta;
    std::optional<double> beta_r2;
    /// Closed-form cross-check (projection branch of the noise model).
    std::optional<double> cross_check;
    /// Perron vectors were obtained numerically rather than in closed form.
    bool numerical_weights = false;
    std::vector<std::string> notes;
};

/// (l_rho, T_1 ... T_L l_H) - Tr[H]^2 / d^2 with adjoint LTMs ordered
/// layer-1-first (T_L acts on l_H first).
VarianceReport variance_exact(const LocalityVector &rho, std::span<const Ltm> ltms, const LocalityVector &h,
                              double trace_h);

/// Depth sequence Var_L for L = 0..max_depth of a homogeneous chain.
std::vector<double> variance_sequence(const LocalityVector &rho, const Ltm &t, const LocalityVector &h,
                                      double trace_h, std::size_t max_depth);

struct DeepOptions {
    bool single_qubit_noise = false;
    bool fit_beta = true;
    std::size_t beta_max_depth = 80;
    double beta_floor = 1e-13;
};

/// Deep-circuit limit from the decomposition of a homogeneous adjoint LTM.
/// The identity component of l_H is removed internally, which is exact for
/// trace-preserving maps.
VarianceReport variance_deep(const CanonicalDecomposition &dec, const LocalityVector &rho, const LocalityVector &h,
                             const DeepOptions &options = {});

/// Unitary special case: sum over non-trivial recurrent blocks of
/// (l_rho)_z (l_H)_z / d_z. Needs a decomposition built from an Ltm.
VarianceReport variance_deep_unitary(const CanonicalDecomposition &dec, const LocalityVector &rho,
                                     const LocalityVector &h);

struct LowerBound {
    double bound = 0.0;
    double alpha = 0.0;
    std::vector<double> layer_alphas;
};

LowerBound lower_bound(const LocalityVector &rho, std::span<const Ltm> ltms, const LocalityVector &h,
                       std::span<const Pattern> keep);

struct ScalingSample {
    double n = 0.0;
    double depth = 0.0;
    double alpha = 0.0;
};

struct Corollary3Report {
    bool passes = false;
    double fitted_c = 0.0;
    double fitted_k = 0.0;
    double power_law_ssr = 0.0;
    double exponential_ssr = 0.0;
    double min_alpha = 0.0;
    double max_depth_over_log_n = 0.0;  // condition (a) indicator
    double max_deficit_ratio = 0.0;     // condition (b): max (1 - alpha) L / log n
    std::vector<double> f_values;       // alpha^L per sample
};

/// Diagnostic: fits alpha^L against c n^{-k} (log-log) and c e^{-k n};
/// passes when the power law explains the samples at least as well.
Corollary3Report check_corollary3(std::span<const ScalingSample> samples);

/// p^2 (l_rho~, (1 - (1-p)^2 T)^{-1} l_H) over traceless patterns, with the
/// projection closed form as cross-check when T^2 = T.
VarianceReport noise_model_deep(double p, const Ltm &t_unitary, const LocalityVector &fixed_point,
                                const LocalityVector &h);

/// Largest |eigenvalue|^2 of a Hermitian observable, the Hoelder bound on
/// any loss variance.
double hoelder_bound(const CMatrix &h);

} // namespace ltm

#endif
