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

#ifndef LTM_STATS_HPP
#define LTM_STATS_HPP

#include <span>

namespace ltm {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double ssr = 0.0;  // sum of squared residuals
    std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept. Needs >= 2 points.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Sample mean, unbiased variance and the standard error of that variance
/// from the fourth central moment.
struct MomentSummary {
    double mean = 0.0;
    double variance = 0.0;
    double se_variance = 0.0;
    double se_mean = 0.0;
};

MomentSummary summarize_moments(std::span<const double> values);

} // namespace ltm

#endif
