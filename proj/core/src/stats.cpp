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

#include "ltm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ltm {

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("linear fit needs at least two (x, y) pairs");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("linear fit needs at least two distinct x values");
    }
    LinearFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        fit.ssr += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - fit.ssr / syy : 1.0;
    return fit;
}

MomentSummary summarize_moments(std::span<const double> values) {
    if (values.size() < 4) {
        throw std::invalid_argument("moment summary needs at least four samples");
    }
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : values) {
        const double c = v - mean;
        const double c2 = c * c;
        m2 += c2;
        m4 += c2 * c2;
    }
    MomentSummary s;
    s.mean = mean;
    s.variance = m2 / (n - 1.0);
    const double mu4 = m4 / n;
    const double var_of_var = (mu4 - (n - 3.0) / (n - 1.0) * s.variance * s.variance) / n;
    s.se_variance = std::sqrt(std::max(var_of_var, 0.0));
    s.se_mean = std::sqrt(s.variance / n);
    return s;
}

} // namespace ltm
