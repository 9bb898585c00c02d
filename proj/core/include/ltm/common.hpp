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

#ifndef LTM_COMMON_HPP
#define LTM_COMMON_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ltm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

/// Support pattern over subsystems. Bit m is set iff the pattern is
/// non-trivial on subsystem m.
using Pattern = std::uint32_t;

/// Raised when an iterative or factorization routine cannot reach the
/// requested accuracy. The message carries the residual.
class NumericalFailure : public std::runtime_error {
  public:
    explicit NumericalFailure(const std::string &what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// Raised when the inessential part of a transfer matrix is not strictly
/// contractive, so the absorption resolvent does not exist.
class SingularAbsorption : public std::runtime_error {
  public:
    explicit SingularAbsorption(const std::string &what, double radius)
        : std::runtime_error(what), radius_(radius) {}
    double radius() const noexcept { return radius_; }

  private:
    double radius_;
};

/// Raised when a request exceeds a configured size cap (dense dimension,
/// Kraus count, ...).
class LimitExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline int popcount(Pattern k) { return __builtin_popcount(k); }

} // namespace ltm

#endif
