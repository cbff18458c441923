// Copyright 2026 The pafs Authors.
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

#pragma once

#include <algorithm>
#include <cmath>

#include "pafs/common.hpp"

namespace pafs::oracle {

constexpr double kFdStep = 1e-5;

/// Central-difference gradient of a scalar function w.r.t. the matrix `x`.
/// `f` is invoked with no arguments and must read `x` by reference; every
/// entry is perturbed in place and restored.
template <typename F>
MatrixD finite_diff_gradient(F&& f, MatrixD& x, double step = kFdStep) {
  MatrixD grad(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double saved = x(r, c);
      x(r, c) = saved + step;
      const double hi = f();
      x(r, c) = saved - step;
      const double lo = f();
      x(r, c) = saved;
      grad(r, c) = (hi - lo) / (2.0 * step);
    }
  return grad;
}

/// Central differences carry round-off noise of roughly eps * |f| / (2 step),
/// about 1e-10 for order-one losses at the default step. Entries below this
/// scale hold no signal, so the denominator is floored well above it: tiny
/// entries are in effect compared absolutely at floor * tolerance.
constexpr double kFdDenomFloor = 1e-4;

/// Elementwise |a - f| / max(|a|, |f|, floor), maximum over all entries.
inline double max_relative_error(const MatrixD& analytic, const MatrixD& fd,
                                 double floor = kFdDenomFloor) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < analytic.rows(); ++r)
    for (Eigen::Index c = 0; c < analytic.cols(); ++c) {
      const double a = analytic(r, c);
      const double f = fd(r, c);
      const double rel =
          std::abs(a - f) / std::max({std::abs(a), std::abs(f), floor});
      worst = std::max(worst, rel);
    }
  return worst;
}

/// Finite differences across a ReLU or max-pool kink measure a mix of the two
/// one-sided slopes instead of the gradient. A straddle is tied to the step
/// size, so each entry is scored with two widely separated steps and keeps the
/// better agreement; a wrong analytic gradient disagrees at every step.
template <typename F>
double two_step_max_rel_err(F&& f, MatrixD& x, const MatrixD& analytic,
                            double step_a, double step_b,
                            double floor = kFdDenomFloor) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double saved = x(r, c);
      const double a = analytic(r, c);
      double best = 0.0;
      for (int s = 0; s < 2; ++s) {
        const double step = s == 0 ? step_a : step_b;
        x(r, c) = saved + step;
        const double hi = f();
        x(r, c) = saved - step;
        const double lo = f();
        x(r, c) = saved;
        const double fd = (hi - lo) / (2.0 * step);
        const double rel =
            std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
        if (s == 0 || rel < best) best = rel;
        if (best < 1e-7) break;  // already at the noise floor, skip the retry
      }
      worst = std::max(worst, best);
    }
  return worst;
}

}  // namespace pafs::oracle
