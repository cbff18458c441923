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
#include <array>
#include <cmath>

#include "pafs/common.hpp"
#include "pafs/errors.hpp"
#include "pafs/rng.hpp"

namespace pafs::augment {

struct AugmentConfig {
  int time_mask_max = 20;  // frames
  int freq_mask_max = 8;   // mel bins
  int warp_w = 5;          // frames
  bool eval_augment = true;

  void validate(int n_mels, int n_frames) const {
    if (time_mask_max < 0 || time_mask_max > n_frames)
      throw ContractError(cat("aug.time_mask_max ", time_mask_max,
                              " outside [0, ", n_frames, "]"));
    if (freq_mask_max < 0 || freq_mask_max > n_mels)
      throw ContractError(cat("aug.freq_mask_max ", freq_mask_max,
                              " outside [0, ", n_mels, "]"));
    if (warp_w < 0 || 2 * warp_w >= n_frames)
      throw ContractError(cat("aug.warp_w ", warp_w, " must satisfy 0 <= 2*warp_w < ",
                              n_frames));
  }
};

/// Fixed view order: [original, time-masked, frequency-masked, time-warped].
template <typename Scalar>
using AugmentedViews = std::array<Matrix<Scalar>, 4>;

/// Zeroes w ~ Uniform{0..max_width} consecutive columns starting at
/// start ~ Uniform{0..T-w}.
template <typename Scalar>
Matrix<Scalar> time_mask(const Matrix<Scalar>& spec, int max_width, Rng& rng) {
  const int t_frames = static_cast<int>(spec.cols());
  if (max_width < 0 || max_width > t_frames)
    throw ContractError(cat("time_mask: max_width ", max_width, " outside [0, ",
                            t_frames, "]"));
  const int w = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(max_width) + 1));
  const int start = static_cast<int>(
      rng.uniform_below(static_cast<std::uint64_t>(t_frames - w) + 1));
  Matrix<Scalar> out = spec;
  out.middleCols(start, w).setZero();
  return out;
}

/// Row-wise counterpart of time_mask.
template <typename Scalar>
Matrix<Scalar> freq_mask(const Matrix<Scalar>& spec, int max_width, Rng& rng) {
  const int n_mels = static_cast<int>(spec.rows());
  if (max_width < 0 || max_width > n_mels)
    throw ContractError(cat("freq_mask: max_width ", max_width, " outside [0, ",
                            n_mels, "]"));
  const int w = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(max_width) + 1));
  const int start = static_cast<int>(
      rng.uniform_below(static_cast<std::uint64_t>(n_mels - w) + 1));
  Matrix<Scalar> out = spec;
  out.middleRows(start, w).setZero();
  return out;
}

/// Piecewise-linear remap of the time axis. The content at anchor column
/// c ~ Uniform{warp_w..T-1-warp_w} moves to c + d with d ~ Uniform{-warp_w..warp_w}
/// (target clamped to [1, T-2]); columns on each side are linearly resampled,
/// columns 0 and T-1 stay fixed.
template <typename Scalar>
Matrix<Scalar> time_warp(const Matrix<Scalar>& spec, int warp_w, Rng& rng) {
  const int t_frames = static_cast<int>(spec.cols());
  if (warp_w < 0 || 2 * warp_w >= t_frames)
    throw ContractError(cat("time_warp: warp_w ", warp_w, " must satisfy 0 <= 2*warp_w < ",
                            t_frames));
  if (warp_w == 0) return spec;

  const int c = static_cast<int>(rng.uniform_int(warp_w, t_frames - 1 - warp_w));
  const int d = static_cast<int>(rng.uniform_int(-warp_w, warp_w));
  const int target = std::clamp(c + d, 1, t_frames - 2);

  Matrix<Scalar> out(spec.rows(), spec.cols());
  for (int j = 0; j < t_frames; ++j) {
    double src;
    if (j <= target) {
      src = static_cast<double>(j) * c / target;
    } else {
      src = c + static_cast<double>(j - target) * (t_frames - 1 - c) /
                    (t_frames - 1 - target);
    }
    const int lo = static_cast<int>(std::floor(src));
    const int hi = std::min(lo + 1, t_frames - 1);
    const auto frac = static_cast<Scalar>(src - lo);
    out.col(j) = (Scalar(1) - frac) * spec.col(lo) + frac * spec.col(hi);
  }
  return out;
}

/// Expands one spectrogram into the four-view list. Each augmentation is
/// applied to the original, never to another view's output.
template <typename Scalar>
AugmentedViews<Scalar> augment_views(const Matrix<Scalar>& spec,
                                     const AugmentConfig& cfg, Rng& rng) {
  cfg.validate(static_cast<int>(spec.rows()), static_cast<int>(spec.cols()));
  AugmentedViews<Scalar> views;
  views[0] = spec;
  views[1] = time_mask(spec, cfg.time_mask_max, rng);
  views[2] = freq_mask(spec, cfg.freq_mask_max, rng);
  views[3] = time_warp(spec, cfg.warp_w, rng);
  return views;
}

/// Four bit-identical copies, for eval_augment=false.
template <typename Scalar>
AugmentedViews<Scalar> replicate_views(const Matrix<Scalar>& spec) {
  return {spec, spec, spec, spec};
}

}  // namespace pafs::augment
