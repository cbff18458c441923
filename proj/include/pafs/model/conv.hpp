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

#include <vector>

#include "pafs/common.hpp"
#include "pafs/errors.hpp"
#include "pafs/model/params.hpp"

namespace pafs::model {

/// 2-D feature map stored as channels x (height*width); spatial index is
/// y*width + x.
template <typename Scalar>
struct FeatureMap {
  Matrix<Scalar> data;
  int height = 0;
  int width = 0;

  int channels() const { return static_cast<int>(data.rows()); }
};

/// 3x3 convolution, stride 1, zero padding 1. Implemented as an im2col
/// GEMM so forward and backward are single matrix products.
template <typename Scalar>
class Conv3x3 {
 public:
  struct Cache {
    Matrix<Scalar> col;  // (in_ch*9) x (h*w)
    int height = 0;
    int width = 0;
  };

  Conv3x3(ParamRegistry<Scalar>& reg, const std::string& prefix, int in_ch, int out_ch)
      : in_ch_(in_ch),
        weight_(&reg.add(prefix + ".weight", out_ch, in_ch * 9, Init::kUniformFanIn,
                         in_ch * 9)),
        bias_(&reg.add(prefix + ".bias", out_ch, 1, Init::kZero)) {}

  FeatureMap<Scalar> forward(const FeatureMap<Scalar>& in, Cache& cache) const {
    if (in.channels() != in_ch_)
      throw ContractError(cat("conv ", weight_->name, ": got ", in.channels(),
                              " input channels, expected ", in_ch_));
    const int h = in.height;
    const int w = in.width;
    cache.height = h;
    cache.width = w;
    cache.col.setZero(static_cast<Eigen::Index>(in_ch_) * 9, static_cast<Eigen::Index>(h) * w);
    for (int ci = 0; ci < in_ch_; ++ci)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const Eigen::Index row = ci * 9 + ky * 3 + kx;
          for (int y = 0; y < h; ++y) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            for (int x = 0; x < w; ++x) {
              const int sx = x + kx - 1;
              if (sx < 0 || sx >= w) continue;
              cache.col(row, static_cast<Eigen::Index>(y) * w + x) =
                  in.data(ci, static_cast<Eigen::Index>(sy) * w + sx);
            }
          }
        }
    FeatureMap<Scalar> out;
    out.height = h;
    out.width = w;
    out.data.noalias() = weight_->value * cache.col;
    out.data.colwise() += bias_->value.col(0);
    return out;
  }

  /// Accumulates weight/bias gradients and returns the input gradient.
  FeatureMap<Scalar> backward(const Cache& cache, const FeatureMap<Scalar>& dout) const {
    weight_->grad.noalias() += dout.data * cache.col.transpose();
    bias_->grad.col(0) += dout.data.rowwise().sum();

    const Matrix<Scalar> dcol = weight_->value.transpose() * dout.data;
    const int h = cache.height;
    const int w = cache.width;
    FeatureMap<Scalar> din;
    din.height = h;
    din.width = w;
    din.data.setZero(in_ch_, static_cast<Eigen::Index>(h) * w);
    for (int ci = 0; ci < in_ch_; ++ci)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const Eigen::Index row = ci * 9 + ky * 3 + kx;
          for (int y = 0; y < h; ++y) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            for (int x = 0; x < w; ++x) {
              const int sx = x + kx - 1;
              if (sx < 0 || sx >= w) continue;
              din.data(ci, static_cast<Eigen::Index>(sy) * w + sx) +=
                  dcol(row, static_cast<Eigen::Index>(y) * w + x);
            }
          }
        }
    return din;
  }

 private:
  int in_ch_;
  Param<Scalar>* weight_;
  Param<Scalar>* bias_;
};

/// Per-channel batch normalization. In training mode statistics are taken
/// over the spatial positions of the current call and folded into running
/// buffers; inference uses the frozen buffers only, so results do not depend
/// on how samples are batched.
template <typename Scalar>
class BatchNorm {
 public:
  struct Cache {
    Matrix<Scalar> xhat;
    Vector<Scalar> inv_std;
    bool training = true;
  };

  BatchNorm(ParamRegistry<Scalar>& reg, const std::string& prefix, int channels)
      : channels_(channels),
        gamma_(&reg.add(prefix + ".gamma", channels, 1, Init::kOne)),
        beta_(&reg.add(prefix + ".beta", channels, 1, Init::kZero)),
        running_mean_(&reg.add(prefix + ".running_mean", channels, 1, Init::kZero,
                               0, false)),
        running_var_(&reg.add(prefix + ".running_var", channels, 1, Init::kOne,
                              0, false)) {}

  FeatureMap<Scalar> forward(const FeatureMap<Scalar>& in, bool training,
                             Cache& cache) const {
    if (in.channels() != channels_)
      throw ContractError(cat("batchnorm ", gamma_->name, ": channel mismatch"));
    const auto n = static_cast<Scalar>(in.data.cols());
    cache.training = training;
    cache.inv_std.resize(channels_);
    cache.xhat.resize(in.data.rows(), in.data.cols());

    FeatureMap<Scalar> out;
    out.height = in.height;
    out.width = in.width;
    out.data.resize(in.data.rows(), in.data.cols());
    for (int c = 0; c < channels_; ++c) {
      Scalar mean, var;
      if (training) {
        mean = in.data.row(c).mean();
        var = (in.data.row(c).array() - mean).square().sum() / n;
        running_mean_->value(c, 0) =
            (Scalar(1) - kMomentum) * running_mean_->value(c, 0) + kMomentum * mean;
        running_var_->value(c, 0) =
            (Scalar(1) - kMomentum) * running_var_->value(c, 0) + kMomentum * var;
      } else {
        mean = running_mean_->value(c, 0);
        var = running_var_->value(c, 0);
      }
      const Scalar inv = Scalar(1) / std::sqrt(var + kEps);
      cache.inv_std(c) = inv;
      cache.xhat.row(c) = (in.data.row(c).array() - mean) * inv;
      out.data.row(c) =
          (cache.xhat.row(c).array() * gamma_->value(c, 0) + beta_->value(c, 0)).matrix();
    }
    return out;
  }

  FeatureMap<Scalar> backward(const Cache& cache, const FeatureMap<Scalar>& dout) const {
    FeatureMap<Scalar> din;
    din.height = dout.height;
    din.width = dout.width;
    din.data.resize(dout.data.rows(), dout.data.cols());
    for (int c = 0; c < channels_; ++c) {
      const auto dy = dout.data.row(c).array();
      const auto xhat = cache.xhat.row(c).array();
      gamma_->grad(c, 0) += (dy * xhat).sum();
      beta_->grad(c, 0) += dy.sum();
      const Scalar g = gamma_->value(c, 0) * cache.inv_std(c);
      if (cache.training) {
        const Scalar mean_dy = dy.mean();
        const Scalar mean_dy_xhat = (dy * xhat).mean();
        din.data.row(c) = (g * (dy - mean_dy - xhat * mean_dy_xhat)).matrix();
      } else {
        din.data.row(c) = (g * dy).matrix();
      }
    }
    return din;
  }

 private:
  static constexpr Scalar kMomentum = Scalar(0.1);
  static constexpr Scalar kEps = Scalar(1e-5);

  int channels_;
  Param<Scalar>* gamma_;
  Param<Scalar>* beta_;
  Param<Scalar>* running_mean_;
  Param<Scalar>* running_var_;
};

/// Elementwise max(x, 0).
template <typename Scalar>
struct Relu {
  struct Cache {
    Matrix<Scalar> mask;
  };

  static FeatureMap<Scalar> forward(const FeatureMap<Scalar>& in, Cache& cache) {
    FeatureMap<Scalar> out;
    out.height = in.height;
    out.width = in.width;
    cache.mask = (in.data.array() > Scalar(0)).template cast<Scalar>();
    out.data = in.data.cwiseMax(Scalar(0));
    return out;
  }

  static FeatureMap<Scalar> backward(const Cache& cache, const FeatureMap<Scalar>& dout) {
    FeatureMap<Scalar> din;
    din.height = dout.height;
    din.width = dout.width;
    din.data = dout.data.cwiseProduct(cache.mask);
    return din;
  }
};

/// 2x2 max-pool, stride 2, floor semantics (odd trailing row/column dropped).
/// Ties resolve to the first position in row-major window order.
template <typename Scalar>
class MaxPool2x2 {
 public:
  struct Cache {
    std::vector<Eigen::Index> argmax;  // flat input index per (channel, out position)
    int in_height = 0;
    int in_width = 0;
  };

  static FeatureMap<Scalar> forward(const FeatureMap<Scalar>& in, Cache& cache) {
    const int oh = in.height / 2;
    const int ow = in.width / 2;
    if (oh < 1 || ow < 1)
      throw ContractError(cat("maxpool: input ", in.height, "x", in.width,
                              " too small to pool"));
    const int ch = in.channels();
    cache.in_height = in.height;
    cache.in_width = in.width;
    cache.argmax.assign(static_cast<std::size_t>(ch) * oh * ow, 0);

    FeatureMap<Scalar> out;
    out.height = oh;
    out.width = ow;
    out.data.resize(ch, static_cast<Eigen::Index>(oh) * ow);
    for (int c = 0; c < ch; ++c)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          Scalar best{};
          Eigen::Index best_idx = -1;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const Eigen::Index idx =
                  static_cast<Eigen::Index>(2 * y + dy) * in.width + (2 * x + dx);
              const Scalar v = in.data(c, idx);
              if (best_idx < 0 || v > best) {
                best = v;
                best_idx = idx;
              }
            }
          out.data(c, static_cast<Eigen::Index>(y) * ow + x) = best;
          cache.argmax[static_cast<std::size_t>(c) * oh * ow +
                       static_cast<std::size_t>(y) * ow + x] = best_idx;
        }
    return out;
  }

  static FeatureMap<Scalar> backward(const Cache& cache, const FeatureMap<Scalar>& dout) {
    const int ch = dout.channels();
    const int oh = dout.height;
    const int ow = dout.width;
    FeatureMap<Scalar> din;
    din.height = cache.in_height;
    din.width = cache.in_width;
    din.data.setZero(ch, static_cast<Eigen::Index>(cache.in_height) * cache.in_width);
    for (int c = 0; c < ch; ++c)
      for (Eigen::Index o = 0; o < static_cast<Eigen::Index>(oh) * ow; ++o)
        din.data(c, cache.argmax[static_cast<std::size_t>(c) * oh * ow +
                                 static_cast<std::size_t>(o)]) += dout.data(c, o);
    return din;
  }
};

}  // namespace pafs::model
