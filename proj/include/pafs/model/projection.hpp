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

#include <cmath>
#include <cstdint>
#include <vector>

#include "pafs/common.hpp"
#include "pafs/errors.hpp"
#include "pafs/model/params.hpp"

namespace pafs::model {

template <typename Scalar>
struct NormalizeCache {
  Matrix<Scalar> y;
  Vector<Scalar> norms;
  std::vector<char> degenerate;
};

/// L2-normalizes each row. A row with norm <= 1e-12 becomes the first unit
/// basis vector instead of dividing by ~0; `zero_count` (if given) counts
/// such rows and their gradient is zero.
template <typename Scalar>
Matrix<Scalar> normalize_rows(const Matrix<Scalar>& u, NormalizeCache<Scalar>& cache,
                              std::int64_t* zero_count = nullptr) {
  cache.y.resize(u.rows(), u.cols());
  cache.norms.resize(u.rows());
  cache.degenerate.assign(static_cast<std::size_t>(u.rows()), 0);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const Scalar norm = u.row(i).norm();
    cache.norms(i) = norm;
    if (norm <= Scalar(1e-12)) {
      cache.y.row(i).setZero();
      cache.y(i, 0) = Scalar(1);
      cache.degenerate[static_cast<std::size_t>(i)] = 1;
      if (zero_count != nullptr) ++*zero_count;
    } else {
      cache.y.row(i) = u.row(i) / norm;
    }
  }
  return cache.y;
}

template <typename Scalar>
Matrix<Scalar> normalize_rows_backward(const NormalizeCache<Scalar>& cache,
                                       const Matrix<Scalar>& dy) {
  Matrix<Scalar> du(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    if (cache.degenerate[static_cast<std::size_t>(i)]) {
      du.row(i).setZero();
      continue;
    }
    const Scalar dot = dy.row(i).dot(cache.y.row(i));
    du.row(i) = (dy.row(i) - dot * cache.y.row(i)) / cache.norms(i);
  }
  return du;
}

/// Two-layer projection into the contrastive space followed by row
/// normalization: in -> hidden (ReLU) -> out, rows unit L2.
template <typename Scalar>
class ProjectionHead {
 public:
  struct Cache {
    Matrix<Scalar> x, h1pre, h1, u;
    NormalizeCache<Scalar> norm;
  };

  ProjectionHead(ParamRegistry<Scalar>& reg, const std::string& prefix, int in_dim,
                 int hidden_dim, int out_dim)
      : in_dim_(in_dim) {
    w1_ = &reg.add(prefix + ".w1", hidden_dim, in_dim, Init::kUniformFanIn, in_dim);
    b1_ = &reg.add(prefix + ".b1", hidden_dim, 1, Init::kZero);
    w2_ = &reg.add(prefix + ".w2", out_dim, hidden_dim, Init::kUniformFanIn, hidden_dim);
    b2_ = &reg.add(prefix + ".b2", out_dim, 1, Init::kZero);
  }

  /// rows x in_dim -> rows x out_dim, each output row unit norm.
  Matrix<Scalar> forward(const Matrix<Scalar>& x, Cache& cache) const {
    if (x.cols() != in_dim_)
      throw ContractError(cat("projection: input dim ", x.cols(), ", expected ", in_dim_));
    cache.x = x;
    cache.h1pre = (x * w1_->value.transpose()).rowwise() + b1_->value.col(0).transpose();
    cache.h1 = cache.h1pre.cwiseMax(Scalar(0));
    cache.u =
        (cache.h1 * w2_->value.transpose()).rowwise() + b2_->value.col(0).transpose();
    return normalize_rows(cache.u, cache.norm, &zero_norm_count_);
  }

  Matrix<Scalar> backward(const Cache& cache, const Matrix<Scalar>& dy) const {
    const Matrix<Scalar> du = normalize_rows_backward(cache.norm, dy);
    Matrix<Scalar> dh1 = du * w2_->value;
    w2_->grad.noalias() += du.transpose() * cache.h1;
    b2_->grad.col(0) += du.colwise().sum().transpose();
    const Matrix<Scalar> dh1pre = dh1.cwiseProduct(
        (cache.h1pre.array() > Scalar(0)).template cast<Scalar>().matrix());
    w1_->grad.noalias() += dh1pre.transpose() * cache.x;
    b1_->grad.col(0) += dh1pre.colwise().sum().transpose();
    return dh1pre * w1_->value;
  }

  /// Rows replaced by e1 because their projection collapsed to zero norm.
  std::int64_t zero_norm_count() const { return zero_norm_count_; }

 private:
  int in_dim_;
  Param<Scalar>*w1_, *b1_, *w2_, *b2_;
  mutable std::int64_t zero_norm_count_ = 0;
};

}  // namespace pafs::model
