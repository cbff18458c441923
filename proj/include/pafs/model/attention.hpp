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

#include "pafs/common.hpp"
#include "pafs/errors.hpp"
#include "pafs/model/params.hpp"

namespace pafs::model {

/// One transformer encoder layer, single head, no positional encoding:
/// scaled dot-product self-attention and a position-wise feedforward, each
/// followed by a residual add and layer normalization. Rows are tokens.
template <typename Scalar>
class AttentionEncoder {
 public:
  struct Cache {
    Matrix<Scalar> x, q, k, v, p, a, add1, x1hat, x1, h1pre, h1, add2, x2hat;
    Vector<Scalar> inv_std1, inv_std2;
  };

  AttentionEncoder(ParamRegistry<Scalar>& reg, const std::string& prefix, int dim,
                   int ff_dim)
      : dim_(dim), ff_dim_(ff_dim) {
    wq_ = &reg.add(prefix + ".wq", dim, dim, Init::kUniformFanIn, dim);
    bq_ = &reg.add(prefix + ".bq", dim, 1, Init::kZero);
    wk_ = &reg.add(prefix + ".wk", dim, dim, Init::kUniformFanIn, dim);
    bk_ = &reg.add(prefix + ".bk", dim, 1, Init::kZero);
    wv_ = &reg.add(prefix + ".wv", dim, dim, Init::kUniformFanIn, dim);
    bv_ = &reg.add(prefix + ".bv", dim, 1, Init::kZero);
    wo_ = &reg.add(prefix + ".wo", dim, dim, Init::kUniformFanIn, dim);
    bo_ = &reg.add(prefix + ".bo", dim, 1, Init::kZero);
    ln1_g_ = &reg.add(prefix + ".ln1.gamma", dim, 1, Init::kOne);
    ln1_b_ = &reg.add(prefix + ".ln1.beta", dim, 1, Init::kZero);
    ff_w1_ = &reg.add(prefix + ".ff.w1", ff_dim, dim, Init::kUniformFanIn, dim);
    ff_b1_ = &reg.add(prefix + ".ff.b1", ff_dim, 1, Init::kZero);
    ff_w2_ = &reg.add(prefix + ".ff.w2", dim, ff_dim, Init::kUniformFanIn, ff_dim);
    ff_b2_ = &reg.add(prefix + ".ff.b2", dim, 1, Init::kZero);
    ln2_g_ = &reg.add(prefix + ".ln2.gamma", dim, 1, Init::kOne);
    ln2_b_ = &reg.add(prefix + ".ln2.beta", dim, 1, Init::kZero);
  }

  /// tokens x dim in, tokens x dim out.
  Matrix<Scalar> forward(const Matrix<Scalar>& x, Cache& cache) const {
    if (x.cols() != dim_)
      throw ContractError(cat("attention: token dim ", x.cols(), ", expected ", dim_));
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dim_));
    cache.x = x;
    cache.q = (x * wq_->value.transpose()).rowwise() + bq_->value.col(0).transpose();
    cache.k = (x * wk_->value.transpose()).rowwise() + bk_->value.col(0).transpose();
    cache.v = (x * wv_->value.transpose()).rowwise() + bv_->value.col(0).transpose();

    Matrix<Scalar> scores = cache.q * cache.k.transpose() * scale;
    cache.p.resize(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      const Scalar m = scores.row(i).maxCoeff();
      const auto e = (scores.row(i).array() - m).exp();
      cache.p.row(i) = (e / e.sum()).matrix();
    }
    cache.a.noalias() = cache.p * cache.v;
    const Matrix<Scalar> o =
        (cache.a * wo_->value.transpose()).rowwise() + bo_->value.col(0).transpose();

    cache.add1 = x + o;
    cache.x1 = layer_norm(cache.add1, *ln1_g_, *ln1_b_, cache.x1hat, cache.inv_std1);

    cache.h1pre = (cache.x1 * ff_w1_->value.transpose()).rowwise() +
                  ff_b1_->value.col(0).transpose();
    cache.h1 = cache.h1pre.cwiseMax(Scalar(0));
    const Matrix<Scalar> f = (cache.h1 * ff_w2_->value.transpose()).rowwise() +
                             ff_b2_->value.col(0).transpose();

    cache.add2 = cache.x1 + f;
    return layer_norm(cache.add2, *ln2_g_, *ln2_b_, cache.x2hat, cache.inv_std2);
  }

  Matrix<Scalar> backward(const Cache& cache, const Matrix<Scalar>& dout) const {
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dim_));

    Matrix<Scalar> dadd2 =
        layer_norm_backward(dout, cache.x2hat, cache.inv_std2, *ln2_g_, *ln2_b_);
    Matrix<Scalar> dx1 = dadd2;

    const Matrix<Scalar>& df = dadd2;
    Matrix<Scalar> dh1 = df * ff_w2_->value;
    ff_w2_->grad.noalias() += df.transpose() * cache.h1;
    ff_b2_->grad.col(0) += df.colwise().sum().transpose();
    Matrix<Scalar> dh1pre =
        dh1.cwiseProduct((cache.h1pre.array() > Scalar(0)).template cast<Scalar>().matrix());
    ff_w1_->grad.noalias() += dh1pre.transpose() * cache.x1;
    ff_b1_->grad.col(0) += dh1pre.colwise().sum().transpose();
    dx1.noalias() += dh1pre * ff_w1_->value;

    Matrix<Scalar> dadd1 =
        layer_norm_backward(dx1, cache.x1hat, cache.inv_std1, *ln1_g_, *ln1_b_);
    Matrix<Scalar> dx = dadd1;
    const Matrix<Scalar>& do_ = dadd1;

    Matrix<Scalar> da = do_ * wo_->value;
    wo_->grad.noalias() += do_.transpose() * cache.a;
    bo_->grad.col(0) += do_.colwise().sum().transpose();

    Matrix<Scalar> dp = da * cache.v.transpose();
    Matrix<Scalar> dv = cache.p.transpose() * da;

    Matrix<Scalar> ds(dp.rows(), dp.cols());
    for (Eigen::Index i = 0; i < dp.rows(); ++i) {
      const Scalar dot = dp.row(i).dot(cache.p.row(i));
      ds.row(i) = (cache.p.row(i).array() * (dp.row(i).array() - dot)).matrix();
    }

    Matrix<Scalar> dq = ds * cache.k * scale;
    Matrix<Scalar> dk = ds.transpose() * cache.q * scale;

    dx.noalias() += dq * wq_->value;
    wq_->grad.noalias() += dq.transpose() * cache.x;
    bq_->grad.col(0) += dq.colwise().sum().transpose();
    dx.noalias() += dk * wk_->value;
    wk_->grad.noalias() += dk.transpose() * cache.x;
    bk_->grad.col(0) += dk.colwise().sum().transpose();
    dx.noalias() += dv * wv_->value;
    wv_->grad.noalias() += dv.transpose() * cache.x;
    bv_->grad.col(0) += dv.colwise().sum().transpose();
    return dx;
  }

 private:
  static constexpr Scalar kEps = Scalar(1e-5);

  /// Row-wise layer normalization; xhat and inv_std are filled for backward.
  Matrix<Scalar> layer_norm(const Matrix<Scalar>& x, const Param<Scalar>& gamma,
                            const Param<Scalar>& beta, Matrix<Scalar>& xhat,
                            Vector<Scalar>& inv_std) const {
    const auto d = static_cast<Scalar>(x.cols());
    xhat.resize(x.rows(), x.cols());
    inv_std.resize(x.rows());
    Matrix<Scalar> out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Scalar mean = x.row(i).mean();
      const Scalar var = (x.row(i).array() - mean).square().sum() / d;
      const Scalar inv = Scalar(1) / std::sqrt(var + kEps);
      inv_std(i) = inv;
      xhat.row(i) = ((x.row(i).array() - mean) * inv).matrix();
      out.row(i) = (xhat.row(i).array() * gamma.value.col(0).transpose().array() +
                    beta.value.col(0).transpose().array())
                       .matrix();
    }
    return out;
  }

  Matrix<Scalar> layer_norm_backward(const Matrix<Scalar>& dy,
                                     const Matrix<Scalar>& xhat,
                                     const Vector<Scalar>& inv_std,
                                     Param<Scalar>& gamma, Param<Scalar>& beta) const {
    Matrix<Scalar> dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
      const auto dyr = dy.row(i).array();
      const auto xh = xhat.row(i).array();
      gamma.grad.col(0) += (dyr * xh).matrix().transpose();
      beta.grad.col(0) += dy.row(i).transpose();
      const auto dxhat = dyr * gamma.value.col(0).transpose().array();
      const Scalar m1 = dxhat.mean();
      const Scalar m2 = (dxhat * xh).mean();
      dx.row(i) = (inv_std(i) * (dxhat - m1 - xh * m2)).matrix();
    }
    return dx;
  }

  int dim_;
  int ff_dim_;
  Param<Scalar>*wq_, *bq_, *wk_, *bk_, *wv_, *bv_, *wo_, *bo_;
  Param<Scalar>*ln1_g_, *ln1_b_, *ff_w1_, *ff_b1_, *ff_w2_, *ff_b2_, *ln2_g_, *ln2_b_;
};

}  // namespace pafs::model
