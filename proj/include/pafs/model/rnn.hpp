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

#include "pafs/common.hpp"
#include "pafs/errors.hpp"
#include "pafs/model/params.hpp"

namespace pafs::model {

enum class RnnKind { kGru, kTanh };

/// Single-layer unidirectional recurrent network. The gated cell follows the
/// r/z/n gate layout with separate input and hidden biases:
///   r = sig(Wi_r x + bi_r + Wh_r h + bh_r)
///   z = sig(Wi_z x + bi_z + Wh_z h + bh_z)
///   n = tanh(Wi_n x + bi_n + r * (Wh_n h + bh_n))
///   h' = (1 - z) * n + z * h
/// The plain cell is h' = tanh(Wi x + bi + Wh h + bh). Initial state is zero.
template <typename Scalar>
class Rnn {
 public:
  struct Cache {
    Matrix<Scalar> x;      // input copy, in_dim x T
    Matrix<Scalar> h_all;  // hidden x (T+1), column 0 is h0 = 0
    Matrix<Scalar> r, z, n, gh_n;  // gated cell only, hidden x T
  };

  Rnn(ParamRegistry<Scalar>& reg, const std::string& prefix, RnnKind kind,
      int in_dim, int hidden)
      : kind_(kind), in_dim_(in_dim), hidden_(hidden) {
    const int gate_rows = (kind == RnnKind::kGru ? 3 : 1) * hidden;
    w_ih_ = &reg.add(prefix + ".w_ih", gate_rows, in_dim, Init::kUniformFanIn, in_dim);
    w_hh_ = &reg.add(prefix + ".w_hh", gate_rows, hidden, Init::kUniformFanIn, hidden);
    b_ih_ = &reg.add(prefix + ".b_ih", gate_rows, 1, Init::kZero);
    b_hh_ = &reg.add(prefix + ".b_hh", gate_rows, 1, Init::kZero);
  }

  int hidden_dim() const { return hidden_; }

  /// Input is in_dim x T (one column per time step); returns hidden x T.
  Matrix<Scalar> forward(const Matrix<Scalar>& input, Cache& cache) const {
    if (input.rows() != in_dim_)
      throw ContractError(cat("rnn ", w_ih_->name, ": input dim ", input.rows(),
                              ", expected ", in_dim_));
    const auto t_len = input.cols();
    if (t_len < 1) throw ContractError("rnn: empty input sequence");

    cache.x = input;
    cache.h_all.setZero(hidden_, t_len + 1);
    if (kind_ == RnnKind::kGru) {
      cache.r.resize(hidden_, t_len);
      cache.z.resize(hidden_, t_len);
      cache.n.resize(hidden_, t_len);
      cache.gh_n.resize(hidden_, t_len);
    }

    const Matrix<Scalar> gi_all = (w_ih_->value * input).colwise() + b_ih_->value.col(0);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      const auto h_prev = cache.h_all.col(t);
      const Vector<Scalar> gh = w_hh_->value * h_prev + b_hh_->value.col(0);
      if (kind_ == RnnKind::kGru) {
        const auto gi = gi_all.col(t);
        cache.r.col(t) =
            sigmoid(gi.segment(0, hidden_) + gh.segment(0, hidden_));
        cache.z.col(t) =
            sigmoid(gi.segment(hidden_, hidden_) + gh.segment(hidden_, hidden_));
        cache.gh_n.col(t) = gh.segment(2 * hidden_, hidden_);
        cache.n.col(t) = (gi.segment(2 * hidden_, hidden_).array() +
                          cache.r.col(t).array() * cache.gh_n.col(t).array())
                             .tanh()
                             .matrix();
        cache.h_all.col(t + 1) =
            ((Scalar(1) - cache.z.col(t).array()) * cache.n.col(t).array() +
             cache.z.col(t).array() * h_prev.array())
                .matrix();
      } else {
        cache.h_all.col(t + 1) = (gi_all.col(t) + gh).array().tanh().matrix();
      }
    }
    return cache.h_all.rightCols(t_len);
  }

  /// dh is hidden x T, the loss gradient w.r.t. every emitted hidden state.
  /// Returns the input gradient and accumulates parameter gradients.
  Matrix<Scalar> backward(const Cache& cache, const Matrix<Scalar>& dh) const {
    const auto t_len = cache.x.cols();
    Matrix<Scalar> dx(in_dim_, t_len);
    Vector<Scalar> carry = Vector<Scalar>::Zero(hidden_);

    for (Eigen::Index t = t_len - 1; t >= 0; --t) {
      const Vector<Scalar> dht = dh.col(t) + carry;
      const auto h_prev = cache.h_all.col(t);
      if (kind_ == RnnKind::kGru) {
        const auto r = cache.r.col(t).array();
        const auto z = cache.z.col(t).array();
        const auto n = cache.n.col(t).array();
        const Vector<Scalar> dz =
            (dht.array() * (h_prev.array() - n)).matrix();
        const Vector<Scalar> dn = (dht.array() * (Scalar(1) - z)).matrix();
        const Vector<Scalar> dn_pre =
            (dn.array() * (Scalar(1) - n.square())).matrix();
        const Vector<Scalar> dr =
            (dn_pre.array() * cache.gh_n.col(t).array()).matrix();
        const Vector<Scalar> dr_pre = (dr.array() * r * (Scalar(1) - r)).matrix();
        const Vector<Scalar> dz_pre = (dz.array() * z * (Scalar(1) - z)).matrix();

        Vector<Scalar> dgi(3 * hidden_);
        dgi << dr_pre, dz_pre, dn_pre;
        Vector<Scalar> dgh(3 * hidden_);
        dgh << dr_pre, dz_pre, (dn_pre.array() * r).matrix();

        w_ih_->grad.noalias() += dgi * cache.x.col(t).transpose();
        w_hh_->grad.noalias() += dgh * h_prev.transpose();
        b_ih_->grad.col(0) += dgi;
        b_hh_->grad.col(0) += dgh;
        dx.col(t).noalias() = w_ih_->value.transpose() * dgi;
        carry.noalias() = w_hh_->value.transpose() * dgh;
        carry.array() += dht.array() * z;
      } else {
        const auto h = cache.h_all.col(t + 1).array();
        const Vector<Scalar> dpre = (dht.array() * (Scalar(1) - h.square())).matrix();
        w_ih_->grad.noalias() += dpre * cache.x.col(t).transpose();
        w_hh_->grad.noalias() += dpre * h_prev.transpose();
        b_ih_->grad.col(0) += dpre;
        b_hh_->grad.col(0) += dpre;
        dx.col(t).noalias() = w_ih_->value.transpose() * dpre;
        carry.noalias() = w_hh_->value.transpose() * dpre;
      }
    }
    return dx;
  }

 private:
  static Vector<Scalar> sigmoid(const Vector<Scalar>& v) {
    return (Scalar(1) / (Scalar(1) + (-v.array()).exp())).matrix();
  }

  RnnKind kind_;
  int in_dim_;
  int hidden_;
  Param<Scalar>* w_ih_ = nullptr;
  Param<Scalar>* w_hh_ = nullptr;
  Param<Scalar>* b_ih_ = nullptr;
  Param<Scalar>* b_hh_ = nullptr;
};

}  // namespace pafs::model
