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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pafs/common.hpp"
#include "pafs/errors.hpp"
#include "pafs/model/conv.hpp"
#include "pafs/model/rnn.hpp"

namespace pafs::model {

enum class EmbedMode { kFinalState, kTemporalMean };

/// CRNN: four conv blocks (3x3 conv, batch norm, ReLU, 2x2 max-pool), mean
/// collapse over the remaining frequency rows, then a recurrent layer over
/// the remaining time steps. The embedding is the final hidden state or the
/// temporal mean of hidden states.
template <typename Scalar>
class Backbone {
 public:
  static constexpr int kBlocks = 4;

  struct Cache {
    std::array<typename Conv3x3<Scalar>::Cache, kBlocks> conv;
    std::array<typename BatchNorm<Scalar>::Cache, kBlocks> bn;
    std::array<typename Relu<Scalar>::Cache, kBlocks> relu;
    std::array<typename MaxPool2x2<Scalar>::Cache, kBlocks> pool;
    typename Rnn<Scalar>::Cache rnn;
    Matrix<Scalar> h_all;  // hidden x seq_len
    int collapse_rows = 0;
    int seq_len = 0;
  };

  Backbone(ParamRegistry<Scalar>& reg, const std::string& prefix,
           const std::array<int, kBlocks>& channels, RnnKind rnn_kind, int rnn_hidden,
           EmbedMode mode)
      : mode_(mode) {
    int in_ch = 1;
    for (int b = 0; b < kBlocks; ++b) {
      const std::string p = cat(prefix, ".block", b);
      convs_.emplace_back(reg, p + ".conv", in_ch, channels[static_cast<std::size_t>(b)]);
      bns_.emplace_back(reg, p + ".bn", channels[static_cast<std::size_t>(b)]);
      in_ch = channels[static_cast<std::size_t>(b)];
    }
    rnn_.emplace(reg, prefix + ".rnn", rnn_kind, in_ch, rnn_hidden);
  }

  int embed_dim() const { return rnn_->hidden_dim(); }

  /// spec is an F x T matrix; returns the D-dim embedding.
  Vector<Scalar> forward(const Matrix<Scalar>& spec, bool training, Cache& cache) const {
    FeatureMap<Scalar> x;
    x.height = static_cast<int>(spec.rows());
    x.width = static_cast<int>(spec.cols());
    x.data.resize(1, spec.size());
    for (int f = 0; f < x.height; ++f)
      for (int t = 0; t < x.width; ++t)
        x.data(0, static_cast<Eigen::Index>(f) * x.width + t) = spec(f, t);

    for (int b = 0; b < kBlocks; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      x = convs_[bi].forward(x, cache.conv[bi]);
      x = bns_[bi].forward(x, training, cache.bn[bi]);
      x = Relu<Scalar>::forward(x, cache.relu[bi]);
      x = MaxPool2x2<Scalar>::forward(x, cache.pool[bi]);
    }

    cache.collapse_rows = x.height;
    cache.seq_len = x.width;
    Matrix<Scalar> seq = Matrix<Scalar>::Zero(x.channels(), x.width);
    for (int h = 0; h < x.height; ++h)
      seq += x.data.middleCols(static_cast<Eigen::Index>(h) * x.width, x.width);
    seq /= static_cast<Scalar>(x.height);

    cache.h_all = rnn_->forward(seq, cache.rnn);
    if (mode_ == EmbedMode::kFinalState) return cache.h_all.col(cache.seq_len - 1);
    return cache.h_all.rowwise().mean();
  }

  /// Accumulates parameter gradients for one sample given d(embedding) and
  /// returns the F x T gradient w.r.t. the input spectrogram.
  Matrix<Scalar> backward(const Cache& cache, const Vector<Scalar>& dembed) const {
    Matrix<Scalar> dh = Matrix<Scalar>::Zero(cache.h_all.rows(), cache.h_all.cols());
    if (mode_ == EmbedMode::kFinalState) {
      dh.col(cache.seq_len - 1) = dembed;
    } else {
      dh = (dembed / static_cast<Scalar>(cache.seq_len)).replicate(1, cache.seq_len);
    }
    const Matrix<Scalar> dseq = rnn_->backward(cache.rnn, dh);

    FeatureMap<Scalar> d;
    d.height = cache.collapse_rows;
    d.width = cache.seq_len;
    d.data.resize(dseq.rows(), static_cast<Eigen::Index>(d.height) * d.width);
    const Matrix<Scalar> per_row = dseq / static_cast<Scalar>(cache.collapse_rows);
    for (int h = 0; h < d.height; ++h)
      d.data.middleCols(static_cast<Eigen::Index>(h) * d.width, d.width) = per_row;

    for (int b = kBlocks - 1; b >= 0; --b) {
      const auto bi = static_cast<std::size_t>(b);
      d = MaxPool2x2<Scalar>::backward(cache.pool[bi], d);
      d = Relu<Scalar>::backward(cache.relu[bi], d);
      d = bns_[bi].backward(cache.bn[bi], d);
      d = convs_[bi].backward(cache.conv[bi], d);
    }

    Matrix<Scalar> dspec(d.height, d.width);
    for (int f = 0; f < d.height; ++f)
      for (int t = 0; t < d.width; ++t)
        dspec(f, t) = d.data(0, static_cast<Eigen::Index>(f) * d.width + t);
    return dspec;
  }

 private:
  EmbedMode mode_;
  std::vector<Conv3x3<Scalar>> convs_;
  std::vector<BatchNorm<Scalar>> bns_;
  std::optional<Rnn<Scalar>> rnn_;
};

}  // namespace pafs::model
