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
#include <functional>
#include <optional>
#include <vector>

#include "pafs/augment/specaugment.hpp"
#include "pafs/common.hpp"
#include "pafs/data/episode.hpp"
#include "pafs/errors.hpp"
#include "pafs/model/attention.hpp"
#include "pafs/model/backbone.hpp"
#include "pafs/model/projection.hpp"

namespace pafs::model {

enum class FusionKind { kAttention, kConcat };

struct ModelConfig {
  std::array<int, 4> conv_channels = {64, 64, 64, 64};
  int rnn_hidden = 64;
  RnnKind rnn_cell = RnnKind::kGru;
  EmbedMode embedding = EmbedMode::kFinalState;
  FusionKind fusion = FusionKind::kAttention;
  int attention_ff = 256;
  int proj_hidden = 128;
  int proj_dim = 64;
  bool project_queries = true;
  int input_mels = 64;
  int input_frames = 501;

  int embed_dim() const { return rnn_hidden; }
  int fused_dim() const { return 4 * rnn_hidden; }
  int contrastive_dim() const { return project_queries ? proj_dim : fused_dim(); }

  void validate() const {
    for (int c : conv_channels)
      if (c <= 0) throw ConfigError("model: conv channels must be positive");
    if (rnn_hidden <= 0) throw ConfigError("model: rnn_hidden must be positive");
    if (attention_ff <= 0) throw ConfigError("model: attention_ff must be positive");
    if (proj_hidden <= 0 || proj_dim <= 0)
      throw ConfigError("model: projection dims must be positive");
    int h = input_mels;
    int w = input_frames;
    for (int b = 0; b < 4; ++b) {
      h /= 2;
      w /= 2;
    }
    if (h < 1 || w < 1)
      throw ConfigError(cat("model: input ", input_mels, "x", input_frames,
                            " collapses to nothing after 4 pooling stages"));
  }
};

/// The full embedding path: shared CRNN over each of the 4 views, fusion into
/// one 4D-dim vector (self-attention or plain concatenation), and the
/// projection head into the contrastive space.
template <typename Scalar>
class EmbeddingModel {
 public:
  struct SampleTape {
    std::array<typename Backbone<Scalar>::Cache, 4> view;
    Matrix<Scalar> view_embeds;  // 4 x D
    typename AttentionEncoder<Scalar>::Cache attn;
  };

  using ProjCache = typename ProjectionHead<Scalar>::Cache;

  explicit EmbeddingModel(const ModelConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    backbone_.emplace(reg_, "backbone", cfg.conv_channels, cfg.rnn_cell,
                      cfg.rnn_hidden, cfg.embedding);
    if (cfg.fusion == FusionKind::kAttention)
      attention_.emplace(reg_, "fusion", cfg.embed_dim(), cfg.attention_ff);
    projection_.emplace(reg_, "projection", cfg.fused_dim(), cfg.proj_hidden,
                        cfg.proj_dim);
  }

  void initialize(std::uint64_t seed) { reg_.initialize(seed); }

  const ModelConfig& config() const { return cfg_; }
  ParamRegistry<Scalar>& params() { return reg_; }
  const ProjectionHead<Scalar>& projection() const { return *projection_; }

  /// Four augmented views -> one fused 4D-dim vector.
  Vector<Scalar> embed_views(const augment::AugmentedViews<Scalar>& views,
                             bool training, SampleTape& tape) const {
    const int d = cfg_.embed_dim();
    tape.view_embeds.resize(4, d);
    for (int v = 0; v < 4; ++v) {
      const auto& spec = views[static_cast<std::size_t>(v)];
      if (spec.rows() != cfg_.input_mels || spec.cols() != cfg_.input_frames)
        throw ContractError(cat("embed_views: view ", v, " is ", spec.rows(), "x",
                                spec.cols(), ", config expects ", cfg_.input_mels,
                                "x", cfg_.input_frames));
      tape.view_embeds.row(v) =
          backbone_->forward(spec, training, tape.view[static_cast<std::size_t>(v)])
              .transpose();
    }

    Matrix<Scalar> tokens = tape.view_embeds;
    if (attention_) tokens = attention_->forward(tape.view_embeds, tape.attn);

    Vector<Scalar> fused(cfg_.fused_dim());
    for (int v = 0; v < 4; ++v) fused.segment(v * d, d) = tokens.row(v).transpose();
    return fused;
  }

  /// Accumulates parameter gradients for one sample given d(fused). Returns
  /// the sum of the four per-view input gradients, which equals the input
  /// gradient when the views are plain copies of the original.
  Matrix<Scalar> backward_views(const SampleTape& tape, const Vector<Scalar>& dfused) const {
    const int d = cfg_.embed_dim();
    Matrix<Scalar> dtokens(4, d);
    for (int v = 0; v < 4; ++v) dtokens.row(v) = dfused.segment(v * d, d).transpose();

    Matrix<Scalar> dembeds = dtokens;
    if (attention_) dembeds = attention_->backward(tape.attn, dtokens);

    Matrix<Scalar> dinput =
        Matrix<Scalar>::Zero(cfg_.input_mels, cfg_.input_frames);
    for (int v = 0; v < 4; ++v)
      dinput += backbone_->backward(tape.view[static_cast<std::size_t>(v)],
                                    dembeds.row(v).transpose());
    return dinput;
  }

  /// rows x 4D -> rows x D', unit rows.
  Matrix<Scalar> project(const Matrix<Scalar>& fused, ProjCache& cache) const {
    return projection_->forward(fused, cache);
  }

  Matrix<Scalar> project_backward(const ProjCache& cache, const Matrix<Scalar>& dy) const {
    return projection_->backward(cache, dy);
  }

 private:
  ModelConfig cfg_;
  ParamRegistry<Scalar> reg_;
  std::optional<Backbone<Scalar>> backbone_;
  std::optional<AttentionEncoder<Scalar>> attention_;
  std::optional<ProjectionHead<Scalar>> projection_;
};

/// Fused embeddings for one episode, support rows then query rows, with the
/// per-sample tapes retained when a tape vector is supplied.
template <typename Scalar>
struct EpisodeEmbeddings {
  Matrix<Scalar> support;  // (n*k) x 4D
  Matrix<Scalar> query;    // (n*q) x 4D
  std::vector<int> support_labels;
  std::vector<int> query_labels;
};

/// Runs augment -> embed over every episode sample. `fetch` maps a record id
/// to its standardized F x T spectrogram. Augmentation streams are keyed per
/// sample ordinal from `aug_seed` (support first, then query); with
/// augment=false every sample contributes four copies of the original.
template <typename Scalar, typename Fetch>
EpisodeEmbeddings<Scalar> embed_episode(
    const EmbeddingModel<Scalar>& model, const data::Episode& ep, Fetch&& fetch,
    const augment::AugmentConfig& aug, bool augment, std::uint64_t aug_seed,
    bool training,
    std::vector<typename EmbeddingModel<Scalar>::SampleTape>* tapes = nullptr) {
  EpisodeEmbeddings<Scalar> out;
  const int fused_dim = model.config().fused_dim();
  out.support.resize(static_cast<Eigen::Index>(ep.support.size()), fused_dim);
  out.query.resize(static_cast<Eigen::Index>(ep.query.size()), fused_dim);
  if (tapes != nullptr) tapes->resize(ep.support.size() + ep.query.size());

  std::uint64_t ordinal = 0;
  auto run = [&](const data::EpisodeItem& item, Matrix<Scalar>& dst,
                 Eigen::Index row) {
    const Matrix<Scalar> spec = fetch(item.ref);
    augment::AugmentedViews<Scalar> views;
    if (augment) {
      Rng rng(mix_seed(aug_seed, ordinal));
      views = augment::augment_views(spec, aug, rng);
    } else {
      views = augment::replicate_views(spec);
    }
    typename EmbeddingModel<Scalar>::SampleTape local;
    auto& tape = tapes != nullptr ? (*tapes)[ordinal] : local;
    dst.row(row) = model.embed_views(views, training, tape).transpose();
    ++ordinal;
  };

  for (std::size_t i = 0; i < ep.support.size(); ++i) {
    run(ep.support[i], out.support, static_cast<Eigen::Index>(i));
    out.support_labels.push_back(ep.support[i].label);
  }
  for (std::size_t i = 0; i < ep.query.size(); ++i) {
    run(ep.query[i], out.query, static_cast<Eigen::Index>(i));
    out.query_labels.push_back(ep.query[i].label);
  }
  return out;
}

}  // namespace pafs::model
