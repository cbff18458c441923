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
#include <cstdint>
#include <vector>

#include "pafs/loss/angular.hpp"
#include "pafs/loss/cpl.hpp"
#include "pafs/loss/few_shot.hpp"
#include "pafs/loss/prototypes.hpp"
#include "pafs/loss/report.hpp"
#include "pafs/model/embedding.hpp"

namespace pafs::train {

struct LossConfig {
  loss::LossKind kind = loss::LossKind::kFs;
  double lambda = 0.3;
  loss::FewShotConfig fs;
  loss::CplConfig cpl;
  loss::AplConfig apl;
};

template <typename Scalar>
struct ObjectiveResult {
  loss::LossReport report;
  /// d L_total / d fused support and query rows (filled when grads requested).
  Matrix<Scalar> dsupport;
  Matrix<Scalar> dquery;
  /// The negative draws / mined triplets actually used, for oracle replay.
  loss::CplNegatives cpl_negatives;
  std::vector<loss::Triplet> triplets;
  int cpl_clamp_events = 0;
};

/// Computes L_total = L_fs + lambda * L_cm on an embedded episode and, when
/// `want_grads` is set, backpropagates through prototypes, projection and
/// normalization into the fused support/query rows. Projection-head parameter
/// gradients accumulate into the model registry as a side effect.
///
/// `cpl_rng` drives negative sampling for the contrastive loss; pass frozen
/// draws / a frozen triplet list instead to replay or to finite-difference
/// across a fixed mining decision.
template <typename Scalar>
ObjectiveResult<Scalar> episode_objective(
    const model::EmbeddingModel<Scalar>& model,
    const model::EpisodeEmbeddings<Scalar>& emb, const LossConfig& cfg,
    Rng* cpl_rng = nullptr, bool want_grads = false,
    const loss::CplNegatives* frozen_negatives = nullptr,
    const std::vector<loss::Triplet>* frozen_triplets = nullptr) {
  const int n_way = static_cast<int>(
      *std::max_element(emb.support_labels.begin(), emb.support_labels.end()) + 1);
  const int k_shot = static_cast<int>(emb.support.rows()) / n_way;

  ObjectiveResult<Scalar> out;
  Matrix<Scalar> protos_fused =
      loss::compute_prototypes(emb.support, emb.support_labels, n_way);

  Matrix<Scalar> dq_fs, dp_fs;
  const Scalar l_fs = loss::few_shot_loss(
      emb.query, emb.query_labels, protos_fused, cfg.fs,
      want_grads ? &dq_fs : nullptr, want_grads ? &dp_fs : nullptr);

  Scalar l_cm = 0;
  Matrix<Scalar> dproto_fused;
  Matrix<Scalar> dquery_fused;
  if (want_grads) {
    dproto_fused.setZero(protos_fused.rows(), protos_fused.cols());
    dquery_fused.setZero(emb.query.rows(), emb.query.cols());
    dquery_fused += dq_fs;
    dproto_fused += dp_fs;
  }

  if (cfg.kind != loss::LossKind::kFs) {
    const auto lambda = static_cast<Scalar>(cfg.lambda);
    typename model::EmbeddingModel<Scalar>::ProjCache proto_cache, query_cache;
    model::NormalizeCache<Scalar> query_norm_cache;

    const Matrix<Scalar> protos_hat = model.project(protos_fused, proto_cache);
    Matrix<Scalar> queries_hat;
    if (model.config().project_queries) {
      queries_hat = model.project(emb.query, query_cache);
    } else {
      queries_hat = model::normalize_rows(emb.query, query_norm_cache);
    }

    Matrix<Scalar> dprotos_hat, dqueries_hat;
    if (cfg.kind == loss::LossKind::kFsCpl) {
      if (frozen_negatives != nullptr) {
        out.cpl_negatives = *frozen_negatives;
      } else {
        if (cpl_rng == nullptr)
          throw ContractError("episode_objective: contrastive loss needs an rng");
        out.cpl_negatives =
            loss::draw_cpl_negatives(emb.query_labels, n_way, cfg.cpl.m, *cpl_rng,
                                     &out.cpl_clamp_events);
      }
      l_cm = loss::cpl_loss(protos_hat, queries_hat, emb.query_labels, cfg.cpl,
                            out.cpl_negatives, want_grads ? &dprotos_hat : nullptr,
                            want_grads ? &dqueries_hat : nullptr);
    } else {
      cfg.apl.validate();
      Matrix<Scalar> batch(protos_hat.rows() + queries_hat.rows(), protos_hat.cols());
      batch << protos_hat, queries_hat;
      std::vector<int> batch_labels;
      for (int c = 0; c < n_way; ++c) batch_labels.push_back(c);
      batch_labels.insert(batch_labels.end(), emb.query_labels.begin(),
                          emb.query_labels.end());
      if (frozen_triplets != nullptr) {
        out.triplets = *frozen_triplets;
      } else {
        out.triplets = loss::mine_triplets(batch, batch_labels, n_way,
                                           cfg.apl.alpha_deg, cfg.apl.anchor_mode);
      }
      Matrix<Scalar> dbatch;
      l_cm = loss::apl_loss(batch, out.triplets, cfg.apl.alpha_deg,
                            want_grads ? &dbatch : nullptr);
      if (want_grads) {
        dprotos_hat = dbatch.topRows(n_way);
        dqueries_hat = dbatch.bottomRows(queries_hat.rows());
      }
    }

    if (want_grads) {
      dproto_fused += model.project_backward(proto_cache, (lambda * dprotos_hat).eval());
      if (model.config().project_queries) {
        dquery_fused +=
            model.project_backward(query_cache, (lambda * dqueries_hat).eval());
      } else {
        dquery_fused += model::normalize_rows_backward(query_norm_cache,
                                                       (lambda * dqueries_hat).eval());
      }
    }
  }

  out.report = loss::total_loss(static_cast<double>(l_fs), static_cast<double>(l_cm),
                                cfg.kind == loss::LossKind::kFs ? 0.0 : cfg.lambda);
  out.report.triplets_mined = static_cast<std::int64_t>(out.triplets.size());

  if (want_grads) {
    out.dquery = dquery_fused;
    out.dsupport.setZero(emb.support.rows(), emb.support.cols());
    for (Eigen::Index i = 0; i < emb.support.rows(); ++i)
      out.dsupport.row(i) +=
          dproto_fused.row(emb.support_labels[static_cast<std::size_t>(i)]) /
          static_cast<Scalar>(k_shot);
  }
  return out;
}

}  // namespace pafs::train
