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
#include <vector>

#include "pafs/common.hpp"
#include "pafs/errors.hpp"
#include "pafs/rng.hpp"

namespace pafs::loss {

struct CplConfig {
  double temperature = 0.1;
  int m = 5;  // negatives sampled per (class, positive) term

  void validate() const {
    if (temperature <= 0.0) throw ConfigError("cpl.temperature must be positive");
    if (m < 1) throw ConfigError("cpl.m must be at least 1");
  }
};

/// negatives[c][j] holds the query indices drawn as negatives for the j-th
/// positive (in query order) of class c.
using CplNegatives = std::vector<std::vector<std::vector<int>>>;

/// Draws the negative sets for every (class, positive) term: per term, m
/// distinct queries with a different label, uniformly without replacement.
/// When fewer than m negatives exist, the draw is clamped and (if given)
/// `clamp_events` is incremented.
inline CplNegatives draw_cpl_negatives(const std::vector<int>& query_labels, int n_way,
                                       int m, Rng& rng, int* clamp_events = nullptr) {
  CplNegatives negatives(static_cast<std::size_t>(n_way));
  for (int c = 0; c < n_way; ++c) {
    std::vector<int> pool;  // queries with label != c, in query order
    int positives = 0;
    for (std::size_t i = 0; i < query_labels.size(); ++i) {
      if (query_labels[i] == c)
        ++positives;
      else
        pool.push_back(static_cast<int>(i));
    }
    int draw = m;
    if (draw > static_cast<int>(pool.size())) {
      draw = static_cast<int>(pool.size());
      if (clamp_events != nullptr) ++*clamp_events;
    }
    for (int j = 0; j < positives; ++j) {
      const auto picks =
          rng.sample_without_replacement(static_cast<int>(pool.size()), draw);
      std::vector<int> chosen;
      chosen.reserve(picks.size());
      for (int idx : picks) chosen.push_back(pool[static_cast<std::size_t>(idx)]);
      negatives[static_cast<std::size_t>(c)].push_back(std::move(chosen));
    }
  }
  return negatives;
}

/// Contrastive loss with prototypes as anchors and queries as positives:
/// mean over all n*q (class, positive) terms of
///   -log( exp(<p_c, x>/T) / (exp(<p_c, x>/T) + sum_neg exp(<p_c, x_t>/T)) ).
/// Rows must be unit-normalized. Optional outputs receive gradients.
template <typename Scalar>
Scalar cpl_loss(const Matrix<Scalar>& prototypes, const Matrix<Scalar>& queries,
                const std::vector<int>& query_labels, const CplConfig& cfg,
                const CplNegatives& negatives,
                Matrix<Scalar>* dprototypes = nullptr,
                Matrix<Scalar>* dqueries = nullptr) {
  cfg.validate();
  if (prototypes.cols() != queries.cols())
    throw ContractError("cpl_loss: prototype/query dim mismatch");
  if (static_cast<Eigen::Index>(query_labels.size()) != queries.rows())
    throw ContractError("cpl_loss: label count != query rows");
  const int n_way = static_cast<int>(prototypes.rows());
  if (static_cast<int>(negatives.size()) != n_way)
    throw ContractError("cpl_loss: negative draws do not cover every class");
  const auto inv_t = static_cast<Scalar>(1.0 / cfg.temperature);
  const Scalar prefactor = Scalar(1) / static_cast<Scalar>(queries.rows());

  if (dprototypes != nullptr) dprototypes->setZero(prototypes.rows(), prototypes.cols());
  if (dqueries != nullptr) dqueries->setZero(queries.rows(), queries.cols());

  Scalar total = 0;
  for (int c = 0; c < n_way; ++c) {
    std::size_t positive_ordinal = 0;
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      if (query_labels[static_cast<std::size_t>(i)] != c) continue;
      const auto& negs = negatives[static_cast<std::size_t>(c)].at(positive_ordinal);
      ++positive_ordinal;

      // Scores: index 0 is the positive, the rest follow `negs` order.
      std::vector<Scalar> scores;
      scores.reserve(negs.size() + 1);
      scores.push_back(prototypes.row(c).dot(queries.row(i)) * inv_t);
      for (int t : negs)
        scores.push_back(prototypes.row(c).dot(queries.row(t)) * inv_t);

      Scalar mx = scores[0];
      for (Scalar s : scores) mx = std::max(mx, s);
      Scalar denom = 0;
      for (Scalar s : scores) denom += std::exp(s - mx);
      total += -(scores[0] - mx) + std::log(denom);

      if (dprototypes != nullptr || dqueries != nullptr) {
        for (std::size_t j = 0; j < scores.size(); ++j) {
          const Scalar softmax_j = std::exp(scores[j] - mx) / denom;
          const Scalar ds =
              prefactor * (softmax_j - (j == 0 ? Scalar(1) : Scalar(0)));
          const Eigen::Index row = j == 0 ? i : negs[j - 1];
          if (dprototypes != nullptr)
            dprototypes->row(c) += ds * inv_t * queries.row(row);
          if (dqueries != nullptr)
            dqueries->row(row) += ds * inv_t * prototypes.row(c);
        }
      }
    }
  }
  return total * prefactor;
}

}  // namespace pafs::loss
