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

namespace pafs::loss {

struct FewShotConfig {
  /// Squared Euclidean distances (the classic prototypical form); plain
  /// Euclidean when false.
  bool squared = true;
  /// Mean over all n*q query terms; when false the sum is divided by q only.
  bool mean_over_all = true;
};

/// Pairwise distance matrix: entry (i, c) is the (squared) Euclidean distance
/// from query row i to prototype row c.
template <typename Scalar>
Matrix<Scalar> squared_euclidean(const Matrix<Scalar>& queries,
                                 const Matrix<Scalar>& prototypes) {
  if (queries.cols() != prototypes.cols())
    throw ContractError(cat("squared_euclidean: dim mismatch ", queries.cols(),
                            " vs ", prototypes.cols()));
  Matrix<Scalar> d(queries.rows(), prototypes.rows());
  for (Eigen::Index i = 0; i < queries.rows(); ++i)
    for (Eigen::Index c = 0; c < prototypes.rows(); ++c)
      d(i, c) = (queries.row(i) - prototypes.row(c)).squaredNorm();
  return d;
}

/// Per-query softmax over negative distances to the prototypes; entry (i, c)
/// is the probability of class c for query i.
template <typename Scalar>
Matrix<Scalar> prototype_softmax(const Matrix<Scalar>& distances) {
  Matrix<Scalar> p(distances.rows(), distances.cols());
  for (Eigen::Index i = 0; i < distances.rows(); ++i) {
    const auto logits = (-distances.row(i)).array();
    const Scalar m = logits.maxCoeff();
    const auto e = (logits - m).exp();
    p.row(i) = (e / e.sum()).matrix();
  }
  return p;
}

/// Cross-entropy of queries against class prototypes over negative (squared)
/// Euclidean distances. Optional outputs receive the gradients w.r.t. the
/// query rows and prototype rows.
template <typename Scalar>
Scalar few_shot_loss(const Matrix<Scalar>& queries, const std::vector<int>& labels,
                     const Matrix<Scalar>& prototypes, const FewShotConfig& cfg,
                     Matrix<Scalar>* dqueries = nullptr,
                     Matrix<Scalar>* dprototypes = nullptr) {
  if (!queries.allFinite() || !prototypes.allFinite())
    throw ContractError("few_shot_loss: non-finite inputs");
  if (static_cast<Eigen::Index>(labels.size()) != queries.rows())
    throw ContractError("few_shot_loss: label count != query rows");
  const auto n_way = prototypes.rows();
  const auto n_query = queries.rows();
  if (n_query == 0) throw EmptyInputError("few_shot_loss: no queries");

  Matrix<Scalar> dist = squared_euclidean(queries, prototypes);
  if (!cfg.squared) dist = dist.cwiseSqrt();
  const Matrix<Scalar> probs = prototype_softmax(dist);

  const Scalar prefactor =
      cfg.mean_over_all
          ? Scalar(1) / static_cast<Scalar>(n_query)
          : static_cast<Scalar>(n_way) / static_cast<Scalar>(n_query);

  Scalar total = 0;
  for (Eigen::Index i = 0; i < n_query; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= n_way)
      throw ContractError(cat("few_shot_loss: label ", y, " outside prototype range"));
    total -= std::log(probs(i, y));
  }
  total *= prefactor;

  if (dqueries != nullptr || dprototypes != nullptr) {
    if (dqueries != nullptr) dqueries->setZero(queries.rows(), queries.cols());
    if (dprototypes != nullptr)
      dprototypes->setZero(prototypes.rows(), prototypes.cols());
    for (Eigen::Index i = 0; i < n_query; ++i) {
      const int y = labels[static_cast<std::size_t>(i)];
      for (Eigen::Index c = 0; c < n_way; ++c) {
        // d(loss)/d(logit_c) with logit = -distance.
        const Scalar dz = prefactor * (probs(i, c) - (c == y ? Scalar(1) : Scalar(0)));
        const Matrix<Scalar> diff = queries.row(i) - prototypes.row(c);
        Matrix<Scalar> ddist_dq(1, queries.cols());
        if (cfg.squared) {
          ddist_dq = 2 * diff;
        } else {
          const Scalar d = dist(i, c);
          if (d > Scalar(0))
            ddist_dq = diff / d;
          else
            ddist_dq.setZero();
        }
        if (dqueries != nullptr) dqueries->row(i) -= dz * ddist_dq;
        if (dprototypes != nullptr) dprototypes->row(c) += dz * ddist_dq;
      }
    }
  }
  return total;
}

}  // namespace pafs::loss
