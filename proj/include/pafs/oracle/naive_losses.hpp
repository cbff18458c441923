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

// Scalar-loop reference implementations of every objective. These transcribe
// the defining formulas one term at a time, on purpose without any shared
// helpers or vectorized paths, so the production losses have something
// independent to be compared against.

#include <cmath>
#include <numbers>
#include <vector>

#include "pafs/common.hpp"

namespace pafs::oracle {

inline MatrixD naive_prototypes(const MatrixD& support, const std::vector<int>& labels,
                                int n_way) {
  MatrixD protos = MatrixD::Zero(n_way, support.cols());
  for (int c = 0; c < n_way; ++c) {
    int count = 0;
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] != c) continue;
      ++count;
      for (Eigen::Index j = 0; j < support.cols(); ++j)
        protos(c, j) += support(i, j);
    }
    for (Eigen::Index j = 0; j < support.cols(); ++j)
      protos(c, j) /= static_cast<double>(count);
  }
  return protos;
}

inline double naive_squared_euclidean(const MatrixD& a, Eigen::Index i, const MatrixD& b,
                                      Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index d = 0; d < a.cols(); ++d) {
    const double diff = a(i, d) - b(j, d);
    s += diff * diff;
  }
  return s;
}

inline double naive_fs_loss(const MatrixD& queries, const std::vector<int>& labels,
                            const MatrixD& prototypes, bool squared,
                            bool mean_over_all) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    std::vector<double> logits;
    for (Eigen::Index c = 0; c < prototypes.rows(); ++c) {
      double d = naive_squared_euclidean(queries, i, prototypes, c);
      if (!squared) d = std::sqrt(d);
      logits.push_back(-d);
    }
    double mx = logits[0];
    for (double z : logits) mx = std::max(mx, z);
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - mx);
    const int y = labels[static_cast<std::size_t>(i)];
    total += -(logits[static_cast<std::size_t>(y)] - mx) + std::log(denom);
  }
  if (mean_over_all) return total / static_cast<double>(queries.rows());
  return total * static_cast<double>(prototypes.rows()) /
         static_cast<double>(queries.rows());
}

inline double naive_inner(const MatrixD& a, Eigen::Index i, const MatrixD& b,
                          Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index d = 0; d < a.cols(); ++d) s += a(i, d) * b(j, d);
  return s;
}

/// Literal transcription: per class c and per positive query, the term is
/// -log(sim+ / (sim+ + sim-)) with the given negative index lists.
inline double naive_cpl_loss(const MatrixD& prototypes, const MatrixD& queries,
                             const std::vector<int>& labels, double temperature,
                             const std::vector<std::vector<std::vector<int>>>& negatives) {
  double total = 0.0;
  for (int c = 0; c < static_cast<int>(prototypes.rows()); ++c) {
    std::size_t ordinal = 0;
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] != c) continue;
      const double sim_pos =
          std::exp(naive_inner(prototypes, c, queries, i) / temperature);
      double sim_neg = 0.0;
      for (int t : negatives[static_cast<std::size_t>(c)][ordinal])
        sim_neg += std::exp(naive_inner(prototypes, c, queries, t) / temperature);
      ++ordinal;
      total += -std::log(sim_pos / (sim_pos + sim_neg));
    }
  }
  return total / static_cast<double>(queries.rows());
}

inline double naive_triplet_angle_deg(const MatrixD& batch, int a, int p, int n) {
  double ap = 0.0;
  double nc = 0.0;
  for (Eigen::Index d = 0; d < batch.cols(); ++d) {
    const double dap = batch(p, d) - batch(a, d);
    ap += dap * dap;
    const double center = (batch(a, d) + batch(p, d)) / 2.0;
    const double dnc = batch(n, d) - center;
    nc += dnc * dnc;
  }
  return std::atan2(std::sqrt(ap), 2.0 * std::sqrt(nc)) * 180.0 / std::numbers::pi;
}

/// Mines and sums in one triple loop: anchors over prototypes (or everything),
/// pair term log(1 + sum over kept negatives of exp f), divided by |batch|.
inline double naive_apl_loss(const MatrixD& batch, const std::vector<int>& labels,
                             int n_prototypes, double alpha_deg, bool anchors_all) {
  const double tan_a = std::tan(alpha_deg * std::numbers::pi / 180.0);
  const double tan2 = tan_a * tan_a;
  const int rows = static_cast<int>(batch.rows());
  const int anchor_limit = anchors_all ? rows : n_prototypes;

  double total = 0.0;
  for (int a = 0; a < anchor_limit; ++a) {
    for (int p = 0; p < rows; ++p) {
      if (p == a || labels[static_cast<std::size_t>(p)] != labels[static_cast<std::size_t>(a)])
        continue;
      double sum_exp = 0.0;
      for (int n = 0; n < rows; ++n) {
        if (labels[static_cast<std::size_t>(n)] == labels[static_cast<std::size_t>(a)])
          continue;
        if (naive_triplet_angle_deg(batch, a, p, n) <= alpha_deg) continue;
        double inner_apn = 0.0;
        double inner_ap = 0.0;
        for (Eigen::Index d = 0; d < batch.cols(); ++d) {
          inner_apn += (batch(a, d) + batch(p, d)) * batch(n, d);
          inner_ap += batch(a, d) * batch(p, d);
        }
        sum_exp += std::exp(4.0 * tan2 * inner_apn - 2.0 * (1.0 + tan2) * inner_ap);
      }
      total += std::log(1.0 + sum_exp);
    }
  }
  return total / static_cast<double>(rows);
}

}  // namespace pafs::oracle
