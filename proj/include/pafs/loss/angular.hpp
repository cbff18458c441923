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
#include <numbers>
#include <vector>

#include "pafs/common.hpp"
#include "pafs/errors.hpp"

namespace pafs::loss {

enum class AnchorMode { kPrototypesOnly, kAllElements };

struct AplConfig {
  double alpha_deg = 15.0;
  AnchorMode anchor_mode = AnchorMode::kPrototypesOnly;

  void validate() const {
    if (alpha_deg < 0.0 || alpha_deg >= 90.0)
      throw ConfigError("apl.alpha_deg must lie in [0, 90)");
  }
};

/// Indices into the episode batch (prototype rows first, then query rows).
struct Triplet {
  int a = 0;
  int p = 0;
  int n = 0;
};

/// Angle at the negative vertex of a triplet, in degrees: the triangle's
/// apex x_c is the anchor/positive midpoint and the angle is
/// arctan(|x_p - x_a| / (2 |x_n - x_c|)). A negative sitting exactly on x_c
/// gives 90 degrees.
template <typename Scalar>
double triplet_angle_deg(const Matrix<Scalar>& batch, const Triplet& t) {
  const double ap = static_cast<double>((batch.row(t.p) - batch.row(t.a)).norm());
  const Matrix<Scalar> center = (batch.row(t.a) + batch.row(t.p)) / Scalar(2);
  const double nc = static_cast<double>((batch.row(t.n) - center).norm());
  return std::atan2(ap, 2.0 * nc) * 180.0 / std::numbers::pi;
}

/// Enumerates candidate triplets (same-label anchor/positive with a != p,
/// different-label negative) and keeps those whose negative-vertex angle
/// strictly exceeds alpha_deg. Anchors range over the first `n_prototypes`
/// rows, or over all rows in all-elements mode. Order is (a, p, n) ascending.
template <typename Scalar>
std::vector<Triplet> mine_triplets(const Matrix<Scalar>& batch,
                                   const std::vector<int>& labels, int n_prototypes,
                                   double alpha_deg, AnchorMode mode) {
  if (static_cast<Eigen::Index>(labels.size()) != batch.rows())
    throw ContractError("mine_triplets: label count != batch rows");
  if (n_prototypes < 0 || n_prototypes > static_cast<int>(batch.rows()))
    throw ContractError("mine_triplets: bad prototype count");

  const int rows = static_cast<int>(batch.rows());
  const int anchor_limit = mode == AnchorMode::kPrototypesOnly ? n_prototypes : rows;
  std::vector<Triplet> kept;
  for (int a = 0; a < anchor_limit; ++a)
    for (int p = 0; p < rows; ++p) {
      if (p == a || labels[static_cast<std::size_t>(p)] != labels[static_cast<std::size_t>(a)])
        continue;
      for (int n = 0; n < rows; ++n) {
        if (labels[static_cast<std::size_t>(n)] == labels[static_cast<std::size_t>(a)])
          continue;
        Triplet t{a, p, n};
        if (triplet_angle_deg(batch, t) > alpha_deg) kept.push_back(t);
      }
    }
  return kept;
}

/// Angular penalty over the mined triplets:
///   f(a,p,n) = 4 tan^2(alpha) <x_a + x_p, x_n> - 2 (1 + tan^2(alpha)) <x_a, x_p>
/// summed as log(1 + sum_n exp f) per (anchor, positive) pair, divided by the
/// batch size. Missing pairs contribute nothing. Optional `dbatch` receives
/// the gradient w.r.t. every batch row (mining treated as fixed).
template <typename Scalar>
Scalar apl_loss(const Matrix<Scalar>& batch, const std::vector<Triplet>& triplets,
                double alpha_deg, Matrix<Scalar>* dbatch = nullptr) {
  if (alpha_deg < 0.0 || alpha_deg >= 90.0)
    throw ContractError("apl_loss: alpha_deg must lie in [0, 90)");
  if (batch.rows() == 0) throw EmptyInputError("apl_loss: empty batch");
  const double tan_a = std::tan(alpha_deg * std::numbers::pi / 180.0);
  const auto tan2 = static_cast<Scalar>(tan_a * tan_a);
  const Scalar c_pos = 4 * tan2;
  const Scalar c_ap = 2 * (Scalar(1) + tan2);
  const Scalar prefactor = Scalar(1) / static_cast<Scalar>(batch.rows());

  if (dbatch != nullptr) dbatch->setZero(batch.rows(), batch.cols());

  Scalar total = 0;
  std::size_t i = 0;
  while (i < triplets.size()) {
    // Triplets from the miner are contiguous per (a, p) pair.
    const int a = triplets[i].a;
    const int p = triplets[i].p;
    std::size_t end = i;
    while (end < triplets.size() && triplets[end].a == a && triplets[end].p == p) ++end;

    const Scalar ap = batch.row(a).dot(batch.row(p));
    std::vector<Scalar> f;
    f.reserve(end - i);
    for (std::size_t j = i; j < end; ++j)
      f.push_back(c_pos * (batch.row(a) + batch.row(p)).dot(batch.row(triplets[j].n)) -
                  c_ap * ap);

    // log(1 + sum exp f) via a shift by max(0, max f).
    Scalar mx = 0;
    for (Scalar v : f) mx = std::max(mx, v);
    Scalar denom = std::exp(-mx);
    for (Scalar v : f) denom += std::exp(v - mx);
    total += mx + std::log(denom);

    if (dbatch != nullptr) {
      for (std::size_t j = i; j < end; ++j) {
        const int n = triplets[j].n;
        const Scalar w = prefactor * std::exp(f[j - i] - mx) / denom;
        dbatch->row(a) += w * (c_pos * batch.row(n) - c_ap * batch.row(p));
        dbatch->row(p) += w * (c_pos * batch.row(n) - c_ap * batch.row(a));
        dbatch->row(n) += w * c_pos * (batch.row(a) + batch.row(p));
      }
    }
    i = end;
  }
  return total * prefactor;
}

}  // namespace pafs::loss
