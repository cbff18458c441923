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

#include <vector>

#include "pafs/common.hpp"
#include "pafs/errors.hpp"

namespace pafs::loss {

/// Class prototypes as arithmetic means of same-label support rows.
/// Row c of the result is the mean of support rows with label c.
template <typename Scalar>
Matrix<Scalar> compute_prototypes(const Matrix<Scalar>& support,
                                  const std::vector<int>& labels, int n_way) {
  if (static_cast<Eigen::Index>(labels.size()) != support.rows())
    throw ContractError("compute_prototypes: label count != support rows");
  Matrix<Scalar> protos = Matrix<Scalar>::Zero(n_way, support.cols());
  std::vector<int> counts(static_cast<std::size_t>(n_way), 0);
  for (Eigen::Index i = 0; i < support.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= n_way)
      throw ContractError(cat("compute_prototypes: label ", c, " outside 0..",
                              n_way - 1));
    protos.row(c) += support.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < n_way; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw ContractError(cat("compute_prototypes: class ", c, " has no support rows"));
    protos.row(c) /= static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);
  }
  return protos;
}

}  // namespace pafs::loss
