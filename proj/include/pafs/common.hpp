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

#include <Eigen/Dense>

#include <cstdint>
#include <sstream>
#include <string>

namespace pafs {

/// Dense dynamic matrix/vector aliases used across the whole core.
/// All numerical code is templated on the scalar so that the trainer can run
/// in float while oracles and gradient checks run in double.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;
using VectorF = Vector<float>;
using VectorD = Vector<double>;

namespace detail {
inline void cat_impl(std::ostringstream&) {}
template <typename T, typename... Rest>
void cat_impl(std::ostringstream& os, const T& head, const Rest&... rest) {
  os << head;
  cat_impl(os, rest...);
}
}  // namespace detail

/// Concatenates its arguments into a std::string via operator<<.
template <typename... Args>
std::string cat(const Args&... args) {
  std::ostringstream os;
  detail::cat_impl(os, args...);
  return os.str();
}

}  // namespace pafs
