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
#include <memory>
#include <string>
#include <vector>

#include "pafs/common.hpp"
#include "pafs/errors.hpp"
#include "pafs/rng.hpp"

namespace pafs::model {

enum class Init { kUniformFanIn, kZero, kOne };

/// One named trainable tensor with its accumulated gradient.
template <typename Scalar>
struct Param {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  Init init = Init::kZero;
  int fan_in = 0;           // used by kUniformFanIn
  bool trainable = true;    // false for running statistics buffers
};

/// Owns every trainable tensor of a model in registration order. Components
/// hold raw pointers into the registry; the registry outlives them.
template <typename Scalar>
class ParamRegistry {
 public:
  Param<Scalar>& add(std::string name, Eigen::Index rows, Eigen::Index cols,
                     Init init, int fan_in = 0, bool trainable = true) {
    if (find(name) != nullptr)
      throw ContractError(cat("duplicate parameter name: ", name));
    auto p = std::make_unique<Param<Scalar>>();
    p->name = std::move(name);
    p->value = Matrix<Scalar>::Zero(rows, cols);
    p->grad = Matrix<Scalar>::Zero(rows, cols);
    p->init = init;
    p->fan_in = fan_in;
    p->trainable = trainable;
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Param<Scalar>* find(const std::string& name) {
    for (auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }

  void zero_grads() {
    for (auto& p : params_) p->grad.setZero();
  }

  std::size_t size() const { return params_.size(); }
  Param<Scalar>& at(std::size_t i) { return *params_[i]; }
  const Param<Scalar>& at(std::size_t i) const { return *params_[i]; }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (const auto& p : params_) n += static_cast<std::int64_t>(p->value.size());
    return n;
  }

  /// Fills every tensor from its declared scheme: weights uniform in
  /// +-1/sqrt(fan_in), biases zero, scale parameters one. Each tensor gets
  /// its own stream keyed by registration order, filled row-major.
  void initialize(std::uint64_t seed) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      switch (p.init) {
        case Init::kZero:
          p.value.setZero();
          break;
        case Init::kOne:
          p.value.setOnes();
          break;
        case Init::kUniformFanIn: {
          if (p.fan_in <= 0)
            throw ContractError(cat("parameter ", p.name, " has no fan-in"));
          Rng rng(mix_seed(seed, rng_stream::kInit, static_cast<std::uint64_t>(i)));
          const double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in));
          for (Eigen::Index r = 0; r < p.value.rows(); ++r)
            for (Eigen::Index c = 0; c < p.value.cols(); ++c)
              p.value(r, c) =
                  static_cast<Scalar>((2.0 * rng.uniform_real() - 1.0) * bound);
          break;
        }
      }
      p.grad.setZero();
    }
  }

 private:
  std::vector<std::unique_ptr<Param<Scalar>>> params_;
};

}  // namespace pafs::model
