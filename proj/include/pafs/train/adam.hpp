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
#include <cstdint>
#include <vector>

#include "pafs/errors.hpp"
#include "pafs/model/params.hpp"

namespace pafs::train {

/// Adaptive-moment optimizer with bias correction. Running-statistics buffers
/// (trainable=false) are never touched.
template <typename Scalar>
class Adam {
 public:
  struct Config {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam(model::ParamRegistry<Scalar>& reg, const Config& cfg) : reg_(&reg), cfg_(cfg) {
    if (cfg.lr < 0) throw ConfigError("adam: lr must be nonnegative");
    m_.resize(reg.size());
    v_.resize(reg.size());
    for (std::size_t i = 0; i < reg.size(); ++i) {
      const auto& p = reg.at(i);
      m_[i].setZero(p.value.rows(), p.value.cols());
      v_[i].setZero(p.value.rows(), p.value.cols());
    }
  }

  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }

  /// One update from the gradients currently held in the registry.
  void step() {
    ++t_;
    const auto b1 = static_cast<Scalar>(cfg_.beta1);
    const auto b2 = static_cast<Scalar>(cfg_.beta2);
    const auto corr1 = static_cast<Scalar>(1.0 - std::pow(cfg_.beta1, t_));
    const auto corr2 = static_cast<Scalar>(1.0 - std::pow(cfg_.beta2, t_));
    for (std::size_t i = 0; i < reg_->size(); ++i) {
      auto& p = reg_->at(i);
      if (!p.trainable) continue;
      m_[i] = b1 * m_[i] + (1 - b1) * p.grad;
      v_[i] = (b2 * v_[i].array() + (1 - b2) * p.grad.array().square()).matrix();
      p.value.array() -=
          static_cast<Scalar>(cfg_.lr) * (m_[i].array() / corr1) /
          ((v_[i].array() / corr2).sqrt() + static_cast<Scalar>(cfg_.eps));
    }
  }

  std::int64_t steps_taken() const { return t_; }

 private:
  model::ParamRegistry<Scalar>* reg_;
  Config cfg_;
  std::vector<Matrix<Scalar>> m_, v_;
  std::int64_t t_ = 0;
};

/// Piecewise-constant decay: the rate during 1-based epoch `e` is
/// base * gamma^(number of milestones strictly below e).
inline double multistep_lr(double base_lr, double gamma,
                           const std::vector<int>& milestones, int epoch) {
  int hits = 0;
  for (int m : milestones)
    if (epoch > m) ++hits;
  return base_lr * std::pow(gamma, hits);
}

}  // namespace pafs::train
