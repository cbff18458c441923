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

#include <cstdint>

namespace pafs::loss {

enum class LossKind { kFs, kFsCpl, kFsApl };

struct LossReport {
  double l_fs = 0.0;
  double l_cm = 0.0;  // the contrastive term, 0 for plain few-shot
  double lambda = 0.0;
  double l_total = 0.0;
  std::int64_t triplets_mined = 0;  // angular loss only
};

inline LossReport total_loss(double l_fs, double l_cm, double lambda) {
  LossReport r;
  r.l_fs = l_fs;
  r.l_cm = l_cm;
  r.lambda = lambda;
  r.l_total = l_fs + lambda * l_cm;
  return r;
}

}  // namespace pafs::loss
