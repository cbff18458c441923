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

#include "pafs/audio/mel.hpp"
#include "pafs/errors.hpp"

namespace pafs::audio {

/// Corpus-wide scalar mean and population standard deviation of log-mel values.
struct GlobalStats {
  double mean = 0.0;
  double std = 1.0;
};

/// Two-pass mean / population std over every cell of every spectrogram.
/// The std is floored at 1e-8 so constant corpora stay standardizable.
inline GlobalStats compute_stats(const std::vector<SpectrogramF>& specs) {
  std::int64_t count = 0;
  double sum = 0.0;
  for (const auto& s : specs) {
    sum += s.values.cast<double>().sum();
    count += static_cast<std::int64_t>(s.values.size());
  }
  if (count == 0) throw EmptyInputError("compute_stats: no spectrogram cells");
  const double mean = sum / static_cast<double>(count);

  double sq = 0.0;
  for (const auto& s : specs)
    sq += (s.values.cast<double>().array() - mean).square().sum();
  GlobalStats g;
  g.mean = mean;
  g.std = std::max(std::sqrt(sq / static_cast<double>(count)), 1e-8);
  return g;
}

/// In-place (x - mean) / std. Standardizing twice is always a bug upstream,
/// so it is rejected rather than silently applied.
inline void standardize(SpectrogramF& spec, const GlobalStats& stats) {
  if (spec.standardized)
    throw ContractError("standardize: spectrogram is already standardized");
  spec.values = ((spec.values.cast<double>().array() - stats.mean) / stats.std)
                    .cast<float>()
                    .matrix();
  spec.standardized = true;
}

}  // namespace pafs::audio
