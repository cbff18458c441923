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
#include "pafs/data/index.hpp"
#include "pafs/errors.hpp"
#include "pafs/rng.hpp"

namespace pafs::data {

/// One drawn sample: the underlying clip and the cache record chosen for it.
struct SampleRef {
  int clip_id = 0;
  int record_id = 0;
};

/// Episode-local labels run 0..n_way-1 in class draw order.
struct EpisodeItem {
  SampleRef ref;
  int label = 0;
};

struct Episode {
  int n_way = 0;
  int k_shot = 0;
  int q_queries = 0;
  std::vector<int> class_ids;  // dataset class id per episode-local label
  std::vector<EpisodeItem> support;
  std::vector<EpisodeItem> query;
};

/// Draws an n-way k-shot episode from one split: n distinct classes uniformly,
/// then k+q distinct clips per class (first k to support, rest to query), then
/// one segment record per clip. All draws come from `rng` in that fixed order.
inline Episode sample_episode(const DatasetIndex& idx, const SegmentMap& segments,
                              Split split, int n_way, int k_shot, int q_queries,
                              Rng& rng) {
  if (n_way <= 0 || k_shot <= 0 || q_queries <= 0)
    throw ContractError("sample_episode: n_way, k_shot and q_queries must be positive");

  const auto usable = idx.usable_classes(split, k_shot + q_queries);
  if (static_cast<int>(usable.size()) < n_way)
    throw SamplingError(cat("split '", split_name(split), "' has ", usable.size(),
                            " usable classes for ", k_shot, "-shot ", q_queries,
                            "-query episodes, need ", n_way));

  Episode ep;
  ep.n_way = n_way;
  ep.k_shot = k_shot;
  ep.q_queries = q_queries;

  const auto class_draw =
      rng.sample_without_replacement(static_cast<int>(usable.size()), n_way);
  for (int label = 0; label < n_way; ++label) {
    const int cls = usable[static_cast<std::size_t>(class_draw[static_cast<std::size_t>(label)])];
    ep.class_ids.push_back(cls);
    const auto& clips = idx.clips_by_class[static_cast<std::size_t>(cls)];
    const auto clip_draw = rng.sample_without_replacement(
        static_cast<int>(clips.size()), k_shot + q_queries);
    for (int j = 0; j < k_shot + q_queries; ++j) {
      const int clip = clips[static_cast<std::size_t>(clip_draw[static_cast<std::size_t>(j)])];
      const auto& recs = segments[static_cast<std::size_t>(clip)];
      if (recs.empty())
        throw SamplingError(cat("clip ", clip, " has no cached segments"));
      const int rec = recs[rng.uniform_below(recs.size())];
      EpisodeItem item{{clip, rec}, label};
      (j < k_shot ? ep.support : ep.query).push_back(item);
    }
  }
  return ep;
}

}  // namespace pafs::data
