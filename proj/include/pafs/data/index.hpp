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

#include <filesystem>
#include <string>
#include <vector>

#include "pafs/data/manifest.hpp"

namespace pafs::data {

/// Clip id -> cache record ids for that clip's segments, in cache order.
using SegmentMap = std::vector<std::vector<int>>;

/// Class-partitioned view of a manifest. Clip ids are manifest row indices.
struct DatasetIndex {
  std::vector<std::string> class_names;
  std::vector<Split> class_split;                // class id -> split
  std::vector<std::vector<int>> clips_by_class;  // class id -> clip ids
  std::vector<int> clip_class;                   // clip id -> class id

  int n_classes() const { return static_cast<int>(class_names.size()); }
  int n_clips() const { return static_cast<int>(clip_class.size()); }

  std::vector<int> classes_in(Split split) const;

  /// Classes in `split` holding at least `min_clips` clips. Smaller classes
  /// stay in the index but are never drawn into episodes.
  std::vector<int> usable_classes(Split split, int min_clips) const;
};

/// Groups manifest rows by class and split. Every class must live in exactly
/// one split and every split must be non-empty.
DatasetIndex build_index(const Manifest& manifest);

/// One record per clip, record id == clip id. For caches of unsegmented clips.
SegmentMap identity_segments(int n_clips);

/// Sidecar CSV `record,clip` mapping cache record ids to manifest clip ids.
void write_segment_map(const std::filesystem::path& path, const SegmentMap& segments);
SegmentMap read_segment_map(const std::filesystem::path& path, int n_clips);

}  // namespace pafs::data
