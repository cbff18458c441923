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

#include "pafs/audio/cache.hpp"
#include "pafs/audio/mel.hpp"
#include "pafs/data/index.hpp"
#include "pafs/data/manifest.hpp"

namespace pafs::data {

struct PrepareResult {
  int clips = 0;
  int records = 0;
  audio::GlobalStats stats;
};

/// Loads every manifest clip, cuts it into fixed-length segments, converts
/// each segment to a raw log-mel spectrogram, fits global standardization
/// statistics on the training split, and writes the record cache plus the
/// record-to-clip segment map. Record order follows the manifest; rows may be
/// processed in parallel.
PrepareResult prepare_cache(const Manifest& manifest, const audio::MelConfig& mel,
                            double clip_seconds,
                            const std::filesystem::path& cache_path,
                            const std::filesystem::path& segments_path, int workers);

}  // namespace pafs::data
