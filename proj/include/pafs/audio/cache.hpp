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
#include <filesystem>
#include <vector>

#include "pafs/audio/stats.hpp"
#include "pafs/common.hpp"

namespace pafs::audio {

/// One cached spectrogram: class id plus the raw (unstandardized) log-mel matrix.
struct CacheRecord {
  std::uint32_t class_id = 0;
  MatrixF values;
};

/// On-disk spectrogram cache. Layout (all little-endian):
///   [8-byte magic "PAFSCACH"][u32 version=1][u32 F][u32 T_frames]
///   [u32 count][f32 mean][f32 std]
/// then per record [u32 class_id][F*T_frames f32 row-major].
struct SpectrogramCache {
  std::uint32_t n_mels = 0;
  std::uint32_t n_frames = 0;
  GlobalStats stats;
  std::vector<CacheRecord> records;
};

void write_cache(const std::filesystem::path& path, const SpectrogramCache& cache);
SpectrogramCache read_cache(const std::filesystem::path& path);

}  // namespace pafs::audio
