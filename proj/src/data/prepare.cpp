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

#include "pafs/data/prepare.hpp"

#include <utility>
#include <vector>

#include "pafs/audio/clip.hpp"
#include "pafs/audio/stats.hpp"
#include "pafs/parallel.hpp"

namespace pafs::data {

PrepareResult prepare_cache(const Manifest& manifest, const audio::MelConfig& mel,
                            double clip_seconds,
                            const std::filesystem::path& cache_path,
                            const std::filesystem::path& segments_path, int workers) {
  mel.validate();
  if (manifest.rows.empty()) throw EmptyInputError("prepare: manifest has no rows");
  const int n_rows = static_cast<int>(manifest.rows.size());

  std::vector<std::vector<audio::SpectrogramF>> per_row(
      static_cast<std::size_t>(n_rows));
  parallel_for(n_rows, workers, [&](int i) {
    const auto& row = manifest.rows[static_cast<std::size_t>(i)];
    const audio::AudioClip clip =
        audio::load_audio(manifest.resolve(row), mel.sample_rate);
    for (const auto& segment : audio::segment_clip(clip, clip_seconds))
      per_row[static_cast<std::size_t>(i)].push_back(
          audio::mel_spectrogram(segment, mel));
  });

  audio::SpectrogramCache cache;
  SegmentMap segments(static_cast<std::size_t>(n_rows));
  std::vector<audio::SpectrogramF> train_specs;
  for (int i = 0; i < n_rows; ++i) {
    const auto& row = manifest.rows[static_cast<std::size_t>(i)];
    for (auto& spec : per_row[static_cast<std::size_t>(i)]) {
      if (cache.records.empty()) {
        cache.n_mels = static_cast<std::uint32_t>(spec.n_mels());
        cache.n_frames = static_cast<std::uint32_t>(spec.n_frames());
      } else if (static_cast<std::uint32_t>(spec.n_mels()) != cache.n_mels ||
                 static_cast<std::uint32_t>(spec.n_frames()) != cache.n_frames) {
        throw ContractError(cat("prepare: clip ", i, " produced a ", spec.n_mels(),
                                "x", spec.n_frames(), " spectrogram; expected ",
                                cache.n_mels, "x", cache.n_frames));
      }
      if (row.split == Split::kTrain) train_specs.push_back(spec);
      segments[static_cast<std::size_t>(i)].push_back(
          static_cast<int>(cache.records.size()));
      audio::CacheRecord rec;
      rec.class_id = static_cast<std::uint32_t>(row.class_id);
      rec.values = std::move(spec.values);
      cache.records.push_back(std::move(rec));
    }
  }
  if (train_specs.empty())
    throw EmptyInputError("prepare: no training-split records to fit statistics on");
  cache.stats = audio::compute_stats(train_specs);

  write_cache(cache_path, cache);
  write_segment_map(segments_path, segments);

  PrepareResult result;
  result.clips = n_rows;
  result.records = static_cast<int>(cache.records.size());
  result.stats = cache.stats;
  return result;
}

}  // namespace pafs::data
