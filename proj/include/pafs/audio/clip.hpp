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
#include <filesystem>
#include <vector>

#include "pafs/audio/wav.hpp"
#include "pafs/errors.hpp"

namespace pafs::audio {

/// Mono audio at a known rate. Always non-empty.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Averages interleaved channels down to mono.
inline std::vector<double> mix_to_mono(const WavData& wav) {
  const int frames = wav.frames();
  std::vector<double> mono(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (int c = 0; c < wav.channels; ++c)
      acc += wav.interleaved[static_cast<std::size_t>(f) * wav.channels + c];
    mono[static_cast<std::size_t>(f)] = acc / wav.channels;
  }
  return mono;
}

/// Linear-interpolation resampler. Output length is round(n * target / source).
inline std::vector<double> resample_linear(const std::vector<double>& in, int source_rate,
                                           int target_rate) {
  if (source_rate == target_rate) return in;
  const auto n_in = static_cast<std::int64_t>(in.size());
  const auto n_out = static_cast<std::int64_t>(
      std::llround(static_cast<double>(n_in) * target_rate / source_rate));
  std::vector<double> out(static_cast<std::size_t>(n_out));
  const double ratio = static_cast<double>(source_rate) / target_rate;
  for (std::int64_t i = 0; i < n_out; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto lo = static_cast<std::int64_t>(pos);
    const auto hi = std::min(lo + 1, n_in - 1);
    const double frac = pos - static_cast<double>(lo);
    out[static_cast<std::size_t>(i)] =
        in[static_cast<std::size_t>(std::min(lo, n_in - 1))] * (1.0 - frac) +
        in[static_cast<std::size_t>(hi)] * frac;
  }
  return out;
}

/// Loads a WAV as a mono clip at target_rate. Multi-channel sources are
/// averaged; sources at another rate are linearly resampled.
inline AudioClip load_audio(const std::filesystem::path& path, int target_rate) {
  const WavData wav = read_wav(path);
  AudioClip clip;
  clip.samples = mix_to_mono(wav);
  if (wav.sample_rate != target_rate)
    clip.samples = resample_linear(clip.samples, wav.sample_rate, target_rate);
  clip.sample_rate = target_rate;
  if (clip.samples.empty()) throw EmptyInputError("audio is empty after loading");
  return clip;
}

/// Cuts a clip into consecutive non-overlapping segments of exactly
/// `seconds` duration. The final remainder is zero-padded; clips shorter than
/// one segment yield a single padded segment.
inline std::vector<AudioClip> segment_clip(const AudioClip& clip, double seconds) {
  if (seconds <= 0.0) throw ContractError("segment duration must be positive");
  const auto seg_len = static_cast<std::int64_t>(std::llround(seconds * clip.sample_rate));
  if (seg_len <= 0) throw ContractError("segment duration too short for sample rate");
  const auto n = static_cast<std::int64_t>(clip.samples.size());
  const std::int64_t n_segments = std::max<std::int64_t>(1, (n + seg_len - 1) / seg_len);
  std::vector<AudioClip> segments;
  segments.reserve(static_cast<std::size_t>(n_segments));
  for (std::int64_t s = 0; s < n_segments; ++s) {
    AudioClip seg;
    seg.sample_rate = clip.sample_rate;
    seg.samples.assign(static_cast<std::size_t>(seg_len), 0.0);
    const std::int64_t begin = s * seg_len;
    const std::int64_t end = std::min(begin + seg_len, n);
    for (std::int64_t i = begin; i < end; ++i)
      seg.samples[static_cast<std::size_t>(i - begin)] = clip.samples[static_cast<std::size_t>(i)];
    segments.push_back(std::move(seg));
  }
  return segments;
}

}  // namespace pafs::audio
