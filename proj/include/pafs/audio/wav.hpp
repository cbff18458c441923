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
#include <vector>

namespace pafs::audio {

/// Decoded WAV contents before any channel mixing or resampling.
struct WavData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<double> interleaved;  // frame-major, values in [-1, 1]

  int frames() const {
    return channels == 0 ? 0 : static_cast<int>(interleaved.size()) / channels;
  }
};

/// Reads a RIFF/WAVE file. Supported encodings: PCM 16/24/32-bit and IEEE
/// float32. Throws IoError on unreadable files, FormatError on anything that
/// is not a supported WAV, EmptyInputError on zero-length audio.
WavData read_wav(const std::filesystem::path& path);

/// Writes mono PCM16 WAV. Samples are clamped to [-1, 1].
void write_wav(const std::filesystem::path& path, const std::vector<double>& samples,
               int sample_rate);

}  // namespace pafs::audio
