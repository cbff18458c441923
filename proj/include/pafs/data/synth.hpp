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

namespace pafs::data {

/// Recipe for the synthetic tone corpus. Class c gets fundamental
/// f0_base * f0_ratio^c; each clip is the harmonic stack at random phases
/// plus white noise, split across train/val/test by class.
struct SynthSpec {
  int n_classes = 20;
  int clips_per_class = 30;
  double duration_s = 5.0;
  int sample_rate = 16000;
  double f0_base = 200.0;
  double f0_ratio = 1.12;
  std::vector<double> harmonic_amps = {1.0, 0.5, 0.25};
  double noise_level = 0.05;
  double train_frac = 0.6;
  double val_frac = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Writes WAV files under out_dir/audio/<label>/ and a manifest CSV.
/// Returns the manifest path.
std::filesystem::path generate_synthetic(const SynthSpec& spec,
                                         const std::filesystem::path& out_dir);

}  // namespace pafs::data
