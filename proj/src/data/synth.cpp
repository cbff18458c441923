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

#include "pafs/data/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <string>

#include "pafs/audio/wav.hpp"
#include "pafs/common.hpp"
#include "pafs/data/manifest.hpp"
#include "pafs/errors.hpp"
#include "pafs/rng.hpp"

namespace pafs::data {

void SynthSpec::validate() const {
  if (n_classes < 3) throw ConfigError("synth: need at least 3 classes (one per split)");
  if (clips_per_class < 1) throw ConfigError("synth: clips_per_class must be positive");
  if (duration_s <= 0.0) throw ConfigError("synth: duration_s must be positive");
  if (sample_rate <= 0) throw ConfigError("synth: sample_rate must be positive");
  if (f0_base <= 0.0) throw ConfigError("synth: f0_base must be positive");
  if (f0_ratio <= 0.0 || f0_ratio == 1.0)
    throw ConfigError("synth: f0_ratio must be positive and != 1 so fundamentals stay distinct");
  if (harmonic_amps.empty()) throw ConfigError("synth: harmonic_amps must be non-empty");
  if (noise_level < 0.0) throw ConfigError("synth: noise_level must be non-negative");
  const double test_frac = 1.0 - train_frac - val_frac;
  if (train_frac <= 0.0 || val_frac <= 0.0 || test_frac <= 0.0)
    throw ConfigError("synth: train_frac and val_frac must leave all three splits non-empty");
  const double top = f0_base * std::pow(f0_ratio, n_classes - 1) *
                     static_cast<double>(harmonic_amps.size());
  if (top >= sample_rate / 2.0)
    throw ConfigError(cat("synth: highest harmonic ", top,
                          " Hz reaches the Nyquist frequency ", sample_rate / 2.0));
}

namespace {

std::string two_digit_name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i);
  return buf;
}

Split split_for_class(const SynthSpec& spec, int cls) {
  const int n_train =
      std::max<int>(1, static_cast<int>(std::llround(spec.n_classes * spec.train_frac)));
  const int n_val =
      std::max<int>(1, static_cast<int>(std::llround(spec.n_classes * spec.val_frac)));
  if (n_train + n_val >= spec.n_classes)
    throw ConfigError("synth: split fractions leave no test classes");
  if (cls < n_train) return Split::kTrain;
  if (cls < n_train + n_val) return Split::kVal;
  return Split::kTest;
}

}  // namespace

std::filesystem::path generate_synthetic(const SynthSpec& spec,
                                         const std::filesystem::path& out_dir) {
  spec.validate();
  const auto n_samples =
      static_cast<std::int64_t>(std::llround(spec.duration_s * spec.sample_rate));
  const double amp_total =
      std::accumulate(spec.harmonic_amps.begin(), spec.harmonic_amps.end(), 0.0);
  const double scale = 0.5 / amp_total;

  std::vector<ManifestRow> rows;
  std::vector<double> samples(static_cast<std::size_t>(n_samples));
  for (int cls = 0; cls < spec.n_classes; ++cls) {
    const std::string label = two_digit_name("class_", cls);
    const double f0 = spec.f0_base * std::pow(spec.f0_ratio, cls);
    const auto class_dir = out_dir / "audio" / label;
    std::filesystem::create_directories(class_dir);
    for (int clip = 0; clip < spec.clips_per_class; ++clip) {
      Rng rng(mix_seed(spec.seed, rng_stream::kSynth, cls, clip));
      std::vector<double> phases(spec.harmonic_amps.size());
      for (auto& p : phases) p = 2.0 * std::numbers::pi * rng.uniform_real();
      for (std::int64_t t = 0; t < n_samples; ++t) {
        const double time = static_cast<double>(t) / spec.sample_rate;
        double v = 0.0;
        for (std::size_t h = 0; h < spec.harmonic_amps.size(); ++h)
          v += spec.harmonic_amps[h] *
               std::sin(2.0 * std::numbers::pi * f0 * (static_cast<double>(h) + 1.0) * time +
                        phases[h]);
        samples[static_cast<std::size_t>(t)] =
            scale * v + spec.noise_level * rng.normal();
      }
      const std::string file = two_digit_name("clip_", clip) + ".wav";
      audio::write_wav(class_dir / file, samples, spec.sample_rate);
      ManifestRow row;
      row.path = "audio/" + label + "/" + file;
      row.label = label;
      row.split = split_for_class(spec, cls);
      rows.push_back(std::move(row));
    }
  }

  const auto manifest_path = out_dir / "manifest.csv";
  write_manifest(manifest_path, rows);
  return manifest_path;
}

}  // namespace pafs::data
