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
#include <string>
#include <vector>

#include "pafs/audio/mel.hpp"
#include "pafs/augment/specaugment.hpp"
#include "pafs/data/manifest.hpp"
#include "pafs/data/synth.hpp"
#include "pafs/model/embedding.hpp"
#include "pafs/train/trainer.hpp"

namespace pafs::config {

/// Everything a run needs, addressable as flat dotted keys in a text config
/// (`loss.lambda = 0.3`). Unknown keys are rejected by name.
struct RunConfig {
  std::uint64_t seed = 42;

  std::string data_manifest;
  std::string data_cache;
  std::string data_segments;  // empty: derived from the cache path
  double clip_seconds = 5.0;

  audio::MelConfig mel;
  augment::AugmentConfig aug;
  train::EpisodeShape episode;
  model::ModelConfig model;
  train::LossConfig loss;
  train::TrainConfig train;
  data::SynthSpec synth;

  data::Split eval_split = data::Split::kTest;
  int eval_tasks = 2000;
  std::vector<int> eval_shots;  // k-shot sweep; empty disables the sweep

  /// Frames per cached clip under the audio settings.
  int frames_per_clip() const;

  /// Derives the model input dimensions from the audio settings and checks
  /// every module invariant. Throws ConfigError naming the offending key.
  void finalize();
};

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
RunConfig parse_config_text(const std::string& text);
RunConfig read_config_file(const std::filesystem::path& path);

/// Applies one `key=value` override on top of an existing config.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Full snapshot in key-table order; parsing it back reproduces the config.
std::string serialize_config(const RunConfig& cfg);

}  // namespace pafs::config
