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

#include "pafs/config/config.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "pafs/csv.hpp"
#include "pafs/io_util.hpp"

namespace pafs::config {
namespace {

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  const std::int64_t v = std::stoll(s, &used);
  if (used != s.size()) throw ConfigError(cat("not an integer: '", s, "'"));
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::size_t used = 0;
  if (!s.empty() && s[0] == '-') throw ConfigError(cat("not a nonnegative integer: '", s, "'"));
  const std::uint64_t v = std::stoull(s, &used);
  if (used != s.size()) throw ConfigError(cat("not an integer: '", s, "'"));
  return v;
}

double parse_real(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError(cat("not a number: '", s, "'"));
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(cat("not a boolean: '", s, "'"));
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<int>(parse_int(trim(item))));
  return out;
}

std::string join_int_list(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

model::RnnKind parse_rnn_cell(const std::string& s) {
  if (s == "gru") return model::RnnKind::kGru;
  if (s == "tanh") return model::RnnKind::kTanh;
  throw ConfigError(cat("expected gru or tanh, got '", s, "'"));
}
std::string rnn_cell_name(model::RnnKind k) {
  return k == model::RnnKind::kGru ? "gru" : "tanh";
}

model::EmbedMode parse_embed_mode(const std::string& s) {
  if (s == "final_state") return model::EmbedMode::kFinalState;
  if (s == "temporal_mean") return model::EmbedMode::kTemporalMean;
  throw ConfigError(cat("expected final_state or temporal_mean, got '", s, "'"));
}
std::string embed_mode_name(model::EmbedMode m) {
  return m == model::EmbedMode::kFinalState ? "final_state" : "temporal_mean";
}

model::FusionKind parse_fusion(const std::string& s) {
  if (s == "attention") return model::FusionKind::kAttention;
  if (s == "concat") return model::FusionKind::kConcat;
  throw ConfigError(cat("expected attention or concat, got '", s, "'"));
}
std::string fusion_name(model::FusionKind f) {
  return f == model::FusionKind::kAttention ? "attention" : "concat";
}

loss::LossKind parse_loss_kind(const std::string& s) {
  if (s == "fs") return loss::LossKind::kFs;
  if (s == "fs+cpl") return loss::LossKind::kFsCpl;
  if (s == "fs+apl") return loss::LossKind::kFsApl;
  throw ConfigError(cat("expected fs, fs+cpl or fs+apl, got '", s, "'"));
}
std::string loss_kind_name(loss::LossKind k) {
  switch (k) {
    case loss::LossKind::kFs: return "fs";
    case loss::LossKind::kFsCpl: return "fs+cpl";
    default: return "fs+apl";
  }
}

loss::AnchorMode parse_anchor_mode(const std::string& s) {
  if (s == "prototypes_only") return loss::AnchorMode::kPrototypesOnly;
  if (s == "all_elements") return loss::AnchorMode::kAllElements;
  throw ConfigError(cat("expected prototypes_only or all_elements, got '", s, "'"));
}
std::string anchor_mode_name(loss::AnchorMode m) {
  return m == loss::AnchorMode::kPrototypesOnly ? "prototypes_only" : "all_elements";
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_uint(v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},

      {"data.manifest", [](RunConfig& c, const std::string& v) { c.data_manifest = v; },
       [](const RunConfig& c) { return c.data_manifest; }},
      {"data.cache", [](RunConfig& c, const std::string& v) { c.data_cache = v; },
       [](const RunConfig& c) { return c.data_cache; }},
      {"data.segments", [](RunConfig& c, const std::string& v) { c.data_segments = v; },
       [](const RunConfig& c) { return c.data_segments; }},

      {"audio.clip_seconds",
       [](RunConfig& c, const std::string& v) { c.clip_seconds = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.clip_seconds); }},
      {"audio.sample_rate",
       [](RunConfig& c, const std::string& v) { c.mel.sample_rate = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.mel.sample_rate); }},
      {"audio.window",
       [](RunConfig& c, const std::string& v) { c.mel.window = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.mel.window); }},
      {"audio.hop",
       [](RunConfig& c, const std::string& v) { c.mel.hop = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.mel.hop); }},
      {"audio.fft_size",
       [](RunConfig& c, const std::string& v) { c.mel.fft_size = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.mel.fft_size); }},
      {"audio.n_mels",
       [](RunConfig& c, const std::string& v) { c.mel.n_mels = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.mel.n_mels); }},
      {"audio.fmin",
       [](RunConfig& c, const std::string& v) { c.mel.fmin = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.mel.fmin); }},
      {"audio.fmax",
       [](RunConfig& c, const std::string& v) { c.mel.fmax = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.mel.fmax); }},

      {"aug.time_mask_max",
       [](RunConfig& c, const std::string& v) { c.aug.time_mask_max = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.aug.time_mask_max); }},
      {"aug.freq_mask_max",
       [](RunConfig& c, const std::string& v) { c.aug.freq_mask_max = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.aug.freq_mask_max); }},
      {"aug.warp_w",
       [](RunConfig& c, const std::string& v) { c.aug.warp_w = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.aug.warp_w); }},
      {"aug.eval_augment",
       [](RunConfig& c, const std::string& v) { c.aug.eval_augment = parse_bool(v); },
       [](const RunConfig& c) { return c.aug.eval_augment ? "true" : "false"; }},

      {"episode.n_way",
       [](RunConfig& c, const std::string& v) { c.episode.n_way = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.episode.n_way); }},
      {"episode.k_shot",
       [](RunConfig& c, const std::string& v) { c.episode.k_shot = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.episode.k_shot); }},
      {"episode.q_queries",
       [](RunConfig& c, const std::string& v) { c.episode.q_queries = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.episode.q_queries); }},

      {"model.conv_channels",
       [](RunConfig& c, const std::string& v) {
         const auto xs = parse_int_list(v);
         if (xs.size() != 4) throw ConfigError("expected exactly 4 channel counts");
         for (std::size_t i = 0; i < 4; ++i) c.model.conv_channels[i] = xs[i];
       },
       [](const RunConfig& c) {
         return join_int_list(std::vector<int>(c.model.conv_channels.begin(),
                                               c.model.conv_channels.end()));
       }},
      {"model.rnn_hidden",
       [](RunConfig& c, const std::string& v) { c.model.rnn_hidden = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.model.rnn_hidden); }},
      {"model.rnn_cell",
       [](RunConfig& c, const std::string& v) { c.model.rnn_cell = parse_rnn_cell(v); },
       [](const RunConfig& c) { return rnn_cell_name(c.model.rnn_cell); }},
      {"model.embedding",
       [](RunConfig& c, const std::string& v) { c.model.embedding = parse_embed_mode(v); },
       [](const RunConfig& c) { return embed_mode_name(c.model.embedding); }},
      {"model.fusion",
       [](RunConfig& c, const std::string& v) { c.model.fusion = parse_fusion(v); },
       [](const RunConfig& c) { return fusion_name(c.model.fusion); }},
      {"model.attention_ff",
       [](RunConfig& c, const std::string& v) { c.model.attention_ff = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.model.attention_ff); }},
      {"model.proj_hidden",
       [](RunConfig& c, const std::string& v) { c.model.proj_hidden = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.model.proj_hidden); }},
      {"model.proj_dim",
       [](RunConfig& c, const std::string& v) { c.model.proj_dim = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.model.proj_dim); }},

      {"contrastive.project_queries",
       [](RunConfig& c, const std::string& v) { c.model.project_queries = parse_bool(v); },
       [](const RunConfig& c) { return c.model.project_queries ? "true" : "false"; }},

      {"loss.kind",
       [](RunConfig& c, const std::string& v) { c.loss.kind = parse_loss_kind(v); },
       [](const RunConfig& c) { return loss_kind_name(c.loss.kind); }},
      {"loss.lambda",
       [](RunConfig& c, const std::string& v) { c.loss.lambda = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.loss.lambda); }},

      {"fs.squared",
       [](RunConfig& c, const std::string& v) { c.loss.fs.squared = parse_bool(v); },
       [](const RunConfig& c) { return c.loss.fs.squared ? "true" : "false"; }},
      {"fs.mean_over_all",
       [](RunConfig& c, const std::string& v) { c.loss.fs.mean_over_all = parse_bool(v); },
       [](const RunConfig& c) { return c.loss.fs.mean_over_all ? "true" : "false"; }},

      {"cpl.temperature",
       [](RunConfig& c, const std::string& v) { c.loss.cpl.temperature = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.loss.cpl.temperature); }},
      {"cpl.m",
       [](RunConfig& c, const std::string& v) { c.loss.cpl.m = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.loss.cpl.m); }},

      {"apl.alpha_deg",
       [](RunConfig& c, const std::string& v) { c.loss.apl.alpha_deg = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.loss.apl.alpha_deg); }},
      {"apl.anchor_mode",
       [](RunConfig& c, const std::string& v) { c.loss.apl.anchor_mode = parse_anchor_mode(v); },
       [](const RunConfig& c) { return anchor_mode_name(c.loss.apl.anchor_mode); }},

      {"train.epochs",
       [](RunConfig& c, const std::string& v) { c.train.epochs = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.train.epochs); }},
      {"train.episodes_per_epoch",
       [](RunConfig& c, const std::string& v) { c.train.episodes_per_epoch = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.train.episodes_per_epoch); }},
      {"train.lr",
       [](RunConfig& c, const std::string& v) { c.train.lr = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.lr); }},
      {"train.gamma",
       [](RunConfig& c, const std::string& v) { c.train.gamma = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.train.gamma); }},
      {"train.milestones",
       [](RunConfig& c, const std::string& v) { c.train.milestones = parse_int_list(v); },
       [](const RunConfig& c) { return join_int_list(c.train.milestones); }},
      {"train.val_episodes",
       [](RunConfig& c, const std::string& v) { c.train.val_episodes = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.train.val_episodes); }},

      {"eval.split",
       [](RunConfig& c, const std::string& v) { c.eval_split = data::parse_split(v); },
       [](const RunConfig& c) { return data::split_name(c.eval_split); }},
      {"eval.tasks",
       [](RunConfig& c, const std::string& v) { c.eval_tasks = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.eval_tasks); }},
      {"eval.shots",
       [](RunConfig& c, const std::string& v) { c.eval_shots = parse_int_list(v); },
       [](const RunConfig& c) { return join_int_list(c.eval_shots); }},

      {"synth.n_classes",
       [](RunConfig& c, const std::string& v) { c.synth.n_classes = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.n_classes); }},
      {"synth.clips_per_class",
       [](RunConfig& c, const std::string& v) { c.synth.clips_per_class = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.clips_per_class); }},
      {"synth.duration_s",
       [](RunConfig& c, const std::string& v) { c.synth.duration_s = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.synth.duration_s); }},
      {"synth.sample_rate",
       [](RunConfig& c, const std::string& v) { c.synth.sample_rate = static_cast<int>(parse_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.sample_rate); }},
      {"synth.f0_base",
       [](RunConfig& c, const std::string& v) { c.synth.f0_base = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.synth.f0_base); }},
      {"synth.f0_ratio",
       [](RunConfig& c, const std::string& v) { c.synth.f0_ratio = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.synth.f0_ratio); }},
      {"synth.noise_level",
       [](RunConfig& c, const std::string& v) { c.synth.noise_level = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.synth.noise_level); }},
      {"synth.train_frac",
       [](RunConfig& c, const std::string& v) { c.synth.train_frac = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.synth.train_frac); }},
      {"synth.val_frac",
       [](RunConfig& c, const std::string& v) { c.synth.val_frac = parse_real(v); },
       [](const RunConfig& c) { return format_double(c.synth.val_frac); }},
  };
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : key_table())
    if (name == k.name) return &k;
  return nullptr;
}

void set_key(RunConfig& cfg, const std::string& name, const std::string& value) {
  const Key* key = find_key(name);
  if (key == nullptr) throw ConfigError(cat("unknown config key: ", name));
  try {
    key->set(cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError(cat(name, ": ", e.what()));
  } catch (const std::exception& e) {
    throw ConfigError(cat(name, ": bad value '", value, "'"));
  }
}

}  // namespace

int RunConfig::frames_per_clip() const {
  const auto samples =
      static_cast<std::int64_t>(std::llround(clip_seconds * mel.sample_rate));
  if (samples < mel.window)
    throw ConfigError("audio.clip_seconds too short for the analysis window");
  return audio::frame_count(samples, mel.hop);
}

void RunConfig::finalize() {
  mel.validate();
  if (clip_seconds <= 0) throw ConfigError("audio.clip_seconds must be positive");
  if (episode.n_way <= 0 || episode.k_shot <= 0 || episode.q_queries <= 0)
    throw ConfigError("episode.n_way, episode.k_shot and episode.q_queries must be positive");
  model.input_mels = mel.n_mels;
  model.input_frames = frames_per_clip();
  model.validate();
  try {
    aug.validate(model.input_mels, model.input_frames);
  } catch (const Error& e) {
    // Out-of-range widths are a config problem here, not a caller bug.
    throw ConfigError(e.what());
  }
  loss.cpl.validate();
  loss.apl.validate();
  if (loss.lambda < 0) throw ConfigError("loss.lambda must be nonnegative");
  if (loss.kind != loss::LossKind::kFs && !model.project_queries &&
      model.proj_dim != model.fused_dim())
    throw ConfigError(
        cat("contrastive.project_queries=false requires model.proj_dim == ",
            model.fused_dim(), " (the fused embedding size)"));
  train.validate();
  synth.validate();
  if (eval_tasks <= 0) throw ConfigError("eval.tasks must be positive");
  for (int s : eval_shots)
    if (s < 1) throw ConfigError("eval.shots entries must be >= 1");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(cat("config line ", line_no, ": expected key = value"));
    set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig read_config_file(const std::filesystem::path& path) {
  return parse_config_text(read_text_file(path));
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError(cat("override '", assignment, "': expected key=value"));
  set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& key : key_table()) os << key.name << " = " << key.get(cfg) << "\n";
  return os.str();
}

}  // namespace pafs::config
