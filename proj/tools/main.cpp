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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pafs/audio/stats.hpp"
#include "pafs/csv.hpp"
#include "pafs/config/config.hpp"
#include "pafs/data/prepare.hpp"
#include "pafs/data/synth.hpp"
#include "pafs/model/checkpoint.hpp"
#include "pafs/oracle/gradcheck.hpp"
#include "pafs/train/evaluate.hpp"
#include "pafs/train/trainer.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_flag;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out_dir) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  auto* out = cmd->add_option("--out-dir", args.out_dir, "run output directory");
  if (needs_out_dir) out->required();
  cmd->add_option("--set", args.overrides, "override one config key (key=value)")
      ->take_all();
  cmd->add_option("--seed", args.seed_flag, "override the run seed");
  cmd->add_option("--workers", args.workers, "data-pipeline parallelism cap");
}

/// Precedence: config file, then --set in order, then PAFS_SEED, then --seed.
pafs::config::RunConfig load_config(const CommonArgs& args) {
  pafs::config::RunConfig cfg;
  if (!args.config_path.empty()) cfg = pafs::config::read_config_file(args.config_path);
  for (const auto& assignment : args.overrides)
    pafs::config::apply_override(cfg, assignment);
  if (const char* env = std::getenv("PAFS_SEED")) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw pafs::ConfigError(std::string("PAFS_SEED is not an integer: ") + env);
    }
  }
  if (args.seed_flag) cfg.seed = *args.seed_flag;
  cfg.finalize();
  return cfg;
}

void write_snapshot(const fs::path& out_dir, const pafs::config::RunConfig& cfg) {
  pafs::atomic_write(out_dir / "config_snapshot.txt",
                     [&](std::ostream& os) { os << pafs::config::serialize_config(cfg); });
}

fs::path manifest_path_for(const pafs::config::RunConfig& cfg, const fs::path& out) {
  return cfg.data_manifest.empty() ? out / "manifest.csv" : fs::path(cfg.data_manifest);
}

fs::path cache_path_for(const pafs::config::RunConfig& cfg, const fs::path& out) {
  return cfg.data_cache.empty() ? out / "cache.bin" : fs::path(cfg.data_cache);
}

fs::path segments_path_for(const pafs::config::RunConfig& cfg, const fs::path& out) {
  if (!cfg.data_segments.empty()) return cfg.data_segments;
  return cache_path_for(cfg, out).string() + ".segments.csv";
}

struct LoadedData {
  pafs::data::Manifest manifest;
  pafs::data::DatasetIndex index;
  pafs::audio::SpectrogramCache cache;
  pafs::data::SegmentMap segments;
};

LoadedData load_dataset(const pafs::config::RunConfig& cfg, const fs::path& out) {
  LoadedData d;
  d.manifest = pafs::data::read_manifest(manifest_path_for(cfg, out));
  d.index = pafs::data::build_index(d.manifest);
  d.cache = pafs::audio::read_cache(cache_path_for(cfg, out));
  d.segments = pafs::data::read_segment_map(segments_path_for(cfg, out),
                                            static_cast<int>(d.manifest.rows.size()));
  std::size_t mapped = 0;
  for (const auto& clip : d.segments) mapped += clip.size();
  if (mapped != d.cache.records.size())
    throw pafs::CorruptionError(
        pafs::cat("segment map covers ", mapped, " records but the cache holds ",
                  d.cache.records.size()));
  for (std::size_t clip = 0; clip < d.segments.size(); ++clip)
    for (int rec : d.segments[clip])
      if (d.cache.records[static_cast<std::size_t>(rec)].class_id !=
          static_cast<std::uint32_t>(d.manifest.rows[clip].class_id))
        throw pafs::CorruptionError(
            pafs::cat("record ", rec, " class disagrees with manifest clip ", clip));
  return d;
}

/// Returns standardized spectrograms straight from the cache.
auto make_fetch(const pafs::audio::SpectrogramCache& cache) {
  return [&cache](const pafs::data::SampleRef& ref) {
    pafs::audio::SpectrogramF spec;
    spec.values = cache.records[static_cast<std::size_t>(ref.record_id)].values;
    pafs::audio::standardize(spec, cache.stats);
    return spec.values;
  };
}

pafs::model::ModelConfig model_config_for_cache(pafs::model::ModelConfig mc,
                                                const pafs::audio::SpectrogramCache& cache) {
  mc.input_mels = cache.n_mels;
  mc.input_frames = cache.n_frames;
  mc.validate();
  return mc;
}

int cmd_synth(const CommonArgs& args) {
  pafs::config::RunConfig cfg = load_config(args);
  const fs::path out(args.out_dir);
  fs::create_directories(out);
  cfg.synth.seed = cfg.seed;
  const fs::path manifest = pafs::data::generate_synthetic(cfg.synth, out);
  write_snapshot(out, cfg);
  std::cout << "synth: wrote " << manifest.string() << "\n";
  return 0;
}

int cmd_prepare(const CommonArgs& args) {
  pafs::config::RunConfig cfg = load_config(args);
  const fs::path out(args.out_dir);
  fs::create_directories(out);
  const pafs::data::Manifest manifest =
      pafs::data::read_manifest(manifest_path_for(cfg, out));
  const auto result = pafs::data::prepare_cache(
      manifest, cfg.mel, cfg.clip_seconds, cache_path_for(cfg, out),
      segments_path_for(cfg, out), args.workers);
  write_snapshot(out, cfg);
  std::cout << "prepare: " << result.clips << " clips -> " << result.records
            << " records, mean=" << result.stats.mean << " std=" << result.stats.std
            << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args, std::optional<int> epochs_flag) {
  pafs::config::RunConfig cfg = load_config(args);
  if (epochs_flag) {
    cfg.train.epochs = *epochs_flag;
    cfg.train.validate();
  }
  const fs::path out(args.out_dir);
  fs::create_directories(out);
  const LoadedData data = load_dataset(cfg, out);

  const auto mc = model_config_for_cache(cfg.model, data.cache);
  cfg.aug.validate(mc.input_mels, mc.input_frames);
  pafs::model::EmbeddingModel<float> model(mc);
  model.initialize(cfg.seed);

  pafs::train::TrainArtifacts artifacts;
  artifacts.train_log = out / "train_log.csv";
  artifacts.val_log = out / "val_log.csv";
  artifacts.checkpoint = out / "checkpoint.bin";
  const std::string snapshot = pafs::config::serialize_config(cfg);
  write_snapshot(out, cfg);

  cfg.train.val_workers = args.workers;
  const auto result = pafs::train::train(
      model, data.index, data.segments, cfg.episode, cfg.loss, cfg.train, cfg.aug,
      cfg.seed, artifacts, snapshot, data.cache.stats, make_fetch(data.cache));
  std::cout << "train: best validation accuracy "
            << pafs::format_double(result.best_val_accuracy) << " at epoch "
            << result.best_epoch << "; checkpoint " << artifacts.checkpoint.string()
            << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& checkpoint,
             const std::string& seeds_csv) {
  pafs::config::RunConfig cfg = load_config(args);
  const fs::path out(args.out_dir);
  fs::create_directories(out);
  const LoadedData data = load_dataset(cfg, out);

  const auto info = pafs::model::read_checkpoint_info(checkpoint);
  const auto train_time_cfg = pafs::config::parse_config_text(info.config_text);
  const auto mc = model_config_for_cache(train_time_cfg.model, data.cache);
  pafs::model::EmbeddingModel<float> model(mc);
  pafs::model::load_checkpoint(checkpoint, model.params());

  std::vector<std::uint64_t> seeds;
  if (seeds_csv.empty()) {
    seeds.push_back(cfg.seed);
  } else {
    std::stringstream ss(seeds_csv);
    std::string item;
    while (std::getline(ss, item, ','))
      seeds.push_back(std::stoull(pafs::trim(item)));
    if (seeds.empty()) throw pafs::ConfigError("--seeds list is empty");
  }

  pafs::train::EvalSpec spec;
  spec.split = cfg.eval_split;
  spec.n_way = cfg.episode.n_way;
  spec.k_shot = cfg.episode.k_shot;
  spec.q_queries = cfg.episode.q_queries;
  spec.n_tasks = cfg.eval_tasks;
  spec.workers = args.workers;

  auto fetch = make_fetch(data.cache);
  std::vector<pafs::train::EvalResult> per_seed;
  for (std::uint64_t s : seeds) {
    spec.seed = s;
    per_seed.push_back(
        pafs::train::evaluate(model, data.index, data.segments, cfg.aug, spec, fetch));
  }

  if (seeds.size() == 1) {
    pafs::train::write_eval_tasks_csv(out / "eval_tasks.csv", per_seed[0]);
    pafs::train::write_eval_summary_csv(out / "eval_summary.csv", per_seed[0]);
    std::cout << "eval: mean " << pafs::format_double(per_seed[0].mean) << " ci95 "
              << pafs::format_double(per_seed[0].ci95) << " over "
              << per_seed[0].n_tasks << " tasks\n";
  } else {
    const auto aggregate = pafs::train::aggregate_over_seeds(per_seed);
    pafs::atomic_write(out / "eval_summary.csv", [&](std::ostream& os) {
      os << "seed,n_tasks,mean,ci95\n";
      for (std::size_t i = 0; i < seeds.size(); ++i)
        os << seeds[i] << "," << per_seed[i].n_tasks << ","
           << pafs::format_double(per_seed[i].mean) << ","
           << pafs::format_double(per_seed[i].ci95) << "\n";
      os << "aggregate," << aggregate.n_tasks << ","
         << pafs::format_double(aggregate.mean) << ","
         << pafs::format_double(aggregate.ci95) << "\n";
    });
    std::cout << "eval: aggregate mean " << pafs::format_double(aggregate.mean)
              << " ci95 " << pafs::format_double(aggregate.ci95) << " over "
              << seeds.size() << " seeds\n";
  }

  if (!cfg.eval_shots.empty()) {
    std::vector<std::vector<pafs::train::SweepRow>> sweeps;
    for (std::uint64_t s : seeds) {
      spec.seed = s;
      sweeps.push_back(pafs::train::kshot_sweep(model, data.index, data.segments,
                                                cfg.aug, spec, cfg.eval_shots, fetch));
    }
    std::vector<pafs::train::SweepRow> rows;
    for (std::size_t j = 0; j < cfg.eval_shots.size(); ++j) {
      std::vector<double> means;
      for (const auto& sweep : sweeps) means.push_back(sweep[j].mean);
      pafs::train::SweepRow row;
      row.shots = cfg.eval_shots[j];
      const auto agg = pafs::train::summarize(means);
      row.mean = agg.mean;
      row.ci95 = agg.ci95;
      rows.push_back(row);
    }
    pafs::train::write_sweep_csv(out / "kshot_sweep.csv", rows);
  }

  write_snapshot(out, cfg);
  return 0;
}

int cmd_gradcheck() {
  const auto rows = pafs::oracle::run_gradcheck();
  std::cout << pafs::oracle::format_gradcheck_table(rows);
  if (!pafs::oracle::all_passed(rows)) {
    std::cerr << "gradcheck: FAILED\n";
    return 1;
  }
  std::cout << "gradcheck: all checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-shot audio classification workbench"};
  app.require_subcommand(1);

  CommonArgs synth_args, prepare_args, train_args, eval_args;
  auto* synth = app.add_subcommand("synth", "generate the synthetic dataset");
  add_common(synth, synth_args, true);
  auto* prepare = app.add_subcommand("prepare", "build the spectrogram cache");
  add_common(prepare, prepare_args, true);
  auto* train = app.add_subcommand("train", "train a model");
  add_common(train, train_args, true);
  std::optional<int> epochs_flag;
  train->add_option("--epochs", epochs_flag, "override train.epochs");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, eval_args, true);
  std::string checkpoint_path;
  std::string seeds_csv;
  eval->add_option("--checkpoint", checkpoint_path, "trained checkpoint file")
      ->required();
  eval->add_option("--seeds", seeds_csv, "comma-separated seeds for repeated runs");
  auto* gradcheck = app.add_subcommand("gradcheck", "verify analytic gradients");
  (void)gradcheck;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (prepare->parsed()) return cmd_prepare(prepare_args);
    if (train->parsed()) return cmd_train(train_args, epochs_flag);
    if (eval->parsed()) return cmd_eval(eval_args, checkpoint_path, seeds_csv);
    if (gradcheck->parsed()) return cmd_gradcheck();
  } catch (const pafs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pafs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
