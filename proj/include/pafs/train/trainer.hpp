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
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "pafs/audio/stats.hpp"
#include "pafs/csv.hpp"
#include "pafs/io_util.hpp"
#include "pafs/model/checkpoint.hpp"
#include "pafs/train/adam.hpp"
#include "pafs/train/evaluate.hpp"
#include "pafs/train/objective.hpp"

namespace pafs::train {

struct EpisodeShape {
  int n_way = 5;
  int k_shot = 5;
  int q_queries = 5;
};

struct TrainConfig {
  int epochs = 200;
  int episodes_per_epoch = 100;
  double lr = 1e-3;
  double gamma = 0.5;
  std::vector<int> milestones{100, 150};
  int val_episodes = 200;
  int val_workers = 1;

  void validate() const {
    if (epochs <= 0) throw ConfigError("train.epochs must be positive");
    if (episodes_per_epoch <= 0)
      throw ConfigError("train.episodes_per_epoch must be positive");
    // lr = 0 is allowed so a zero step can be asserted to leave parameters
    // bit-identical.
    if (lr < 0) throw ConfigError("train.lr must be nonnegative");
    if (gamma <= 0 || gamma > 1) throw ConfigError("train.gamma must be in (0, 1]");
    if (val_episodes <= 0) throw ConfigError("train.val_episodes must be positive");
    for (int m : milestones)
      if (m <= 0) throw ConfigError("train.milestones must be positive epochs");
  }
};

/// Output locations; empty paths skip the corresponding artifact.
struct TrainArtifacts {
  std::filesystem::path train_log;
  std::filesystem::path val_log;
  std::filesystem::path checkpoint;
};

struct TrainResult {
  int best_epoch = 0;  // 1-based
  double best_val_accuracy = 0.0;
  std::vector<double> val_accuracies;
  std::int64_t episodes_run = 0;
};

namespace trainer_detail {

inline std::string dump_episode(const data::Episode& ep) {
  std::ostringstream os;
  os << "classes=[";
  for (std::size_t i = 0; i < ep.class_ids.size(); ++i)
    os << (i ? " " : "") << ep.class_ids[i];
  os << "] support=[";
  for (const auto& it : ep.support)
    os << "(" << it.ref.clip_id << ":" << it.ref.record_id << "/" << it.label << ")";
  os << "] query=[";
  for (const auto& it : ep.query)
    os << "(" << it.ref.clip_id << ":" << it.ref.record_id << "/" << it.label << ")";
  os << "]";
  return os.str();
}

}  // namespace trainer_detail

/// Episodic training: one optimizer step per episode, piecewise-constant
/// learning-rate decay, validation after every epoch on a fixed episode set,
/// and retention of the checkpoint with the best validation accuracy.
template <typename Scalar, typename Fetch>
TrainResult train(model::EmbeddingModel<Scalar>& model, const data::DatasetIndex& index,
                  const data::SegmentMap& segments, const EpisodeShape& shape,
                  const LossConfig& loss_cfg, const TrainConfig& tcfg,
                  const augment::AugmentConfig& aug, std::uint64_t seed,
                  const TrainArtifacts& artifacts, const std::string& config_snapshot,
                  const audio::GlobalStats& stats, Fetch&& fetch) {
  tcfg.validate();
  auto& reg = model.params();
  typename Adam<Scalar>::Config acfg;
  acfg.lr = tcfg.lr;
  Adam<Scalar> adam(reg, acfg);

  std::ostringstream train_log;
  std::ostringstream val_log;
  train_log << "epoch,episode,l_fs,l_cm,l_total,lr\n";
  val_log << "epoch,accuracy\n";

  TrainResult result;
  result.best_val_accuracy = -1.0;
  std::int64_t counter = 0;
  std::vector<typename model::EmbeddingModel<Scalar>::SampleTape> tapes;

  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    const double lr_epoch = multistep_lr(tcfg.lr, tcfg.gamma, tcfg.milestones, epoch);
    adam.set_lr(lr_epoch);

    for (int e = 1; e <= tcfg.episodes_per_epoch; ++e, ++counter) {
      Rng sampler(mix_seed(seed, rng_stream::kTrainEpisode,
                           static_cast<std::uint64_t>(counter)));
      const data::Episode ep =
          data::sample_episode(index, segments, data::Split::kTrain, shape.n_way,
                               shape.k_shot, shape.q_queries, sampler);
      reg.zero_grads();
      const std::uint64_t aug_seed =
          mix_seed(seed, rng_stream::kAugment, static_cast<std::uint64_t>(counter));
      const auto emb = model::embed_episode(model, ep, fetch, aug, /*augment=*/true,
                                            aug_seed, /*training=*/true, &tapes);
      Rng neg_rng(mix_seed(seed, rng_stream::kCplNegatives,
                           static_cast<std::uint64_t>(counter)));
      const auto res =
          episode_objective(model, emb, loss_cfg, &neg_rng, /*want_grads=*/true);
      if (!std::isfinite(res.report.l_total))
        throw TrainingError(cat("non-finite loss at epoch ", epoch, " episode ", e,
                                ": l_fs=", res.report.l_fs, " l_cm=", res.report.l_cm,
                                " ", trainer_detail::dump_episode(ep)));
      for (Eigen::Index r = 0; r < emb.support.rows(); ++r)
        model.backward_views(tapes[static_cast<std::size_t>(r)],
                             res.dsupport.row(r).transpose());
      for (Eigen::Index r = 0; r < emb.query.rows(); ++r)
        model.backward_views(tapes[static_cast<std::size_t>(emb.support.rows() + r)],
                             res.dquery.row(r).transpose());
      adam.step();
      ++result.episodes_run;
      train_log << epoch << "," << e << "," << format_double(res.report.l_fs) << ","
                << format_double(res.report.l_cm) << ","
                << format_double(res.report.l_total) << "," << format_double(lr_epoch)
                << "\n";
    }

    EvalSpec vs;
    vs.split = data::Split::kVal;
    vs.n_way = shape.n_way;
    vs.k_shot = shape.k_shot;
    vs.q_queries = shape.q_queries;
    vs.n_tasks = tcfg.val_episodes;
    vs.seed = seed;
    vs.stream = rng_stream::kValidation;
    vs.workers = tcfg.val_workers;
    const double acc = evaluate(model, index, segments, aug, vs, fetch).mean;
    result.val_accuracies.push_back(acc);
    val_log << epoch << "," << format_double(acc) << "\n";

    if (acc > result.best_val_accuracy) {
      result.best_val_accuracy = acc;
      result.best_epoch = epoch;
      if (!artifacts.checkpoint.empty())
        model::save_checkpoint(artifacts.checkpoint, reg, config_snapshot, stats);
    }
  }

  if (!artifacts.train_log.empty())
    atomic_write(artifacts.train_log, [&](std::ostream& os) { os << train_log.str(); });
  if (!artifacts.val_log.empty())
    atomic_write(artifacts.val_log, [&](std::ostream& os) { os << val_log.str(); });
  return result;
}

}  // namespace pafs::train
