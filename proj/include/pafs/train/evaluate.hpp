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
#include <string>
#include <vector>

#include "pafs/csv.hpp"
#include "pafs/data/episode.hpp"
#include "pafs/io_util.hpp"
#include "pafs/loss/few_shot.hpp"
#include "pafs/loss/prototypes.hpp"
#include "pafs/model/embedding.hpp"
#include "pafs/parallel.hpp"

namespace pafs::train {

/// Nearest-prototype labels for fused query embeddings; exact distance ties
/// go to the lowest episode-local label.
template <typename Scalar>
std::vector<int> predict(const Matrix<Scalar>& queries,
                         const Matrix<Scalar>& prototypes) {
  const Matrix<Scalar> dist = loss::squared_euclidean(queries, prototypes);
  std::vector<int> labels(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < dist.cols(); ++c)
      if (dist(i, c) < dist(i, best)) best = static_cast<int>(c);
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

struct EvalResult {
  int n_tasks = 0;
  std::vector<double> accuracies;
  double mean = 0.0;
  double ci95 = 0.0;
};

/// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
inline double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double ci95_half_width(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return 1.96 * sample_std(xs) / std::sqrt(static_cast<double>(xs.size()));
}

inline EvalResult summarize(std::vector<double> accuracies) {
  EvalResult r;
  r.n_tasks = static_cast<int>(accuracies.size());
  r.accuracies = std::move(accuracies);
  double sum = 0.0;
  for (double a : r.accuracies) sum += a;
  r.mean = r.n_tasks > 0 ? sum / r.n_tasks : 0.0;
  r.ci95 = ci95_half_width(r.accuracies);
  return r;
}

struct EvalSpec {
  data::Split split = data::Split::kTest;
  int n_way = 5;
  int k_shot = 5;
  int q_queries = 5;
  int n_tasks = 2000;
  std::uint64_t seed = 0;
  /// Stream tag separating evaluation draws from other RNG consumers; the
  /// trainer runs validation under its own tag.
  std::uint64_t stream = rng_stream::kEvalTask;
  int workers = 1;
};

/// Accuracy over independently sampled tasks. Parameters are read-only: the
/// model runs in inference mode and tasks may evaluate in parallel, each on
/// its own RNG stream keyed by task id.
template <typename Scalar, typename Fetch>
EvalResult evaluate(const model::EmbeddingModel<Scalar>& model,
                    const data::DatasetIndex& index, const data::SegmentMap& segments,
                    const augment::AugmentConfig& aug, const EvalSpec& spec,
                    Fetch&& fetch) {
  if (spec.n_tasks <= 0) throw ContractError("evaluate: n_tasks must be positive");
  std::vector<double> accuracies(static_cast<std::size_t>(spec.n_tasks), 0.0);
  parallel_for(spec.n_tasks, spec.workers, [&](int t) {
    Rng rng(mix_seed(spec.seed, spec.stream, static_cast<std::uint64_t>(t)));
    const data::Episode ep =
        data::sample_episode(index, segments, spec.split, spec.n_way, spec.k_shot,
                             spec.q_queries, rng);
    const std::uint64_t aug_seed =
        mix_seed(spec.seed, spec.stream, static_cast<std::uint64_t>(t), 0x0a);
    const auto emb = model::embed_episode(model, ep, fetch, aug, aug.eval_augment,
                                          aug_seed, /*training=*/false);
    const Matrix<Scalar> protos =
        loss::compute_prototypes(emb.support, emb.support_labels, spec.n_way);
    const std::vector<int> pred = predict(emb.query, protos);
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (pred[i] == emb.query_labels[i]) ++correct;
    accuracies[static_cast<std::size_t>(t)] =
        static_cast<double>(correct) / static_cast<double>(pred.size());
  });
  return summarize(std::move(accuracies));
}

/// Writes `task_id,accuracy` rows with a trailing summary row holding the
/// mean accuracy.
inline void write_eval_tasks_csv(const std::filesystem::path& path,
                                 const EvalResult& r) {
  atomic_write(path, [&](std::ostream& os) {
    os << "task_id,accuracy\n";
    for (std::size_t i = 0; i < r.accuracies.size(); ++i)
      os << i << "," << format_double(r.accuracies[i]) << "\n";
    os << "summary," << format_double(r.mean) << "\n";
  });
}

inline void write_eval_summary_csv(const std::filesystem::path& path,
                                   const EvalResult& r) {
  atomic_write(path, [&](std::ostream& os) {
    os << "n_tasks,mean,ci95\n";
    os << r.n_tasks << "," << format_double(r.mean) << "," << format_double(r.ci95)
       << "\n";
  });
}

struct SweepRow {
  int shots = 0;
  double mean = 0.0;
  double ci95 = 0.0;
};

/// One evaluation per shot count, all other settings shared. Task streams are
/// keyed by task id only, so shot counts see matched class draws.
template <typename Scalar, typename Fetch>
std::vector<SweepRow> kshot_sweep(const model::EmbeddingModel<Scalar>& model,
                                  const data::DatasetIndex& index,
                                  const data::SegmentMap& segments,
                                  const augment::AugmentConfig& aug, EvalSpec spec,
                                  const std::vector<int>& shots, Fetch&& fetch) {
  std::vector<SweepRow> rows;
  for (int k : shots) {
    if (k < 1) throw ConfigError("kshot_sweep: shots must be >= 1");
    spec.k_shot = k;
    const EvalResult r = evaluate(model, index, segments, aug, spec, fetch);
    rows.push_back(SweepRow{k, r.mean, r.ci95});
  }
  return rows;
}

inline void write_sweep_csv(const std::filesystem::path& path,
                            const std::vector<SweepRow>& rows) {
  atomic_write(path, [&](std::ostream& os) {
    os << "shots,mean,ci95\n";
    for (const auto& r : rows)
      os << r.shots << "," << format_double(r.mean) << "," << format_double(r.ci95)
         << "\n";
  });
}

/// Mean of per-seed means with the confidence interval taken across seeds.
inline EvalResult aggregate_over_seeds(const std::vector<EvalResult>& per_seed) {
  std::vector<double> means;
  means.reserve(per_seed.size());
  for (const auto& r : per_seed) means.push_back(r.mean);
  return summarize(std::move(means));
}

}  // namespace pafs::train
