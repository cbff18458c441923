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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "pafs/io_util.hpp"
#include "pafs/model/checkpoint.hpp"
#include "pafs/oracle/finite_diff.hpp"
#include "pafs/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace pafs;
using namespace pafs::train;

namespace {

fs::path test_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

MatrixD gaussian(int rows, int cols, Rng& rng) {
  MatrixD m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal();
  return m;
}

model::ModelConfig tiny_config() {
  model::ModelConfig cfg;
  cfg.conv_channels = {2, 2, 2, 2};
  cfg.rnn_hidden = 3;
  cfg.fusion = model::FusionKind::kConcat;
  cfg.attention_ff = 5;
  cfg.proj_hidden = 4;
  cfg.proj_dim = 3;
  cfg.input_mels = 16;
  cfg.input_frames = 16;
  return cfg;
}

// 8 classes, 6 clips each: classes 0-3 train, 4-5 val, 6-7 test. The clip
// spectrograms carry a per-class sinusoid plus clip noise.
struct ToyCorpus {
  data::DatasetIndex index;
  data::SegmentMap segments;
  std::vector<MatrixD> specs;
};

ToyCorpus toy_corpus() {
  ToyCorpus t;
  const int n_classes = 8;
  const int clips = 6;
  for (int c = 0; c < n_classes; ++c) {
    t.index.class_names.push_back("c" + std::to_string(c));
    data::Split split = data::Split::kTrain;
    if (c >= 6)
      split = data::Split::kTest;
    else if (c >= 4)
      split = data::Split::kVal;
    t.index.class_split.push_back(split);
    std::vector<int> ids;
    for (int i = 0; i < clips; ++i) {
      ids.push_back(c * clips + i);
      t.index.clip_class.push_back(c);
    }
    t.index.clips_by_class.push_back(ids);
  }
  t.segments = data::identity_segments(n_classes * clips);
  for (int clip = 0; clip < n_classes * clips; ++clip) {
    const int c = clip / clips;
    Rng rng(static_cast<std::uint64_t>(clip) + 900);
    MatrixD spec(16, 16);
    for (int r = 0; r < 16; ++r)
      for (int col = 0; col < 16; ++col)
        spec(r, col) =
            std::sin(0.3 * (c + 1) * (r + 1) + 0.1 * col) + 0.05 * rng.normal();
    t.specs.push_back(spec);
  }
  return t;
}

template <typename Scalar>
auto make_fetch(const ToyCorpus& t) {
  return [&t](const data::SampleRef& ref) -> Matrix<Scalar> {
    return t.specs[static_cast<std::size_t>(ref.record_id)].cast<Scalar>();
  };
}

template <typename Scalar>
model::EpisodeEmbeddings<Scalar> random_embeddings(int n_way, int k_shot,
                                                   int q_per_class, int dim,
                                                   Rng& rng) {
  model::EpisodeEmbeddings<Scalar> emb;
  emb.support = gaussian(n_way * k_shot, dim, rng).cast<Scalar>();
  emb.query = gaussian(n_way * q_per_class, dim, rng).cast<Scalar>();
  for (int c = 0; c < n_way; ++c)
    for (int i = 0; i < k_shot; ++i) emb.support_labels.push_back(c);
  for (int c = 0; c < n_way; ++c)
    for (int i = 0; i < q_per_class; ++i) emb.query_labels.push_back(c);
  return emb;
}

}  // namespace

TEST_CASE("adam descends a quadratic and never touches frozen tensors") {
  model::ParamRegistry<double> reg;
  auto& x = reg.add("x", 1, 1, model::Init::kZero, 1, true);
  auto& buf = reg.add("buf", 1, 1, model::Init::kZero, 1, false);
  x.value(0, 0) = 3.0;
  buf.value(0, 0) = 7.0;

  Adam<double>::Config cfg;
  cfg.lr = 0.1;
  Adam<double> adam(reg, cfg);
  for (int i = 0; i < 300; ++i) {
    x.grad(0, 0) = 2.0 * x.value(0, 0);
    buf.grad(0, 0) = 5.0;
    adam.step();
  }
  CHECK(std::abs(x.value(0, 0)) < 1e-2);
  CHECK(buf.value(0, 0) == 7.0);
  CHECK(adam.steps_taken() == 300);
}

TEST_CASE("adam with a zero learning rate leaves parameters bit identical") {
  model::ParamRegistry<double> reg;
  Rng rng(4);
  auto& p = reg.add("w", 3, 2, model::Init::kUniformFanIn, 2, true);
  reg.initialize(9);
  const MatrixD before = p.value;
  p.grad = gaussian(3, 2, rng);

  Adam<double>::Config cfg;
  cfg.lr = 0.0;
  Adam<double> adam(reg, cfg);
  adam.step();
  adam.step();
  adam.step();
  CHECK(p.value == before);

  CHECK_THROWS_AS((Adam<double>(reg, Adam<double>::Config{-1.0, 0.9, 0.999, 1e-8})),
                  ConfigError);
}

TEST_CASE("piecewise constant decay switches strictly after each milestone") {
  const std::vector<int> ms{100, 150};
  CHECK(multistep_lr(1.0, 0.5, ms, 1) == 1.0);
  CHECK(multistep_lr(1.0, 0.5, ms, 100) == 1.0);
  CHECK(multistep_lr(1.0, 0.5, ms, 101) == 0.5);
  CHECK(multistep_lr(1.0, 0.5, ms, 150) == 0.5);
  CHECK(multistep_lr(1.0, 0.5, ms, 151) == 0.25);
  CHECK(multistep_lr(1.0, 0.5, ms, 5000) == 0.25);
  CHECK(multistep_lr(0.02, 0.1, {}, 40) == 0.02);
}

TEST_CASE("episode objective with the distance loss alone matches a direct call") {
  model::EmbeddingModel<double> model(tiny_config());
  model.initialize(11);
  Rng rng(30);
  const auto emb = random_embeddings<double>(2, 2, 3, 12, rng);

  LossConfig cfg;
  cfg.kind = loss::LossKind::kFs;
  const auto res = episode_objective(model, emb, cfg, nullptr, /*want_grads=*/true);

  const MatrixD protos = loss::compute_prototypes(emb.support, emb.support_labels, 2);
  MatrixD dq, dp;
  const double l =
      loss::few_shot_loss(emb.query, emb.query_labels, protos, cfg.fs, &dq, &dp);

  CHECK(res.report.l_fs == doctest::Approx(l).epsilon(1e-14));
  CHECK(res.report.l_cm == 0.0);
  CHECK(res.report.lambda == 0.0);
  CHECK(res.report.l_total == res.report.l_fs);
  CHECK(res.report.triplets_mined == 0);
  CHECK((res.dquery - dq).cwiseAbs().maxCoeff() < 1e-14);
  for (Eigen::Index i = 0; i < res.dsupport.rows(); ++i) {
    const MatrixD expect = dp.row(emb.support_labels[static_cast<std::size_t>(i)]) / 2.0;
    CHECK((res.dsupport.row(i) - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("contrastive branch needs a negative source and replays frozen draws") {
  model::EmbeddingModel<double> model(tiny_config());
  model.initialize(12);
  Rng rng(31);
  const auto emb = random_embeddings<double>(3, 2, 4, 12, rng);

  LossConfig cfg;
  cfg.kind = loss::LossKind::kFsCpl;
  cfg.cpl.m = 3;
  CHECK_THROWS_AS(episode_objective(model, emb, cfg), ContractError);

  Rng neg(77);
  const auto live = episode_objective(model, emb, cfg, &neg, /*want_grads=*/true);
  CHECK(live.cpl_negatives.size() == 3);
  CHECK(live.report.lambda == cfg.lambda);
  CHECK(live.report.l_total ==
        doctest::Approx(live.report.l_fs + cfg.lambda * live.report.l_cm)
            .epsilon(1e-14));

  model.params().zero_grads();
  const auto replay = episode_objective(model, emb, cfg, nullptr, /*want_grads=*/true,
                                        &live.cpl_negatives);
  CHECK(replay.report.l_cm == live.report.l_cm);
  CHECK(replay.dquery == live.dquery);
  CHECK(replay.dsupport == live.dsupport);
}

TEST_CASE("contrastive weight scales the mixed gradient linearly") {
  model::EmbeddingModel<double> model(tiny_config());
  model.initialize(13);
  Rng rng(32);
  const auto emb = random_embeddings<double>(2, 2, 4, 12, rng);

  LossConfig base;
  base.kind = loss::LossKind::kFs;
  const auto fs_only = episode_objective(model, emb, base, nullptr, true);

  LossConfig cfg;
  cfg.kind = loss::LossKind::kFsCpl;
  cfg.cpl.m = 2;
  Rng neg(5);
  model.params().zero_grads();
  cfg.lambda = 0.3;
  const auto a = episode_objective(model, emb, cfg, &neg, true);
  model.params().zero_grads();
  cfg.lambda = 0.6;
  const auto b = episode_objective(model, emb, cfg, nullptr, true, &a.cpl_negatives);

  CHECK(b.report.l_cm == a.report.l_cm);
  CHECK(b.report.l_total - b.report.l_fs ==
        doctest::Approx(2.0 * (a.report.l_total - a.report.l_fs)).epsilon(1e-12));
  const MatrixD da = a.dquery - fs_only.dquery;
  const MatrixD db = b.dquery - fs_only.dquery;
  CHECK((db - 2.0 * da).cwiseAbs().maxCoeff() < 1e-12);
  const MatrixD sa = a.dsupport - fs_only.dsupport;
  const MatrixD sb = b.dsupport - fs_only.dsupport;
  CHECK((sb - 2.0 * sa).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("episode objective gradients agree with central differences") {
  Rng rng(33);

  SUBCASE("prototype contrastive term, projected queries") {
    model::EmbeddingModel<double> model(tiny_config());
    model.initialize(14);
    auto emb = random_embeddings<double>(2, 2, 3, 12, rng);
    LossConfig cfg;
    cfg.kind = loss::LossKind::kFsCpl;
    cfg.cpl.m = 2;
    Rng neg(8);
    const auto live = episode_objective(model, emb, cfg, &neg, true);
    const auto f = [&] {
      return episode_objective(model, emb, cfg, nullptr, false, &live.cpl_negatives)
          .report.l_total;
    };
    const MatrixD fd_q = oracle::finite_diff_gradient(f, emb.query);
    const MatrixD fd_s = oracle::finite_diff_gradient(f, emb.support);
    CHECK(oracle::max_relative_error(live.dquery, fd_q) < 1e-5);
    CHECK(oracle::max_relative_error(live.dsupport, fd_s) < 1e-5);
  }

  SUBCASE("prototype contrastive term, normalized raw queries") {
    model::ModelConfig mc = tiny_config();
    mc.project_queries = false;
    mc.proj_dim = mc.fused_dim();
    model::EmbeddingModel<double> model(mc);
    model.initialize(15);
    auto emb = random_embeddings<double>(2, 2, 3, 12, rng);
    LossConfig cfg;
    cfg.kind = loss::LossKind::kFsCpl;
    cfg.cpl.m = 2;
    Rng neg(9);
    const auto live = episode_objective(model, emb, cfg, &neg, true);
    const auto f = [&] {
      return episode_objective(model, emb, cfg, nullptr, false, &live.cpl_negatives)
          .report.l_total;
    };
    const MatrixD fd_q = oracle::finite_diff_gradient(f, emb.query);
    const MatrixD fd_s = oracle::finite_diff_gradient(f, emb.support);
    CHECK(oracle::max_relative_error(live.dquery, fd_q) < 1e-5);
    CHECK(oracle::max_relative_error(live.dsupport, fd_s) < 1e-5);
  }

  SUBCASE("angular term with frozen mining") {
    model::EmbeddingModel<double> model(tiny_config());
    model.initialize(16);
    auto emb = random_embeddings<double>(3, 2, 3, 12, rng);
    LossConfig cfg;
    cfg.kind = loss::LossKind::kFsApl;
    cfg.apl.alpha_deg = 15.0;
    const auto live = episode_objective(model, emb, cfg, nullptr, true);
    CHECK(live.report.triplets_mined == static_cast<std::int64_t>(live.triplets.size()));
    REQUIRE(!live.triplets.empty());
    const auto f = [&] {
      return episode_objective(model, emb, cfg, nullptr, false, nullptr,
                               &live.triplets)
          .report.l_total;
    };
    const MatrixD fd_q = oracle::finite_diff_gradient(f, emb.query);
    const MatrixD fd_s = oracle::finite_diff_gradient(f, emb.support);
    const auto frozen = episode_objective(model, emb, cfg, nullptr, true, nullptr,
                                          &live.triplets);
    CHECK(oracle::max_relative_error(frozen.dquery, fd_q) < 1e-5);
    CHECK(oracle::max_relative_error(frozen.dsupport, fd_s) < 1e-5);
  }
}

TEST_CASE("prediction breaks distance ties toward the lower label") {
  MatrixD protos(3, 2);
  protos << 0, 0, 2, 0, 5, 5;
  MatrixD queries(4, 2);
  queries << 1, 0, 2, 0, 4.9, 4.9, 0, 0;
  const auto labels = predict(queries, protos);
  CHECK(labels == std::vector<int>{0, 1, 2, 0});
}

TEST_CASE("accuracy summaries use the sample deviation") {
  CHECK(sample_std({}) == 0.0);
  CHECK(sample_std({0.5}) == 0.0);
  CHECK(sample_std({0.8, 1.0}) == doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ci95_half_width({0.8, 1.0}) == doctest::Approx(0.196).epsilon(1e-12));
  CHECK(ci95_half_width({0.7, 0.7, 0.7, 0.7}) == 0.0);

  const EvalResult r = summarize({0.5, 1.0});
  CHECK(r.n_tasks == 2);
  CHECK(r.mean == 0.75);
  CHECK(r.accuracies == std::vector<double>{0.5, 1.0});
}

TEST_CASE("evaluation is deterministic and read only") {
  const ToyCorpus corpus = toy_corpus();
  model::EmbeddingModel<float> model(tiny_config());
  model.initialize(21);
  auto fetch = make_fetch<float>(corpus);

  augment::AugmentConfig zero_width;
  zero_width.time_mask_max = 0;
  zero_width.freq_mask_max = 0;
  zero_width.warp_w = 0;
  zero_width.eval_augment = true;

  EvalSpec spec;
  spec.split = data::Split::kTest;
  spec.n_way = 2;
  spec.k_shot = 1;
  spec.q_queries = 2;
  spec.n_tasks = 6;
  spec.seed = 5;

  std::vector<MatrixF> before;
  for (std::size_t i = 0; i < model.params().size(); ++i)
    before.push_back(model.params().at(i).value);

  const auto r1 = evaluate(model, corpus.index, corpus.segments, zero_width, spec, fetch);
  const auto r2 = evaluate(model, corpus.index, corpus.segments, zero_width, spec, fetch);
  CHECK(r1.accuracies == r2.accuracies);
  CHECK(r1.n_tasks == 6);

  // Four zero-width views equal four plain copies, so disabling augmentation
  // at evaluation time must not move any accuracy.
  augment::AugmentConfig off;
  off.time_mask_max = 4;
  off.freq_mask_max = 4;
  off.warp_w = 3;
  off.eval_augment = false;
  const auto r3 = evaluate(model, corpus.index, corpus.segments, off, spec, fetch);
  CHECK(r3.accuracies == r1.accuracies);

  for (std::size_t i = 0; i < model.params().size(); ++i)
    CHECK(model.params().at(i).value == before[i]);

  EvalSpec bad = spec;
  bad.n_tasks = 0;
  CHECK_THROWS_AS(
      evaluate(model, corpus.index, corpus.segments, zero_width, bad, fetch),
      ContractError);
}

TEST_CASE("shot sweep rows mirror independent evaluations") {
  const ToyCorpus corpus = toy_corpus();
  model::EmbeddingModel<float> model(tiny_config());
  model.initialize(22);
  auto fetch = make_fetch<float>(corpus);

  augment::AugmentConfig aug;
  aug.time_mask_max = 0;
  aug.freq_mask_max = 0;
  aug.warp_w = 0;

  EvalSpec spec;
  spec.split = data::Split::kTest;
  spec.n_way = 2;
  spec.k_shot = 5;
  spec.q_queries = 2;
  spec.n_tasks = 4;
  spec.seed = 6;

  const auto rows =
      kshot_sweep(model, corpus.index, corpus.segments, aug, spec, {1, 3}, fetch);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].shots == 1);
  CHECK(rows[1].shots == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EvalSpec direct = spec;
    direct.k_shot = rows[i].shots;
    const auto r = evaluate(model, corpus.index, corpus.segments, aug, direct, fetch);
    CHECK(rows[i].mean == r.mean);
    CHECK(rows[i].ci95 == r.ci95);
  }

  CHECK_THROWS_AS(
      kshot_sweep(model, corpus.index, corpus.segments, aug, spec, {0}, fetch),
      ConfigError);
}

TEST_CASE("evaluation artifacts round trip through the csv writers") {
  const fs::path dir = test_dir("pafs_eval_csv");
  const EvalResult r = summarize({1.0, 0.5});

  write_eval_tasks_csv(dir / "tasks.csv", r);
  CHECK(read_text_file(dir / "tasks.csv") ==
        "task_id,accuracy\n0,1\n1,0.5\nsummary,0.75\n");

  write_eval_summary_csv(dir / "summary.csv", r);
  CHECK(read_text_file(dir / "summary.csv") ==
        "n_tasks,mean,ci95\n2,0.75," + format_double(r.ci95) + "\n");

  write_sweep_csv(dir / "sweep.csv", {{1, 0.5, 0.125}, {5, 0.8125, 0.25}});
  CHECK(read_text_file(dir / "sweep.csv") ==
        "shots,mean,ci95\n1,0.5,0.125\n5,0.8125,0.25\n");

  const auto agg = aggregate_over_seeds({summarize({1.0}), summarize({0.5, 0.5})});
  CHECK(agg.n_tasks == 2);
  CHECK(agg.mean == 0.75);
}

TEST_CASE("train config validation") {
  TrainConfig t;
  CHECK_NOTHROW(t.validate());
  t.lr = 0.0;
  CHECK_NOTHROW(t.validate());
  t.lr = -1.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t.lr = 1e-3;
  t.epochs = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t.epochs = 1;
  t.gamma = 0.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t.gamma = 0.5;
  t.milestones = {10, -1};
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t.milestones = {10};
  t.val_episodes = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("training writes logs and a checkpoint and reruns bit identically") {
  const fs::path dir = test_dir("pafs_train_smoke");
  const ToyCorpus corpus = toy_corpus();
  auto fetch = make_fetch<float>(corpus);

  augment::AugmentConfig aug;
  aug.time_mask_max = 4;
  aug.freq_mask_max = 4;
  aug.warp_w = 3;

  EpisodeShape shape;
  shape.n_way = 2;
  shape.k_shot = 1;
  shape.q_queries = 1;

  TrainConfig tcfg;
  tcfg.epochs = 2;
  tcfg.episodes_per_epoch = 3;
  tcfg.lr = 1e-3;
  tcfg.gamma = 0.5;
  tcfg.milestones = {1};
  tcfg.val_episodes = 3;

  LossConfig loss_cfg;
  loss_cfg.kind = loss::LossKind::kFs;

  audio::GlobalStats stats;
  stats.mean = -1.25;
  stats.std = 2.5;

  const auto run = [&](const std::string& tag, model::EmbeddingModel<float>& m) {
    TrainArtifacts art;
    art.train_log = dir / (tag + "_train.csv");
    art.val_log = dir / (tag + "_val.csv");
    art.checkpoint = dir / (tag + "_ckpt.bin");
    return pafs::train::train(m, corpus.index, corpus.segments, shape, loss_cfg, tcfg, aug,
                 /*seed=*/3, art, "snapshot-text", stats, fetch);
  };

  model::EmbeddingModel<float> m1(tiny_config());
  m1.initialize(31);
  const TrainResult res1 = run("a", m1);
  CHECK(res1.episodes_run == 6);
  REQUIRE(res1.val_accuracies.size() == 2);
  CHECK(res1.best_val_accuracy ==
        std::max(res1.val_accuracies[0], res1.val_accuracies[1]));
  const int expect_best = res1.val_accuracies[1] > res1.val_accuracies[0] ? 2 : 1;
  CHECK(res1.best_epoch == expect_best);

  const std::string train_log = read_text_file(dir / "a_train.csv");
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < train_log.size()) {
    const std::size_t nl = train_log.find('\n', pos);
    REQUIRE(nl != std::string::npos);
    lines.push_back(train_log.substr(pos, nl - pos));
    pos = nl + 1;
  }
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "epoch,episode,l_fs,l_cm,l_total,lr");
  CHECK(lines[1].rfind("1,1,", 0) == 0);
  CHECK(lines[6].rfind("2,3,", 0) == 0);
  CHECK(lines[1].substr(lines[1].rfind(',') + 1) == "0.001");
  CHECK(lines[6].substr(lines[6].rfind(',') + 1) == "0.0005");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    CHECK(fields.size() == 6);
    CHECK(fields[3] == "0");  // distance loss only
  }

  const std::string val_log = read_text_file(dir / "a_val.csv");
  CHECK(val_log.rfind("epoch,accuracy\n1,", 0) == 0);
  CHECK(std::count(val_log.begin(), val_log.end(), '\n') == 3);

  const auto info = model::read_checkpoint_info(dir / "a_ckpt.bin");
  CHECK(info.config_text == "snapshot-text");
  CHECK(info.stats.mean == -1.25);
  CHECK(info.stats.std == 2.5);

  model::EmbeddingModel<float> m2(tiny_config());
  m2.initialize(31);
  const TrainResult res2 = run("b", m2);
  CHECK(res2.val_accuracies == res1.val_accuracies);
  CHECK(read_text_file(dir / "b_train.csv") == train_log);
  CHECK(read_text_file(dir / "b_val.csv") == val_log);
  CHECK(read_text_file(dir / "b_ckpt.bin") == read_text_file(dir / "a_ckpt.bin"));

  // The checkpoint restores into a fresh model without complaint.
  model::EmbeddingModel<float> m3(tiny_config());
  model::load_checkpoint(dir / "a_ckpt.bin", m3.params());
}

TEST_CASE("training runs the mixed angular objective end to end") {
  const fs::path dir = test_dir("pafs_train_apl");
  const ToyCorpus corpus = toy_corpus();
  auto fetch = make_fetch<float>(corpus);

  augment::AugmentConfig aug;
  aug.time_mask_max = 4;
  aug.freq_mask_max = 4;
  aug.warp_w = 3;

  EpisodeShape shape;
  shape.n_way = 2;
  shape.k_shot = 1;
  shape.q_queries = 2;

  TrainConfig tcfg;
  tcfg.epochs = 1;
  tcfg.episodes_per_epoch = 2;
  tcfg.val_episodes = 2;

  LossConfig loss_cfg;
  loss_cfg.kind = loss::LossKind::kFsApl;
  loss_cfg.lambda = 0.3;
  loss_cfg.apl.alpha_deg = 15.0;

  TrainArtifacts art;
  art.train_log = dir / "train.csv";

  model::EmbeddingModel<float> m(tiny_config());
  m.initialize(41);
  const TrainResult res =
      pafs::train::train(m, corpus.index, corpus.segments, shape, loss_cfg, tcfg, aug,
            /*seed=*/8, art, "", audio::GlobalStats{}, fetch);
  CHECK(res.episodes_run == 2);
  CHECK(res.val_accuracies.size() == 1);
  const std::string log = read_text_file(dir / "train.csv");
  CHECK(std::count(log.begin(), log.end(), '\n') == 3);
}
