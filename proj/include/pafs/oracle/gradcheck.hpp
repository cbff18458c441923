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
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pafs/model/embedding.hpp"
#include "pafs/oracle/finite_diff.hpp"
#include "pafs/oracle/naive_losses.hpp"
#include "pafs/train/objective.hpp"

namespace pafs::oracle {

constexpr double kGradTolerance = 1e-4;

/// Outcome of one gradient check, aggregated over its random instances.
struct GradCheckRow {
  std::string name;
  double max_rel_err = 0.0;
  double step = kFdStep;
  int instances = 0;
  int skipped = 0;  // instances dropped for sitting on a mining boundary
  bool pass = false;
};

struct GradCheckOptions {
  int loss_instances = 20;
  int composition_instances = 20;
  /// Input-gradient finite differences rerun the whole episode per entry, so
  /// only this many of the composition instances repeat the check w.r.t. a
  /// raw input spectrogram.
  int input_check_instances = 6;
  std::uint64_t seed = 0x9d2c5680;
  double step = kFdStep;
  double tolerance = kGradTolerance;
  /// Angular instances with any candidate triplet this close to the mining
  /// threshold (degrees) are skipped rather than failed.
  double boundary_margin_deg = 1e-6;
};

namespace detail {

inline MatrixD random_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  MatrixD m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline void finish(GradCheckRow& row, double tolerance) {
  row.pass = row.instances > 0 && row.max_rel_err < tolerance;
}

/// Smallest |angle - alpha| over every candidate triplet, used to detect
/// instances whose mining decision could flip under a finite-difference step.
inline double min_boundary_gap_deg(const MatrixD& batch, const std::vector<int>& labels,
                                   int n_prototypes, double alpha_deg,
                                   loss::AnchorMode mode) {
  const int rows = static_cast<int>(batch.rows());
  const int anchor_limit =
      mode == loss::AnchorMode::kPrototypesOnly ? n_prototypes : rows;
  double gap = 180.0;
  for (int a = 0; a < anchor_limit; ++a)
    for (int p = 0; p < rows; ++p) {
      if (p == a || labels[static_cast<std::size_t>(p)] != labels[static_cast<std::size_t>(a)])
        continue;
      for (int n = 0; n < rows; ++n) {
        if (labels[static_cast<std::size_t>(n)] == labels[static_cast<std::size_t>(a)])
          continue;
        const double angle = loss::triplet_angle_deg(batch, loss::Triplet{a, p, n});
        gap = std::min(gap, std::abs(angle - alpha_deg));
      }
    }
  return gap;
}

}  // namespace detail

/// Checks few_shot_loss gradients against central differences for one config
/// variant, appending one row per checked argument.
inline void check_few_shot(const GradCheckOptions& opt, const loss::FewShotConfig& cfg,
                           const std::string& label, std::uint64_t stream,
                           std::vector<GradCheckRow>& rows) {
  GradCheckRow rq{label + "/queries", 0.0, opt.step, 0, 0, false};
  GradCheckRow rp{label + "/prototypes", 0.0, opt.step, 0, 0, false};
  for (int i = 0; i < opt.loss_instances; ++i) {
    Rng rng(mix_seed(opt.seed, stream, static_cast<std::uint64_t>(i)));
    const int n = 2 + static_cast<int>(rng.uniform_below(4));
    const int q = 1 + static_cast<int>(rng.uniform_below(5));
    const int dim = 2 + static_cast<int>(rng.uniform_below(7));
    std::vector<int> labels;
    for (int c = 0; c < n; ++c)
      for (int j = 0; j < q; ++j) labels.push_back(c);
    MatrixD queries = detail::random_gaussian(rng, n * q, dim);
    MatrixD protos = detail::random_gaussian(rng, n, dim);

    MatrixD dq, dp;
    loss::few_shot_loss(queries, labels, protos, cfg, &dq, &dp);
    auto f = [&]() { return loss::few_shot_loss(queries, labels, protos, cfg); };
    const MatrixD fd_q = finite_diff_gradient(f, queries, opt.step);
    const MatrixD fd_p = finite_diff_gradient(f, protos, opt.step);
    rq.max_rel_err = std::max(rq.max_rel_err, max_relative_error(dq, fd_q));
    rp.max_rel_err = std::max(rp.max_rel_err, max_relative_error(dp, fd_p));
    ++rq.instances;
    ++rp.instances;
  }
  detail::finish(rq, opt.tolerance);
  detail::finish(rp, opt.tolerance);
  rows.push_back(rq);
  rows.push_back(rp);
}

/// Checks cpl_loss gradients with the negative draws frozen across the
/// finite-difference evaluations.
inline void check_cpl(const GradCheckOptions& opt, std::vector<GradCheckRow>& rows) {
  GradCheckRow rp{"cpl/prototypes", 0.0, opt.step, 0, 0, false};
  GradCheckRow rq{"cpl/queries", 0.0, opt.step, 0, 0, false};
  for (int i = 0; i < opt.loss_instances; ++i) {
    Rng rng(mix_seed(opt.seed, 0x11, static_cast<std::uint64_t>(i)));
    const int n = 2 + static_cast<int>(rng.uniform_below(4));
    const int q = 1 + static_cast<int>(rng.uniform_below(5));
    const int dim = 2 + static_cast<int>(rng.uniform_below(7));
    loss::CplConfig cfg;
    cfg.temperature = 0.05 + 0.1 * rng.uniform_real();
    cfg.m = 1 + static_cast<int>(rng.uniform_below(5));
    std::vector<int> labels;
    for (int c = 0; c < n; ++c)
      for (int j = 0; j < q; ++j) labels.push_back(c);
    MatrixD queries = detail::random_gaussian(rng, n * q, dim);
    MatrixD protos = detail::random_gaussian(rng, n, dim);
    queries.rowwise().normalize();
    protos.rowwise().normalize();
    const loss::CplNegatives negatives =
        loss::draw_cpl_negatives(labels, n, cfg.m, rng);

    MatrixD dp, dq;
    loss::cpl_loss(protos, queries, labels, cfg, negatives, &dp, &dq);
    auto f = [&]() { return loss::cpl_loss(protos, queries, labels, cfg, negatives); };
    const MatrixD fd_p = finite_diff_gradient(f, protos, opt.step);
    const MatrixD fd_q = finite_diff_gradient(f, queries, opt.step);
    rp.max_rel_err = std::max(rp.max_rel_err, max_relative_error(dp, fd_p));
    rq.max_rel_err = std::max(rq.max_rel_err, max_relative_error(dq, fd_q));
    ++rp.instances;
    ++rq.instances;
  }
  detail::finish(rp, opt.tolerance);
  detail::finish(rq, opt.tolerance);
  rows.push_back(rp);
  rows.push_back(rq);
}

/// Checks apl_loss gradients per anchor mode with the mined triplet list
/// frozen; instances whose candidate angles graze the threshold are skipped.
inline void check_apl(const GradCheckOptions& opt, loss::AnchorMode mode,
                      const std::string& label, std::vector<GradCheckRow>& rows) {
  GradCheckRow row{label + "/batch", 0.0, opt.step, 0, 0, false};
  const double alphas[] = {0.0, 15.0, 30.0, 45.0};
  int attempts = 0;
  while (row.instances < opt.loss_instances && attempts < 10 * opt.loss_instances) {
    const int i = attempts++;
    Rng rng(mix_seed(opt.seed, 0x21, static_cast<std::uint64_t>(i),
                     static_cast<std::uint64_t>(mode)));
    const int n = 2 + static_cast<int>(rng.uniform_below(4));
    const int q = 1 + static_cast<int>(rng.uniform_below(5));
    const int dim = 2 + static_cast<int>(rng.uniform_below(7));
    const double alpha = alphas[i % 4];
    std::vector<int> labels;
    for (int c = 0; c < n; ++c) labels.push_back(c);
    for (int c = 0; c < n; ++c)
      for (int j = 0; j < q; ++j) labels.push_back(c);
    MatrixD batch = detail::random_gaussian(rng, n + n * q, dim);
    batch.rowwise().normalize();

    if (detail::min_boundary_gap_deg(batch, labels, n, alpha, mode) <
        opt.boundary_margin_deg) {
      ++row.skipped;
      continue;
    }
    const std::vector<loss::Triplet> triplets =
        loss::mine_triplets(batch, labels, n, alpha, mode);

    MatrixD dbatch;
    loss::apl_loss(batch, triplets, alpha, &dbatch);
    auto f = [&]() { return loss::apl_loss(batch, triplets, alpha); };
    const MatrixD fd = finite_diff_gradient(f, batch, opt.step);
    row.max_rel_err = std::max(row.max_rel_err, max_relative_error(dbatch, fd));
    ++row.instances;
  }
  detail::finish(row, opt.tolerance);
  rows.push_back(row);
}

namespace detail {

/// Tiny double-precision model sized so that elementwise finite differences
/// over every tensor stay affordable. Instances cycle through loss kinds and
/// architecture switches to cover every differentiable branch.
inline model::ModelConfig composition_model_config(int instance) {
  model::ModelConfig mc;
  mc.input_mels = 16;
  mc.input_frames = 16;
  mc.conv_channels = {2, 2, 2, 2};
  mc.rnn_hidden = 4;
  mc.attention_ff = 6;
  mc.proj_hidden = 5;
  mc.proj_dim = 4;
  mc.rnn_cell = (instance / 3) % 2 == 0 ? model::RnnKind::kGru : model::RnnKind::kTanh;
  mc.embedding = (instance / 6) % 2 == 0 ? model::EmbedMode::kFinalState
                                         : model::EmbedMode::kTemporalMean;
  mc.fusion = instance % 5 == 4 ? model::FusionKind::kConcat
                                : model::FusionKind::kAttention;
  if (instance % 6 == 4 || instance % 6 == 5) {
    // Unprojected queries need the projection output dimension to match.
    mc.project_queries = false;
    mc.proj_dim = mc.fused_dim();
  }
  mc.validate();
  return mc;
}

inline train::LossConfig composition_loss_config(int instance) {
  train::LossConfig cfg;
  switch (instance % 3) {
    case 0: cfg.kind = loss::LossKind::kFs; break;
    case 1: cfg.kind = loss::LossKind::kFsCpl; break;
    default: cfg.kind = loss::LossKind::kFsApl; break;
  }
  cfg.lambda = 0.3;
  cfg.cpl.temperature = 0.1;
  cfg.cpl.m = 2;
  cfg.apl.alpha_deg = instance % 2 == 0 ? 15.0 : 30.0;
  cfg.apl.anchor_mode = (instance / 2) % 2 == 0 ? loss::AnchorMode::kPrototypesOnly
                                                : loss::AnchorMode::kAllElements;
  return cfg;
}

inline data::Episode composition_episode(int n, int k, int q) {
  data::Episode ep;
  ep.n_way = n;
  ep.k_shot = k;
  ep.q_queries = q;
  int rid = 0;
  for (int c = 0; c < n; ++c) ep.class_ids.push_back(c);
  for (int c = 0; c < n; ++c)
    for (int j = 0; j < k; ++j, ++rid)
      ep.support.push_back({data::SampleRef{rid, rid}, c});
  for (int c = 0; c < n; ++c)
    for (int j = 0; j < q; ++j, ++rid)
      ep.query.push_back({data::SampleRef{rid, rid}, c});
  return ep;
}

}  // namespace detail

/// Runs the embed -> fuse -> project -> loss composition on a tiny model and
/// compares analytic parameter and input gradients against central finite
/// differences. One aggregated row per parameter tensor plus input rows.
inline void check_composition(const GradCheckOptions& opt,
                              std::vector<GradCheckRow>& rows) {
  std::map<std::string, std::size_t> index;
  std::vector<GradCheckRow> local;
  auto merge = [&](const std::string& name, double err) {
    auto it = index.find(name);
    if (it == index.end()) {
      index.emplace(name, local.size());
      local.push_back(GradCheckRow{name, err, opt.step, 1, 0, false});
    } else {
      auto& row = local[it->second];
      row.max_rel_err = std::max(row.max_rel_err, err);
      ++row.instances;
    }
  };

  const int n = 2, k = 2, q = 2;
  const data::Episode ep = detail::composition_episode(n, k, q);
  augment::AugmentConfig aug;
  aug.time_mask_max = 4;
  aug.freq_mask_max = 3;
  aug.warp_w = 2;

  for (int inst = 0; inst < opt.composition_instances; ++inst) {
    const model::ModelConfig mc = detail::composition_model_config(inst);
    const train::LossConfig lcfg = detail::composition_loss_config(inst);
    model::EmbeddingModel<double> model(mc);
    model.initialize(mix_seed(opt.seed, 0x31, static_cast<std::uint64_t>(inst)));

    // Jitter every trainable tensor off its init point. Zero biases are a
    // special point: a projection row whose hidden units are all dead sits
    // exactly on the zero-norm rescue, where the loss jumps under a bias
    // perturbation and finite differences are meaningless.
    {
      Rng jitter(mix_seed(opt.seed, 0x35, static_cast<std::uint64_t>(inst)));
      auto& params = model.params();
      for (std::size_t t = 0; t < params.size(); ++t) {
        auto& p = params.at(t);
        if (!p.trainable) continue;
        for (Eigen::Index i = 0; i < p.value.size(); ++i)
          p.value.data()[i] += 0.05 * (2.0 * jitter.uniform_real() - 1.0);
      }
    }

    const int n_records = n * (k + q);
    std::vector<MatrixD> records;
    Rng data_rng(mix_seed(opt.seed, 0x32, static_cast<std::uint64_t>(inst)));
    for (int r = 0; r < n_records; ++r)
      records.push_back(detail::random_gaussian(data_rng, mc.input_mels, mc.input_frames));
    auto fetch = [&](const data::SampleRef& ref) -> const MatrixD& {
      return records[static_cast<std::size_t>(ref.record_id)];
    };
    const std::uint64_t aug_seed = mix_seed(opt.seed, 0x33, static_cast<std::uint64_t>(inst));

    // Parameter gradients, with augmentation active: the mask and warp draws
    // depend only on the seed, so the loss stays smooth in the parameters.
    auto& reg = model.params();
    reg.zero_grads();
    std::vector<model::EmbeddingModel<double>::SampleTape> tapes;
    auto emb = model::embed_episode(model, ep, fetch, aug, true, aug_seed, true, &tapes);
    Rng neg_rng(mix_seed(opt.seed, 0x34, static_cast<std::uint64_t>(inst)));
    auto base = train::episode_objective(model, emb, lcfg, &neg_rng, true);
    for (Eigen::Index r = 0; r < emb.support.rows(); ++r)
      model.backward_views(tapes[static_cast<std::size_t>(r)],
                           base.dsupport.row(r).transpose());
    for (Eigen::Index r = 0; r < emb.query.rows(); ++r)
      model.backward_views(tapes[static_cast<std::size_t>(emb.support.rows() + r)],
                           base.dquery.row(r).transpose());

    const loss::CplNegatives negatives = base.cpl_negatives;
    const std::vector<loss::Triplet> triplets = base.triplets;
    auto forward = [&]() {
      auto e = model::embed_episode(model, ep, fetch, aug, true, aug_seed, true);
      return train::episode_objective(model, e, lcfg, nullptr, false, &negatives,
                                      &triplets)
          .report.l_total;
    };
    for (std::size_t t = 0; t < reg.size(); ++t) {
      auto& p = reg.at(t);
      if (!p.trainable) continue;
      const MatrixD analytic = p.grad;
      merge("composition/" + p.name,
            two_step_max_rel_err(forward, p.value, analytic, opt.step,
                                 opt.step / 100.0));
    }

    // Input gradients, with augmentation off so the summed per-view input
    // gradient is the gradient w.r.t. the raw spectrogram.
    if (inst < opt.input_check_instances) {
      reg.zero_grads();
      std::vector<model::EmbeddingModel<double>::SampleTape> tapes0;
      auto emb0 =
          model::embed_episode(model, ep, fetch, aug, false, aug_seed, true, &tapes0);
      auto base0 = train::episode_objective(model, emb0, lcfg, &neg_rng, true);
      const loss::CplNegatives neg0 = base0.cpl_negatives;
      const std::vector<loss::Triplet> trip0 = base0.triplets;

      const bool support_side = inst % 2 == 0;
      const std::size_t sample =
          support_side ? 0 : static_cast<std::size_t>(emb0.support.rows());
      const MatrixD analytic = model.backward_views(
          tapes0[sample], support_side ? base0.dsupport.row(0).transpose()
                                       : base0.dquery.row(0).transpose());
      auto forward0 = [&]() {
        auto e = model::embed_episode(model, ep, fetch, aug, false, aug_seed, true);
        return train::episode_objective(model, e, lcfg, nullptr, false, &neg0, &trip0)
            .report.l_total;
      };
      merge(support_side ? "composition/input[support]" : "composition/input[query]",
            two_step_max_rel_err(forward0, records[sample], analytic, opt.step,
                                 opt.step / 100.0));
    }
  }

  for (auto& row : local) {
    detail::finish(row, opt.tolerance);
    rows.push_back(row);
  }
}

/// Full battery: loss-level checks in every config variant, then the model
/// composition. Returns one row per check for reporting.
inline std::vector<GradCheckRow> run_gradcheck(const GradCheckOptions& opt = {}) {
  std::vector<GradCheckRow> rows;
  loss::FewShotConfig fs;
  check_few_shot(opt, fs, "few_shot", 0x01, rows);
  loss::FewShotConfig fs_euclid;
  fs_euclid.squared = false;
  check_few_shot(opt, fs_euclid, "few_shot[euclidean]", 0x02, rows);
  loss::FewShotConfig fs_classwise;
  fs_classwise.mean_over_all = false;
  check_few_shot(opt, fs_classwise, "few_shot[classwise]", 0x03, rows);
  check_cpl(opt, rows);
  check_apl(opt, loss::AnchorMode::kPrototypesOnly, "apl[prototypes]", rows);
  check_apl(opt, loss::AnchorMode::kAllElements, "apl[all_elements]", rows);
  check_composition(opt, rows);
  return rows;
}

inline bool all_passed(const std::vector<GradCheckRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return !rows.empty();
}

inline std::string format_gradcheck_table(const std::vector<GradCheckRow>& rows) {
  std::ostringstream os;
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  os << std::left << std::setw(static_cast<int>(width)) << "name"
     << "  max_rel_err   step     n  skip  status\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.name << "  "
       << std::scientific << std::setprecision(3) << r.max_rel_err << "  "
       << std::setprecision(0) << r.step << std::defaultfloat << "  "
       << std::right << std::setw(2) << r.instances << "  " << std::setw(4)
       << r.skipped << "  " << (r.pass ? "pass" : "FAIL") << "\n";
  }
  return os.str();
}

}  // namespace pafs::oracle
