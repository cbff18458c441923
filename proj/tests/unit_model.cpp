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

#include <filesystem>
#include <fstream>

#include "pafs/io_util.hpp"
#include "pafs/model/attention.hpp"
#include "pafs/model/checkpoint.hpp"
#include "pafs/model/conv.hpp"
#include "pafs/model/embedding.hpp"
#include "pafs/model/projection.hpp"
#include "pafs/model/rnn.hpp"
#include "pafs/oracle/finite_diff.hpp"

namespace fs = std::filesystem;
using namespace pafs;
using namespace pafs::model;

namespace {

MatrixD gaussian(int rows, int cols, Rng& rng) {
  MatrixD m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

ModelConfig tiny_model_config() {
  ModelConfig cfg;
  cfg.conv_channels = {2, 2, 2, 2};
  cfg.rnn_hidden = 3;
  cfg.attention_ff = 5;
  cfg.proj_hidden = 4;
  cfg.proj_dim = 3;
  cfg.input_mels = 16;
  cfg.input_frames = 16;
  return cfg;
}

void write_binary(const fs::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("conv3x3 matches a direct zero-padded convolution") {
  ParamRegistry<double> reg;
  Conv3x3<double> conv(reg, "c", 2, 3);
  reg.initialize(5);
  Rng rng(17);
  FeatureMap<double> in;
  in.height = 4;
  in.width = 5;
  in.data = gaussian(2, 20, rng);

  Conv3x3<double>::Cache cache;
  const FeatureMap<double> out = conv.forward(in, cache);
  REQUIRE(out.channels() == 3);
  REQUIRE(out.height == 4);
  REQUIRE(out.width == 5);

  const auto& w = reg.find("c.weight")->value;
  const auto& b = reg.find("c.bias")->value;
  for (int co = 0; co < 3; ++co)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 5; ++x) {
        double acc = b(co, 0);
        for (int ci = 0; ci < 2; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + ky - 1;
              const int sx = x + kx - 1;
              if (sy < 0 || sy >= 4 || sx < 0 || sx >= 5) continue;
              acc += w(co, ci * 9 + ky * 3 + kx) * in.data(ci, sy * 5 + sx);
            }
        CHECK(out.data(co, y * 5 + x) == doctest::Approx(acc).epsilon(1e-12));
      }
}

TEST_CASE("conv3x3 backward agrees with finite differences") {
  ParamRegistry<double> reg;
  Conv3x3<double> conv(reg, "c", 2, 2);
  reg.initialize(6);
  Rng rng(18);
  MatrixD x = gaussian(2, 12, rng);
  const MatrixD dir = gaussian(2, 12, rng);

  auto value = [&] {
    FeatureMap<double> in;
    in.height = 3;
    in.width = 4;
    in.data = x;
    Conv3x3<double>::Cache cache;
    return conv.forward(in, cache).data.cwiseProduct(dir).sum();
  };
  const MatrixD fd = oracle::finite_diff_gradient(value, x);

  FeatureMap<double> in;
  in.height = 3;
  in.width = 4;
  in.data = x;
  Conv3x3<double>::Cache cache;
  conv.forward(in, cache);
  FeatureMap<double> dout;
  dout.height = 3;
  dout.width = 4;
  dout.data = dir;
  const FeatureMap<double> din = conv.backward(cache, dout);
  CHECK(oracle::max_relative_error(din.data, fd) < 1e-6);
}

TEST_CASE("batchnorm normalizes per channel in training mode") {
  ParamRegistry<double> reg;
  BatchNorm<double> bn(reg, "b", 3);
  reg.initialize(1);
  Rng rng(19);
  FeatureMap<double> in;
  in.height = 4;
  in.width = 8;
  in.data = gaussian(3, 32, rng) * 2.5;
  in.data.array() += 1.5;

  BatchNorm<double>::Cache cache;
  const FeatureMap<double> out = bn.forward(in, true, cache);
  for (int c = 0; c < 3; ++c) {
    const double mean = out.data.row(c).mean();
    const double var = (out.data.row(c).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }

  // One training call folds the call statistics into the running buffers.
  const double ch_mean = in.data.row(0).mean();
  const double ch_var = (in.data.row(0).array() - ch_mean).square().mean();
  CHECK(reg.find("b.running_mean")->value(0, 0) ==
        doctest::Approx(0.1 * ch_mean).epsilon(1e-12));
  CHECK(reg.find("b.running_var")->value(0, 0) ==
        doctest::Approx(0.9 + 0.1 * ch_var).epsilon(1e-12));
}

TEST_CASE("batchnorm inference uses the frozen buffers, not the batch") {
  ParamRegistry<double> reg;
  BatchNorm<double> bn(reg, "b", 2);
  reg.initialize(1);
  reg.find("b.running_mean")->value << 0.5, -1.0;
  reg.find("b.running_var")->value << 4.0, 0.25;
  reg.find("b.gamma")->value << 2.0, 3.0;
  reg.find("b.beta")->value << -1.0, 0.5;

  Rng rng(20);
  FeatureMap<double> in;
  in.height = 2;
  in.width = 3;
  in.data = gaussian(2, 6, rng);

  BatchNorm<double>::Cache cache;
  const FeatureMap<double> out = bn.forward(in, false, cache);
  const FeatureMap<double> before = out;
  for (int c = 0; c < 2; ++c) {
    const double mean = c == 0 ? 0.5 : -1.0;
    const double var = c == 0 ? 4.0 : 0.25;
    const double gamma = c == 0 ? 2.0 : 3.0;
    const double beta = c == 0 ? -1.0 : 0.5;
    for (int i = 0; i < 6; ++i) {
      const double expect =
          gamma * (in.data(c, i) - mean) / std::sqrt(var + 1e-5) + beta;
      CHECK(out.data(c, i) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  // Inference must not move the buffers.
  CHECK(reg.find("b.running_mean")->value(0, 0) == 0.5);
  CHECK(reg.find("b.running_var")->value(1, 0) == 0.25);
  // A second inference call over other data maps equal inputs equally.
  const FeatureMap<double> again = bn.forward(in, false, cache);
  CHECK(again.data == before.data);
}

TEST_CASE("maxpool keeps window maxima and routes gradients to the argmax") {
  FeatureMap<double> in;
  in.height = 3;  // odd row dropped by floor pooling
  in.width = 4;
  in.data.resize(1, 12);
  in.data << 1, 5, 2, 0, 3, 4, 8, 7, 9, 9, 9, 9;

  MaxPool2x2<double>::Cache cache;
  const FeatureMap<double> out = MaxPool2x2<double>::forward(in, cache);
  REQUIRE(out.height == 1);
  REQUIRE(out.width == 2);
  CHECK(out.data(0, 0) == 5);
  CHECK(out.data(0, 1) == 8);

  FeatureMap<double> dout;
  dout.height = 1;
  dout.width = 2;
  dout.data.resize(1, 2);
  dout.data << 10, 20;
  const FeatureMap<double> din = MaxPool2x2<double>::backward(cache, dout);
  MatrixD expect = MatrixD::Zero(1, 12);
  expect(0, 1) = 10;  // position of 5
  expect(0, 6) = 20;  // position of 8
  CHECK(din.data == expect);
}

TEST_CASE("gru forward matches the gate equations step by step") {
  ParamRegistry<double> reg;
  Rnn<double> rnn(reg, "r", RnnKind::kGru, 3, 4);
  reg.initialize(33);
  Rng rng(21);
  const MatrixD x = gaussian(3, 6, rng);

  Rnn<double>::Cache cache;
  const MatrixD h_out = rnn.forward(x, cache);
  REQUIRE(h_out.rows() == 4);
  REQUIRE(h_out.cols() == 6);

  const auto& wi = reg.find("r.w_ih")->value;
  const auto& wh = reg.find("r.w_hh")->value;
  const auto& bi = reg.find("r.b_ih")->value;
  const auto& bh = reg.find("r.b_hh")->value;
  VectorD h = VectorD::Zero(4);
  for (int t = 0; t < 6; ++t) {
    const VectorD gi = wi * x.col(t) + bi.col(0);
    const VectorD gh = wh * h + bh.col(0);
    const Eigen::ArrayXd r =
        1.0 / (1.0 + (-(gi.segment(0, 4) + gh.segment(0, 4)).array()).exp());
    const Eigen::ArrayXd z =
        1.0 / (1.0 + (-(gi.segment(4, 4) + gh.segment(4, 4)).array()).exp());
    const Eigen::ArrayXd n =
        (gi.segment(8, 4).array() + r * gh.segment(8, 4).array()).tanh();
    h = ((1.0 - z) * n + z * h.array()).matrix();
    for (int i = 0; i < 4; ++i)
      CHECK(h_out(i, t) == doctest::Approx(h(i)).epsilon(1e-12));
  }
}

TEST_CASE("rnn backward agrees with finite differences") {
  for (RnnKind kind : {RnnKind::kGru, RnnKind::kTanh}) {
    CAPTURE(static_cast<int>(kind));
    ParamRegistry<double> reg;
    Rnn<double> rnn(reg, "r", kind, 3, 4);
    reg.initialize(44);
    Rng rng(22);
    MatrixD x = gaussian(3, 5, rng);
    const MatrixD dir = gaussian(4, 5, rng);

    auto value = [&] {
      Rnn<double>::Cache cache;
      return rnn.forward(x, cache).cwiseProduct(dir).sum();
    };
    const MatrixD fd = oracle::finite_diff_gradient(value, x);

    Rnn<double>::Cache cache;
    rnn.forward(x, cache);
    reg.zero_grads();
    const MatrixD dx = rnn.backward(cache, dir);
    CHECK(oracle::max_relative_error(dx, fd) < 1e-6);
  }
}

TEST_CASE("attention rows stay probability-normalized and grads check out") {
  ParamRegistry<double> reg;
  AttentionEncoder<double> att(reg, "a", 3, 5);
  reg.initialize(55);
  Rng rng(23);
  MatrixD x = gaussian(4, 3, rng);
  const MatrixD dir = gaussian(4, 3, rng);

  AttentionEncoder<double>::Cache cache;
  const MatrixD y = att.forward(x, cache);
  REQUIRE(y.rows() == 4);
  REQUIRE(y.cols() == 3);
  for (int i = 0; i < 4; ++i)
    CHECK(cache.p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));

  auto value = [&] {
    AttentionEncoder<double>::Cache c;
    return att.forward(x, c).cwiseProduct(dir).sum();
  };
  const MatrixD fd = oracle::finite_diff_gradient(value, x);
  reg.zero_grads();
  const MatrixD dx = att.backward(cache, dir);
  CHECK(oracle::max_relative_error(dx, fd) < 1e-5);
}

TEST_CASE("normalize_rows produces unit rows and rescues zero rows") {
  MatrixD u(3, 4);
  u << 3, 4, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1;
  NormalizeCache<double> cache;
  std::int64_t zeros = 0;
  const MatrixD y = normalize_rows(u, cache, &zeros);
  CHECK(zeros == 1);
  CHECK(y.row(0).norm() == doctest::Approx(1.0));
  CHECK(y(0, 0) == doctest::Approx(0.6));
  CHECK(y(1, 0) == 1.0);  // degenerate row becomes e1
  CHECK(y(1, 1) == 0.0);
  CHECK(y.row(2).norm() == doctest::Approx(1.0));

  // Gradient through the degenerate row is defined as zero.
  MatrixD dy = MatrixD::Ones(3, 4);
  const MatrixD du = normalize_rows_backward(cache, dy);
  CHECK(du.row(1).cwiseAbs().maxCoeff() == 0.0);
  // Normalization gradients are tangent to the sphere.
  CHECK(std::abs(du.row(0).dot(y.row(0))) < 1e-12);
}

TEST_CASE("projection head emits unit rows and backward matches fd") {
  ParamRegistry<double> reg;
  ProjectionHead<double> proj(reg, "p", 5, 4, 3);
  reg.initialize(66);
  Rng rng(24);
  MatrixD x = gaussian(3, 5, rng);
  const MatrixD dir = gaussian(3, 3, rng);

  ProjectionHead<double>::Cache cache;
  const MatrixD y = proj.forward(x, cache);
  for (int i = 0; i < 3; ++i)
    CHECK(y.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(proj.zero_norm_count() == 0);

  auto value = [&] {
    ProjectionHead<double>::Cache c;
    return proj.forward(x, c).cwiseProduct(dir).sum();
  };
  const MatrixD fd = oracle::finite_diff_gradient(value, x);
  reg.zero_grads();
  const MatrixD dx = proj.backward(cache, dir);
  CHECK(oracle::max_relative_error(dx, fd) < 1e-6);
}

TEST_CASE("param registry rejects duplicates and initializes deterministically") {
  ParamRegistry<float> reg;
  reg.add("w", 3, 3, Init::kUniformFanIn, 9);
  CHECK_THROWS_AS(reg.add("w", 1, 1, Init::kZero), ContractError);
  reg.add("scale", 2, 1, Init::kOne);
  reg.add("shift", 2, 1, Init::kZero);
  reg.initialize(7);
  CHECK(reg.find("scale")->value == MatrixF::Ones(2, 1));
  CHECK(reg.find("shift")->value == MatrixF::Zero(2, 1));
  CHECK(reg.find("w")->value.cwiseAbs().maxCoeff() <= 1.0f / 3.0f);

  ParamRegistry<float> reg2;
  reg2.add("w", 3, 3, Init::kUniformFanIn, 9);
  reg2.add("scale", 2, 1, Init::kOne);
  reg2.add("shift", 2, 1, Init::kZero);
  reg2.initialize(7);
  CHECK(reg.find("w")->value == reg2.find("w")->value);
  reg2.initialize(8);
  CHECK(reg.find("w")->value != reg2.find("w")->value);
  CHECK(reg.parameter_count() == 9 + 2 + 2);
}

TEST_CASE("checkpoint round-trips tensors, stats and config bit-exactly") {
  const fs::path dir = fs::temp_directory_path() / "pafs_ckpt_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path path = dir / "model.ckpt";

  ParamRegistry<float> reg;
  reg.add("a", 2, 3, Init::kUniformFanIn, 6);
  reg.add("b", 4, 1, Init::kUniformFanIn, 4);
  reg.initialize(123);
  audio::GlobalStats stats;
  stats.mean = -3.25;
  stats.std = 1.75;
  save_checkpoint(path, reg, "cfg", stats);

  ParamRegistry<float> reg2;
  reg2.add("a", 2, 3, Init::kZero);
  reg2.add("b", 4, 1, Init::kZero);
  const CheckpointInfo info = load_checkpoint(path, reg2);
  CHECK(info.config_text == "cfg");
  CHECK(info.stats.mean == -3.25);
  CHECK(info.stats.std == 1.75);
  CHECK(info.scalar_size == 4);
  CHECK(reg2.find("a")->value == reg.find("a")->value);
  CHECK(reg2.find("b")->value == reg.find("b")->value);

  const CheckpointInfo head = read_checkpoint_info(path);
  CHECK(head.config_text == "cfg");

  const std::string bytes = read_text_file(path);

  SUBCASE("tampered magic is rejected") {
    std::string bad = bytes;
    bad[0] = 'X';
    write_binary(dir / "bad.ckpt", bad);
    ParamRegistry<float> r;
    r.add("a", 2, 3, Init::kZero);
    r.add("b", 4, 1, Init::kZero);
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt", r), FormatError);
  }
  SUBCASE("unsupported version is rejected") {
    std::string bad = bytes;
    bad[8] = 9;
    write_binary(dir / "bad.ckpt", bad);
    ParamRegistry<float> r;
    r.add("a", 2, 3, Init::kZero);
    r.add("b", 4, 1, Init::kZero);
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt", r), FormatError);
  }
  SUBCASE("tensor name mismatch is rejected") {
    // name "a" sits right after magic/version/scalar/stats/config_len/config/count/name_len
    const std::size_t name_off = 8 + 4 + 1 + 8 + 8 + 8 + 3 + 4 + 4;
    std::string bad = bytes;
    bad[name_off] = 'z';
    write_binary(dir / "bad.ckpt", bad);
    ParamRegistry<float> r;
    r.add("a", 2, 3, Init::kZero);
    r.add("b", 4, 1, Init::kZero);
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt", r), CorruptionError);
  }
  SUBCASE("shape mismatch is rejected") {
    ParamRegistry<float> r;
    r.add("a", 3, 2, Init::kZero);
    r.add("b", 4, 1, Init::kZero);
    CHECK_THROWS_AS(load_checkpoint(path, r), CorruptionError);
  }
  SUBCASE("truncated file is rejected") {
    write_binary(dir / "bad.ckpt", bytes.substr(0, bytes.size() - 5));
    ParamRegistry<float> r;
    r.add("a", 2, 3, Init::kZero);
    r.add("b", 4, 1, Init::kZero);
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt", r), CorruptionError);
  }
  SUBCASE("trailing bytes are rejected") {
    write_binary(dir / "bad.ckpt", bytes + "junk");
    ParamRegistry<float> r;
    r.add("a", 2, 3, Init::kZero);
    r.add("b", 4, 1, Init::kZero);
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt", r), CorruptionError);
  }
  SUBCASE("double-precision checkpoints load into float models") {
    ParamRegistry<double> regd;
    regd.add("a", 2, 3, Init::kUniformFanIn, 6);
    regd.add("b", 4, 1, Init::kUniformFanIn, 4);
    regd.initialize(123);
    save_checkpoint(dir / "d.ckpt", regd, "cfg", stats);
    ParamRegistry<float> r;
    r.add("a", 2, 3, Init::kZero);
    r.add("b", 4, 1, Init::kZero);
    const CheckpointInfo di = load_checkpoint(dir / "d.ckpt", r);
    CHECK(di.scalar_size == 8);
    CHECK(r.find("a")->value(1, 2) ==
          doctest::Approx(static_cast<float>(regd.find("a")->value(1, 2))));
  }
}

TEST_CASE("concat fusion bypasses attention and registers no fusion params") {
  ModelConfig cfg = tiny_model_config();
  cfg.fusion = FusionKind::kConcat;
  EmbeddingModel<double> model(cfg);
  model.initialize(9);
  CHECK(model.params().find("fusion.wq") == nullptr);

  Rng rng(25);
  MatrixD spec = gaussian(16, 16, rng);
  const auto views = augment::replicate_views(spec);
  EmbeddingModel<double>::SampleTape tape;
  const VectorD fused = model.embed_views(views, false, tape);
  REQUIRE(fused.size() == 4 * 3);
  for (int v = 0; v < 4; ++v)
    for (int d = 0; d < 3; ++d)
      CHECK(fused(v * 3 + d) == tape.view_embeds(v, d));
  // Identical views embed identically.
  CHECK(tape.view_embeds.row(0) == tape.view_embeds.row(3));
}

TEST_CASE("attention fusion registers the encoder and changes the output") {
  ModelConfig cfg = tiny_model_config();
  EmbeddingModel<double> model(cfg);
  model.initialize(9);
  CHECK(model.params().find("fusion.wq") != nullptr);
  CHECK(model.params().find("projection.w1") != nullptr);
  CHECK(model.params().find("backbone.block0.conv.weight") != nullptr);

  Rng rng(26);
  MatrixD spec = gaussian(16, 16, rng);
  EmbeddingModel<double>::SampleTape tape;
  const VectorD fused = model.embed_views(augment::replicate_views(spec), false, tape);
  EmbeddingModel<double>::SampleTape tape2;
  const VectorD again = model.embed_views(augment::replicate_views(spec), false, tape2);
  CHECK(fused == again);  // inference is pure

  ModelConfig bad = tiny_model_config();
  bad.input_mels = 8;  // collapses to zero rows after four pools
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("embed_episode stacks support then query rows with labels") {
  ModelConfig cfg = tiny_model_config();
  cfg.fusion = FusionKind::kConcat;
  EmbeddingModel<float> model(cfg);
  model.initialize(11);

  Rng rng(27);
  std::vector<MatrixF> records;
  for (int i = 0; i < 4; ++i)
    records.push_back(gaussian(16, 16, rng).cast<float>());
  auto fetch = [&](const data::SampleRef& ref) {
    return records[static_cast<std::size_t>(ref.record_id)];
  };

  data::Episode ep;
  ep.n_way = 2;
  ep.k_shot = 1;
  ep.q_queries = 1;
  ep.support = {{{0, 0}, 0}, {{1, 1}, 1}};
  ep.query = {{{2, 2}, 0}, {{3, 3}, 1}};

  augment::AugmentConfig aug;
  const auto emb = embed_episode(model, ep, fetch, aug, /*augment=*/false,
                                 /*aug_seed=*/0, /*training=*/false);
  REQUIRE(emb.support.rows() == 2);
  REQUIRE(emb.query.rows() == 2);
  CHECK(emb.support_labels == std::vector<int>{0, 1});
  CHECK(emb.query_labels == std::vector<int>{0, 1});
}
