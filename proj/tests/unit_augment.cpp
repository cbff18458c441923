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

#include "pafs/augment/specaugment.hpp"

using namespace pafs;
using namespace pafs::augment;

namespace {

MatrixF random_spec(int rows, int cols, Rng& rng) {
  MatrixF m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = 1.0f + static_cast<float>(rng.uniform_real());
  return m;
}

}  // namespace

TEST_CASE("time_mask zeroes one bounded column band and nothing else") {
  Rng rng(7);
  const MatrixF spec = random_spec(12, 40, rng);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixF out = time_mask(spec, 9, rng);
    REQUIRE(out.rows() == spec.rows());
    REQUIRE(out.cols() == spec.cols());
    int masked = 0, first = -1, last = -1;
    for (int c = 0; c < out.cols(); ++c) {
      const bool zero = (out.col(c).array() == 0.0f).all();
      const bool same = (out.col(c).array() == spec.col(c).array()).all();
      CHECK((zero || same));
      if (zero) {
        ++masked;
        if (first < 0) first = c;
        last = c;
      }
    }
    CHECK(masked <= 9);
    if (masked > 0) CHECK(last - first + 1 == masked);  // contiguous band
    CHECK(out.array().abs().sum() <= spec.array().abs().sum());
  }
}

TEST_CASE("freq_mask zeroes one bounded row band") {
  Rng rng(8);
  const MatrixF spec = random_spec(12, 40, rng);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixF out = freq_mask(spec, 5, rng);
    int masked = 0;
    for (int r = 0; r < out.rows(); ++r) {
      const bool zero = (out.row(r).array() == 0.0f).all();
      const bool same = (out.row(r).array() == spec.row(r).array()).all();
      CHECK((zero || same));
      if (zero) ++masked;
    }
    CHECK(masked <= 5);
  }
}

TEST_CASE("masks with zero width are the identity") {
  Rng rng(9);
  const MatrixF spec = random_spec(6, 20, rng);
  CHECK(time_mask(spec, 0, rng) == spec);
  CHECK(freq_mask(spec, 0, rng) == spec);
  CHECK(time_warp(spec, 0, rng) == spec);
}

TEST_CASE("time_warp keeps shape, endpoints and value range") {
  Rng rng(10);
  const MatrixF spec = random_spec(8, 30, rng);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixF out = time_warp(spec, 4, rng);
    REQUIRE(out.rows() == spec.rows());
    REQUIRE(out.cols() == spec.cols());
    CHECK(out.col(0) == spec.col(0));
    CHECK(out.col(spec.cols() - 1) == spec.col(spec.cols() - 1));
    // Linear interpolation cannot leave the convex hull of neighbor columns.
    CHECK(out.maxCoeff() <= spec.maxCoeff() + 1e-6f);
    CHECK(out.minCoeff() >= spec.minCoeff() - 1e-6f);
  }
}

TEST_CASE("augment_views keeps the original in slot zero") {
  Rng rng(11);
  const MatrixF spec = random_spec(16, 50, rng);
  AugmentConfig cfg;
  cfg.time_mask_max = 6;
  cfg.freq_mask_max = 4;
  cfg.warp_w = 3;
  const auto views = augment_views(spec, cfg, rng);
  CHECK(views[0] == spec);
  for (const auto& v : views) {
    CHECK(v.rows() == spec.rows());
    CHECK(v.cols() == spec.cols());
  }
}

TEST_CASE("augment_views with all widths zero returns four copies") {
  Rng rng(12);
  const MatrixF spec = random_spec(5, 15, rng);
  AugmentConfig cfg;
  cfg.time_mask_max = 0;
  cfg.freq_mask_max = 0;
  cfg.warp_w = 0;
  const auto views = augment_views(spec, cfg, rng);
  for (const auto& v : views) CHECK(v == spec);
  const auto copies = replicate_views(spec);
  for (const auto& v : copies) CHECK(v == spec);
}

TEST_CASE("augment draws are deterministic in the rng seed") {
  Rng fill(2);
  const MatrixF spec = random_spec(10, 25, fill);
  AugmentConfig cfg;
  cfg.time_mask_max = 5;
  cfg.freq_mask_max = 3;
  cfg.warp_w = 2;
  Rng a(1234), b(1234), c(999);
  const auto va = augment_views(spec, cfg, a);
  const auto vb = augment_views(spec, cfg, b);
  for (int i = 0; i < 4; ++i) CHECK(va[i] == vb[i]);
  const auto vc = augment_views(spec, cfg, c);
  bool any_diff = false;
  for (int i = 1; i < 4; ++i) any_diff = any_diff || va[i] != vc[i];
  CHECK(any_diff);
}

TEST_CASE("config validation rejects out-of-range widths") {
  AugmentConfig cfg;
  cfg.time_mask_max = 30;
  CHECK_THROWS_AS(cfg.validate(64, 20), ContractError);
  cfg.time_mask_max = 5;
  cfg.freq_mask_max = 99;
  CHECK_THROWS_AS(cfg.validate(64, 20), ContractError);
  cfg.freq_mask_max = 8;
  cfg.warp_w = 10;
  CHECK_THROWS_AS(cfg.validate(64, 20), ContractError);
}
