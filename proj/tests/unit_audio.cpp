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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "pafs/audio/cache.hpp"
#include "pafs/audio/clip.hpp"
#include "pafs/audio/mel.hpp"
#include "pafs/audio/stats.hpp"
#include "pafs/audio/wav.hpp"
#include "pafs/io_util.hpp"
#include "pafs/rng.hpp"

namespace fs = std::filesystem;
using namespace pafs;
using namespace pafs::audio;

namespace {

fs::path test_dir() {
  const fs::path dir = fs::temp_directory_path() / "pafs_audio_test";
  fs::create_directories(dir);
  return dir;
}

std::vector<double> sine(double freq, double seconds, int rate) {
  const auto n = static_cast<std::size_t>(seconds * rate);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = 0.5 * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
  return out;
}

}  // namespace

TEST_CASE("wav 16-bit round-trip preserves samples to quantization") {
  const auto dir = test_dir();
  const auto path = dir / "tone.wav";
  const auto samples = sine(440.0, 0.05, 16000);
  write_wav(path, samples, 16000);
  const WavData back = read_wav(path);
  CHECK(back.sample_rate == 16000);
  CHECK(back.channels == 1);
  REQUIRE(back.interleaved.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); i += 37)
    CHECK(back.interleaved[i] == doctest::Approx(samples[i]).epsilon(1e-3));
}

TEST_CASE("read_wav rejects junk") {
  const auto dir = test_dir();
  const auto path = dir / "junk.wav";
  std::ofstream(path) << "this is not a wav file at all";
  CHECK_THROWS_AS(read_wav(path), FormatError);
}

TEST_CASE("mix_to_mono averages channels") {
  WavData wav;
  wav.sample_rate = 8000;
  wav.channels = 2;
  wav.interleaved = {1.0, 0.0, 0.5, 0.5, -1.0, 1.0};
  const auto mono = mix_to_mono(wav);
  REQUIRE(mono.size() == 3);
  CHECK(mono[0] == doctest::Approx(0.5));
  CHECK(mono[1] == doctest::Approx(0.5));
  CHECK(mono[2] == doctest::Approx(0.0));
}

TEST_CASE("resample_linear changes length proportionally") {
  const auto in = sine(100.0, 0.1, 8000);
  const auto out = resample_linear(in, 8000, 16000);
  CHECK(out.size() == 2 * in.size());
  CHECK(resample_linear(in, 8000, 8000).size() == in.size());
}

TEST_CASE("segment_clip pads the tail and never returns zero segments") {
  AudioClip clip;
  clip.sample_rate = 1000;
  clip.samples.assign(2500, 1.0);
  const auto segs = segment_clip(clip, 1.0);
  REQUIRE(segs.size() == 3);
  for (const auto& s : segs) CHECK(s.samples.size() == 1000);
  CHECK(segs[2].samples[499] == 1.0);
  CHECK(segs[2].samples[500] == 0.0);

  AudioClip tiny;
  tiny.sample_rate = 1000;
  tiny.samples.assign(10, 0.25);
  CHECK(segment_clip(tiny, 1.0).size() == 1);
}

TEST_CASE("hz/mel conversion round-trips") {
  for (double hz : {0.0, 100.0, 440.0, 4000.0, 7999.0}) {
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-9));
  }
  CHECK(hz_to_mel(1000.0) == doctest::Approx(999.98).epsilon(1e-3));
}

TEST_CASE("frame_count matches the centered framing rule") {
  CHECK(frame_count(80000, 160) == 501);
  CHECK(frame_count(160, 160) == 2);
  CHECK(frame_count(159, 160) == 1);
}

TEST_CASE("mel filterbank rows are ordered unit-height triangles") {
  MelConfig cfg;
  const MatrixD fb = mel_filterbank(cfg);
  REQUIRE(fb.rows() == cfg.n_mels);
  REQUIRE(fb.cols() == cfg.fft_size / 2 + 1);
  // Triangles have unit height in frequency; the bin-sampled maximum sits
  // below that unless a bin lands on the center.
  Eigen::Index prev_peak = -1;
  for (Eigen::Index m = 0; m < fb.rows(); ++m) {
    Eigen::Index peak = 0;
    const double mx = fb.row(m).maxCoeff(&peak);
    CHECK(mx > 0.0);
    CHECK(mx <= 1.0 + 1e-12);
    CHECK(fb.row(m).minCoeff() >= 0.0);
    CHECK(peak >= prev_peak);
    prev_peak = peak;
  }
}

TEST_CASE("mel_spectrogram has expected shape and responds to tone frequency") {
  MelConfig cfg;
  AudioClip clip;
  clip.sample_rate = cfg.sample_rate;
  clip.samples = sine(1000.0, 1.0, cfg.sample_rate);
  const SpectrogramF spec = mel_spectrogram(clip, cfg);
  CHECK(spec.n_mels() == cfg.n_mels);
  CHECK(spec.n_frames() == frame_count(static_cast<std::int64_t>(clip.samples.size()),
                                       cfg.hop));
  CHECK(!spec.standardized);

  // The strongest bin in a middle frame should be the one whose mel center is
  // closest to the tone.
  Eigen::Index peak = 0;
  spec.values.col(spec.n_frames() / 2).maxCoeff(&peak);
  const double mel_peak =
      hz_to_mel(cfg.effective_fmax()) * (static_cast<double>(peak) + 1.0) /
      (cfg.n_mels + 1.0);
  CHECK(std::abs(mel_to_hz(mel_peak) - 1000.0) < 200.0);

  AudioClip empty;
  empty.sample_rate = cfg.sample_rate;
  empty.samples.assign(10, 0.0);  // shorter than one window
  CHECK_THROWS_AS(mel_spectrogram(empty, cfg), EmptyInputError);
}

TEST_CASE("compute_stats matches hand-computed population moments") {
  SpectrogramF a, b;
  a.values = MatrixF::Constant(1, 2, 1.0f);
  b.values = MatrixF::Constant(1, 2, 3.0f);
  const GlobalStats st = compute_stats({a, b});
  CHECK(st.mean == doctest::Approx(2.0));
  CHECK(st.std == doctest::Approx(1.0));

  SpectrogramF flat;
  flat.values = MatrixF::Constant(4, 4, 5.0f);
  const GlobalStats fs2 = compute_stats({flat});
  CHECK(fs2.std == doctest::Approx(1e-8));
  CHECK_THROWS_AS(compute_stats({}), EmptyInputError);
}

TEST_CASE("standardize is one-shot and zero-centers") {
  SpectrogramF spec;
  spec.values.resize(2, 2);
  spec.values << 1.0f, 2.0f, 3.0f, 4.0f;
  const GlobalStats st = compute_stats({spec});
  standardize(spec, st);
  CHECK(spec.standardized);
  CHECK(std::abs(spec.values.template cast<double>().mean()) < 1e-6);
  CHECK_THROWS_AS(standardize(spec, st), ContractError);
}

TEST_CASE("cache round-trips bit-exactly and rejects tampering") {
  const auto dir = test_dir();
  const auto path = dir / "cache.bin";

  SpectrogramCache cache;
  cache.n_mels = 3;
  cache.n_frames = 4;
  cache.stats = GlobalStats{0.25, 1.5};
  Rng rng(42);
  for (int r = 0; r < 5; ++r) {
    CacheRecord rec;
    rec.class_id = static_cast<std::uint32_t>(r % 2);
    rec.values.resize(3, 4);
    for (Eigen::Index i = 0; i < rec.values.size(); ++i)
      rec.values.data()[i] = static_cast<float>(rng.normal());
    cache.records.push_back(rec);
  }
  write_cache(path, cache);

  const SpectrogramCache back = read_cache(path);
  CHECK(back.n_mels == 3);
  CHECK(back.n_frames == 4);
  CHECK(back.stats.mean == cache.stats.mean);
  CHECK(back.stats.std == cache.stats.std);
  REQUIRE(back.records.size() == cache.records.size());
  for (std::size_t r = 0; r < cache.records.size(); ++r) {
    CHECK(back.records[r].class_id == cache.records[r].class_id);
    CHECK((back.records[r].values.array() == cache.records[r].values.array()).all());
  }

  SUBCASE("bad magic") {
    auto bytes = read_text_file(path);
    bytes[0] = 'X';
    std::ofstream(dir / "bad_magic.bin", std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_cache(dir / "bad_magic.bin"), FormatError);
  }
  SUBCASE("bad version") {
    auto bytes = read_text_file(path);
    bytes[8] = 9;
    std::ofstream(dir / "bad_version.bin", std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_cache(dir / "bad_version.bin"), FormatError);
  }
  SUBCASE("truncated") {
    auto bytes = read_text_file(path);
    bytes.resize(bytes.size() - 7);
    std::ofstream(dir / "short.bin", std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_cache(dir / "short.bin"), CorruptionError);
  }
  SUBCASE("trailing garbage") {
    auto bytes = read_text_file(path);
    bytes += "extra";
    std::ofstream(dir / "long.bin", std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_cache(dir / "long.bin"), CorruptionError);
  }
}
