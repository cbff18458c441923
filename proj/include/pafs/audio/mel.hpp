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

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pafs/audio/clip.hpp"
#include "pafs/common.hpp"
#include "pafs/errors.hpp"

namespace pafs::audio {

/// Log-mel matrix (n_mels x n_frames) plus the standardization flag.
template <typename Scalar>
struct Spectrogram {
  Matrix<Scalar> values;
  bool standardized = false;

  int n_mels() const { return static_cast<int>(values.rows()); }
  int n_frames() const { return static_cast<int>(values.cols()); }
};

using SpectrogramF = Spectrogram<float>;

struct MelConfig {
  int sample_rate = 16000;
  int window = 400;    // 25 ms at 16 kHz
  int hop = 160;       // 10 ms
  int fft_size = 512;
  int n_mels = 64;
  double fmin = 0.0;
  double fmax = 0.0;   // 0 means sample_rate / 2
  double log_eps = 1e-10;

  double effective_fmax() const { return fmax > 0.0 ? fmax : sample_rate / 2.0; }

  void validate() const {
    if (window <= 0 || hop <= 0 || fft_size <= 0 || n_mels <= 0)
      throw ConfigError("mel config: window, hop, fft_size and n_mels must be positive");
    if (window > fft_size) throw ConfigError("mel config: window exceeds fft_size");
    if (log_eps <= 0.0) throw ConfigError("mel config: log_eps must be positive");
    if (effective_fmax() <= fmin) throw ConfigError("mel config: fmax must exceed fmin");
  }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Centered frame count for a clip of n samples: one frame per hop with the
/// first frame centered at sample 0, i.e. 1 + floor(n / hop).
inline int frame_count(std::int64_t n_samples, int hop) {
  return static_cast<int>(1 + n_samples / hop);
}

/// Triangular mel filterbank over FFT bin center frequencies
/// (n_mels x (fft_size/2 + 1), unit peak height).
inline MatrixD mel_filterbank(const MelConfig& cfg) {
  const int n_bins = cfg.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.effective_fmax());
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_mels) + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    edges[static_cast<std::size_t>(i)] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));

  MatrixD fb = MatrixD::Zero(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double f0 = edges[static_cast<std::size_t>(m)];
    const double f1 = edges[static_cast<std::size_t>(m) + 1];
    const double f2 = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double fk = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      if (fk > f0 && fk < f1) {
        fb(m, k) = (fk - f0) / (f1 - f0);
      } else if (fk >= f1 && fk < f2) {
        fb(m, k) = (f2 - fk) / (f2 - f1);
      }
    }
  }
  return fb;
}

/// Converts a clip to a log-mel spectrogram: centered Hann-windowed STFT,
/// power spectrum, triangular mel filters, ln(power + eps). Output is
/// n_mels x frame_count, not standardized.
inline SpectrogramF mel_spectrogram(const AudioClip& clip, const MelConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::int64_t>(clip.samples.size());
  if (n < cfg.window)
    throw EmptyInputError("clip shorter than one analysis window");

  const int n_frames = frame_count(n, cfg.hop);
  const int n_bins = cfg.fft_size / 2 + 1;
  const int half = cfg.window / 2;

  std::vector<double> hann(static_cast<std::size_t>(cfg.window));
  for (int i = 0; i < cfg.window; ++i)
    hann[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / cfg.window);

  const MatrixD fb = mel_filterbank(cfg);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(static_cast<std::size_t>(cfg.fft_size), 0.0);
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd power(n_bins);

  MatrixD mel = MatrixD::Zero(cfg.n_mels, n_frames);
  for (int t = 0; t < n_frames; ++t) {
    const std::int64_t center = static_cast<std::int64_t>(t) * cfg.hop;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int j = 0; j < cfg.window; ++j) {
      const std::int64_t idx = center - half + j;
      if (idx >= 0 && idx < n)
        frame[static_cast<std::size_t>(j)] =
            clip.samples[static_cast<std::size_t>(idx)] * hann[static_cast<std::size_t>(j)];
    }
    fft.fwd(spectrum, frame);
    for (int k = 0; k < n_bins; ++k) power(k) = std::norm(spectrum[static_cast<std::size_t>(k)]);
    mel.col(t) = fb * power;
  }

  SpectrogramF out;
  out.values = (mel.array() + cfg.log_eps).log().cast<float>();
  out.standardized = false;
  return out;
}

}  // namespace pafs::audio
