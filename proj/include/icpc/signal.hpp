// Copyright 2026 The ICPC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Deterministic numeric kernels shared by the augmenters, the model
// front-ends and the synthetic data generators.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "icpc/error.hpp"
#include "icpc/sample.hpp"

namespace icpc::signal {

// Bilinear resize with half-pixel centres (align_corners = false): output
// pixel y samples source row (y + 0.5) * H / h - 0.5, clamped to the image.
[[nodiscard]] inline Image resize_bilinear(const Image& img, int h, int w) {
  if (h < 1 || w < 1) {
    throw ShapeError("resize target must be at least 1x1, got " +
                     std::to_string(h) + "x" + std::to_string(w));
  }
  if (img.height < 1 || img.width < 1) throw ShapeError("empty source image");
  if (h == img.height && w == img.width) return img;

  struct Tap {
    int lo, hi;
    float frac;
  };
  auto taps = [](int out, int in) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
      double src = (i + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const int lo = static_cast<int>(std::floor(src));
      const int hi = std::min(lo + 1, in - 1);
      t[static_cast<std::size_t>(i)] = {lo, hi, static_cast<float>(src - lo)};
    }
    return t;
  };
  const auto ty = taps(h, img.height);
  const auto tx = taps(w, img.width);

  Image out(h, w, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      const Tap& a = ty[static_cast<std::size_t>(y)];
      for (int x = 0; x < w; ++x) {
        const Tap& b = tx[static_cast<std::size_t>(x)];
        const float top = img.at(c, a.lo, b.lo) * (1.0f - b.frac) +
                          img.at(c, a.lo, b.hi) * b.frac;
        const float bot = img.at(c, a.hi, b.lo) * (1.0f - b.frac) +
                          img.at(c, a.hi, b.hi) * b.frac;
        out.at(c, y, x) = top * (1.0f - a.frac) + bot * a.frac;
      }
    }
  }
  return out;
}

// Source index of output frame i when keeping t of n frames.
[[nodiscard]] inline std::vector<int> uniform_frame_indices(int n, int t) {
  if (t < 1 || t > n) {
    throw InvalidCompression("cannot sample " + std::to_string(t) +
                             " frames from " + std::to_string(n));
  }
  std::vector<int> idx(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) {
    idx[static_cast<std::size_t>(i)] = static_cast<int>(
        (static_cast<long long>(i) * n) / t);
  }
  return idx;
}

template <typename Frame>
[[nodiscard]] std::vector<Frame> uniform_frame_sample(
    const std::vector<Frame>& frames, int t) {
  std::vector<Frame> out;
  out.reserve(static_cast<std::size_t>(std::max(t, 0)));
  for (int i : uniform_frame_indices(static_cast<int>(frames.size()), t)) {
    out.push_back(frames[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Linear-interpolation resampler; output sample i sits at source position
// i * src_rate / dst_rate.
[[nodiscard]] inline Waveform resample_audio(const Waveform& wave,
                                             int dst_rate) {
  const int src_rate = wave.sample_rate;
  if (dst_rate <= 0 || src_rate <= 0 || dst_rate > src_rate) {
    throw InvalidCompression("cannot resample " + std::to_string(src_rate) +
                             " Hz audio to " + std::to_string(dst_rate) +
                             " Hz");
  }
  if (dst_rate == src_rate) return wave;
  const std::size_t n = wave.samples.size();
  const auto out_len = static_cast<std::size_t>(
      (static_cast<long long>(n) * dst_rate) / src_rate);
  Waveform out{std::vector<float>(out_len), dst_rate};
  const double step = static_cast<double>(src_rate) / dst_rate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * step;
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    out.samples[i] = static_cast<float>(wave.samples[lo] * (1.0 - frac) +
                                        wave.samples[hi] * frac);
  }
  return out;
}

[[nodiscard]] constexpr int stft_frame_count(std::size_t length, int window,
                                             int hop) noexcept {
  return 1 + static_cast<int>((length - static_cast<std::size_t>(window)) /
                              static_cast<std::size_t>(hop));
}

// Power spectrogram, bins x frames (row-major).
struct PowerSpectrogram {
  int n_bins = 0;
  int n_frames = 0;
  std::vector<float> values;
  [[nodiscard]] float at(int bin, int frame) const {
    return values[static_cast<std::size_t>(bin) * n_frames + frame];
  }
};

namespace detail {

using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DftBasis {
  MatF cos_basis;  // window x bins, Hann window folded in
  MatF sin_basis;
};

inline const DftBasis& dft_basis(int window) {
  thread_local std::map<int, DftBasis> cache;
  auto it = cache.find(window);
  if (it != cache.end()) return it->second;
  const int bins = window / 2 + 1;
  DftBasis b{MatF(window, bins), MatF(window, bins)};
  for (int n = 0; n < window; ++n) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / window);
    for (int k = 0; k < bins; ++k) {
      // reduce n*k mod window first so large windows keep full precision
      const long long phase = (static_cast<long long>(n) * k) % window;
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(phase) /
                         window;
      b.cos_basis(n, k) = static_cast<float>(hann * std::cos(ang));
      b.sin_basis(n, k) = static_cast<float>(hann * std::sin(ang));
    }
  }
  return cache.emplace(window, std::move(b)).first->second;
}

}  // namespace detail

// Short-time Fourier transform with a periodic Hann window.
[[nodiscard]] inline PowerSpectrogram stft(const std::vector<float>& wave,
                                           int window, int hop) {
  if (window < 2 || hop < 1) {
    throw ShapeError("stft needs window >= 2 and hop >= 1");
  }
  if (wave.size() < static_cast<std::size_t>(window)) {
    throw ShapeError("waveform of " + std::to_string(wave.size()) +
                     " samples is shorter than the " + std::to_string(window) +
                     "-sample window");
  }
  const int frames = stft_frame_count(wave.size(), window, hop);
  const auto& basis = detail::dft_basis(window);
  detail::MatF segments(frames, window);
  for (int f = 0; f < frames; ++f) {
    for (int n = 0; n < window; ++n) {
      segments(f, n) = wave[static_cast<std::size_t>(f) * hop + n];
    }
  }
  const detail::MatF re = segments * basis.cos_basis;
  const detail::MatF im = segments * basis.sin_basis;
  PowerSpectrogram out;
  out.n_bins = window / 2 + 1;
  out.n_frames = frames;
  out.values.resize(static_cast<std::size_t>(out.n_bins) * frames);
  for (int k = 0; k < out.n_bins; ++k) {
    for (int f = 0; f < frames; ++f) {
      out.values[static_cast<std::size_t>(k) * frames + f] =
          re(f, k) * re(f, k) + im(f, k) * im(f, k);
    }
  }
  return out;
}

[[nodiscard]] inline double hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}
[[nodiscard]] inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular mel filters with unit peak, centres evenly spaced in mel over
// [0, rate / 2]. Returned as banks x bins.
[[nodiscard]] inline std::vector<std::vector<float>> mel_weights(int n_banks,
                                                                 int n_bins,
                                                                 int rate) {
  if (n_banks < 1) throw ShapeError("need at least one filterbank");
  if (n_banks > n_bins) {
    throw ShapeError(std::to_string(n_banks) + " filterbanks exceed the " +
                     std::to_string(n_bins) + " frequency bins");
  }
  const double top = hz_to_mel(rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(n_banks) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / (n_banks + 1));
  }
  std::vector<std::vector<float>> w(static_cast<std::size_t>(n_banks),
                                    std::vector<float>(static_cast<std::size_t>(n_bins)));
  const double bin_hz = (rate / 2.0) / (n_bins - 1);
  for (int m = 0; m < n_banks; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double v = 0.0;
      if (f > lo && f <= mid) v = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) v = (hi - f) / (hi - mid);
      w[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] =
          static_cast<float>(v);
    }
  }
  return w;
}

inline constexpr float kLogFloor = 1e-10f;

[[nodiscard]] inline Spectrogram mel_filterbank(const PowerSpectrogram& power,
                                                int n_banks, int rate) {
  const auto w = mel_weights(n_banks, power.n_bins, rate);
  Spectrogram out;
  out.n_banks = n_banks;
  out.n_frames = power.n_frames;
  out.values.resize(static_cast<std::size_t>(n_banks) * power.n_frames);
  for (int m = 0; m < n_banks; ++m) {
    const auto& row = w[static_cast<std::size_t>(m)];
    for (int f = 0; f < power.n_frames; ++f) {
      double e = 0.0;
      for (int k = 0; k < power.n_bins; ++k) {
        const float wk = row[static_cast<std::size_t>(k)];
        if (wk != 0.0f) e += static_cast<double>(wk) * power.at(k, f);
      }
      out.values[static_cast<std::size_t>(m) * power.n_frames + f] =
          static_cast<float>(std::log(std::max(e, static_cast<double>(kLogFloor))));
    }
  }
  return out;
}

// Window and hop in samples. They are fixed in samples (derived from the
// reference rate), so lowering the sampling rate shortens the frame axis.
struct StftParams {
  int window = 400;
  int hop = 160;

  [[nodiscard]] static StftParams from_ms(int reference_rate,
                                          double window_ms = 25.0,
                                          double hop_ms = 10.0) {
    return {static_cast<int>(std::lround(reference_rate * window_ms / 1000.0)),
            static_cast<int>(std::lround(reference_rate * hop_ms / 1000.0))};
  }
};

// resample -> stft -> log-mel, the whole audio compression path.
[[nodiscard]] inline Spectrogram log_mel_spectrogram(const Waveform& wave,
                                                     int rate, int n_banks,
                                                     const StftParams& p) {
  const Waveform w = resample_audio(wave, rate);
  return mel_filterbank(stft(w.samples, p.window, p.hop), n_banks, rate);
}

}  // namespace icpc::signal
