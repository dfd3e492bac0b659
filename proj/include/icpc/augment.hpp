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

// Compression-based augmentation: one compression level is drawn per batch
// (per sequence for text) and every sample in the batch is compressed to it.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "icpc/error.hpp"
#include "icpc/sample.hpp"
#include "icpc/signal.hpp"
#include "icpc/stopwords.hpp"

namespace icpc {

using Rng = std::mt19937_64;

// A concrete input size. Only the fields of the active modality matter:
// image (height, width), video (frames, height, width), audio
// (sample_rate, n_banks), text (words pruned at inference time).
struct CompressionLevel {
  int height = 0;
  int width = 0;
  int frames = 0;
  int sample_rate = 0;
  int n_banks = 0;
  std::vector<std::string> pruned_words;

  friend bool operator==(const CompressionLevel&,
                         const CompressionLevel&) = default;
};

struct AugmentationPolicy {
  Modality modality = Modality::image;
  std::vector<int> valid_heights;
  std::vector<int> valid_widths;
  std::vector<int> valid_frame_counts;
  std::vector<int> valid_sampling_rates;
  std::vector<int> valid_filterbank_counts;
  StopwordSet stopwords;
  // STFT window/hop in milliseconds of the largest sampling rate.
  double window_ms = 25.0;
  double hop_ms = 10.0;

  // Full-size level (every list at its maximum).
  [[nodiscard]] CompressionLevel max_level() const {
    auto mx = [](const std::vector<int>& v) {
      return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
    };
    CompressionLevel l;
    l.height = mx(valid_heights);
    l.width = mx(valid_widths);
    l.frames = mx(valid_frame_counts);
    l.sample_rate = mx(valid_sampling_rates);
    l.n_banks = mx(valid_filterbank_counts);
    return l;
  }

  [[nodiscard]] signal::StftParams stft_params() const {
    return signal::StftParams::from_ms(max_level().sample_rate, window_ms,
                                       hop_ms);
  }

  // Throws ConfigError unless the lists of the active modality are
  // nonempty and positive, and pixel sizes are patch multiples.
  void validate(int patch_size) const {
    auto need = [](const std::vector<int>& v, const char* name) {
      if (v.empty()) {
        throw ConfigError(std::string("augmentation policy: '") + name +
                          "' is empty");
      }
      for (int x : v) {
        if (x <= 0) {
          throw ConfigError(std::string("augmentation policy: '") + name +
                            "' has a non-positive entry");
        }
      }
    };
    auto multiple = [patch_size](const std::vector<int>& v, const char* name) {
      for (int x : v) {
        if (patch_size > 0 && x % patch_size != 0) {
          throw ConfigError(std::string("augmentation policy: '") + name +
                            "' entry " + std::to_string(x) +
                            " is not a multiple of the patch size " +
                            std::to_string(patch_size));
        }
      }
    };
    switch (modality) {
      case Modality::text:
        break;
      case Modality::video:
        need(valid_frame_counts, "valid_frame_counts");
        [[fallthrough]];
      case Modality::image:
        need(valid_heights, "valid_heights");
        need(valid_widths, "valid_widths");
        multiple(valid_heights, "valid_heights");
        multiple(valid_widths, "valid_widths");
        break;
      case Modality::audio:
        need(valid_sampling_rates, "valid_sampling_rates");
        need(valid_filterbank_counts, "valid_filterbank_counts");
        break;
    }
  }

  // Training policies used in the reference experiments (ViT-224, UMT-224
  // and AST front-ends).
  [[nodiscard]] static AugmentationPolicy reference_image() {
    AugmentationPolicy p;
    p.modality = Modality::image;
    for (int s = 96; s <= 224; s += 16) p.valid_heights.push_back(s);
    p.valid_widths = p.valid_heights;
    return p;
  }
  [[nodiscard]] static AugmentationPolicy reference_video() {
    AugmentationPolicy p = reference_image();
    p.modality = Modality::video;
    p.valid_frame_counts = {4, 5, 6, 7, 8};
    return p;
  }
  [[nodiscard]] static AugmentationPolicy reference_audio() {
    AugmentationPolicy p;
    p.modality = Modality::audio;
    for (int k = 8; k <= 16; ++k) p.valid_sampling_rates.push_back(k * 1000);
    p.valid_filterbank_counts = {65, 75, 85, 95, 105, 115, 125, 128};
    return p;
  }
};

namespace detail {

inline int pick(const std::vector<int>& values, Rng& rng, const char* name) {
  if (values.empty()) {
    throw ConfigError(std::string("augmentation policy: '") + name +
                      "' is empty");
  }
  std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
  return values[d(rng)];
}

}  // namespace detail

// Independent uniform draw of every size parameter of the active modality.
[[nodiscard]] inline CompressionLevel sample_level(
    const AugmentationPolicy& policy, Rng& rng) {
  CompressionLevel l;
  switch (policy.modality) {
    case Modality::text:
      break;
    case Modality::image:
      l.height = detail::pick(policy.valid_heights, rng, "valid_heights");
      l.width = detail::pick(policy.valid_widths, rng, "valid_widths");
      break;
    case Modality::video:
      l.height = detail::pick(policy.valid_heights, rng, "valid_heights");
      l.width = detail::pick(policy.valid_widths, rng, "valid_widths");
      l.frames =
          detail::pick(policy.valid_frame_counts, rng, "valid_frame_counts");
      break;
    case Modality::audio:
      l.sample_rate = detail::pick(policy.valid_sampling_rates, rng,
                                   "valid_sampling_rates");
      l.n_banks = detail::pick(policy.valid_filterbank_counts, rng,
                               "valid_filterbank_counts");
      break;
  }
  return l;
}

// Removes a random subset of the stopword occurrences in seq. The subset
// size is uniform on [0, s - 1] for s occurrences, so one always survives.
[[nodiscard]] inline TokenList prune_insignificant_words(
    const TokenList& seq, const StopwordSet& stopwords, Rng& rng) {
  std::vector<std::size_t> occurrences;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (is_stopword(stopwords, seq[i])) occurrences.push_back(i);
  }
  if (occurrences.empty()) return seq;
  std::uniform_int_distribution<std::size_t> count(0, occurrences.size() - 1);
  const std::size_t k = count(rng);
  if (k == 0) return seq;
  std::vector<std::size_t> drop;
  drop.reserve(k);
  std::sample(occurrences.begin(), occurrences.end(), std::back_inserter(drop),
              static_cast<std::ptrdiff_t>(k), rng);
  TokenList out;
  out.reserve(seq.size() - k);
  std::size_t d = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (d < drop.size() && drop[d] == i) {
      ++d;
      continue;
    }
    out.push_back(seq[i]);
  }
  return out;
}

// Deterministic pruning of every occurrence of the given words.
[[nodiscard]] inline TokenList prune_words(const TokenList& seq,
                                           const StopwordSet& words) {
  TokenList out;
  out.reserve(seq.size());
  for (const auto& t : seq) {
    if (!is_stopword(words, t)) out.push_back(t);
  }
  return out;
}

[[nodiscard]] inline Video compress_video(const Video& video, int frames,
                                          int height, int width) {
  Video out = signal::uniform_frame_sample(video, frames);
  for (auto& f : out) f = signal::resize_bilinear(f, height, width);
  return out;
}

struct ImageBatch {
  std::vector<Image> images;
  int height = 0;
  int width = 0;
};

struct VideoBatch {
  std::vector<Video> videos;
  int frames = 0;
  int height = 0;
  int width = 0;
};

struct SpectrogramBatch {
  std::vector<Spectrogram> spectrograms;
  int sample_rate = 0;
  int n_banks = 0;
};

[[nodiscard]] inline ImageBatch modulate_resolution(
    const std::vector<Image>& batch, const AugmentationPolicy& policy,
    Rng& rng) {
  const CompressionLevel l = sample_level(policy, rng);
  ImageBatch out{{}, l.height, l.width};
  out.images.reserve(batch.size());
  for (const auto& img : batch) {
    if (!batch.empty() && (img.height != batch.front().height ||
                           img.width != batch.front().width)) {
      throw ShapeError("images in a batch must share one resolution");
    }
    out.images.push_back(signal::resize_bilinear(img, l.height, l.width));
  }
  return out;
}

[[nodiscard]] inline VideoBatch modulate_spatiotemporal(
    const std::vector<Video>& batch, const AugmentationPolicy& policy,
    Rng& rng) {
  const CompressionLevel l = sample_level(policy, rng);
  VideoBatch out{{}, l.frames, l.height, l.width};
  out.videos.reserve(batch.size());
  for (const auto& v : batch) {
    if (l.frames > static_cast<int>(v.size())) {
      throw InvalidCompression("requested " + std::to_string(l.frames) +
                               " frames from a " + std::to_string(v.size()) +
                               "-frame video");
    }
    out.videos.push_back(compress_video(v, l.frames, l.height, l.width));
  }
  return out;
}

[[nodiscard]] inline SpectrogramBatch modulate_spectrogram(
    const std::vector<Waveform>& batch, const AugmentationPolicy& policy,
    Rng& rng) {
  const CompressionLevel l = sample_level(policy, rng);
  const auto params = policy.stft_params();
  SpectrogramBatch out{{}, l.sample_rate, l.n_banks};
  out.spectrograms.reserve(batch.size());
  for (const auto& w : batch) {
    out.spectrograms.push_back(
        signal::log_mel_spectrogram(w, l.sample_rate, l.n_banks, params));
  }
  return out;
}

}  // namespace icpc
