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

// Modality front-ends: turn a (possibly compressed) raw sample into the
// flat patch rows or token ids the embedding layer consumes, together with
// the position-table rows selected for it.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "icpc/augment.hpp"
#include "icpc/error.hpp"
#include "icpc/model/config.hpp"
#include "icpc/positional.hpp"
#include "icpc/sample.hpp"
#include "icpc/signal.hpp"

namespace icpc {

struct ModelInput {
  Modality modality = Modality::image;
  std::vector<float> patches;  // n x patch_dim, raster order
  int patch_dim = 0;
  std::vector<int> token_ids;
  PositionSelection positions;
  int label = 0;

  [[nodiscard]] int length() const {
    return static_cast<int>(positions.indices.size());
  }
};

// Word-to-id table. Id 0 is reserved for out-of-vocabulary words.
class Vocabulary {
 public:
  static constexpr const char* kUnknown = "<unk>";

  Vocabulary() : words_{kUnknown} { ids_[kUnknown] = 0; }

  // Sorted unique lowercase words of every text sample.
  [[nodiscard]] static Vocabulary from_dataset(const Dataset& ds) {
    std::vector<std::string> words;
    for (const auto& s : ds.samples) {
      for (const auto& t : std::get<TokenList>(s.payload)) {
        words.push_back(to_lower(t));
      }
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    return from_words(words);
  }

  [[nodiscard]] static Vocabulary from_words(
      const std::vector<std::string>& words) {
    Vocabulary v;
    for (const auto& w : words) {
      if (w == kUnknown || v.ids_.count(w)) continue;
      v.ids_[w] = static_cast<int>(v.words_.size());
      v.words_.push_back(w);
    }
    return v;
  }

  [[nodiscard]] int id(const std::string& word) const {
    auto it = ids_.find(to_lower(word));
    return it == ids_.end() ? 0 : it->second;
  }
  [[nodiscard]] int size() const { return static_cast<int>(words_.size()); }
  // Includes the reserved <unk> entry at index 0.
  [[nodiscard]] const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> ids_;
};

struct PatchGrid {
  GridDims grid;
  std::vector<float> rows;  // grid.total() x patch_dim
};

// Non-overlapping p x p patches of one frame appended in row-major order;
// each patch vector is laid out channel, row, column.
inline void append_patches(const Image& img, int p, std::vector<float>& out) {
  const int rows = img.height / p;
  const int cols = img.width / p;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int ch = 0; ch < img.channels; ++ch) {
        for (int y = 0; y < p; ++y) {
          const float* src = &img.values[(static_cast<std::size_t>(ch) * img.height +
                                          r * p + y) * img.width + c * p];
          out.insert(out.end(), src, src + p);
        }
      }
    }
  }
}

[[nodiscard]] inline PatchGrid patchify(const Image& img, int p) {
  if (p < 1 || img.height % p != 0 || img.width % p != 0) {
    throw ShapeError("image " + std::to_string(img.height) + "x" +
                     std::to_string(img.width) +
                     " is not divisible by patch size " + std::to_string(p));
  }
  PatchGrid g{{1, img.height / p, img.width / p}, {}};
  g.rows.reserve(img.values.size());
  append_patches(img, p, g.rows);
  return g;
}

// Time-major: all patches of frame 0, then frame 1, ...
[[nodiscard]] inline PatchGrid patchify(const Video& video, int p) {
  if (video.empty()) throw ShapeError("empty video");
  const Image& first = video.front();
  PatchGrid g{{static_cast<int>(video.size()), 0, 0}, {}};
  for (const auto& f : video) {
    if (f.height != first.height || f.width != first.width ||
        f.channels != first.channels) {
      throw ShapeError("video frames differ in shape");
    }
    const PatchGrid one = patchify(f, p);
    g.grid.height = one.grid.height;
    g.grid.width = one.grid.width;
    g.rows.insert(g.rows.end(), one.rows.begin(), one.rows.end());
  }
  return g;
}

// A spectrogram viewed as a one-channel image: banks are rows (height),
// frames are columns (width). Trailing banks/frames that do not fill a
// whole patch are cropped, and values are standardized.
[[nodiscard]] inline Image spectrogram_image(const Spectrogram& s, int p,
                                             float mean, float stddev) {
  const int h = (s.n_banks / p) * p;
  const int w = (s.n_frames / p) * p;
  if (h < p || w < p) {
    throw ShapeError("spectrogram " + std::to_string(s.n_banks) + "x" +
                     std::to_string(s.n_frames) +
                     " is smaller than one patch of " + std::to_string(p));
  }
  Image img(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(0, y, x) = (s.at(y, x) - mean) / stddev;
    }
  }
  return img;
}

class Frontend {
 public:
  Frontend() = default;
  Frontend(ModelConfig cfg, AugmentationPolicy policy, Vocabulary vocab = {},
           PositionScheme scheme = PositionScheme::consistent)
      : cfg_(std::move(cfg)), policy_(std::move(policy)),
        vocab_(std::move(vocab)), scheme_(scheme) {}

  [[nodiscard]] const ModelConfig& config() const { return cfg_; }
  [[nodiscard]] const AugmentationPolicy& policy() const { return policy_; }
  [[nodiscard]] const Vocabulary& vocabulary() const { return vocab_; }
  [[nodiscard]] PositionScheme scheme() const { return scheme_; }
  void set_scheme(PositionScheme s) { scheme_ = s; }

  float audio_mean = -8.0f;
  float audio_std = 6.0f;

  [[nodiscard]] ModelInput from_grid(PatchGrid g, int label) const {
    ModelInput in;
    in.modality = cfg_.modality;
    in.patch_dim = cfg_.patch_dim();
    in.positions = select_positions(scheme_, cfg_.max_grid, g.grid);
    in.patches = std::move(g.rows);
    in.label = label;
    return in;
  }

  [[nodiscard]] ModelInput from_image(const Image& img, int label) const {
    return from_grid(patchify(img, cfg_.patch_size), label);
  }
  [[nodiscard]] ModelInput from_video(const Video& v, int label) const {
    return from_grid(patchify(v, cfg_.patch_size), label);
  }
  [[nodiscard]] ModelInput from_spectrogram(const Spectrogram& s,
                                            int label) const {
    return from_image(
        spectrogram_image(s, cfg_.patch_size, audio_mean, audio_std), label);
  }

  [[nodiscard]] ModelInput from_tokens(const TokenList& tokens,
                                       int label) const {
    const int max_len = cfg_.max_grid.width;
    const int n = std::min(static_cast<int>(tokens.size()), max_len);
    if (n < 1) throw ShapeError("empty token sequence");
    ModelInput in;
    in.modality = Modality::text;
    in.token_ids.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      in.token_ids.push_back(vocab_.id(tokens[static_cast<std::size_t>(i)]));
    }
    in.positions = select_positions(scheme_, cfg_.max_grid, GridDims{1, 1, n});
    in.label = label;
    return in;
  }

  // Compresses a raw sample to `level` and encodes it. Zero fields of the
  // level mean "full size".
  [[nodiscard]] ModelInput prepare(const RawSample& s,
                                   const CompressionLevel& level) const {
    switch (s.modality()) {
      case Modality::text: {
        const auto& tokens = std::get<TokenList>(s.payload);
        if (level.pruned_words.empty()) return from_tokens(tokens, s.label);
        StopwordSet words;
        for (const auto& w : level.pruned_words) words.insert(to_lower(w));
        TokenList pruned = prune_words(tokens, words);
        // never hand an empty sequence to the model
        return from_tokens(pruned.empty() ? tokens : pruned, s.label);
      }
      case Modality::image: {
        const auto& img = std::get<Image>(s.payload);
        const int h = level.height > 0 ? level.height : img.height;
        const int w = level.width > 0 ? level.width : img.width;
        return from_image(signal::resize_bilinear(img, h, w), s.label);
      }
      case Modality::video: {
        const auto& v = std::get<Video>(s.payload);
        if (v.empty()) throw ShapeError("empty video");
        const int t = level.frames > 0 ? level.frames : static_cast<int>(v.size());
        const int h = level.height > 0 ? level.height : v.front().height;
        const int w = level.width > 0 ? level.width : v.front().width;
        return from_video(compress_video(v, t, h, w), s.label);
      }
      case Modality::audio: {
        const auto& wave = std::get<Waveform>(s.payload);
        const CompressionLevel full = policy_.max_level();
        const int rate = level.sample_rate > 0 ? level.sample_rate : full.sample_rate;
        const int banks = level.n_banks > 0 ? level.n_banks : full.n_banks;
        return from_spectrogram(signal::log_mel_spectrogram(
                                    wave, rate, banks, policy_.stft_params()),
                                s.label);
      }
    }
    throw ShapeError("unknown modality");
  }

  [[nodiscard]] ModelInput prepare(const RawSample& s) const {
    return prepare(s, CompressionLevel{});
  }

  // Token count a level produces (text: length after pruning is sample
  // dependent, so this returns the full length).
  [[nodiscard]] int tokens_for(const CompressionLevel& level) const {
    const int p = cfg_.patch_size;
    switch (cfg_.modality) {
      case Modality::text:
        return cfg_.max_grid.width;
      case Modality::image:
        return (level.height / p) * (level.width / p);
      case Modality::video:
        return level.frames * (level.height / p) * (level.width / p);
      case Modality::audio: {
        const auto sp = policy_.stft_params();
        const CompressionLevel full = policy_.max_level();
        const auto len = static_cast<std::size_t>(
            static_cast<long long>(audio_length_) * level.sample_rate /
            std::max(full.sample_rate, 1));
        if (len < static_cast<std::size_t>(sp.window)) return 0;
        const int frames = signal::stft_frame_count(len, sp.window, sp.hop);
        return (level.n_banks / p) * (frames / p);
      }
    }
    return 0;
  }

  // Native waveform length, needed to predict audio token counts.
  void set_audio_length(std::size_t samples) { audio_length_ = samples; }
  [[nodiscard]] std::size_t audio_length() const { return audio_length_; }

 private:
  ModelConfig cfg_;
  AugmentationPolicy policy_;
  Vocabulary vocab_;
  PositionScheme scheme_ = PositionScheme::consistent;
  std::size_t audio_length_ = 0;
};

}  // namespace icpc
