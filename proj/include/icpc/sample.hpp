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

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "icpc/error.hpp"

namespace icpc {

enum class Modality { text, image, video, audio };

[[nodiscard]] inline std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::text: return "text";
    case Modality::image: return "image";
    case Modality::video: return "video";
    case Modality::audio: return "audio";
  }
  return "unknown";
}

[[nodiscard]] inline Modality parse_modality(std::string_view s) {
  if (s == "text") return Modality::text;
  if (s == "image") return Modality::image;
  if (s == "video") return Modality::video;
  if (s == "audio") return Modality::audio;
  throw ConfigError("unknown modality '" + std::string(s) + "'");
}

// Planar (channel-major) image with intensities nominally in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<float> values;

  Image() = default;
  Image(int h, int w, int c = 1, float fill = 0.0f)
      : height(h), width(w), channels(c),
        values(static_cast<std::size_t>(h) * w * c, fill) {}

  [[nodiscard]] float& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  [[nodiscard]] float at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  friend bool operator==(const Image&, const Image&) = default;
};

using Video = std::vector<Image>;

struct Waveform {
  std::vector<float> samples;
  int sample_rate = 0;
  friend bool operator==(const Waveform&, const Waveform&) = default;
};

using TokenList = std::vector<std::string>;

// Log-mel energies, banks x frames, row-major (bank-major).
struct Spectrogram {
  int n_banks = 0;
  int n_frames = 0;
  std::vector<float> values;

  [[nodiscard]] float at(int bank, int frame) const {
    return values[static_cast<std::size_t>(bank) * n_frames + frame];
  }
  friend bool operator==(const Spectrogram&, const Spectrogram&) = default;
};

struct RawSample {
  std::variant<TokenList, Image, Video, Waveform> payload;
  int label = 0;

  [[nodiscard]] Modality modality() const {
    return static_cast<Modality>(payload.index());
  }
  friend bool operator==(const RawSample&, const RawSample&) = default;
};

struct Dataset {
  Modality modality = Modality::image;
  int num_classes = 0;
  std::uint64_t seed = 0;
  std::vector<RawSample> samples;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace icpc
