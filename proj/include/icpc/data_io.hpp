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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "icpc/augment.hpp"
#include "icpc/binary_io.hpp"
#include "icpc/error.hpp"
#include "icpc/sample.hpp"
#include "icpc/signal.hpp"
#include "icpc/stopwords.hpp"

namespace icpc::data {

// ---------------------------------------------------------------- shapes

enum class ShapeKind { circle, square, triangle, cross, diamond, ring };
inline constexpr int kShapeKinds = 6;

[[nodiscard]] inline std::string_view to_string(ShapeKind k) {
  static constexpr std::array<std::string_view, kShapeKinds> names{
      "circle", "square", "triangle", "cross", "diamond", "ring"};
  return names[static_cast<std::size_t>(k)];
}

// Geometry in unit coordinates: (0,0) is the top-left image corner and
// (1,1) the bottom-right one.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::circle;
  double cx = 0.5;
  double cy = 0.5;
  double radius = 0.25;  // half extent
  float intensity = 1.0f;
};

inline constexpr double kMinShapeRadius = 0.08;
inline constexpr double kMaxShapeRadius = 0.34;

[[nodiscard]] inline bool shape_contains(const ShapeSpec& s, double x, double y) {
  const double dx = x - s.cx;
  const double dy = y - s.cy;
  const double r = s.radius;
  switch (s.kind) {
    case ShapeKind::circle:
      return dx * dx + dy * dy <= r * r;
    case ShapeKind::square:
      return std::max(std::abs(dx), std::abs(dy)) <= 0.8 * r;
    case ShapeKind::triangle: {
      // apex at the top, base at the bottom
      if (dy < -r || dy > r) return false;
      const double t = (dy + r) / (2 * r);
      return std::abs(dx) <= r * t;
    }
    case ShapeKind::cross:
      return (std::abs(dx) <= 0.3 * r && std::abs(dy) <= r) ||
             (std::abs(dy) <= 0.3 * r && std::abs(dx) <= r);
    case ShapeKind::diamond:
      return std::abs(dx) + std::abs(dy) <= r;
    case ShapeKind::ring: {
      const double d2 = dx * dx + dy * dy;
      return d2 <= r * r && d2 >= 0.3 * r * r;
    }
  }
  return false;
}

[[nodiscard]] inline ShapeSpec draw_shape_spec(ShapeKind kind, Rng& rng,
                                               double min_radius = kMinShapeRadius,
                                               double max_radius = kMaxShapeRadius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ShapeSpec s;
  s.kind = kind;
  s.radius = min_radius + (max_radius - min_radius) * u(rng);
  s.cx = s.radius + (1.0 - 2 * s.radius) * u(rng);
  s.cy = s.radius + (1.0 - 2 * s.radius) * u(rng);
  s.intensity = static_cast<float>(0.65 + 0.35 * u(rng));
  return s;
}

// Uniform noise in [0.0, 0.3].
[[nodiscard]] inline Image noise_background(int resolution, Rng& rng) {
  Image img(resolution, resolution, 1);
  std::uniform_real_distribution<float> u(0.0f, 0.3f);
  for (auto& v : img.values) v = u(rng);
  return img;
}

// Paints pixels whose centres fall inside the shape.
inline void paint_shape(Image& img, const ShapeSpec& s) {
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (shape_contains(s, (x + 0.5) / img.width, (y + 0.5) / img.height)) {
        img.at(0, y, x) = s.intensity;
      }
    }
  }
}

[[nodiscard]] inline Image render_shape(const ShapeSpec& s, int resolution,
                                        Rng& rng) {
  Image img = noise_background(resolution, rng);
  paint_shape(img, s);
  return img;
}

inline void check_gen_args(int n, int classes, int max_classes) {
  if (n < classes) throw ConfigError("need at least one sample per class");
  if (classes < 2 || classes > max_classes) {
    throw ConfigError("class count must be in [2, " + std::to_string(max_classes) + "]");
  }
}

// Label i % classes, so class counts differ by at most one.
[[nodiscard]] inline Dataset gen_shapes_images(int n, int classes,
                                               int resolution,
                                               std::uint64_t seed) {
  check_gen_args(n, classes, kShapeKinds);
  if (resolution < 8) throw ConfigError("resolution must be >= 8");
  Dataset d{Modality::image, classes, seed, {}};
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const int label = i % classes;
    const ShapeSpec s = draw_shape_spec(static_cast<ShapeKind>(label), rng);
    d.samples.push_back({render_shape(s, resolution, rng), label});
  }
  return d;
}

// ---------------------------------------------------------------- video

enum class Motion { right, left, down, up, still };
inline constexpr int kMotionKinds = 5;

struct MotionSpec {
  ShapeSpec shape;   // position at frame 0
  double vx = 0.0;   // unit coordinates per frame
  double vy = 0.0;
};

[[nodiscard]] inline std::pair<double, double> motion_velocity(Motion m,
                                                               double speed) {
  switch (m) {
    case Motion::right: return {speed, 0.0};
    case Motion::left: return {-speed, 0.0};
    case Motion::down: return {0.0, speed};
    case Motion::up: return {0.0, -speed};
    case Motion::still: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

[[nodiscard]] inline Motion reverse_motion(Motion m) {
  switch (m) {
    case Motion::right: return Motion::left;
    case Motion::left: return Motion::right;
    case Motion::down: return Motion::up;
    case Motion::up: return Motion::down;
    case Motion::still: return Motion::still;
  }
  return m;
}

// Start position chosen so the whole track stays inside the frame.
[[nodiscard]] inline MotionSpec draw_motion_spec(Motion m, int frames, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MotionSpec s;
  const auto kind = u(rng) < 0.5 ? ShapeKind::circle : ShapeKind::square;
  s.shape.kind = kind;
  s.shape.radius = 0.10 + 0.06 * u(rng);
  s.shape.intensity = static_cast<float>(0.65 + 0.35 * u(rng));
  const double travel = 0.35 + 0.15 * u(rng);
  const double speed = frames > 1 ? travel / (frames - 1) : 0.0;
  std::tie(s.vx, s.vy) = motion_velocity(m, speed);
  const double r = s.shape.radius;
  auto start = [&](double v) {
    const double lo = r + std::max(0.0, -v * (frames - 1));
    const double hi = 1.0 - r - std::max(0.0, v * (frames - 1));
    return lo + (hi - lo) * u(rng);
  };
  s.shape.cx = start(s.vx);
  s.shape.cy = start(s.vy);
  return s;
}

// Same background in every frame; only the shape moves.
[[nodiscard]] inline Video render_motion(const MotionSpec& s, const Image& background,
                                         int frames) {
  Video v;
  v.reserve(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    Image img = background;
    ShapeSpec at = s.shape;
    at.cx += s.vx * f;
    at.cy += s.vy * f;
    paint_shape(img, at);
    v.push_back(std::move(img));
  }
  return v;
}

// Motion spec describing the same track played backwards.
[[nodiscard]] inline MotionSpec reversed(const MotionSpec& s, int frames) {
  MotionSpec r = s;
  r.shape.cx += s.vx * (frames - 1);
  r.shape.cy += s.vy * (frames - 1);
  r.vx = -s.vx;
  r.vy = -s.vy;
  return r;
}

[[nodiscard]] inline Dataset gen_moving_shapes_video(int n, int classes,
                                                     int frames, int resolution,
                                                     std::uint64_t seed) {
  check_gen_args(n, classes, kMotionKinds);
  if (frames < 2) throw ConfigError("videos need at least two frames");
  if (resolution < 8) throw ConfigError("resolution must be >= 8");
  Dataset d{Modality::video, classes, seed, {}};
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const int label = i % classes;
    // with fewer than five classes the still class is dropped first
    const MotionSpec s = draw_motion_spec(static_cast<Motion>(label), frames, rng);
    const Image bg = noise_background(resolution, rng);
    d.samples.push_back({render_motion(s, bg, frames), label});
  }
  return d;
}

// ---------------------------------------------------------------- audio

inline constexpr double kToneLowHz = 300.0;
inline constexpr double kToneHighHz = 3500.0;

// Class band edges, equally spaced on the mel scale.
[[nodiscard]] inline std::pair<double, double> tone_band(int label, int classes) {
  const double lo = signal::hz_to_mel(kToneLowHz);
  const double hi = signal::hz_to_mel(kToneHighHz);
  const double step = (hi - lo) / classes;
  return {signal::mel_to_hz(lo + step * label), signal::mel_to_hz(lo + step * (label + 1))};
}

struct ToneSpec {
  double frequency = 440.0;
  double phase = 0.0;
  double amplitude = 0.5;
};

// Frequency drawn on the mel scale from the inner 60% of the class band.
[[nodiscard]] inline ToneSpec draw_tone_spec(int label, int classes, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto [flo, fhi] = tone_band(label, classes);
  const double mlo = signal::hz_to_mel(flo);
  const double mhi = signal::hz_to_mel(fhi);
  const double m = mlo + (mhi - mlo) * (0.2 + 0.6 * u(rng));
  ToneSpec t;
  t.frequency = signal::mel_to_hz(m);
  t.phase = 2 * std::numbers::pi * u(rng);
  t.amplitude = 0.3 + 0.3 * u(rng);
  return t;
}

// Sinusoid plus Gaussian noise of standard deviation `noise`.
[[nodiscard]] inline Waveform render_tone(const ToneSpec& t, double duration,
                                          int rate, double noise, Rng& rng) {
  const auto len = static_cast<std::size_t>(std::llround(duration * rate));
  Waveform w{std::vector<float>(len), rate};
  std::normal_distribution<double> g(0.0, noise > 0 ? noise : 1.0);
  for (std::size_t i = 0; i < len; ++i) {
    double v = t.amplitude *
               std::sin(2 * std::numbers::pi * t.frequency * static_cast<double>(i) / rate +
                        t.phase);
    if (noise > 0) v += g(rng);
    w.samples[i] = static_cast<float>(v);
  }
  return w;
}

[[nodiscard]] inline Dataset gen_tones_audio(int n, int classes, double duration,
                                             int native_rate, std::uint64_t seed,
                                             double noise = 0.05) {
  check_gen_args(n, classes, 32);
  if (duration <= 0) throw ConfigError("duration must be positive");
  if (native_rate < 2 * kToneHighHz) {
    throw ConfigError("native rate must be at least " +
                      std::to_string(static_cast<int>(2 * kToneHighHz)) + " Hz");
  }
  Dataset d{Modality::audio, classes, seed, {}};
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const int label = i % classes;
    const ToneSpec t = draw_tone_spec(label, classes, rng);
    d.samples.push_back({render_tone(t, duration, native_rate, noise, rng), label});
  }
  return d;
}

// ---------------------------------------------------------------- text

// Stopwords the templates draw from; all are in the default list.
inline constexpr std::array<std::string_view, 20> kTemplateStopwords{
    "the", "a",  "of",   "and",  "to",   "in",   "is",   "it",   "that", "with",
    "on",  "for", "was", "as",   "at",   "by",   "this", "from", "an",   "or"};

// Pronounceable nonsense words; none collides with the stopword list.
[[nodiscard]] inline std::vector<std::string> make_pseudowords(std::size_t count,
                                                               std::uint64_t seed) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pc(0, consonants.size() - 1);
  std::uniform_int_distribution<std::size_t> pv(0, vowels.size() - 1);
  const StopwordSet stop = default_stopwords();
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w;
    for (int s = 0; s < 3; ++s) {
      w += consonants[pc(rng)];
      w += vowels[pv(rng)];
    }
    if (stop.contains(w) || !seen.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

struct TextVocabulary {
  std::vector<std::vector<std::string>> keywords;  // per class
  std::vector<std::string> fillers;
};

inline constexpr int kMinSentence = 12;
inline constexpr int kMaxSentence = 20;

// Keyword and filler words depend only on the class count and keyword count.
[[nodiscard]] inline TextVocabulary make_text_vocabulary(int classes,
                                                         int keywords_per_class) {
  const int fillers = 24;
  auto words = make_pseudowords(
      static_cast<std::size_t>(classes * keywords_per_class + fillers), 7);
  TextVocabulary v;
  v.keywords.resize(static_cast<std::size_t>(classes));
  std::size_t k = 0;
  for (auto& cls : v.keywords) {
    for (int j = 0; j < keywords_per_class; ++j) cls.push_back(words[k++]);
  }
  v.fillers.assign(words.begin() + static_cast<std::ptrdiff_t>(k), words.end());
  return v;
}

// Each sentence holds two keywords of its class, at least three stopwords,
// neutral fillers, and sometimes one keyword of another class.
[[nodiscard]] inline Dataset gen_template_text(int n, int classes,
                                               int keywords_per_class,
                                               std::uint64_t seed) {
  check_gen_args(n, classes, 16);
  if (keywords_per_class < 1) throw ConfigError("keywords_per_class must be >= 1");
  const TextVocabulary vocab = make_text_vocabulary(classes, keywords_per_class);
  Dataset d{Modality::text, classes, seed, {}};
  Rng rng(seed);
  std::uniform_int_distribution<int> len_d(kMinSentence, kMaxSentence);
  std::uniform_int_distribution<int> stop_n(3, 8);
  std::uniform_int_distribution<std::size_t> kw(0, static_cast<std::size_t>(keywords_per_class) - 1);
  std::uniform_int_distribution<std::size_t> sw(0, kTemplateStopwords.size() - 1);
  std::uniform_int_distribution<std::size_t> fw(0, vocab.fillers.size() - 1);
  std::uniform_int_distribution<int> other(1, classes - 1);
  std::bernoulli_distribution distract(0.25);
  for (int i = 0; i < n; ++i) {
    const int label = i % classes;
    const int len = len_d(rng);
    TokenList words;
    const auto& own = vocab.keywords[static_cast<std::size_t>(label)];
    words.push_back(own[kw(rng)]);
    words.push_back(own[kw(rng)]);
    if (distract(rng)) {
      const int c = (label + other(rng)) % classes;
      words.push_back(vocab.keywords[static_cast<std::size_t>(c)][kw(rng)]);
    }
    const int stops = stop_n(rng);
    for (int s = 0; s < stops; ++s) words.emplace_back(kTemplateStopwords[sw(rng)]);
    while (static_cast<int>(words.size()) < len) words.push_back(vocab.fillers[fw(rng)]);
    std::shuffle(words.begin(), words.end(), rng);
    d.samples.push_back({std::move(words), label});
  }
  return d;
}

// ---------------------------------------------------------------- splits

[[nodiscard]] inline std::vector<int> class_counts(const Dataset& d) {
  std::vector<int> c(static_cast<std::size_t>(d.num_classes), 0);
  for (const auto& s : d.samples) {
    if (s.label < 0 || s.label >= d.num_classes) {
      throw FormatError("label " + std::to_string(s.label) + " out of range");
    }
    ++c[static_cast<std::size_t>(s.label)];
  }
  return c;
}

// Class-balanced hold-out: every class contributes
// round(fraction * size / classes) samples (at least one, leaving at least
// one for training). Both parts keep the original sample order.
[[nodiscard]] inline std::pair<Dataset, Dataset> split_validation(
    const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("validation fraction must be in (0, 1)");
  }
  const auto counts = class_counts(d);
  const int per_class = std::max(
      1, static_cast<int>(std::lround(fraction * static_cast<double>(d.size()) /
                                      d.num_classes)));
  Rng rng(seed);
  std::vector<bool> to_val(d.size(), false);
  for (int c = 0; c < d.num_classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.samples[i].label == c) idx.push_back(i);
    }
    const int take = std::min(per_class, counts[static_cast<std::size_t>(c)] - 1);
    if (take < 1) throw ConfigError("class " + std::to_string(c) + " is too small to split");
    std::vector<std::size_t> chosen;
    std::sample(idx.begin(), idx.end(), std::back_inserter(chosen),
                static_cast<std::size_t>(take), rng);
    for (auto i : chosen) to_val[i] = true;
  }
  Dataset train{d.modality, d.num_classes, d.seed, {}};
  Dataset val{d.modality, d.num_classes, d.seed, {}};
  for (std::size_t i = 0; i < d.size(); ++i) {
    (to_val[i] ? val : train).samples.push_back(d.samples[i]);
  }
  return {std::move(train), std::move(val)};
}

// ---------------------------------------------------------------- files

inline constexpr std::string_view kDatasetMagic = "ICPCDSET";
inline constexpr std::string_view kTextMagic = "ICPCTEXT";
inline constexpr std::uint32_t kDatasetVersion = 1;

namespace detail {

inline void write_image(std::ostream& out, const Image& img) {
  io::write_pod<std::int32_t>(out, img.height);
  io::write_pod<std::int32_t>(out, img.width);
  io::write_pod<std::int32_t>(out, img.channels);
  io::write_floats(out, img.values.data(), img.values.size());
}

inline Image read_image(std::istream& in) {
  Image img;
  img.height = io::read_pod<std::int32_t>(in);
  img.width = io::read_pod<std::int32_t>(in);
  img.channels = io::read_pod<std::int32_t>(in);
  img.values = io::read_floats(in);
  if (img.height < 1 || img.width < 1 || img.channels < 1 ||
      img.values.size() != static_cast<std::size_t>(img.height) * img.width * img.channels) {
    throw FormatError("dataset: inconsistent image shape");
  }
  return img;
}

inline nlohmann::json dataset_header(const Dataset& d, const nlohmann::json& meta) {
  return {{"modality", std::string(to_string(d.modality))},
          {"num_classes", d.num_classes},
          {"seed", d.seed},
          {"count", d.size()},
          {"meta", meta}};
}

inline void read_dataset_header(const nlohmann::json& h, Dataset& d,
                                nlohmann::json* meta) {
  try {
    d.modality = parse_modality(h.at("modality").get<std::string>());
    d.num_classes = h.at("num_classes").get<int>();
    d.seed = h.at("seed").get<std::uint64_t>();
    if (meta) *meta = h.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset: bad header: ") + e.what());
  }
}

inline void save_text(const std::filesystem::path& path, const Dataset& d,
                      const nlohmann::json& meta) {
  auto out = io::open_out(path);
  out << kTextMagic << ' ' << kDatasetVersion << ' ' << dataset_header(d, meta).dump() << '\n';
  for (const auto& s : d.samples) {
    out << s.label << '\t';
    const auto& toks = std::get<TokenList>(s.payload);
    for (std::size_t i = 0; i < toks.size(); ++i) out << (i ? " " : "") << toks[i];
    out << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline Dataset load_text(std::istream& in, nlohmann::json* meta) {
  std::string line;
  std::getline(in, line);
  std::istringstream head(line);
  std::string magic;
  std::uint32_t version = 0;
  head >> magic >> version;
  if (magic != kTextMagic) throw FormatError("dataset: bad magic header");
  if (version != kDatasetVersion) {
    throw VersionError("dataset: format version " + std::to_string(version) +
                       ", expected " + std::to_string(kDatasetVersion));
  }
  std::string json_text;
  std::getline(head >> std::ws, json_text);
  Dataset d;
  try {
    read_dataset_header(nlohmann::json::parse(json_text), d, meta);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset: bad header: ") + e.what());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("dataset: missing label separator");
    RawSample s;
    try {
      s.label = std::stoi(line.substr(0, tab));
    } catch (const std::exception&) {
      throw FormatError("dataset: bad label '" + line.substr(0, tab) + "'");
    }
    TokenList toks;
    std::istringstream ws(line.substr(tab + 1));
    for (std::string w; ws >> w;) toks.push_back(w);
    s.payload = std::move(toks);
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace detail

// Binary for image, video and audio; UTF-8 lines for text.
inline void save_dataset(const std::filesystem::path& path, const Dataset& d,
                         const nlohmann::json& meta = nlohmann::json::object()) {
  if (d.modality == Modality::text) {
    detail::save_text(path, d, meta);
    return;
  }
  auto out = io::open_out(path);
  io::write_header(out, kDatasetMagic, kDatasetVersion);
  io::write_string(out, detail::dataset_header(d, meta).dump());
  for (const auto& s : d.samples) {
    if (s.modality() != d.modality) throw FormatError("dataset: mixed modalities");
    io::write_pod<std::int32_t>(out, s.label);
    switch (d.modality) {
      case Modality::image:
        detail::write_image(out, std::get<Image>(s.payload));
        break;
      case Modality::video: {
        const auto& v = std::get<Video>(s.payload);
        io::write_pod<std::int32_t>(out, static_cast<std::int32_t>(v.size()));
        for (const auto& f : v) detail::write_image(out, f);
        break;
      }
      case Modality::audio: {
        const auto& w = std::get<Waveform>(s.payload);
        io::write_pod<std::int32_t>(out, w.sample_rate);
        io::write_floats(out, w.samples.data(), w.samples.size());
        break;
      }
      case Modality::text:
        break;
    }
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

[[nodiscard]] inline Dataset load_dataset(const std::filesystem::path& path,
                                          nlohmann::json* meta = nullptr) {
  auto in = io::open_in(path);
  std::string magic(kDatasetMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in) throw FormatError("dataset: bad magic header");
  if (magic == kTextMagic) {
    in.seekg(0);
    return detail::load_text(in, meta);
  }
  in.seekg(0);
  io::read_header(in, kDatasetMagic, kDatasetVersion, "dataset");
  Dataset d;
  std::size_t count = 0;
  try {
    const auto h = nlohmann::json::parse(io::read_string(in));
    detail::read_dataset_header(h, d, meta);
    count = h.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset: bad header: ") + e.what());
  }
  d.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RawSample s;
    s.label = io::read_pod<std::int32_t>(in);
    switch (d.modality) {
      case Modality::image:
        s.payload = detail::read_image(in);
        break;
      case Modality::video: {
        const auto frames = io::read_pod<std::int32_t>(in);
        if (frames < 1 || frames > 100000) throw FormatError("dataset: bad frame count");
        Video v;
        for (int f = 0; f < frames; ++f) v.push_back(detail::read_image(in));
        s.payload = std::move(v);
        break;
      }
      case Modality::audio: {
        Waveform w;
        w.sample_rate = io::read_pod<std::int32_t>(in);
        w.samples = io::read_floats(in);
        s.payload = std::move(w);
        break;
      }
      case Modality::text:
        throw FormatError("dataset: text stored in binary container");
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace icpc::data
