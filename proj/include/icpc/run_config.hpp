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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "icpc/augment.hpp"
#include "icpc/error.hpp"
#include "icpc/model/config.hpp"
#include "icpc/model/optimizer.hpp"
#include "icpc/model/train.hpp"
#include "icpc/positional.hpp"
#include "icpc/signal.hpp"
#include "icpc/stopwords.hpp"
#include "icpc/tta.hpp"
#include "icpc/version.hpp"

namespace icpc {

[[nodiscard]] inline PositionScheme parse_scheme(const std::string& s) {
  if (s == "consistent") return PositionScheme::consistent;
  if (s == "first_n") return PositionScheme::first_n;
  throw ConfigError("unknown position scheme '" + s + "'");
}

[[nodiscard]] inline std::string to_string(PositionScheme s) {
  return s == PositionScheme::consistent ? "consistent" : "first_n";
}

// Run configuration: one flat JSON object with dotted keys. Values resolve
// as built-in defaults for the modality, then the config file, then command
// line flags. Unknown keys and type mismatches are errors.
class RunConfig {
 public:
  [[nodiscard]] static nlohmann::json defaults(Modality m) {
    nlohmann::json j{
        {"modality", std::string(to_string(m))},
        {"seed", 0},
        {"threads", 1},
        {"precision", 32},
        {"out", "out"},

        {"data.train", ""},
        {"data.test", ""},
        {"data.train_size", 2000},
        {"data.test_size", 500},
        {"data.num_classes", 4},
        {"data.val_fraction", 0.05},
        {"data.resolution", 64},
        {"data.frames", 8},
        {"data.duration", 1.0},
        {"data.native_rate", 16000},
        {"data.noise", 0.05},
        {"data.keywords_per_class", 8},

        {"model.checkpoint", ""},
        {"model.embed_dim", 64},
        {"model.n_layers", 4},
        {"model.n_heads", 4},
        {"model.mlp_ratio", 4},
        {"model.patch_size", 16},
        {"model.dropout", 0.1},
        {"model.max_tokens", 20},

        {"policy.heights", {32, 48, 64}},
        {"policy.widths", {32, 48, 64}},
        {"policy.frames", {4, 5, 6, 7, 8}},
        {"policy.rates", {8000, 10000, 12000, 14000, 16000}},
        {"policy.banks", {32, 48, 64}},
        {"policy.stopwords", ""},
        {"policy.window_ms", 25.0},
        {"policy.hop_ms", 10.0},

        {"train.epochs", 10},
        {"train.batch_size", 32},
        {"train.lr", 1e-3},
        {"train.min_lr", 1e-5},
        {"train.warmup_steps", 0},
        {"train.weight_decay", 0.0},
        {"train.clip_norm", 1.0},
        {"train.compress", true},
        {"train.scheme", "consistent"},

        {"ladder.threshold", -1.0},
        {"ladder.thresholds", default_threshold_grid_json()},
        {"ladder.delta_cap", 0.01},
        {"ladder.wih", ""},

        {"tta.k", 100},
        {"tta.tolerance", 0.10},
        {"tta.parallel_width", 4.0},
        {"tta.max_batch", 64},
        {"tta.profile", "analytic"},
        {"tta.rule", "mean_softmax"},

        {"bench.samples", 0}};
    if (m == Modality::video) {
      j["data.resolution"] = 32;
      j["policy.heights"] = {16, 32};
      j["policy.widths"] = {16, 32};
    }
    return j;
  }

  RunConfig() : RunConfig(Modality::image) {}
  explicit RunConfig(Modality m) : values_(defaults(m)) {}

  // Reads a config file. Its "modality" key picks the defaults it overrides.
  [[nodiscard]] static RunConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("config file not found: '" + path.string() + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    return from_json(j);
  }

  [[nodiscard]] static RunConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    Modality m = Modality::image;
    if (j.contains("modality")) {
      if (!j["modality"].is_string()) throw ConfigError("'modality' must be a string");
      m = parse_modality(j["modality"].get<std::string>());
    }
    RunConfig c(m);
    for (const auto& [key, value] : j.items()) c.set(key, value);
    return c;
  }

  void set(const std::string& key, const nlohmann::json& value) {
    if (!values_.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    const auto& cur = values_[key];
    const bool ok = (cur.is_number() && value.is_number()) ||
                    (cur.is_boolean() && value.is_boolean()) ||
                    (cur.is_string() && value.is_string()) ||
                    (cur.is_array() && value.is_array());
    if (!ok) throw ConfigError("config key '" + key + "' has the wrong type");
    if (cur.is_number_integer() && !value.is_number_integer()) {
      throw ConfigError("config key '" + key + "' must be an integer");
    }
    if (key == "modality" && parse_modality(value.get<std::string>()) != modality()) {
      throw ConfigError("modality is fixed when the configuration is created");
    }
    values_[key] = value;
  }

  [[nodiscard]] const nlohmann::json& json() const { return values_; }

  template <typename V>
  [[nodiscard]] V get(const std::string& key) const {
    if (!values_.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    return values_.at(key).get<V>();
  }

  [[nodiscard]] Modality modality() const { return modality_of(values_); }
  [[nodiscard]] std::uint64_t seed() const { return get<std::uint64_t>("seed"); }
  [[nodiscard]] int threads() const { return std::max(1, get<int>("threads")); }
  [[nodiscard]] int precision() const {
    const int p = get<int>("precision");
    if (p != 32 && p != 64) throw ConfigError("precision must be 32 or 64");
    return p;
  }
  [[nodiscard]] std::filesystem::path out_dir() const { return get<std::string>("out"); }

  [[nodiscard]] std::filesystem::path path_or(const std::string& key,
                                              const std::string& fallback) const {
    const auto v = get<std::string>(key);
    return v.empty() ? out_dir() / fallback : std::filesystem::path(v);
  }
  [[nodiscard]] std::string dataset_extension() const {
    return modality() == Modality::text ? ".txt" : ".dset";
  }
  [[nodiscard]] std::filesystem::path train_path() const {
    return path_or("data.train", "train" + dataset_extension());
  }
  [[nodiscard]] std::filesystem::path test_path() const {
    return path_or("data.test", "test" + dataset_extension());
  }
  [[nodiscard]] std::filesystem::path checkpoint_path() const {
    return path_or("model.checkpoint", "model.ckpt");
  }
  [[nodiscard]] std::filesystem::path wih_path() const {
    return path_or("ladder.wih", "wih.json");
  }

  [[nodiscard]] StopwordSet stopwords() const {
    const auto p = get<std::string>("policy.stopwords");
    return p.empty() ? default_stopwords() : load_stopwords(p);
  }

  [[nodiscard]] AugmentationPolicy policy() const {
    AugmentationPolicy p;
    p.modality = modality();
    switch (p.modality) {
      case Modality::text:
        p.stopwords = stopwords();
        break;
      case Modality::video:
        p.valid_frame_counts = get<std::vector<int>>("policy.frames");
        [[fallthrough]];
      case Modality::image:
        p.valid_heights = get<std::vector<int>>("policy.heights");
        p.valid_widths = get<std::vector<int>>("policy.widths");
        break;
      case Modality::audio:
        p.valid_sampling_rates = get<std::vector<int>>("policy.rates");
        p.valid_filterbank_counts = get<std::vector<int>>("policy.banks");
        break;
    }
    p.window_ms = get<double>("policy.window_ms");
    p.hop_ms = get<double>("policy.hop_ms");
    const bool pixels = p.modality == Modality::image || p.modality == Modality::video;
    p.validate(pixels ? get<int>("model.patch_size") : 0);
    return p;
  }

  // Native waveform length in samples.
  [[nodiscard]] std::size_t audio_length() const {
    return static_cast<std::size_t>(
        std::llround(get<double>("data.duration") * get<int>("data.native_rate")));
  }

  // Model configuration; max_grid follows from the policy maxima.
  [[nodiscard]] ModelConfig model_config(int vocab_size = 0) const {
    ModelConfig c;
    c.modality = modality();
    c.embed_dim = get<int>("model.embed_dim");
    c.n_layers = get<int>("model.n_layers");
    c.n_heads = get<int>("model.n_heads");
    c.mlp_ratio = get<int>("model.mlp_ratio");
    c.patch_size = get<int>("model.patch_size");
    c.dropout = get<double>("model.dropout");
    c.num_classes = get<int>("data.num_classes");
    c.channels = 1;
    const AugmentationPolicy p = policy();
    const CompressionLevel full = p.max_level();
    const int ps = c.patch_size;
    switch (c.modality) {
      case Modality::text:
        c.max_grid = {1, 1, get<int>("model.max_tokens")};
        c.vocab_size = vocab_size;
        break;
      case Modality::image:
        c.max_grid = {1, full.height / ps, full.width / ps};
        break;
      case Modality::video:
        c.max_grid = {full.frames, full.height / ps, full.width / ps};
        break;
      case Modality::audio: {
        const int native = get<int>("data.native_rate");
        if (full.sample_rate > native) {
          throw ConfigError("policy sampling rates exceed the native rate");
        }
        const auto len = static_cast<std::size_t>(
            static_cast<long long>(audio_length()) * full.sample_rate / native);
        const auto sp = p.stft_params();
        if (len < static_cast<std::size_t>(sp.window)) {
          throw ConfigError("audio clips are shorter than one STFT window");
        }
        c.max_grid = {1, full.n_banks / ps, signal::stft_frame_count(len, sp.window, sp.hop) / ps};
        break;
      }
    }
    c.validate();
    return c;
  }

  [[nodiscard]] TrainOptions train_options() const {
    TrainOptions o;
    o.epochs = get<int>("train.epochs");
    o.batch_size = get<int>("train.batch_size");
    o.compress = get<bool>("train.compress");
    o.seed = seed();
    o.adam.lr = get<double>("train.lr");
    o.adam.min_lr = get<double>("train.min_lr");
    o.adam.warmup_steps = get<int>("train.warmup_steps");
    o.adam.weight_decay = get<double>("train.weight_decay");
    o.adam.clip_norm = get<double>("train.clip_norm");
    return o;
  }

  [[nodiscard]] PositionScheme scheme() const {
    return parse_scheme(get<std::string>("train.scheme"));
  }

  // Resolved config plus version, embedded in every output.
  [[nodiscard]] nlohmann::json provenance() const {
    return {{"version", version_string()}, {"config", values_}};
  }

 private:
  static nlohmann::json default_threshold_grid_json() {
    return {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99};
  }
  static Modality modality_of(const nlohmann::json& j) {
    return parse_modality(j.at("modality").get<std::string>());
  }

  nlohmann::json values_;
};

}  // namespace icpc
