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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "icpc/augment.hpp"
#include "icpc/error.hpp"
#include "icpc/model/flops.hpp"
#include "icpc/model/frontend.hpp"
#include "icpc/model/optimizer.hpp"
#include "icpc/model/transformer.hpp"
#include "icpc/parallel.hpp"
#include "icpc/sample.hpp"

namespace icpc {

struct TrainOptions {
  int epochs = 10;
  int batch_size = 32;
  AdamConfig adam;
  bool compress = true;  // draw a compression level per batch
  std::uint64_t seed = 0;
};

struct StepRecord {
  int epoch = 0;
  std::int64_t step = 0;
  CompressionLevel level;
  int batch = 0;
  double mean_tokens = 0.0;
  double loss = 0.0;
  std::uint64_t attention_flops = 0;        // counted during the step
  std::uint64_t attention_flops_model = 0;  // closed form, padded length
  double seconds = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double mean_tokens_per_step = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;

  [[nodiscard]] double mean_step_seconds() const {
    if (steps.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : steps) s += r.seconds;
    return s / static_cast<double>(steps.size());
  }
  [[nodiscard]] double mean_tokens_per_step() const {
    if (steps.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : steps) s += r.mean_tokens;
    return s / static_cast<double>(steps.size());
  }
};

inline nlohmann::json level_to_json(const CompressionLevel& l) {
  return {{"height", l.height},           {"width", l.width},
          {"frames", l.frames},           {"sample_rate", l.sample_rate},
          {"n_banks", l.n_banks},         {"pruned_words", l.pruned_words}};
}

inline CompressionLevel level_from_json(const nlohmann::json& j) {
  CompressionLevel l;
  l.height = j.value("height", 0);
  l.width = j.value("width", 0);
  l.frames = j.value("frames", 0);
  l.sample_rate = j.value("sample_rate", 0);
  l.n_banks = j.value("n_banks", 0);
  l.pruned_words = j.value("pruned_words", std::vector<std::string>{});
  return l;
}

// Deterministic part of the report (no wall-clock values).
inline nlohmann::json report_to_json(const TrainReport& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"epoch", s.epoch},
                     {"step", s.step},
                     {"level", level_to_json(s.level)},
                     {"batch", s.batch},
                     {"mean_tokens", s.mean_tokens},
                     {"loss", s.loss},
                     {"attention_flops", s.attention_flops},
                     {"attention_flops_model", s.attention_flops_model}});
  }
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"mean_loss", e.mean_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"mean_tokens_per_step", e.mean_tokens_per_step}});
  }
  return {{"epochs", epochs}, {"steps", steps}};
}

inline nlohmann::json timing_to_json(const TrainReport& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps) steps.push_back(s.seconds);
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) epochs.push_back(e.seconds);
  return {{"mean_step_seconds", r.mean_step_seconds()},
          {"step_seconds", steps},
          {"epoch_seconds", epochs}};
}

// Everything needed to resume or reproduce a training run.
template <typename T>
struct TrainState {
  Model<T> model;
  AdamState<T> optimizer;
  int epoch = 0;
  std::int64_t step = 0;
  std::uint64_t seed = 0;

  TrainState() = default;
  explicit TrainState(Model<T> m, std::uint64_t s = 0)
      : model(std::move(m)), optimizer(model.params), seed(s) {}
};

// Seeded generator for a (seed, tag...) tuple; tags keep streams independent.
template <typename... Tags>
[[nodiscard]] Rng derived_rng(std::uint64_t seed, Tags... tags) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tags)...};
  return Rng(seq);
}

namespace detail {

inline double mean_length(std::span<const ModelInput> batch) {
  double s = 0.0;
  for (const auto& in : batch) s += in.length();
  return s / static_cast<double>(batch.size());
}

inline int max_length(std::span<const ModelInput> batch) {
  int m = 0;
  for (const auto& in : batch) m = std::max(m, in.length());
  return m;
}

}  // namespace detail

// Encodes one training batch. With compression on, image, video and audio
// batches share one drawn level; text sequences are pruned one by one.
[[nodiscard]] inline std::vector<ModelInput> make_training_batch(
    const Frontend& fe, std::span<const RawSample* const> samples,
    bool compress, Rng& rng, CompressionLevel* drawn = nullptr) {
  std::vector<ModelInput> out;
  out.reserve(samples.size());
  const AugmentationPolicy& policy = fe.policy();
  if (!compress) {
    for (const RawSample* s : samples) out.push_back(fe.prepare(*s));
    if (drawn) *drawn = CompressionLevel{};
    return out;
  }
  if (fe.config().modality == Modality::text) {
    for (const RawSample* s : samples) {
      const auto& tokens = std::get<TokenList>(s->payload);
      TokenList pruned = prune_insignificant_words(tokens, policy.stopwords, rng);
      out.push_back(fe.from_tokens(pruned, s->label));
    }
    if (drawn) *drawn = CompressionLevel{};
    return out;
  }
  const CompressionLevel level = sample_level(policy, rng);
  for (const RawSample* s : samples) out.push_back(fe.prepare(*s, level));
  if (drawn) *drawn = level;
  return out;
}

// Runs `opts.epochs` further epochs on `state`. Single-threaded so that
// parameters are bit-identical across runs with the same seed.
template <typename T>
TrainReport train(TrainState<T>& state, const Frontend& fe,
                  std::span<const RawSample> data, const TrainOptions& opts) {
  if (data.empty()) throw ConfigError("training set is empty");
  if (opts.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (opts.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(state.model.config == fe.config())) {
    throw ConfigError("front-end and model configurations differ");
  }
  fe.policy().validate(fe.config().modality == Modality::text ||
                               fe.config().modality == Modality::audio
                           ? 0
                           : fe.config().patch_size);

  // Full-size inputs never change, so encode them once.
  std::vector<ModelInput> cached;
  if (!opts.compress) {
    cached.reserve(data.size());
    for (const auto& s : data) cached.push_back(fe.prepare(s));
  }

  using clock = std::chrono::steady_clock;
  TrainReport report;
  const std::size_t n = data.size();
  const std::size_t bs = static_cast<std::size_t>(opts.batch_size);
  const int first = state.epoch;
  for (int e = first; e < first + opts.epochs; ++e) {
    const auto epoch_start = clock::now();
    Rng order_rng = derived_rng(opts.seed, 1, e);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), order_rng);

    EpochRecord er;
    er.epoch = e;
    int correct = 0;
    std::size_t batches = 0;
    double loss_sum = 0.0;
    double tokens_sum = 0.0;
    for (std::size_t b0 = 0; b0 < n; b0 += bs) {
      const auto step_start = clock::now();
      const std::size_t b1 = std::min(n, b0 + bs);
      Rng batch_rng = derived_rng(opts.seed, 2, e, b0 / bs);
      StepRecord sr;
      sr.epoch = e;
      sr.step = state.step;
      std::vector<ModelInput> batch;
      if (opts.compress) {
        std::vector<const RawSample*> picked;
        for (std::size_t i = b0; i < b1; ++i) picked.push_back(&data[order[i]]);
        batch = make_training_batch(fe, picked, true, batch_rng, &sr.level);
      } else {
        for (std::size_t i = b0; i < b1; ++i) batch.push_back(cached[order[i]]);
      }
      const std::uint64_t dropout_seed = batch_rng();
      FlopCounter fc;
      LossAndGrads<T> lg;
      try {
        lg = loss_and_grads<T>(state.model, batch, &dropout_seed, &fc);
      } catch (const NumericError& err) {
        throw NumericError("training diverged at epoch " + std::to_string(e) +
                           ", step " + std::to_string(state.step) + ": " +
                           err.what());
      }
      state.optimizer.step = state.step;
      adam_step(state.model.params, lg.grads, state.optimizer, opts.adam);
      ++state.step;

      sr.batch = static_cast<int>(batch.size());
      sr.mean_tokens = detail::mean_length(batch);
      sr.loss = lg.loss;
      sr.attention_flops = fc.attention;
      sr.attention_flops_model =
          batch.size() * attention_flops(state.model.config, detail::max_length(batch));
      sr.seconds = std::chrono::duration<double>(clock::now() - step_start).count();
      report.steps.push_back(sr);

      correct += lg.correct;
      loss_sum += lg.loss * static_cast<double>(batch.size());
      tokens_sum += sr.mean_tokens;
      ++batches;
    }
    er.mean_loss = loss_sum / static_cast<double>(n);
    er.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    er.mean_tokens_per_step = tokens_sum / static_cast<double>(batches);
    er.seconds = std::chrono::duration<double>(clock::now() - epoch_start).count();
    report.epochs.push_back(er);
    state.epoch = e + 1;
  }
  return report;
}

struct EvalResult {
  int correct = 0;
  int total = 0;
  std::vector<int> predictions;
  [[nodiscard]] double accuracy() const {
    return total ? static_cast<double>(correct) / total : 0.0;
  }
};

// Accuracy of a frozen model on `data` compressed to `level`, batch size 1.
template <typename T>
[[nodiscard]] EvalResult evaluate(const Model<T>& model, const Frontend& fe,
                                  std::span<const RawSample> data,
                                  const CompressionLevel& level = {},
                                  int threads = 1) {
  EvalResult r;
  r.total = static_cast<int>(data.size());
  r.predictions.assign(data.size(), -1);
  parallel_for(data.size(), threads, [&](std::size_t i) {
    r.predictions[i] = predict_with_confidence(model, fe.prepare(data[i], level)).label;
  });
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (r.predictions[i] == data[i].label) ++r.correct;
  }
  return r;
}

}  // namespace icpc
