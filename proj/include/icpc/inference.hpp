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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "icpc/augment.hpp"
#include "icpc/error.hpp"
#include "icpc/model/flops.hpp"
#include "icpc/model/frontend.hpp"
#include "icpc/model/transformer.hpp"
#include "icpc/parallel.hpp"
#include "icpc/sample.hpp"

namespace icpc {

// Levels run from heaviest compression to none; `costs` holds the nominal
// FLOP cost of each level.
struct InferenceLadder {
  std::vector<CompressionLevel> levels;
  std::vector<std::uint64_t> costs;
  double threshold = 1.0;

  [[nodiscard]] std::size_t size() const { return levels.size(); }
};

[[nodiscard]] inline int round_to_patch(double v, int patch) {
  return std::max(patch, static_cast<int>(v / patch) * patch);
}

// Scaled per-modality ladders: images at 50/75/100% per axis, video at
// (t/2, 50%) and (3t/4, 75%), audio at (62.5%, 59%) and (87.5%, 82%) of the
// maximum rate and bank count. Text ladders come from a WIH instead.
[[nodiscard]] inline std::vector<CompressionLevel> default_ladder_levels(
    const AugmentationPolicy& policy, int patch) {
  const CompressionLevel full = policy.max_level();
  std::vector<CompressionLevel> out;
  switch (policy.modality) {
    case Modality::image:
      for (double f : {0.5, 0.75}) {
        CompressionLevel l;
        l.height = round_to_patch(full.height * f, patch);
        l.width = round_to_patch(full.width * f, patch);
        out.push_back(l);
      }
      break;
    case Modality::video:
      for (double f : {0.5, 0.75}) {
        CompressionLevel l;
        l.frames = std::max(1, static_cast<int>(full.frames * f));
        l.height = round_to_patch(full.height * f, patch);
        l.width = round_to_patch(full.width * f, patch);
        out.push_back(l);
      }
      break;
    case Modality::audio:
      for (auto [fr, fb] : {std::pair{0.625, 0.59}, std::pair{0.875, 0.82}}) {
        CompressionLevel l;
        l.sample_rate = static_cast<int>(full.sample_rate * fr);
        l.n_banks = std::max(1, static_cast<int>(full.n_banks * fb));
        out.push_back(l);
      }
      break;
    case Modality::text:
      throw ConfigError("text ladders are built from a word importance hierarchy");
  }
  out.push_back(full);
  return out;
}

// Nominal costs from token counts; checks that counts strictly increase and
// the last level is uncompressed (text ladders are checked for pruning only).
[[nodiscard]] inline InferenceLadder make_ladder(const Frontend& fe,
                                                 std::vector<CompressionLevel> levels,
                                                 double threshold) {
  if (levels.empty()) throw ConfigError("ladder has no levels");
  InferenceLadder ladder;
  ladder.threshold = threshold;
  const ModelConfig& cfg = fe.config();
  if (cfg.modality == Modality::text) {
    if (!levels.back().pruned_words.empty()) {
      throw ConfigError("the last ladder level must prune nothing");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
      ladder.costs.push_back(forward_flops(cfg, fe.tokens_for(levels[i])));
    }
  } else {
    if (cfg.modality == Modality::audio && fe.audio_length() == 0) {
      throw ConfigError("audio ladders need the native waveform length");
    }
    const CompressionLevel full = fe.policy().max_level();
    int prev = 0;
    for (auto& l : levels) {
      if (l.height == 0) l.height = full.height;
      if (l.width == 0) l.width = full.width;
      if (l.frames == 0) l.frames = full.frames;
      if (l.sample_rate == 0) l.sample_rate = full.sample_rate;
      if (l.n_banks == 0) l.n_banks = full.n_banks;
      const int tokens = fe.tokens_for(l);
      if (tokens <= prev) {
        throw ConfigError("ladder token counts must strictly increase");
      }
      prev = tokens;
      ladder.costs.push_back(forward_flops(cfg, tokens));
    }
    const int full_tokens = fe.tokens_for(full);
    if (prev != full_tokens) throw ConfigError("the last ladder level must be uncompressed");
  }
  ladder.levels = std::move(levels);
  return ladder;
}

struct LevelOutcome {
  Prediction prediction;
  std::uint64_t cost = 0;
};

struct LadderResult {
  int label = 0;
  int exit_level = 0;
  std::uint64_t cumulative_cost = 0;
  std::vector<double> confidences;  // one per evaluated level
  std::vector<std::uint64_t> costs;
};

// Evaluates levels in order and stops at the first whose confidence reaches
// the threshold; otherwise the last level's prediction is used.
[[nodiscard]] inline LadderResult run_ladder(
    std::size_t n_levels, double threshold,
    const std::function<LevelOutcome(std::size_t)>& evaluate_level) {
  if (n_levels == 0) throw ConfigError("ladder has no levels");
  LadderResult r;
  for (std::size_t k = 0; k < n_levels; ++k) {
    const LevelOutcome o = evaluate_level(k);
    r.confidences.push_back(o.prediction.confidence);
    r.costs.push_back(o.cost);
    r.cumulative_cost += o.cost;
    r.label = o.prediction.label;
    r.exit_level = static_cast<int>(k);
    if (o.prediction.confidence >= threshold) break;
  }
  return r;
}

template <typename T>
[[nodiscard]] LevelOutcome evaluate_level(const Model<T>& model, const Frontend& fe,
                                          const RawSample& s,
                                          const CompressionLevel& level) {
  const ModelInput in = fe.prepare(s, level);
  return {predict_with_confidence(model, in), forward_flops(model.config, in.length())};
}

template <typename T>
[[nodiscard]] LadderResult variable_effort_predict(const Model<T>& model,
                                                   const Frontend& fe,
                                                   const RawSample& s,
                                                   const InferenceLadder& ladder) {
  return run_ladder(ladder.size(), ladder.threshold, [&](std::size_t k) {
    return evaluate_level(model, fe, s, ladder.levels[k]);
  });
}

// One record of the variable-effort run log.
struct RunRecord {
  std::size_t id = 0;
  int label = 0;
  int prediction = 0;
  int exit_level = 0;
  std::vector<double> confidences;
  std::uint64_t cumulative_cost = 0;
  std::uint64_t full_cost = 0;  // cost of the uncompressed level alone
};

template <typename T>
[[nodiscard]] std::vector<RunRecord> run_variable_effort(
    const Model<T>& model, const Frontend& fe, std::span<const RawSample> data,
    const InferenceLadder& ladder, int threads = 1) {
  std::vector<RunRecord> log(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const LadderResult r = variable_effort_predict(model, fe, data[i], ladder);
    RunRecord& rec = log[i];
    rec.id = i;
    rec.label = data[i].label;
    rec.prediction = r.label;
    rec.exit_level = r.exit_level;
    rec.confidences = r.confidences;
    rec.cumulative_cost = r.cumulative_cost;
    rec.full_cost = static_cast<std::size_t>(r.exit_level) + 1 == ladder.size()
                        ? r.costs.back()
                        : forward_flops(model.config,
                                        fe.prepare(data[i], ladder.levels.back()).length());
  });
  return log;
}

// Predictions of every sample at every level, reused by calibration.
struct LevelTable {
  std::vector<std::vector<Prediction>> predictions;  // [sample][level]
  std::vector<std::vector<std::uint64_t>> costs;
  std::vector<int> labels;
};

template <typename T>
[[nodiscard]] LevelTable evaluate_all_levels(const Model<T>& model, const Frontend& fe,
                                             std::span<const RawSample> data,
                                             const InferenceLadder& ladder,
                                             int threads = 1) {
  LevelTable t;
  t.predictions.resize(data.size());
  t.costs.resize(data.size());
  t.labels.resize(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    t.labels[i] = data[i].label;
    for (const auto& level : ladder.levels) {
      const auto o = evaluate_level(model, fe, data[i], level);
      t.predictions[i].push_back(o.prediction);
      t.costs[i].push_back(o.cost);
    }
  });
  return t;
}

[[nodiscard]] inline double ladder_accuracy(const LevelTable& t, double threshold) {
  if (t.labels.empty()) return 0.0;
  int correct = 0;
  for (std::size_t i = 0; i < t.labels.size(); ++i) {
    const auto r = run_ladder(t.predictions[i].size(), threshold, [&](std::size_t k) {
      return LevelOutcome{t.predictions[i][k], t.costs[i][k]};
    });
    if (r.label == t.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(t.labels.size());
}

[[nodiscard]] inline std::vector<double> default_threshold_grid() {
  return {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99};
}

struct Calibration {
  double threshold = 0.0;
  std::vector<double> candidates;
  std::vector<double> accuracies;
};

// Candidate with the best accuracy on the split; ties go to the smaller
// threshold.
[[nodiscard]] inline Calibration calibrate_from_table(const LevelTable& t,
                                                      std::vector<double> candidates) {
  if (t.labels.empty()) throw ConfigError("validation set is empty");
  if (candidates.empty()) throw ConfigError("no candidate thresholds");
  std::sort(candidates.begin(), candidates.end());
  Calibration c;
  c.candidates = candidates;
  double best = -1.0;
  for (double th : candidates) {
    const double acc = ladder_accuracy(t, th);
    c.accuracies.push_back(acc);
    if (acc > best) {
      best = acc;
      c.threshold = th;
    }
  }
  return c;
}

template <typename T>
[[nodiscard]] Calibration calibrate_threshold(const Model<T>& model, const Frontend& fe,
                                              std::span<const RawSample> val,
                                              const InferenceLadder& ladder,
                                              std::vector<double> candidates =
                                                  default_threshold_grid(),
                                              int threads = 1) {
  if (val.empty()) throw ConfigError("validation set is empty");
  return calibrate_from_table(evaluate_all_levels(model, fe, val, ladder, threads),
                              std::move(candidates));
}

// ------------------------------------------------------------------ WIH

struct WihEntry {
  std::string word;
  double accuracy_delta = 0.0;
};

struct WordImportanceHierarchy {
  double baseline_accuracy = 0.0;
  std::vector<WihEntry> entries;  // non-decreasing delta
};

namespace detail {

template <typename T>
int count_correct(const Model<T>& model, const Frontend& fe,
                  std::span<const RawSample> data, const CompressionLevel& level,
                  int threads) {
  std::vector<std::uint8_t> ok(data.size(), 0);
  parallel_for(data.size(), threads, [&](std::size_t i) {
    ok[i] = predict_with_confidence(model, fe.prepare(data[i], level)).label == data[i].label;
  });
  return static_cast<int>(std::count(ok.begin(), ok.end(), 1));
}

}  // namespace detail

// delta(w) = acc(no pruning) - acc(every occurrence of w pruned). Words that
// never occur get delta 0 without re-evaluation.
template <typename T>
[[nodiscard]] WordImportanceHierarchy build_wih(const Model<T>& model, const Frontend& fe,
                                                std::span<const RawSample> data,
                                                const StopwordSet& stopwords,
                                                int threads = 1) {
  if (fe.config().modality != Modality::text) {
    throw ConfigError("word importance needs a text model");
  }
  WordImportanceHierarchy wih;
  const double n = static_cast<double>(std::max<std::size_t>(data.size(), 1));
  const int base = detail::count_correct(model, fe, data, {}, threads);
  wih.baseline_accuracy = base / n;
  for (const auto& w : stopwords) {
    const bool present = std::any_of(data.begin(), data.end(), [&](const RawSample& s) {
      const auto& toks = std::get<TokenList>(s.payload);
      return std::any_of(toks.begin(), toks.end(),
                         [&](const std::string& t) { return to_lower(t) == w; });
    });
    double delta = 0.0;
    if (present) {
      CompressionLevel level;
      level.pruned_words = {w};
      delta = base / n - detail::count_correct(model, fe, data, level, threads) / n;
    }
    wih.entries.push_back({w, delta});
  }
  std::stable_sort(wih.entries.begin(), wih.entries.end(),
                   [](const WihEntry& a, const WihEntry& b) {
                     return a.accuracy_delta < b.accuracy_delta;
                   });
  return wih;
}

inline constexpr double kDefaultDeltaCap = 0.01;

// Heavy prunes every stopword, medium the WIH prefix with delta <= cap,
// the last level prunes nothing.
[[nodiscard]] inline std::vector<CompressionLevel> text_ladder_from_wih(
    const WordImportanceHierarchy& wih, const StopwordSet& stopwords,
    double delta_cap = kDefaultDeltaCap) {
  CompressionLevel heavy, medium, none;
  heavy.pruned_words.assign(stopwords.begin(), stopwords.end());
  for (const auto& e : wih.entries) {
    if (e.accuracy_delta > delta_cap) break;
    medium.pruned_words.push_back(e.word);
  }
  return {heavy, medium, none};
}

inline nlohmann::json wih_to_json(const WordImportanceHierarchy& w) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : w.entries) {
    entries.push_back({{"word", e.word}, {"accuracy_delta", e.accuracy_delta}});
  }
  return {{"baseline_accuracy", w.baseline_accuracy}, {"entries", entries}};
}

inline WordImportanceHierarchy wih_from_json(const nlohmann::json& j) {
  WordImportanceHierarchy w;
  try {
    w.baseline_accuracy = j.at("baseline_accuracy").get<double>();
    for (const auto& e : j.at("entries")) {
      w.entries.push_back({e.at("word").get<std::string>(), e.at("accuracy_delta").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad WIH file: ") + e.what());
  }
  return w;
}

// ---------------------------------------------------------------- stats

struct EarlyExitStats {
  std::vector<double> exit_fractions;  // per level
  double mean_cost = 0.0;
  double mean_full_cost = 0.0;
  double speedup = 0.0;  // total full cost / total cumulative cost
  double accuracy = 0.0;
  std::size_t samples = 0;
};

[[nodiscard]] inline EarlyExitStats report_early_exit_stats(std::span<const RunRecord> log,
                                                            std::size_t n_levels) {
  EarlyExitStats s;
  s.exit_fractions.assign(n_levels, 0.0);
  s.samples = log.size();
  if (log.empty()) return s;
  std::uint64_t cost = 0;
  std::uint64_t full = 0;
  int correct = 0;
  for (const auto& r : log) {
    if (r.exit_level < 0 || static_cast<std::size_t>(r.exit_level) >= n_levels) {
      throw ConfigError("run log exit level out of range");
    }
    s.exit_fractions[static_cast<std::size_t>(r.exit_level)] += 1.0;
    cost += r.cumulative_cost;
    full += r.full_cost;
    correct += r.prediction == r.label;
  }
  const double n = static_cast<double>(log.size());
  for (auto& f : s.exit_fractions) f /= n;
  s.mean_cost = static_cast<double>(cost) / n;
  s.mean_full_cost = static_cast<double>(full) / n;
  s.speedup = cost ? static_cast<double>(full) / static_cast<double>(cost) : 0.0;
  s.accuracy = correct / n;
  return s;
}

inline void write_run_log(std::ostream& out, std::span<const RunRecord> log) {
  for (const auto& r : log) {
    out << nlohmann::json{{"id", r.id},
                          {"label", r.label},
                          {"prediction", r.prediction},
                          {"exit_level", r.exit_level},
                          {"confidences", r.confidences},
                          {"cumulative_cost", r.cumulative_cost},
                          {"full_cost", r.full_cost}}
               .dump()
        << '\n';
  }
}

inline void write_stats_csv(std::ostream& out, const EarlyExitStats& s) {
  out << "metric,value\n";
  for (std::size_t k = 0; k < s.exit_fractions.size(); ++k) {
    out << "exit_fraction_level_" << k << ',' << s.exit_fractions[k] << '\n';
  }
  out << "mean_cost," << s.mean_cost << '\n'
      << "mean_full_cost," << s.mean_full_cost << '\n'
      << "speedup," << s.speedup << '\n'
      << "accuracy," << s.accuracy << '\n'
      << "samples," << s.samples << '\n';
}

}  // namespace icpc
