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
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "icpc/augment.hpp"
#include "icpc/error.hpp"
#include "icpc/model/flops.hpp"
#include "icpc/model/frontend.hpp"
#include "icpc/model/train.hpp"
#include "icpc/model/transformer.hpp"
#include "icpc/parallel.hpp"

namespace icpc {

inline constexpr double kDefaultLatencyTolerance = 0.10;
inline constexpr int kDefaultMaxBatch = 64;

// Latency of one batch of `b` views; b >= 1.
using LatencyFn = std::function<double(int)>;

// Largest b with latency(b) <= (1 + tolerance) * latency(1): double b until
// the bound breaks (or max_batch is reached), then bisect the last interval.
[[nodiscard]] inline int profile_ideal_batch(const LatencyFn& latency,
                                             double tolerance = kDefaultLatencyTolerance,
                                             int max_batch = kDefaultMaxBatch) {
  if (tolerance < 0) throw ConfigError("latency tolerance must be >= 0");
  if (max_batch < 1) throw ConfigError("max_batch must be >= 1");
  const double limit = (1.0 + tolerance) * latency(1);
  int good = 1;
  int bad = 0;
  while (good < max_batch) {
    const int next = std::min(good * 2, max_batch);
    if (latency(next) <= limit) {
      good = next;
    } else {
      bad = next;
      break;
    }
  }
  if (bad == 0) return good;
  while (bad - good > 1) {
    const int mid = good + (bad - good) / 2;
    (latency(mid) <= limit ? good : bad) = mid;
  }
  return good;
}

// Hardware stand-in: a device that runs `capacity` FLOPs in parallel within
// one time unit, so latency(b) = max(1, b * flops / capacity).
struct AnalyticCostModel {
  double capacity = 1.0;

  [[nodiscard]] double latency(int batch, std::uint64_t flops_per_view) const {
    return std::max(1.0, static_cast<double>(batch) *
                             static_cast<double>(flops_per_view) / capacity);
  }
  [[nodiscard]] LatencyFn for_view(std::uint64_t flops_per_view) const {
    return [this, flops_per_view](int b) { return latency(b, flops_per_view); };
  }
};

// Median-of-repeats wall-clock latency of `run(b)` after one warmup call.
// Throws UnstableMeasurement if (max - min) / median exceeds max_spread.
[[nodiscard]] inline LatencyFn wall_clock_latency(std::function<void(int)> run,
                                                  int repeats = 5,
                                                  double max_spread = 0.25) {
  return [run = std::move(run), repeats, max_spread](int b) {
    using clock = std::chrono::steady_clock;
    run(b);
    std::vector<double> t;
    for (int r = 0; r < repeats; ++r) {
      const auto start = clock::now();
      run(b);
      t.push_back(std::chrono::duration<double>(clock::now() - start).count());
    }
    std::sort(t.begin(), t.end());
    const double median = t[t.size() / 2];
    if (median <= 0 || (t.back() - t.front()) / median > max_spread) {
      throw UnstableMeasurement("latency spread above " +
                                std::to_string(static_cast<int>(max_spread * 100)) +
                                "% at batch " + std::to_string(b));
    }
    return median;
  };
}

// ------------------------------------------------------------ profiles

struct ProfileRow {
  CompressionLevel size;
  int tokens = 0;
  int batch = 0;
  double latency = 0.0;
};

struct LatencyProfile {
  std::vector<CompressionLevel> sizes;
  std::vector<int> tokens;
  std::vector<int> ideal_batch;
  std::vector<ProfileRow> rows;  // every measured (size, batch) point

  [[nodiscard]] std::size_t index_of(const CompressionLevel& s) const {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] == s) return i;
    }
    throw ConfigError("size not in latency profile");
  }
};

// All size tuples the policy allows (non-text).
[[nodiscard]] inline std::vector<CompressionLevel> enumerate_sizes(
    const AugmentationPolicy& p) {
  std::vector<CompressionLevel> out;
  switch (p.modality) {
    case Modality::image:
      for (int h : p.valid_heights) {
        for (int w : p.valid_widths) {
          CompressionLevel l;
          l.height = h;
          l.width = w;
          out.push_back(l);
        }
      }
      break;
    case Modality::video:
      for (int f : p.valid_frame_counts) {
        for (int h : p.valid_heights) {
          for (int w : p.valid_widths) {
            CompressionLevel l;
            l.frames = f;
            l.height = h;
            l.width = w;
            out.push_back(l);
          }
        }
      }
      break;
    case Modality::audio:
      for (int r : p.valid_sampling_rates) {
        for (int b : p.valid_filterbank_counts) {
          CompressionLevel l;
          l.sample_rate = r;
          l.n_banks = b;
          out.push_back(l);
        }
      }
      break;
    case Modality::text:
      throw ConfigError("test-time augmentation is not defined for text");
  }
  return out;
}

// Profiles every policy size with the given per-size latency source.
[[nodiscard]] inline LatencyProfile build_profile(
    const Frontend& fe, const std::function<LatencyFn(const CompressionLevel&, int)>& source,
    double tolerance = kDefaultLatencyTolerance, int max_batch = kDefaultMaxBatch) {
  LatencyProfile prof;
  for (const auto& s : enumerate_sizes(fe.policy())) {
    const int tokens = fe.tokens_for(s);
    if (tokens < 1) continue;
    const LatencyFn base = source(s, tokens);
    const LatencyFn recorded = [&](int b) {
      const double t = base(b);
      prof.rows.push_back({s, tokens, b, t});
      return t;
    };
    prof.sizes.push_back(s);
    prof.tokens.push_back(tokens);
    prof.ideal_batch.push_back(profile_ideal_batch(recorded, tolerance, max_batch));
  }
  if (prof.sizes.empty()) throw ConfigError("no policy size yields any token");
  return prof;
}

[[nodiscard]] inline LatencyProfile analytic_profile(const Frontend& fe,
                                                     const AnalyticCostModel& cost,
                                                     double tolerance = kDefaultLatencyTolerance,
                                                     int max_batch = kDefaultMaxBatch) {
  const ModelConfig cfg = fe.config();
  return build_profile(
      fe,
      [&](const CompressionLevel&, int tokens) { return cost.for_view(forward_flops(cfg, tokens)); },
      tolerance, max_batch);
}

inline void write_profile_csv(std::ostream& out, const LatencyProfile& p) {
  out << "height,width,frames,sample_rate,n_banks,tokens,batch,latency\n";
  for (const auto& r : p.rows) {
    out << r.size.height << ',' << r.size.width << ',' << r.size.frames << ','
        << r.size.sample_rate << ',' << r.size.n_banks << ',' << r.tokens << ','
        << r.batch << ',' << r.latency << '\n';
  }
}

// ------------------------------------------------------- configurations

enum class EnsembleRule { mean_softmax, majority_vote };

[[nodiscard]] inline EnsembleRule parse_ensemble_rule(const std::string& s) {
  if (s == "mean_softmax") return EnsembleRule::mean_softmax;
  if (s == "majority_vote") return EnsembleRule::majority_vote;
  throw ConfigError("unknown ensemble rule '" + s + "'");
}

[[nodiscard]] inline std::string to_string(EnsembleRule r) {
  return r == EnsembleRule::mean_softmax ? "mean_softmax" : "majority_vote";
}

// Views sorted by decreasing token count; views.size() equals the ideal
// batch of the first (largest) view.
struct TtaConfiguration {
  std::vector<CompressionLevel> views;
  std::vector<int> tokens;
  EnsembleRule rule = EnsembleRule::mean_softmax;

  [[nodiscard]] int max_tokens() const { return tokens.empty() ? 0 : tokens.front(); }
};

// Draws a maximum size uniformly, then ideal_batch(max) - 1 distinct sizes
// with strictly fewer tokens. Draws without enough smaller sizes are
// skipped, whole duplicates are redrawn; at most max_attempts draws.
[[nodiscard]] inline std::vector<TtaConfiguration> generate_configurations(
    int k, const LatencyProfile& profile, Rng& rng,
    EnsembleRule rule = EnsembleRule::mean_softmax, int max_attempts = 0) {
  if (k < 1) throw ConfigError("K must be >= 1");
  if (profile.sizes.empty()) throw ConfigError("empty latency profile");
  if (max_attempts <= 0) max_attempts = 100 * k;
  const std::size_t n = profile.sizes.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::set<std::vector<std::size_t>> seen;
  std::vector<TtaConfiguration> out;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < k; ++attempt) {
    const std::size_t top = pick(rng);
    const int b = profile.ideal_batch[top];
    std::vector<std::size_t> smaller;
    for (std::size_t i = 0; i < n; ++i) {
      if (profile.tokens[i] < profile.tokens[top]) smaller.push_back(i);
    }
    if (static_cast<int>(smaller.size()) < b - 1) continue;
    std::vector<std::size_t> chosen;
    std::sample(smaller.begin(), smaller.end(), std::back_inserter(chosen),
                static_cast<std::size_t>(b - 1), rng);
    chosen.push_back(top);
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t c) {
      return std::tie(profile.tokens[a], a) > std::tie(profile.tokens[c], c);
    });
    if (!seen.insert(chosen).second) continue;
    TtaConfiguration cfg;
    cfg.rule = rule;
    for (auto i : chosen) {
      cfg.views.push_back(profile.sizes[i]);
      cfg.tokens.push_back(profile.tokens[i]);
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

inline nlohmann::json configurations_to_json(std::span<const TtaConfiguration> cs) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    nlohmann::json views = nlohmann::json::array();
    for (const auto& v : cs[i].views) views.push_back(level_to_json(v));
    arr.push_back({{"id", i},
                   {"rule", to_string(cs[i].rule)},
                   {"tokens", cs[i].tokens},
                   {"views", views}});
  }
  return arr;
}

// --------------------------------------------------------- prediction

struct TtaPrediction {
  int label = 0;
  std::vector<double> mean_probabilities;
};

// Combines per-view class probabilities. Majority ties go to the class with
// the larger mean probability.
[[nodiscard]] inline TtaPrediction ensemble(std::span<const std::vector<double>> probs,
                                            EnsembleRule rule) {
  if (probs.empty()) throw ConfigError("no views to ensemble");
  const std::size_t c = probs.front().size();
  TtaPrediction p;
  p.mean_probabilities.assign(c, 0.0);
  for (const auto& v : probs) {
    for (std::size_t k = 0; k < c; ++k) p.mean_probabilities[k] += v[k];
  }
  for (auto& v : p.mean_probabilities) v /= static_cast<double>(probs.size());
  const auto argmax = [](const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  if (rule == EnsembleRule::mean_softmax) {
    p.label = argmax(p.mean_probabilities);
    return p;
  }
  std::vector<int> votes(c, 0);
  for (const auto& v : probs) ++votes[static_cast<std::size_t>(argmax(v))];
  int best = 0;
  for (std::size_t k = 1; k < c; ++k) {
    const auto bk = static_cast<std::size_t>(best);
    if (votes[k] > votes[bk] ||
        (votes[k] == votes[bk] && p.mean_probabilities[k] > p.mean_probabilities[bk])) {
      best = static_cast<int>(k);
    }
  }
  p.label = best;
  return p;
}

// All views of one sample run as one padded, masked batch.
template <typename T>
[[nodiscard]] TtaPrediction tta_predict(const Model<T>& model, const Frontend& fe,
                                        const RawSample& s, const TtaConfiguration& cfg,
                                        FlopCounter* flops = nullptr) {
  if (cfg.views.empty()) throw ConfigError("configuration has no views");
  std::vector<EncodedSample<T>> batch;
  batch.reserve(cfg.views.size());
  for (const auto& v : cfg.views) batch.push_back(embed(model, fe.prepare(s, v)));
  pad_batch(batch);
  const MatrixR<T> logits = forward<T>(model, batch, flops);
  std::vector<std::vector<double>> probs;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    probs.push_back(softmax<T>(logits.row(r)));
  }
  return ensemble(probs, cfg.rule);
}

template <typename T>
[[nodiscard]] double tta_accuracy(const Model<T>& model, const Frontend& fe,
                                  std::span<const RawSample> data,
                                  const TtaConfiguration& cfg, int threads = 1) {
  if (data.empty()) return 0.0;
  std::vector<std::uint8_t> ok(data.size(), 0);
  parallel_for(data.size(), threads, [&](std::size_t i) {
    ok[i] = tta_predict(model, fe, data[i], cfg).label == data[i].label;
  });
  return static_cast<double>(std::count(ok.begin(), ok.end(), 1)) /
         static_cast<double>(data.size());
}

struct TtaSelection {
  std::size_t index = 0;
  std::vector<double> accuracies;
};

// Best validation accuracy; ties go to the smaller maximum token count,
// then to the earlier configuration.
[[nodiscard]] inline TtaSelection select_from_accuracies(
    std::span<const TtaConfiguration> configs, std::vector<double> accuracies) {
  if (configs.empty()) throw ConfigError("no configurations to select from");
  if (accuracies.size() != configs.size()) throw ConfigError("accuracy count mismatch");
  TtaSelection sel;
  for (std::size_t i = 1; i < configs.size(); ++i) {
    const auto& best = configs[sel.index];
    if (accuracies[i] > accuracies[sel.index] ||
        (accuracies[i] == accuracies[sel.index] && configs[i].max_tokens() < best.max_tokens())) {
      sel.index = i;
    }
  }
  sel.accuracies = std::move(accuracies);
  return sel;
}

template <typename T>
[[nodiscard]] TtaSelection select_configuration(const Model<T>& model, const Frontend& fe,
                                                std::span<const RawSample> val,
                                                std::span<const TtaConfiguration> configs,
                                                int threads = 1) {
  if (val.empty()) throw ConfigError("validation set is empty");
  if (configs.empty()) throw ConfigError("no configurations to select from");
  std::vector<double> acc;
  acc.reserve(configs.size());
  for (const auto& c : configs) acc.push_back(tta_accuracy(model, fe, val, c, threads));
  return select_from_accuracies(configs, std::move(acc));
}

inline void write_selection_csv(std::ostream& out, std::span<const TtaConfiguration> configs,
                                const TtaSelection& sel) {
  out << "config_id,val_accuracy,max_tokens,views,selected\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out << i << ',' << sel.accuracies[i] << ',' << configs[i].max_tokens() << ','
        << configs[i].views.size() << ',' << (i == sel.index ? 1 : 0) << '\n';
  }
}

}  // namespace icpc
