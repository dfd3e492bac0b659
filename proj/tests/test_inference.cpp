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

#include <gtest/gtest.h>

#include <limits>
#include <optional>
#include <sstream>

#include "icpc/data_io.hpp"
#include "icpc/inference.hpp"
#include "icpc/model/train.hpp"

namespace icpc {
namespace {

Prediction confident(int label, double confidence) {
  return Prediction{label, confidence, {}};
}

TEST(RunLadder, StopsAtFirstConfidentLevel) {
  const std::vector<double> conf{0.5, 0.8, 0.9};
  const std::vector<std::uint64_t> cost{10, 20, 40};
  auto at = [&](std::size_t k) { return LevelOutcome{confident(static_cast<int>(k), conf[k]), cost[k]}; };
  const LadderResult r = run_ladder(3, 0.75, at);
  EXPECT_EQ(r.exit_level, 1);
  EXPECT_EQ(r.label, 1);
  EXPECT_EQ(r.cumulative_cost, 30u);
  EXPECT_EQ(r.confidences, (std::vector<double>{0.5, 0.8}));

  const LadderResult always = run_ladder(3, 0.0, at);
  EXPECT_EQ(always.exit_level, 0);
  EXPECT_EQ(always.cumulative_cost, 10u);

  const LadderResult never = run_ladder(3, 1.01, at);
  EXPECT_EQ(never.exit_level, 2);
  EXPECT_EQ(never.label, 2);
  EXPECT_EQ(never.cumulative_cost, 70u);

  EXPECT_EQ(run_ladder(3, 0.9, at).exit_level, 2);  // confidence equal to the threshold exits
  EXPECT_THROW((void)run_ladder(0, 0.5, at), ConfigError);
}

AugmentationPolicy square_policy(std::vector<int> sizes) {
  AugmentationPolicy p;
  p.modality = Modality::image;
  p.valid_heights = sizes;
  p.valid_widths = sizes;
  return p;
}

ModelConfig small_image_config() {
  ModelConfig c;
  c.modality = Modality::image;
  c.embed_dim = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.mlp_ratio = 2;
  c.patch_size = 8;
  c.max_grid = {1, 4, 4};
  c.num_classes = 4;
  c.dropout = 0.0;
  return c;
}

TEST(Ladders, DefaultLevelsPerModality) {
  const auto img = default_ladder_levels(square_policy({16, 24, 32}), 8);
  ASSERT_EQ(img.size(), 3u);
  EXPECT_EQ(img[0].height, 16);
  EXPECT_EQ(img[1].height, 24);
  EXPECT_EQ(img[2].height, 32);

  AugmentationPolicy vid = square_policy({16, 32});
  vid.modality = Modality::video;
  vid.valid_frame_counts = {4, 8};
  const auto v = default_ladder_levels(vid, 8);
  EXPECT_EQ(v[0].frames, 4);
  EXPECT_EQ(v[1].frames, 6);
  EXPECT_EQ(v[1].height, 24);
  EXPECT_EQ(v[2].frames, 8);

  AugmentationPolicy aud;
  aud.modality = Modality::audio;
  aud.valid_sampling_rates = {8000, 16000};
  aud.valid_filterbank_counts = {64, 128};
  const auto a = default_ladder_levels(aud, 16);
  EXPECT_EQ(a[0].sample_rate, 10000);
  EXPECT_EQ(a[0].n_banks, 75);
  EXPECT_EQ(a[1].sample_rate, 14000);
  EXPECT_EQ(a[1].n_banks, 104);
  EXPECT_EQ(a[2].n_banks, 128);

  AugmentationPolicy txt;
  txt.modality = Modality::text;
  EXPECT_THROW((void)default_ladder_levels(txt, 1), ConfigError);
}

TEST(Ladders, MakeLadderValidatesAndPrices) {
  const auto policy = square_policy({16, 24, 32});
  const Frontend fe(small_image_config(), policy);
  const auto ladder = make_ladder(fe, default_ladder_levels(policy, 8), 0.8);
  ASSERT_EQ(ladder.costs.size(), 3u);
  EXPECT_EQ(ladder.costs[0], forward_flops(fe.config(), 4));
  EXPECT_EQ(ladder.costs[1], forward_flops(fe.config(), 9));
  EXPECT_EQ(ladder.costs[2], forward_flops(fe.config(), 16));

  CompressionLevel a, b;
  a.height = a.width = 24;
  b.height = b.width = 16;
  EXPECT_THROW((void)make_ladder(fe, {a, b}, 0.8), ConfigError);
  EXPECT_THROW((void)make_ladder(fe, {b, a}, 0.8), ConfigError);
  EXPECT_THROW((void)make_ladder(fe, {}, 0.8), ConfigError);
}

TEST(VariableEffort, CostAccountingMatchesLevelCosts) {
  const auto policy = square_policy({16, 24, 32});
  const ModelConfig cfg = small_image_config();
  const Frontend fe(cfg, policy);
  Model<float> model(cfg);
  model.initialize(5);
  const Dataset d = data::gen_shapes_images(40, 4, 32, 3);
  for (double th : {0.0, 0.3, 0.4, 1.01}) {
    const auto ladder = make_ladder(fe, default_ladder_levels(policy, 8), th);
    const auto log = run_variable_effort(model, fe, std::span<const RawSample>(d.samples), ladder);
    for (const auto& r : log) {
      std::uint64_t expect = 0;
      for (int k = 0; k <= r.exit_level; ++k) expect += ladder.costs[static_cast<std::size_t>(k)];
      EXPECT_EQ(r.cumulative_cost, expect);
      EXPECT_EQ(r.full_cost, ladder.costs.back());
      EXPECT_EQ(r.confidences.size(), static_cast<std::size_t>(r.exit_level) + 1);
      for (int k = 0; k < r.exit_level; ++k) EXPECT_LT(r.confidences[static_cast<std::size_t>(k)], th);
      const auto direct = predict_with_confidence(
          model, fe.prepare(d.samples[r.id], ladder.levels[static_cast<std::size_t>(r.exit_level)]));
      EXPECT_EQ(r.prediction, direct.label);
    }
    if (th == 0.0) {
      for (const auto& r : log) EXPECT_EQ(r.exit_level, 0);
    }
    if (th > 1.0) {
      for (const auto& r : log) EXPECT_EQ(r.exit_level, 2);
    }
  }
}

// Independent accuracy of the ladder rule on a prediction table.
double oracle_ladder_accuracy(const LevelTable& t, double th) {
  int correct = 0;
  for (std::size_t i = 0; i < t.labels.size(); ++i) {
    const auto& row = t.predictions[i];
    std::size_t k = 0;
    while (k + 1 < row.size() && row[k].confidence < th) ++k;
    correct += row[k].label == t.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(t.labels.size());
}

TEST(Calibration, PicksBestThresholdWithSmallestTie) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.25, 1.0);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    LevelTable t;
    for (int i = 0; i < 60; ++i) {
      t.labels.push_back(lab(rng));
      std::vector<Prediction> row;
      for (int k = 0; k < 3; ++k) row.push_back(confident(lab(rng), u(rng)));
      t.predictions.push_back(row);
      t.costs.push_back({1, 2, 4});
    }
    const auto grid = default_threshold_grid();
    const Calibration c = calibrate_from_table(t, grid);
    double best = -1.0, best_th = 0.0;
    for (double th : grid) {
      const double acc = oracle_ladder_accuracy(t, th);
      if (acc > best) {
        best = acc;
        best_th = th;
      }
    }
    EXPECT_EQ(c.threshold, best_th);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      EXPECT_EQ(c.accuracies[j], oracle_ladder_accuracy(t, grid[j]));
    }
  }

  // every candidate ties: the smallest one wins regardless of input order
  LevelTable flat;
  flat.labels = {0};
  flat.predictions = {{confident(0, 0.6), confident(0, 0.7)}};
  flat.costs = {{1, 2}};
  EXPECT_EQ(calibrate_from_table(flat, {0.9, 0.5, 0.7}).threshold, 0.5);
  EXPECT_THROW((void)calibrate_from_table(flat, {}), ConfigError);
}

struct TextFixture {
  Dataset data = data::gen_template_text(120, 4, 6, 21);
  StopwordSet stopwords = default_stopwords();
  Frontend fe;
  Model<float> model;

  TextFixture() {
    const Vocabulary vocab = Vocabulary::from_dataset(data);
    ModelConfig c;
    c.modality = Modality::text;
    c.vocab_size = vocab.size();
    c.embed_dim = 16;
    c.n_layers = 1;
    c.n_heads = 2;
    c.mlp_ratio = 2;
    c.max_grid = {1, 1, data::kMaxSentence};
    c.num_classes = 4;
    c.dropout = 0.0;
    AugmentationPolicy p;
    p.modality = Modality::text;
    p.stopwords = stopwords;
    fe = Frontend(c, p, vocab);
    TrainState<float> st(Model<float>(c), 3);
    st.model.initialize(3);
    TrainOptions o;
    o.epochs = 2;
    o.batch_size = 16;
    o.seed = 3;
    (void)icpc::train(st, fe, std::span<const RawSample>(data.samples), o);
    model = st.model;
  }
};

// Rerun oracle: prune one word by hand and count correct predictions.
double oracle_accuracy_without(const TextFixture& f, const std::optional<std::string>& word) {
  int correct = 0;
  for (const auto& s : f.data.samples) {
    TokenList kept;
    for (const auto& t : std::get<TokenList>(s.payload)) {
      if (!word || to_lower(t) != *word) kept.push_back(t);
    }
    if (kept.empty()) kept = std::get<TokenList>(s.payload);
    const auto p = predict_with_confidence(f.model, f.fe.from_tokens(kept, s.label));
    correct += p.label == s.label;
  }
  return correct / static_cast<double>(f.data.size());
}

TEST(WordImportance, DeltasMatchRerunOracle) {
  const TextFixture f;
  const auto wih = build_wih(f.model, f.fe, std::span<const RawSample>(f.data.samples), f.stopwords);
  const double base = oracle_accuracy_without(f, std::nullopt);
  EXPECT_EQ(wih.baseline_accuracy, base);
  ASSERT_EQ(wih.entries.size(), f.stopwords.size());
  for (std::size_t i = 0; i < wih.entries.size(); ++i) {
    const auto& e = wih.entries[i];
    EXPECT_EQ(e.accuracy_delta, base - oracle_accuracy_without(f, e.word)) << e.word;
    if (i > 0) EXPECT_LE(wih.entries[i - 1].accuracy_delta, e.accuracy_delta);
  }
  // a word no sample contains costs nothing
  StopwordSet absent{"zzzz"};
  const auto w2 = build_wih(f.model, f.fe, std::span<const RawSample>(f.data.samples), absent);
  EXPECT_EQ(w2.entries.at(0).accuracy_delta, 0.0);

  const auto back = wih_from_json(wih_to_json(wih));
  EXPECT_EQ(back.baseline_accuracy, wih.baseline_accuracy);
  ASSERT_EQ(back.entries.size(), wih.entries.size());
  for (std::size_t i = 0; i < back.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].word, wih.entries[i].word);
    EXPECT_EQ(back.entries[i].accuracy_delta, wih.entries[i].accuracy_delta);
  }
  EXPECT_THROW((void)wih_from_json(nlohmann::json{{"entries", 3}}), FormatError);
}

TEST(WordImportance, TextLadderTakesPrefixUnderCap) {
  WordImportanceHierarchy wih;
  wih.entries = {{"the", -0.02}, {"a", 0.0}, {"of", 0.005}, {"and", 0.01}, {"to", 0.03}, {"in", 0.2}};
  const StopwordSet stop{"the", "a", "of", "and", "to", "in"};
  auto medium = [&](double cap) { return text_ladder_from_wih(wih, stop, cap)[1].pruned_words; };
  EXPECT_EQ(medium(0.0), (std::vector<std::string>{"the", "a"}));
  EXPECT_EQ(medium(0.01), (std::vector<std::string>{"the", "a", "of", "and"}));
  EXPECT_EQ(medium(std::numeric_limits<double>::infinity()),
            (std::vector<std::string>{"the", "a", "of", "and", "to", "in"}));
  const auto ladder = text_ladder_from_wih(wih, stop, 0.01);
  ASSERT_EQ(ladder.size(), 3u);
  EXPECT_EQ(ladder[0].pruned_words.size(), stop.size());
  EXPECT_TRUE(ladder[2].pruned_words.empty());
}

TEST(EarlyExitStats, AggregatesRunLog) {
  const std::vector<RunRecord> log{
      {0, 1, 1, 0, {0.9}, 10, 40},
      {1, 2, 0, 2, {0.1, 0.2, 0.3}, 70, 40},
      {2, 0, 0, 0, {0.95}, 10, 40},
      {3, 3, 3, 1, {0.1, 0.9}, 30, 40},
  };
  const auto s = report_early_exit_stats(log, 3);
  EXPECT_EQ(s.exit_fractions, (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_DOUBLE_EQ(s.speedup, 160.0 / 120.0);
  EXPECT_DOUBLE_EQ(s.mean_cost, 30.0);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.75);
  EXPECT_THROW((void)report_early_exit_stats(log, 2), ConfigError);

  std::ostringstream out;
  write_run_log(out, log);
  std::istringstream lines(out.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("id").get<std::size_t>(), log[static_cast<std::size_t>(n)].id);
    EXPECT_EQ(j.at("cumulative_cost").get<std::uint64_t>(), log[static_cast<std::size_t>(n)].cumulative_cost);
    ++n;
  }
  EXPECT_EQ(n, 4);
}

}  // namespace
}  // namespace icpc
