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

// Command-line front end: icpc gen|train|infer|wih|tta|bench.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icpc/icpc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace icpc::app {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> precision;
  std::optional<std::string> out;
};

RunConfig resolve(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig() : RunConfig::from_file(o.config_path);
  if (o.seed) c.set("seed", *o.seed);
  if (o.threads) c.set("threads", *o.threads);
  if (o.precision) c.set("precision", *o.precision);
  if (o.out) c.set("out", *o.out);
  (void)c.precision();  // validates
  return c;
}

std::ofstream open_text(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw Error("cannot open '" + p.string() + "' for writing");
  return out;
}

void write_json(const fs::path& p, const RunConfig& c, json body) {
  body["provenance"] = c.provenance();
  open_text(p) << body.dump(2) << '\n';
}

// CSV files start with one comment line holding the provenance record.
std::ofstream open_csv(const fs::path& p, const RunConfig& c) {
  auto out = open_text(p);
  out << "# " << c.provenance().dump() << '\n';
  return out;
}

Dataset generate(const RunConfig& c, int n, std::uint64_t seed) {
  const int classes = c.get<int>("data.num_classes");
  switch (c.modality()) {
    case Modality::image:
      return data::gen_shapes_images(n, classes, c.get<int>("data.resolution"), seed);
    case Modality::video:
      return data::gen_moving_shapes_video(n, classes, c.get<int>("data.frames"),
                                           c.get<int>("data.resolution"), seed);
    case Modality::audio:
      return data::gen_tones_audio(n, classes, c.get<double>("data.duration"),
                                   c.get<int>("data.native_rate"), seed,
                                   c.get<double>("data.noise"));
    case Modality::text:
      return data::gen_template_text(n, classes, c.get<int>("data.keywords_per_class"), seed);
  }
  throw ConfigError("unknown modality");
}

// Train and test sets come from independent seeds derived from the run seed.
std::uint64_t train_data_seed(const RunConfig& c) { return 2 * c.seed() + 1; }
std::uint64_t test_data_seed(const RunConfig& c) { return 2 * c.seed() + 2; }

Dataset load_checked(const fs::path& p, const RunConfig& c) {
  Dataset d = data::load_dataset(p);
  if (d.modality != c.modality()) {
    throw ConfigError("dataset '" + p.string() + "' holds " + std::string(to_string(d.modality)) +
                      " samples, config expects " + std::string(to_string(c.modality())));
  }
  if (d.num_classes != c.get<int>("data.num_classes")) {
    throw ConfigError("dataset class count differs from data.num_classes");
  }
  return d;
}

// The training file minus its class-balanced validation split.
std::pair<Dataset, Dataset> train_val(const RunConfig& c) {
  return data::split_validation(load_checked(c.train_path(), c),
                                c.get<double>("data.val_fraction"), c.seed());
}

Frontend make_frontend(const RunConfig& c, const ModelConfig& mc, Vocabulary vocab,
                       PositionScheme scheme) {
  Frontend fe(mc, c.policy(), std::move(vocab), scheme);
  if (c.modality() == Modality::audio) fe.set_audio_length(c.audio_length());
  return fe;
}

struct Loaded {
  Checkpoint ck;
  Frontend fe;
};

Loaded load_model(const RunConfig& c) {
  Checkpoint ck = load_checkpoint(c.checkpoint_path());
  Vocabulary vocab;
  if (ck.meta.contains("vocabulary")) {
    vocab = Vocabulary::from_words(ck.meta["vocabulary"].get<std::vector<std::string>>());
  }
  const ModelConfig expect = c.model_config(vocab.size());
  if (!(expect == ck.state.model.config)) {
    throw ConfigError("checkpoint model configuration differs from the run configuration");
  }
  Frontend fe = make_frontend(c, ck.state.model.config, std::move(vocab), c.scheme());
  return {std::move(ck), std::move(fe)};
}

// ------------------------------------------------------------------ gen

void cmd_gen(const RunConfig& c) {
  const json meta = c.provenance();
  const Dataset train = generate(c, c.get<int>("data.train_size"), train_data_seed(c));
  const Dataset test = generate(c, c.get<int>("data.test_size"), test_data_seed(c));
  data::save_dataset(c.train_path(), train, meta);
  data::save_dataset(c.test_path(), test, meta);
  write_json(c.out_dir() / "gen_report.json", c,
             {{"train", {{"path", c.train_path().string()}, {"samples", train.size()},
                         {"class_counts", data::class_counts(train)}}},
              {"test", {{"path", c.test_path().string()}, {"samples", test.size()},
                        {"class_counts", data::class_counts(test)}}}});
  std::cout << "wrote " << train.size() << " training and " << test.size()
            << " test samples to " << c.out_dir().string() << '\n';
}

// ---------------------------------------------------------------- train

template <typename T>
void train_with(const RunConfig& c) {
  auto [train_set, val] = train_val(c);
  Vocabulary vocab;
  if (c.modality() == Modality::text) vocab = Vocabulary::from_dataset(train_set);
  const ModelConfig mc = c.model_config(vocab.size());
  const Frontend fe = make_frontend(c, mc, vocab, c.scheme());
  TrainState<T> state(Model<T>(mc), c.seed());
  state.model.initialize(c.seed());
  TrainOptions opts = c.train_options();
  const std::size_t steps_per_epoch =
      (train_set.size() + static_cast<std::size_t>(opts.batch_size) - 1) /
      static_cast<std::size_t>(opts.batch_size);
  opts.adam.total_steps = static_cast<int>(steps_per_epoch) * opts.epochs;
  const TrainReport report = icpc::train(state, fe, train_set.samples, opts);

  const Model<float> narrowed = [&] {
    if constexpr (std::is_same_v<T, float>) {
      return state.model;
    } else {
      Model<float> m(state.model.config);
      auto dst = m.params.flat();
      const auto src = state.model.params.flat();
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]);
      return m;
    }
  }();
  json meta = c.provenance();
  meta["vocabulary"] = vocab.words();
  save_checkpoint(c.checkpoint_path(), state, meta);

  json body = report_to_json(report);
  body["validation_accuracy"] =
      evaluate(narrowed, fe, val.samples, {}, c.threads()).accuracy();
  if (fs::exists(c.test_path())) {
    const Dataset test = load_checked(c.test_path(), c);
    body["test_accuracy"] = evaluate(narrowed, fe, test.samples, {}, c.threads()).accuracy();
  }
  body["mean_tokens_per_step"] = report.mean_tokens_per_step();
  body["train_samples"] = train_set.size();
  body["validation_samples"] = val.size();
  write_json(c.out_dir() / "train_report.json", c, body);
  write_json(c.out_dir() / "train_timing.json", c, timing_to_json(report));
  const auto& last = report.epochs.back();
  std::cout << "trained " << opts.epochs << " epochs, final loss " << last.mean_loss
            << ", train accuracy " << last.train_accuracy << '\n';
}

void cmd_train(const RunConfig& c) {
  if (c.get<int>("train.epochs") < 1) throw ConfigError("train.epochs must be >= 1");
  if (c.precision() == 64) {
    train_with<double>(c);
  } else {
    train_with<float>(c);
  }
}

// ---------------------------------------------------------------- infer

std::vector<CompressionLevel> ladder_levels(const RunConfig& c, const Frontend& fe) {
  if (c.modality() != Modality::text) {
    return default_ladder_levels(fe.policy(), fe.config().patch_size);
  }
  std::ifstream in(c.wih_path());
  if (!in) {
    throw FileNotFound("word importance file not found: '" + c.wih_path().string() +
                       "' (run 'icpc wih' first)");
  }
  const auto wih = wih_from_json(json::parse(in).at("wih"));
  return text_ladder_from_wih(wih, fe.policy().stopwords, c.get<double>("ladder.delta_cap"));
}

template <typename T>
void infer_with(const RunConfig& c, const Model<T>& model, const Frontend& fe) {
  const auto [train, val] = train_val(c);
  const Dataset test = load_checked(c.test_path(), c);
  InferenceLadder ladder = make_ladder(fe, ladder_levels(c, fe), 1.0);
  json calibration = nullptr;
  const double fixed = c.get<double>("ladder.threshold");
  if (fixed >= 0) {
    ladder.threshold = fixed;
  } else {
    const Calibration cal = calibrate_threshold(
        model, fe, val.samples, ladder, c.get<std::vector<double>>("ladder.thresholds"),
        c.threads());
    ladder.threshold = cal.threshold;
    calibration = {{"candidates", cal.candidates}, {"accuracies", cal.accuracies}};
  }
  const auto log = run_variable_effort(model, fe, test.samples, ladder, c.threads());
  const EarlyExitStats stats = report_early_exit_stats(log, ladder.size());
  const double full_acc =
      evaluate(model, fe, test.samples, ladder.levels.back(), c.threads()).accuracy();

  {
    auto out = open_text(c.out_dir() / "run_log.ndjson");
    out << json{{"provenance", c.provenance()}, {"threshold", ladder.threshold}}.dump() << '\n';
    write_run_log(out, log);
  }
  {
    auto out = open_csv(c.out_dir() / "infer_stats.csv", c);
    write_stats_csv(out, stats);
  }
  json levels = json::array();
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    levels.push_back({{"level", level_to_json(ladder.levels[k])}, {"cost", ladder.costs[k]}});
  }
  write_json(c.out_dir() / "infer_report.json", c,
             {{"threshold", ladder.threshold},
              {"calibration", calibration},
              {"ladder", levels},
              {"exit_fractions", stats.exit_fractions},
              {"accuracy", stats.accuracy},
              {"full_compute_accuracy", full_acc},
              {"mean_cost", stats.mean_cost},
              {"mean_full_cost", stats.mean_full_cost},
              {"speedup", stats.speedup}});
  std::cout << "threshold " << ladder.threshold << ", accuracy " << stats.accuracy
            << " (full " << full_acc << "), speedup " << stats.speedup << "x\n";
}

template <typename Fn>
void with_precision(const RunConfig& c, Fn&& fn) {
  Loaded m = load_model(c);
  if (c.precision() == 64) {
    fn(convert_model<double>(m.ck.state.model), m.fe);
  } else {
    fn(m.ck.state.model, m.fe);
  }
}

void cmd_infer(const RunConfig& c) {
  with_precision(c, [&](const auto& model, const Frontend& fe) { infer_with(c, model, fe); });
}

// ------------------------------------------------------------------ wih

void cmd_wih(const RunConfig& c) {
  if (c.modality() != Modality::text) throw ConfigError("wih needs a text configuration");
  with_precision(c, [&](const auto& model, const Frontend& fe) {
    const auto [train, val] = train_val(c);
    const auto wih = build_wih(model, fe, val.samples, fe.policy().stopwords, c.threads());
    write_json(c.wih_path(), c, {{"wih", wih_to_json(wih)}});
    std::cout << "ranked " << wih.entries.size() << " stopwords, baseline accuracy "
              << wih.baseline_accuracy << '\n';
  });
}

// ------------------------------------------------------------------ tta

template <typename T>
void tta_with(const RunConfig& c, const Model<T>& model, const Frontend& fe) {
  const auto [train, val] = train_val(c);
  const Dataset test = load_checked(c.test_path(), c);
  const double tol = c.get<double>("tta.tolerance");
  const int max_batch = c.get<int>("tta.max_batch");
  const std::uint64_t full_flops =
      forward_flops(model.config, fe.tokens_for(fe.policy().max_level()));
  const AnalyticCostModel analytic{c.get<double>("tta.parallel_width") *
                                   static_cast<double>(full_flops)};
  std::string profile_kind = c.get<std::string>("tta.profile");
  LatencyProfile profile;
  if (profile_kind == "wall") {
    try {
      const RawSample& probe = val.samples.front();
      profile = build_profile(
          fe,
          [&](const CompressionLevel& size, int) {
            const EncodedSample<T> e = embed(model, fe.prepare(probe, size));
            return wall_clock_latency([&model, e](int b) {
              const std::vector<EncodedSample<T>> batch(static_cast<std::size_t>(b), e);
              (void)forward<T>(model, batch);
            });
          },
          tol, max_batch);
    } catch (const UnstableMeasurement& err) {
      std::cerr << "icpc tta: " << err.what() << "; using the analytic cost model\n";
      profile_kind = "analytic (fallback)";
      profile = analytic_profile(fe, analytic, tol, max_batch);
    }
  } else if (profile_kind == "analytic") {
    profile = analytic_profile(fe, analytic, tol, max_batch);
  } else {
    throw ConfigError("tta.profile must be 'analytic' or 'wall'");
  }

  Rng rng = derived_rng(c.seed(), 3);
  const auto configs = generate_configurations(
      c.get<int>("tta.k"), profile, rng, parse_ensemble_rule(c.get<std::string>("tta.rule")));
  if (configs.empty()) throw ConfigError("no valid TTA configuration could be drawn");
  const TtaSelection sel = select_configuration(model, fe, val.samples, configs, c.threads());
  const double tta_acc = tta_accuracy(model, fe, test.samples, configs[sel.index], c.threads());
  const double single_acc = evaluate(model, fe, test.samples, {}, c.threads()).accuracy();

  {
    auto out = open_csv(c.out_dir() / "tta_profile.csv", c);
    write_profile_csv(out, profile);
  }
  {
    auto out = open_csv(c.out_dir() / "tta_selection.csv", c);
    write_selection_csv(out, configs, sel);
  }
  write_json(c.out_dir() / "tta_configurations.json", c,
             {{"configurations", configurations_to_json(configs)}});
  json ideal = json::array();
  for (std::size_t i = 0; i < profile.sizes.size(); ++i) {
    ideal.push_back({{"size", level_to_json(profile.sizes[i])},
                     {"tokens", profile.tokens[i]},
                     {"ideal_batch", profile.ideal_batch[i]}});
  }
  write_json(c.out_dir() / "tta_report.json", c,
             {{"profile", profile_kind},
              {"ideal_batch", ideal},
              {"configurations", configs.size()},
              {"selected", sel.index},
              {"selected_val_accuracy", sel.accuracies[sel.index]},
              {"test_accuracy", tta_acc},
              {"single_full_size_test_accuracy", single_acc}});
  std::cout << "selected configuration " << sel.index << " of " << configs.size()
            << ", test accuracy " << tta_acc << " (single view " << single_acc << ")\n";
}

void cmd_tta(const RunConfig& c) {
  if (c.modality() == Modality::text) {
    throw ConfigError("test-time augmentation is not defined for text");
  }
  with_precision(c, [&](const auto& model, const Frontend& fe) { tta_with(c, model, fe); });
}

// ---------------------------------------------------------------- bench

std::vector<CompressionLevel> bench_levels(const AugmentationPolicy& p) {
  std::vector<CompressionLevel> out;
  if (p.modality == Modality::text) {
    CompressionLevel heavy;
    heavy.pruned_words.assign(p.stopwords.begin(), p.stopwords.end());
    return {heavy, CompressionLevel{}};
  }
  for (const auto& s : enumerate_sizes(p)) {
    if (p.modality != Modality::audio && s.height != s.width) continue;
    out.push_back(s);
  }
  return out;
}

template <typename T>
void bench_with(const RunConfig& c, const Model<T>& model, Frontend fe) {
  Dataset test = load_checked(c.test_path(), c);
  const int limit = c.get<int>("bench.samples");
  if (limit > 0 && static_cast<std::size_t>(limit) < test.size()) {
    test.samples.resize(static_cast<std::size_t>(limit));
  }
  auto out = open_csv(c.out_dir() / "bench.csv", c);
  out << "scheme,height,width,frames,sample_rate,n_banks,pruned_words,tokens,flops,"
         "attention_flops,accuracy,wall_seconds\n";
  for (const auto scheme : {PositionScheme::consistent, PositionScheme::first_n}) {
    fe.set_scheme(scheme);
    for (const auto& level : bench_levels(fe.policy())) {
      const auto start = std::chrono::steady_clock::now();
      const EvalResult r = evaluate(model, fe, test.samples, level, c.threads());
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      double tokens = 0.0;
      for (const auto& s : test.samples) tokens += fe.prepare(s, level).length();
      tokens /= static_cast<double>(std::max<std::size_t>(test.size(), 1));
      const int n = static_cast<int>(std::lround(tokens));
      out << to_string(scheme) << ',' << level.height << ',' << level.width << ','
          << level.frames << ',' << level.sample_rate << ',' << level.n_banks << ','
          << level.pruned_words.size() << ',' << tokens << ','
          << forward_flops(model.config, n) << ',' << attention_flops(model.config, n) << ','
          << r.accuracy() << ',' << secs << '\n';
    }
  }
  std::cout << "wrote " << (c.out_dir() / "bench.csv").string() << '\n';
}

void cmd_bench(const RunConfig& c) {
  with_precision(c, [&](const auto& model, const Frontend& fe) { bench_with(c, model, fe); });
}

}  // namespace icpc::app

int main(int argc, char** argv) {
  using namespace icpc::app;
  CLI::App app{"Input compression with positional consistency: training and inference tool"};
  app.set_version_flag("--version", icpc::version_string());
  app.require_subcommand(1);
  Options opts;
  std::string stage = "icpc";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gen", "Generate synthetic train and test datasets"},
      {"train", "Train a model, writing a checkpoint and a training report"},
      {"infer", "Variable-effort inference with a calibrated confidence threshold"},
      {"wih", "Rank stopwords by the accuracy lost when pruning them (text)"},
      {"tta", "Hardware-aware test-time augmentation: profile, generate, select"},
      {"bench", "Accuracy, tokens and FLOPs per compression level for both position schemes"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Seed (overrides the config)");
    sub->add_option("--threads", opts.threads, "Worker cap for evaluation")->check(CLI::PositiveNumber);
    sub->add_option("--precision", opts.precision, "32 or 64")->check(CLI::IsMember({32, 64}));
    sub->add_option("--out", opts.out, "Output directory");
    sub->callback([&, name = name] { stage = name; });
  }
  CLI11_PARSE(app, argc, argv);
  try {
    const icpc::RunConfig cfg = resolve(opts);
    if (stage == "gen") cmd_gen(cfg);
    else if (stage == "train") cmd_train(cfg);
    else if (stage == "infer") cmd_infer(cfg);
    else if (stage == "wih") cmd_wih(cfg);
    else if (stage == "tta") cmd_tta(cfg);
    else if (stage == "bench") cmd_bench(cfg);
  } catch (const std::exception& e) {
    std::cerr << "icpc " << stage << ": error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
