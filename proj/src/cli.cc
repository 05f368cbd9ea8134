// Copyright 2026 The IterX-cpp Authors.
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

#include "iterx/cli.h"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "iterx/corpus_io.h"
#include "iterx/engine.h"
#include "iterx/error.h"
#include "iterx/granular.h"
#include "iterx/learn.h"
#include "iterx/metrics.h"
#include "iterx/synth.h"

namespace iterx::cli {
namespace {

// Reads --config files as a flat JSON object of option values for the
// subcommand being run; nested objects address subcommands explicitly.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App *root) : root_(root) {}

  std::string to_config(const CLI::App *app, bool default_also, bool,
                        std::string) const override {
    nlohmann::json out = nlohmann::json::object();
    for (const CLI::Option *opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        const auto &results = opt->results();
        out[name] = results.size() == 1 ? nlohmann::json(results[0]) : nlohmann::json(results);
      } else if (default_also && !opt->get_default_str().empty()) {
        out[name] = opt->get_default_str();
      }
    }
    return out.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream &input) const override {
    nlohmann::json json;
    try {
      input >> json;
    } catch (const nlohmann::json::exception &e) {
      throw CLI::ConversionError("--config", std::string("malformed JSON: ") + e.what());
    }
    if (!json.is_object()) throw CLI::ConversionError("--config", "expected a JSON object");
    std::vector<std::string> parents;
    const auto active = root_->get_subcommands();
    if (active.size() == 1) parents.push_back(active[0]->get_name());
    std::vector<CLI::ConfigItem> items;
    collect(json, parents, items);
    return items;
  }

 private:
  const CLI::App *root_;

  static std::string scalar(const nlohmann::json &value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    return value.dump();
  }

  static void collect(const nlohmann::json &json, const std::vector<std::string> &parents,
                      std::vector<CLI::ConfigItem> &items) {
    for (const auto &[key, value] : json.items()) {
      if (value.is_object()) {
        std::vector<std::string> deeper = parents;
        deeper.push_back(key);
        collect(value, deeper, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto &v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct ModelOptions {
  ModelConfig config;

  void add(CLI::App *app) {
    app->add_option("--dim", config.dim, "Hidden size")->check(CLI::PositiveNumber);
    app->add_option("--layers", config.layers, "Transformer layers of the joint head")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--heads", config.heads, "Attention heads")->check(CLI::PositiveNumber);
    app->add_option("--ff-multiplier", config.ff_multiplier, "Feed-forward width multiplier")
        ->check(CLI::PositiveNumber);
    app->add_option("--model-seed", config.seed, "Parameter initialization seed");
    app->add_option("--embed-seed", config.embed_seed, "Token embedding seed");
  }
};

struct TrainOptions {
  TrainConfig config;
  std::string beta = "xent";
  std::string head = "joint";

  void add(CLI::App *app, bool with_alpha_beta) {
    if (with_alpha_beta) {
      app->add_option("--alpha", config.alpha, "Agent roll-out rate")
          ->check(CLI::Range(0.0, 1.0));
      app->add_option("--beta", beta,
                      "Expert temperature: fixed, argmax, xent, uniform or a number");
    }
    app->add_option("--gamma", config.gamma, "Discount factor in (0, 1]");
    app->add_option("--lr", config.learning_rate, "Learning rate")
        ->check(CLI::PositiveNumber);
    app->add_option("--epochs", config.epochs, "Training epochs")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--seed", config.seed, "Training seed");
    app->add_option("--head", head, "Policy head")
        ->check(CLI::IsMember({"independent", "joint"}));
    app->add_option("--max-iter", config.max_iter, "Maximum templates per type")
        ->check(CLI::PositiveNumber);
  }

  TrainConfig resolve() const {
    TrainConfig out = config;
    out.beta = ExpertBeta::parse(beta);
    out.head = *parse_policy_head(head);
    out.validate();
    return out;
  }
};

std::string resolve_ontology(const std::string &flag) {
  if (!flag.empty()) return flag;
  if (const char *env = std::getenv(kOntologyEnv); env != nullptr && *env != '\0') return env;
  throw Error(ErrorCode::kInvalidArgument,
              std::string("no ontology given; pass --ontology or set ") + kOntologyEnv);
}

void emit(const std::string &text, const std::string &path, std::ostream &out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

struct ScoreArgs {
  std::string gold, pred, ontology, variant = "rme", phi = "phi3", format = "pretty", out;
};

void cmd_score(const ScoreArgs &a, std::ostream &out) {
  const Corpus corpus = load_corpus(a.gold, resolve_ontology(a.ontology));
  const TemplateMap predictions = load_predictions(a.pred, corpus);
  std::string text;
  if (a.variant == "granular") {
    const GranularReport report = granular_corpus(corpus, predictions);
    text = a.format == "json"  ? to_json(report).dump(2) + "\n"
           : a.format == "csv" ? to_csv(report)
                               : to_pretty(report);
  } else {
    const ScoreReport report =
        score_corpus(corpus, predictions, *parse_variant(a.variant), *parse_phi(a.phi));
    text = a.format == "json"  ? to_json(report).dump(2) + "\n"
           : a.format == "csv" ? to_csv(report)
                               : to_pretty(report);
  }
  emit(text, a.out, out);
}

struct TrainArgs {
  std::string corpus, ontology, out, loss_trace;
  TrainOptions train;
  ModelOptions model;
};

void cmd_train(const TrainArgs &a, std::ostream &out) {
  const TrainConfig config = a.train.resolve();
  const Corpus corpus = load_corpus(a.corpus, resolve_ontology(a.ontology));
  Model model(corpus.ontology, a.model.config);
  const TrainResult result = train(model, corpus, config);
  save_checkpoint(model, config, a.out);
  if (!a.loss_trace.empty()) write_text_file(a.loss_trace, loss_trace_csv(result));
  out << std::setprecision(10) << "trained " << result.epoch_loss.size() << " epochs, "
      << result.steps << " steps";
  if (!result.epoch_loss.empty()) out << ", final mean loss " << result.epoch_loss.back();
  out << "\n";
}

struct ExtractArgs {
  std::string corpus, checkpoint, ontology, out, head;
  std::size_t max_iter = 0;
};

void cmd_extract(const ExtractArgs &a, std::ostream &out) {
  std::shared_ptr<const Ontology> expected;
  if (!a.ontology.empty()) expected = std::make_shared<Ontology>(load_ontology(a.ontology));
  const Checkpoint ckpt = load_checkpoint(a.checkpoint, expected.get());
  const Corpus corpus = load_corpus(a.corpus, ckpt.model->ontology_ptr());
  const PolicyHead head = a.head.empty() ? ckpt.train_config.head : *parse_policy_head(a.head);
  const std::size_t max_iter = a.max_iter > 0 ? a.max_iter : ckpt.train_config.max_iter;
  DecodeStats stats;
  const TemplateMap predictions = extract_corpus(corpus, *ckpt.model, head, max_iter, &stats);
  emit(predictions_to_json(predictions, corpus).dump(2) + "\n", a.out, out);
}

struct SweepArgs {
  std::string corpus, test, ontology, out, variant = "rme", phi = "phi3";
  std::vector<double> alphas;
  std::vector<std::string> betas;
  std::vector<std::uint64_t> seeds;
  bool no_timing = false;
  TrainOptions train;
  ModelOptions model;
};

std::string format_double(double value) {
  std::ostringstream s;
  s << std::setprecision(10) << value;
  return s.str();
}

void cmd_sweep(const SweepArgs &a, std::ostream &out) {
  if (a.alphas.empty() && a.betas.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty grid; pass --alphas and/or --betas");
  }
  const auto variant = *parse_variant(a.variant);
  const auto phi = *parse_phi(a.phi);
  const TrainConfig base = a.train.resolve();
  const std::string ontology_path = resolve_ontology(a.ontology);
  const Corpus train_corpus = load_corpus(a.corpus, ontology_path);
  const Corpus test_corpus =
      a.test.empty() ? train_corpus : load_corpus(a.test, train_corpus.ontology);

  std::vector<std::optional<double>> alphas(a.alphas.begin(), a.alphas.end());
  if (alphas.empty()) alphas.push_back(std::nullopt);
  std::vector<std::optional<std::string>> betas(a.betas.begin(), a.betas.end());
  if (betas.empty()) betas.push_back(std::nullopt);
  std::vector<std::uint64_t> seeds = a.seeds;
  if (seeds.empty()) seeds.push_back(base.seed);

  std::ostringstream csv;
  csv << std::setprecision(10) << "setting,p,r,f1,seed,runtime_s\n";
  for (const auto &alpha : alphas) {
    for (const auto &beta : betas) {
      TrainConfig config = base;
      std::string setting;
      if (alpha) {
        config.alpha = *alpha;
        setting = "alpha=" + format_double(*alpha);
      }
      if (beta) {
        config.beta = ExpertBeta::parse(*beta);
        setting += (setting.empty() ? "" : " ") + std::string("beta=") + config.beta.to_string();
      }
      config.validate();
      for (std::uint64_t seed : seeds) {
        config.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        Model model(train_corpus.ontology, a.model.config);
        train(model, train_corpus, config);
        const TemplateMap predictions =
            extract_corpus(test_corpus, model, config.head, config.max_iter);
        const ScoreReport report = score_corpus(test_corpus, predictions, variant, phi);
        const double seconds =
            a.no_timing ? 0.0
                        : std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                              .count();
        csv << setting << ',' << report.micro.precision << ',' << report.micro.recall << ','
            << report.micro.f1 << ',' << seed << ',' << seconds << '\n';
      }
    }
  }
  emit(csv.str(), a.out, out);
}

struct SynthArgs {
  SynthConfig config;
  std::string out, ontology_out;
};

void cmd_synth(const SynthArgs &a, std::ostream &out) {
  const Corpus corpus = generate(a.config);
  emit(to_json(corpus).dump(2) + "\n", a.out, out);
  if (!a.ontology_out.empty()) save_ontology(*corpus.ontology, a.ontology_out);
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app("Iterative template extraction and template-filling metrics.", "iterx");
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON file of option values for the subcommand");
  app.fallthrough();
  auto add_config = [](CLI::App *sub) { sub->fallthrough(); };
  const std::vector<std::string> variants = {"rme", "ree-def", "ree-impl"};

  ScoreArgs score;
  CLI::App *score_cmd = app.add_subcommand("score", "Score predictions against gold templates");
  add_config(score_cmd);
  score_cmd->add_option("--gold", score.gold, "Gold corpus JSON")->required();
  score_cmd->add_option("--pred", score.pred, "Prediction JSON")->required();
  score_cmd->add_option("--ontology", score.ontology, "Ontology JSON");
  score_cmd->add_option("--variant", score.variant, "rme, ree-def, ree-impl or granular")
      ->check(CLI::IsMember({"rme", "ree-def", "ree-impl", "granular"}));
  score_cmd->add_option("--phi", score.phi, "Entity similarity")
      ->check(CLI::IsMember({"phi3", "phi4", "phi-subset"}));
  score_cmd->add_option("--format", score.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "pretty"}));
  score_cmd->add_option("--out", score.out, "Output file (default stdout)");

  TrainArgs train_args;
  CLI::App *train_cmd = app.add_subcommand("train", "Train a model by imitation learning");
  add_config(train_cmd);
  train_cmd->add_option("--corpus", train_args.corpus, "Training corpus JSON")->required();
  train_cmd->add_option("--ontology", train_args.ontology, "Ontology JSON");
  train_cmd->add_option("--out", train_args.out, "Checkpoint output path")->required();
  train_cmd->add_option("--loss-trace", train_args.loss_trace, "Per-epoch loss CSV path");
  train_args.train.add(train_cmd, true);
  train_args.model.add(train_cmd);

  ExtractArgs extract_args;
  CLI::App *extract_cmd = app.add_subcommand("extract", "Extract templates with a checkpoint");
  add_config(extract_cmd);
  extract_cmd->add_option("--corpus", extract_args.corpus, "Corpus JSON")->required();
  extract_cmd->add_option("--checkpoint", extract_args.checkpoint, "Checkpoint JSON")
      ->required();
  extract_cmd->add_option("--ontology", extract_args.ontology,
                          "Ontology JSON the checkpoint must match");
  extract_cmd->add_option("--out", extract_args.out, "Prediction output (default stdout)");
  extract_cmd->add_option("--head", extract_args.head, "Override the checkpoint's policy head")
      ->check(CLI::IsMember({"independent", "joint"}));
  extract_cmd->add_option("--max-iter", extract_args.max_iter,
                          "Override the checkpoint's max_iter")
      ->check(CLI::PositiveNumber);

  SweepArgs sweep;
  CLI::App *sweep_cmd = app.add_subcommand("sweep", "Retrain and score over an alpha/beta grid");
  add_config(sweep_cmd);
  sweep_cmd->add_option("--corpus", sweep.corpus, "Training corpus JSON")->required();
  sweep_cmd->add_option("--test", sweep.test, "Held-out corpus JSON (default: training corpus)");
  sweep_cmd->add_option("--ontology", sweep.ontology, "Ontology JSON");
  sweep_cmd->add_option("--out", sweep.out, "CSV output (default stdout)");
  sweep_cmd->add_option("--alphas", sweep.alphas, "Roll-out rates")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--betas", sweep.betas, "Expert temperature settings")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "Training seeds (default --seed)")
      ->delimiter(',');
  sweep_cmd->add_option("--variant", sweep.variant, "Metric variant")
      ->check(CLI::IsMember(variants));
  sweep_cmd->add_option("--phi", sweep.phi, "Entity similarity")
      ->check(CLI::IsMember({"phi3", "phi4", "phi-subset"}));
  sweep_cmd->add_flag("--no-timing", sweep.no_timing, "Write 0 in the runtime_s column");
  sweep.train.add(sweep_cmd, true);
  sweep.model.add(sweep_cmd);

  SynthArgs synth;
  CLI::App *synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  add_config(synth_cmd);
  synth_cmd->add_option("--out", synth.out, "Corpus output (default stdout)");
  synth_cmd->add_option("--ontology-out", synth.ontology_out, "Ontology output path");
  synth_cmd->add_option("--seed", synth.config.seed, "Generator seed");
  synth_cmd->add_option("--docs", synth.config.n_docs, "Number of documents")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--min-templates", synth.config.min_templates, "Fewest templates per document");
  synth_cmd->add_option("--max-templates", synth.config.max_templates, "Most templates per document");
  synth_cmd->add_option("--types", synth.config.n_template_types, "Template types");
  synth_cmd->add_option("--slots", synth.config.slots_per_type, "Slots per type");
  synth_cmd->add_option("--filler-vocab", synth.config.filler_vocab, "Filler vocabulary size");
  synth_cmd->add_option("--distractor-vocab", synth.config.distractor_vocab,
                        "Distractor vocabulary size");
  synth_cmd->add_option("--distractor-rate", synth.config.distractor_rate,
                        "Fraction of candidate mentions that are distractors");
  synth_cmd->add_option("--slot-fill-rate", synth.config.slot_fill_rate,
                        "Probability that a slot is filled");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err);
  }

  try {
    if (score_cmd->parsed()) cmd_score(score, out);
    if (train_cmd->parsed()) cmd_train(train_args, out);
    if (extract_cmd->parsed()) cmd_extract(extract_args, out);
    if (sweep_cmd->parsed()) cmd_sweep(sweep, out);
    if (synth_cmd->parsed()) cmd_synth(synth, out);
  } catch (const Error &e) {
    err << "iterx: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? 2 : 1;
  }
  return 0;
}

}  // namespace iterx::cli
