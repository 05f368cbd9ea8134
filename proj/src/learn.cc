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

#include "iterx/learn.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "iterx/corpus_io.h"
#include "iterx/error.h"

namespace iterx {

ExpertBeta ExpertBeta::parse(std::string_view text) {
  if (text == "fixed") return {BetaSetting::kFixed, 1.0};
  if (text == "argmax") return {BetaSetting::kArgmax, 1.0};
  if (text == "xent") return {BetaSetting::kXent, 1.0};
  if (text == "uniform") return {BetaSetting::kUniform, 1.0};
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !(value > 0.0) ||
      !std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument,
                "beta must be fixed, argmax, xent, uniform or a positive number, got '" +
                    std::string(text) + "'");
  }
  return {BetaSetting::kTemperature, value};
}

std::string ExpertBeta::to_string() const {
  switch (setting) {
    case BetaSetting::kFixed:
      return "fixed";
    case BetaSetting::kArgmax:
      return "argmax";
    case BetaSetting::kXent:
      return "xent";
    case BetaSetting::kUniform:
      return "uniform";
    case BetaSetting::kTemperature:
      break;
  }
  std::ostringstream out;
  out.precision(17);
  out << temperature;
  return out.str();
}

std::vector<double> expert_policy(const std::vector<double> &agent_log_probs,
                                  const ExpertBeta &beta) {
  const std::size_t n = agent_log_probs.size();
  if (n == 0) {
    throw Error(ErrorCode::kEmptyGoldSet, "no remaining gold template");
  }
  std::vector<double> out(n, 0.0);
  const double top = *std::max_element(agent_log_probs.begin(), agent_log_probs.end());
  const bool all_impossible = std::isinf(top) && top < 0;
  switch (beta.setting) {
    case BetaSetting::kFixed:
      out[0] = 1.0;
      return out;
    case BetaSetting::kArgmax:
      out[static_cast<std::size_t>(
          std::max_element(agent_log_probs.begin(), agent_log_probs.end()) -
          agent_log_probs.begin())] = 1.0;
      return out;
    case BetaSetting::kUniform:
      std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
      return out;
    case BetaSetting::kXent:
    case BetaSetting::kTemperature:
      break;
  }
  if (all_impossible) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
    return out;
  }
  const double temperature =
      beta.setting == BetaSetting::kXent ? 1.0 : beta.temperature;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp((agent_log_probs[i] - top) / temperature);
    total += out[i];
  }
  for (double &p : out) p /= total;
  return out;
}

void TrainConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0, 1]");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  }
  if (epochs < 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0");
  if (max_iter == 0) throw Error(ErrorCode::kInvalidArgument, "max_iter must be >= 1");
  if (beta.setting == BetaSetting::kTemperature &&
      !(beta.temperature > 0.0 && std::isfinite(beta.temperature))) {
    throw Error(ErrorCode::kInvalidArgument, "beta temperature must be positive");
  }
}

std::optional<Action> oracle_action(const TemplateInstance &gold,
                                    const Document &doc,
                                    const Ontology &ontology) {
  const std::size_t type = ontology.require_type(gold.type);
  Action action = null_action(type, doc.mention_count(), ontology);
  bool any = false;
  for (const SlotDef &slot : ontology.template_types()[type].slots) {
    auto it = gold.fillers.find(slot.name);
    if (it == gold.fillers.end()) continue;
    const std::size_t s = *ontology.slot_index(slot.name);
    for (const Filler &filler : it->second) {
      if (!filler.mention_valued()) continue;
      for (const std::string &id : filler.mentions) {
        std::size_t &cell = action.slots[doc.find_mention(id).value()];
        if (cell == ontology.null_slot()) {
          cell = s;
          any = true;
        }
      }
    }
  }
  if (!any) return std::nullopt;
  return action;
}

namespace {

std::vector<Action> gold_actions(const std::vector<TemplateInstance> &gold,
                                 std::size_t type, const Document &doc,
                                 const Ontology &ontology) {
  std::vector<Action> out;
  const std::string &name = ontology.template_types()[type].name;
  for (const TemplateInstance &t : gold) {
    if (t.type != name) continue;
    if (auto action = oracle_action(t, doc, ontology)) out.push_back(std::move(*action));
  }
  return out;
}

std::size_t sample_index(const std::vector<double> &probs, std::mt19937_64 &rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  // Rounding left u above the last cumulative sum.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

// Oracle choice, mixed roll-out and gold consumption for one step.
StepRecord decide(const SlotDistribution &dist, std::vector<Action> &remaining,
                  const TrainConfig &config, std::mt19937_64 &rng,
                  const Ontology &ontology) {
  StepRecord record;
  if (remaining.empty()) {
    record.oracle = null_action(dist.type, static_cast<std::size_t>(dist.span_count()),
                                ontology);
    record.executed = record.oracle;
    record.stop = true;
    return record;
  }
  std::vector<double> agent;
  agent.reserve(remaining.size());
  for (const Action &a : remaining) agent.push_back(action_log_prob(dist, a.slots));
  record.oracle = remaining[sample_index(expert_policy(agent, config.beta), rng)];
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  record.agent_rollout = u < config.alpha;
  record.executed = record.agent_rollout ? greedy_action(dist) : record.oracle;
  auto hit = std::find(remaining.begin(), remaining.end(), record.executed);
  if (hit != remaining.end()) remaining.erase(hit);
  return record;
}

std::vector<std::pair<int, int>> action_coordinates(const Action &action) {
  std::vector<std::pair<int, int>> coords;
  coords.reserve(action.slots.size());
  for (std::size_t i = 0; i < action.slots.size(); ++i) {
    coords.emplace_back(static_cast<int>(i), static_cast<int>(action.slots[i]));
  }
  return coords;
}

}  // namespace

ad::Var run_episode(ad::Tape &tape, Model &model, const Document &doc,
                    std::size_t type, const std::vector<TemplateInstance> &gold,
                    const TrainConfig &config, std::mt19937_64 &rng,
                    EpisodeResult *result, const EpisodeResult *replay) {
  const Ontology &ontology = model.ontology();
  std::vector<Action> remaining = gold_actions(gold, type, doc, ontology);
  const auto spans = static_cast<Eigen::Index>(doc.mention_count());

  ad::Var enc = encode_spans(tape, doc, embed_tokens(doc, model.embedder()), model.encoder);
  ad::Var memory = tape.constant(Matrix::Zero(spans, model.config().dim));
  ad::Var slot_embeddings = tape.parameter(model.policy.slot_embeddings);
  ad::Var total = tape.constant(Matrix::Zero(1, 1));
  EpisodeResult local;
  double discount = 1.0;
  for (std::size_t k = 0;; ++k) {
    if (replay != nullptr && k >= replay->steps.size()) break;
    PolicyOutput out = run_policy(tape, config.head, ad::add(enc, memory), type,
                                  model.policy, ontology);
    StepRecord record;
    if (replay != nullptr) {
      record = replay->steps[k];
    } else {
      record = decide(SlotDistribution{out.log_probs.value(), type}, remaining,
                      config, rng, ontology);
    }
    ad::Var log_likelihood = ad::sum_entries(out.log_probs, action_coordinates(record.oracle));
    ad::Var term = ad::affine(log_likelihood, -discount, 0.0);
    record.loss = term.value()(0, 0);
    total = ad::add(total, term);
    local.loss += record.loss;
    const bool stop = record.stop;
    local.steps.push_back(record);
    if (stop || k + 1 >= config.max_iter) break;
    memory = update_memory(tape, memory, record.executed, out.summary,
                           slot_embeddings, model.gru, ontology);
    discount *= config.gamma;
  }
  if (result != nullptr) *result = std::move(local);
  return total;
}

StepOutcome step_episode(const Model &model, const Document &doc,
                         const SpanEncoding &enc, std::size_t type,
                         std::vector<Action> &remaining,
                         const EpisodeState &state, const TrainConfig &config,
                         std::mt19937_64 &rng) {
  const Ontology &ontology = model.ontology();
  const std::string &name = ontology.template_types().at(type).name;
  const Matrix x = state_input(enc, state);
  auto [dist, summary] = config.head == PolicyHead::kIndependent
                             ? independent_policy(x, name, model.policy, ontology)
                             : joint_policy(x, name, model.policy, ontology);
  StepOutcome outcome;
  outcome.record = decide(dist, remaining, config, rng, ontology);
  outcome.record.loss = -std::pow(config.gamma, static_cast<double>(state.step)) *
                        action_log_prob(dist, outcome.record.oracle.slots);
  outcome.next = transition(state, outcome.record.executed, summary, model.gru,
                            model.policy.slot_embeddings.value, doc, ontology);
  return outcome;
}

namespace {

void sgd_step(Model &model, double learning_rate) {
  model.for_each_parameter([&](Parameter &p) { p.value -= learning_rate * p.grad; });
  if (!model.all_finite()) {
    throw Error(ErrorCode::kDivergence, "a parameter became non-finite");
  }
}

}  // namespace

TrainResult train(Model &model, const Corpus &corpus, const TrainConfig &config) {
  config.validate();
  if (corpus.ontology && corpus.ontology->fingerprint() != model.ontology().fingerprint()) {
    throw Error(ErrorCode::kOntologyMismatch, "corpus and model ontologies differ");
  }
  bool any_gold = false;
  for (const auto &[id, templates] : corpus.gold) any_gold = any_gold || !templates.empty();
  if (!any_gold) throw Error(ErrorCode::kEmptyGoldSet, "corpus has no gold templates");

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(corpus.documents.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t index : order) {
      const Document &doc = corpus.documents[index];
      const auto &gold = corpus.gold_for(doc.id());
      for (std::size_t type = 0; type < model.ontology().type_count(); ++type) {
        model.zero_grad();
        ad::Tape tape;
        EpisodeResult episode;
        ad::Var loss = run_episode(tape, model, doc, type, gold, config, rng, &episode);
        tape.backward(loss);
        sgd_step(model, config.learning_rate);
        epoch_loss += episode.loss;
        epoch_steps += episode.steps.size();
      }
    }
    result.steps += epoch_steps;
    result.epoch_loss.push_back(epoch_steps == 0 ? 0.0
                                                 : epoch_loss / static_cast<double>(epoch_steps));
  }
  return result;
}

std::string loss_trace_csv(const TrainResult &result) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    out << e + 1 << ',' << result.epoch_loss[e] << '\n';
  }
  return out.str();
}

GradCheckResult grad_check(Model &model, const Document &doc,
                           const std::vector<TemplateInstance> &gold,
                           const TrainConfig &config, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  }
  config.validate();
  GradCheckResult out;
  for (std::size_t type = 0; type < model.ontology().type_count(); ++type) {
    std::mt19937_64 rng(config.seed);
    EpisodeResult frozen;
    model.zero_grad();
    {
      ad::Tape tape;
      tape.backward(run_episode(tape, model, doc, type, gold, config, rng, &frozen));
    }
    auto loss_at = [&]() {
      ad::Tape tape(/*record=*/false);
      std::mt19937_64 unused(config.seed);
      return run_episode(tape, model, doc, type, gold, config, unused, nullptr, &frozen)
          .value()(0, 0);
    };
    model.for_each_parameter([&](Parameter &p) {
      for (Eigen::Index i = 0; i < p.value.size(); ++i) {
        double &theta = p.value.data()[i];
        const double saved = theta;
        theta = saved + epsilon;
        const double up = loss_at();
        theta = saved - epsilon;
        const double down = loss_at();
        theta = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double analytic = p.grad.data()[i];
        const double scale =
            std::max({std::abs(numeric), std::abs(analytic), kGradCheckFloor});
        const double rel = std::abs(numeric - analytic) / scale;
        ++out.checked;
        if (rel > out.max_relative_error || std::isnan(rel)) {
          out.max_relative_error = std::isnan(rel) ? INFINITY : rel;
          out.worst_parameter = p.name + "[" + std::to_string(i) + "]";
        }
      }
    });
  }
  return out;
}

namespace {

constexpr const char *kCheckpointFormat = "iterx-checkpoint";
constexpr int kCheckpointVersion = 1;

std::string hex64(std::uint64_t value) {
  static const char *digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) out[static_cast<std::size_t>(i)] = digits[value & 15];
  return out;
}

Json train_config_json(const TrainConfig &c) {
  return {{"alpha", c.alpha},
          {"beta", c.beta.to_string()},
          {"gamma", c.gamma},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"head", std::string(to_string(c.head))},
          {"max_iter", c.max_iter}};
}

template <typename T>
T member(const Json &json, const char *key) {
  if (!json.is_object() || !json.contains(key)) {
    throw Error(ErrorCode::kMalformedJson, std::string("checkpoint lacks '") + key + "'");
  }
  try {
    return json.at(key).get<T>();
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kMalformedJson,
                std::string("checkpoint field '") + key + "': " + e.what());
  }
}

}  // namespace

void save_checkpoint(const Model &model, const TrainConfig &config,
                     const std::string &path) {
  const ModelConfig &mc = model.config();
  Json params = Json::object();
  model.for_each_parameter([&](const Parameter &p) {
    std::vector<double> data(p.value.data(), p.value.data() + p.value.size());
    params[p.name] = {{"rows", p.value.rows()}, {"cols", p.value.cols()}, {"data", data}};
  });
  Json json = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"ontology_fingerprint", hex64(model.ontology().fingerprint())},
      {"ontology", to_json(model.ontology())},
      {"model_config",
       {{"dim", mc.dim},
        {"layers", mc.layers},
        {"heads", mc.heads},
        {"ff_multiplier", mc.ff_multiplier},
        {"seed", mc.seed}}},
      {"embedder",
       {{"dim", model.embedder().dim},
        {"seed", model.embedder().seed},
        {"chunk_size", model.embedder().chunk_size}}},
      {"train_config", train_config_json(config)},
      {"parameters", params}};
  write_text_file(path, json.dump() + "\n");
}

Checkpoint load_checkpoint(const std::string &path, const Ontology *expected) {
  const Json json = read_json_file(path);
  if (member<std::string>(json, "format") != kCheckpointFormat ||
      member<int>(json, "version") != kCheckpointVersion) {
    throw Error(ErrorCode::kMalformedJson, "not a version 1 checkpoint");
  }
  auto ontology = std::make_shared<const Ontology>(ontology_from_json(json.at("ontology")));
  const std::string fingerprint = member<std::string>(json, "ontology_fingerprint");
  if (hex64(ontology->fingerprint()) != fingerprint) {
    throw Error(ErrorCode::kMalformedJson, "checkpoint ontology does not match its fingerprint");
  }
  if (expected != nullptr && expected->fingerprint() != ontology->fingerprint()) {
    throw Error(ErrorCode::kOntologyMismatch,
                "checkpoint was trained for ontology " + fingerprint + ", corpus uses " +
                    hex64(expected->fingerprint()));
  }
  const Json &mc_json = json.at("model_config");
  ModelConfig mc;
  mc.dim = member<int>(mc_json, "dim");
  mc.layers = member<int>(mc_json, "layers");
  mc.heads = member<int>(mc_json, "heads");
  mc.ff_multiplier = member<int>(mc_json, "ff_multiplier");
  mc.seed = member<std::uint64_t>(mc_json, "seed");
  mc.embed_seed = member<std::uint64_t>(json.at("embedder"), "seed");

  Checkpoint out;
  out.model = std::make_unique<Model>(ontology, mc);
  const Json &params = json.at("parameters");
  out.model->for_each_parameter([&](Parameter &p) {
    const Json &entry = params.contains(p.name) ? params.at(p.name) : Json();
    const auto rows = member<Eigen::Index>(entry, "rows");
    const auto cols = member<Eigen::Index>(entry, "cols");
    const auto data = member<std::vector<double>>(entry, "data");
    if (rows != p.value.rows() || cols != p.value.cols() ||
        static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw Error(ErrorCode::kShapeMismatch, "parameter '" + p.name + "' has the wrong shape");
    }
    std::copy(data.begin(), data.end(), p.value.data());
  });

  const Json &tc = json.at("train_config");
  out.train_config.alpha = member<double>(tc, "alpha");
  out.train_config.beta = ExpertBeta::parse(member<std::string>(tc, "beta"));
  out.train_config.gamma = member<double>(tc, "gamma");
  out.train_config.learning_rate = member<double>(tc, "learning_rate");
  out.train_config.epochs = member<int>(tc, "epochs");
  out.train_config.seed = member<std::uint64_t>(tc, "seed");
  const auto head = parse_policy_head(member<std::string>(tc, "head"));
  if (!head) throw Error(ErrorCode::kMalformedJson, "unknown policy head in checkpoint");
  out.train_config.head = *head;
  out.train_config.max_iter = member<std::size_t>(tc, "max_iter");
  return out;
}

}  // namespace iterx
