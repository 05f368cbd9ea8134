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

// Imitation learning against a dynamic oracle: expert policy, mixed roll-outs,
// the discounted log-likelihood objective, SGD training and checkpoints.

#ifndef ITERX_LEARN_H_
#define ITERX_LEARN_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "iterx/core.h"
#include "iterx/engine.h"
#include "iterx/model.h"

namespace iterx {

enum class BetaSetting { kFixed, kArgmax, kXent, kUniform, kTemperature };

struct ExpertBeta {
  BetaSetting setting = BetaSetting::kXent;
  double temperature = 1.0;  // only read for kTemperature

  // "fixed", "argmax", "xent", "uniform" or a positive number.
  static ExpertBeta parse(std::string_view text);
  std::string to_string() const;
};

// Distribution over the remaining gold templates, given the agent's log
// probability of each (in dataset order). Throws kEmptyGoldSet.
std::vector<double> expert_policy(const std::vector<double> &agent_log_probs,
                                  const ExpertBeta &beta);

struct TrainConfig {
  double alpha = 0.5;
  ExpertBeta beta;
  double gamma = 1.0;
  double learning_rate = 0.005;
  int epochs = 20;
  std::uint64_t seed = 1;
  PolicyHead head = PolicyHead::kJoint;
  std::size_t max_iter = 10;

  // Throws kInvalidArgument.
  void validate() const;
};

// The assignment giving every gold filler mention its slot and every other
// span the null slot. A mention filling several slots keeps the first in the
// type's declaration order. Returns nullopt for templates without any
// mention-valued filler.
std::optional<Action> oracle_action(const TemplateInstance &gold,
                                    const Document &doc,
                                    const Ontology &ontology);

struct StepRecord {
  Action oracle;
  Action executed;
  double loss = 0.0;  // gamma^k * -log pi(oracle)
  bool agent_rollout = false;
  bool stop = false;  // the oracle action was the stop action
};

struct EpisodeResult {
  std::vector<StepRecord> steps;
  double loss = 0.0;
};

// Runs one training episode for (document, template type) on `tape`.
// Returns the episode loss node; `result` receives the per-step record.
// With `replay` set, the oracle and executed actions are taken from it
// instead of being sampled.
ad::Var run_episode(ad::Tape &tape, Model &model, const Document &doc,
                    std::size_t type, const std::vector<TemplateInstance> &gold,
                    const TrainConfig &config, std::mt19937_64 &rng,
                    EpisodeResult *result,
                    const EpisodeResult *replay = nullptr);

// Value-level single step from an explicit state. The state is advanced
// with the executed action; `remaining` holds the unconsumed gold actions
// and loses any template the executed action reproduces exactly.
struct StepOutcome {
  StepRecord record;
  EpisodeState next;
};
StepOutcome step_episode(const Model &model, const Document &doc,
                         const SpanEncoding &enc, std::size_t type,
                         std::vector<Action> &remaining,
                         const EpisodeState &state, const TrainConfig &config,
                         std::mt19937_64 &rng);

struct TrainResult {
  std::vector<double> epoch_loss;  // mean per-step loss of each epoch
  std::size_t steps = 0;
};

// Trains in place. Throws kInvalidArgument, kEmptyGoldSet (no gold at all),
// kDivergence (non-finite parameters).
TrainResult train(Model &model, const Corpus &corpus, const TrainConfig &config);

std::string loss_trace_csv(const TrainResult &result);

// Largest relative error between tape gradients and central differences of
// the episode loss with a frozen action sequence. The relative error of one
// entry is |a - b| / max(|a|, |b|, floor).
struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
};
inline constexpr double kGradCheckFloor = 1e-4;
GradCheckResult grad_check(Model &model, const Document &doc,
                           const std::vector<TemplateInstance> &gold,
                           const TrainConfig &config, double epsilon);

struct Checkpoint {
  std::unique_ptr<Model> model;
  TrainConfig train_config;
};

void save_checkpoint(const Model &model, const TrainConfig &config,
                     const std::string &path);
// Throws kOntologyMismatch when `expected` differs from the checkpoint's
// ontology, kMalformedJson, kIoError.
Checkpoint load_checkpoint(const std::string &path,
                           const Ontology *expected = nullptr);

}  // namespace iterx

#endif  // ITERX_LEARN_H_
