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

#include <chrono>
#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "iterx/error.h"
#include "iterx/learn.h"
#include "iterx/synth.h"
#include "test_util.h"

namespace iterx {
namespace {

ModelConfig small_model() {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.ff_multiplier = 2;
  return cfg;
}

Corpus small_corpus(int docs, std::uint64_t seed = 3) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_docs = docs;
  cfg.max_templates = 2;
  return generate(cfg);
}

std::vector<double> logs(std::initializer_list<double> probs) {
  std::vector<double> out;
  for (double p : probs) out.push_back(std::log(p));
  return out;
}

TEST(ExpertPolicyTest, Settings) {
  const auto xent = expert_policy(logs({0.6, 0.2}), ExpertBeta{});
  EXPECT_NEAR(xent[0], 0.75, 1e-15);
  EXPECT_NEAR(xent[1], 0.25, 1e-15);
  const auto uniform =
      expert_policy(logs({0.1, 0.2, 0.3, 0.05}), ExpertBeta::parse("uniform"));
  for (double p : uniform) EXPECT_EQ(p, 0.25);
  for (const char *beta : {"fixed", "argmax", "xent", "uniform", "0.5"}) {
    const auto single = expert_policy(logs({0.01}), ExpertBeta::parse(beta));
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0], 1.0) << beta;
  }
  EXPECT_EQ(expert_policy(logs({0.1, 0.7, 0.2}), ExpertBeta::parse("fixed")),
            (std::vector<double>{1.0, 0.0, 0.0}));
  EXPECT_EQ(expert_policy(logs({0.1, 0.7, 0.2}), ExpertBeta::parse("argmax")),
            (std::vector<double>{0.0, 1.0, 0.0}));
  // beta = 2 -> proportional to sqrt(p): sqrt(.64) : sqrt(.16) = 0.8 : 0.4.
  const auto warm = expert_policy(logs({0.64, 0.16}), ExpertBeta::parse("2"));
  EXPECT_NEAR(warm[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(warm[1], 1.0 / 3.0, 1e-15);
}

TEST(ExpertPolicyTest, DegenerateInputs) {
  try {
    expert_policy({}, ExpertBeta{});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGoldSet);
  }
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(expert_policy({-inf, -inf}, ExpertBeta{}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(expert_policy({-inf, std::log(0.1)}, ExpertBeta{}),
            (std::vector<double>{0.0, 1.0}));
  EXPECT_THROW(ExpertBeta::parse("hot"), Error);
  EXPECT_THROW(ExpertBeta::parse("-1"), Error);
  EXPECT_EQ(ExpertBeta::parse("argmax").to_string(), "argmax");
}

TEST(TrainConfigTest, Validation) {
  TrainConfig ok;
  EXPECT_NO_THROW(ok.validate());
  for (auto mutate : std::vector<std::function<void(TrainConfig &)>>{
           [](TrainConfig &c) { c.alpha = 1.5; },
           [](TrainConfig &c) { c.gamma = 0.0; },
           [](TrainConfig &c) { c.gamma = 1.5; },
           [](TrainConfig &c) { c.learning_rate = 0.0; },
           [](TrainConfig &c) { c.epochs = -1; },
           [](TrainConfig &c) { c.max_iter = 0; }}) {
    TrainConfig c;
    mutate(c);
    try {
      c.validate();
      FAIL();
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    }
  }
}

TEST(OracleActionTest, Encoding) {
  auto ontology = testing::attack_ontology();
  Document doc = testing::token_document("d", {"a", "b", "c", "d"});
  TemplateInstance t{"Attack",
                     {{"Target", {Filler::entity({"m1", "m3"})}},
                      {"Perpetrator", {Filler::mention("m1"), Filler::mention("m0")}}}};
  const auto action = oracle_action(t, doc, *ontology);
  ASSERT_TRUE(action.has_value());
  const std::size_t p = *ontology->slot_index("Perpetrator");
  const std::size_t tg = *ontology->slot_index("Target");
  // m1 fills both slots; Perpetrator is declared first.
  EXPECT_EQ(action->slots, (std::vector<std::size_t>{p, p, ontology->null_slot(), tg}));
  EXPECT_EQ(action->type, 0u);
  EXPECT_FALSE(oracle_action(TemplateInstance{"Attack", {}}, doc, *ontology).has_value());
}

std::vector<Action> gold_sequence(const Corpus &corpus, const Document &doc, std::size_t type) {
  std::vector<Action> out;
  for (const auto &t : corpus.gold_for(doc.id())) {
    if (t.type != corpus.ontology->template_types()[type].name) continue;
    out.push_back(*oracle_action(t, doc, *corpus.ontology));
  }
  return out;
}

const Document &doc_with_templates(const Corpus &corpus, std::size_t type, std::size_t n) {
  for (const Document &doc : corpus.documents) {
    std::size_t count = 0;
    for (const auto &t : corpus.gold_for(doc.id())) {
      count += t.type == corpus.ontology->template_types()[type].name;
    }
    if (count == n) return doc;
  }
  throw std::runtime_error("no such document");
}

TEST(EpisodeTest, TeacherForcingFollowsDatasetOrder) {
  const Corpus corpus = small_corpus(40);
  Model model(corpus.ontology, small_model());
  const Document &doc = doc_with_templates(corpus, 0, 2);
  TrainConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = ExpertBeta::parse("fixed");
  std::mt19937_64 rng(1);
  ad::Tape tape;
  EpisodeResult result;
  ad::Var loss = run_episode(tape, model, doc, 0, corpus.gold_for(doc.id()), cfg, rng, &result);
  const auto gold = gold_sequence(corpus, doc, 0);
  ASSERT_EQ(result.steps.size(), gold.size() + 1);
  for (std::size_t k = 0; k < gold.size(); ++k) {
    EXPECT_EQ(result.steps[k].executed, gold[k]);
    EXPECT_EQ(result.steps[k].oracle, gold[k]);
    EXPECT_FALSE(result.steps[k].agent_rollout);
    EXPECT_GT(result.steps[k].loss, 0.0);
  }
  EXPECT_TRUE(result.steps.back().stop);
  EXPECT_TRUE(result.steps.back().oracle.all_null(*corpus.ontology));
  EXPECT_NEAR(loss.value()(0, 0), result.loss, 1e-12);
}

TEST(EpisodeTest, AgentRolloutsStillTargetOracle) {
  const Corpus corpus = small_corpus(40);
  Model model(corpus.ontology, small_model());
  TrainConfig cfg;
  cfg.alpha = 1.0;
  cfg.max_iter = 4;
  std::mt19937_64 rng(1);
  for (const Document &doc : corpus.documents) {
    for (std::size_t type = 0; type < 2; ++type) {
      const auto gold = gold_sequence(corpus, doc, type);
      const SpanEncoding enc = encode_document(doc, model);
      std::vector<Action> remaining = gold;
      EpisodeState state = EpisodeState::initial(enc.rows.rows(), model.config().dim);
      for (int k = 0; k < 3; ++k) {
        const auto dist = joint_policy(state_input(enc, state),
                                       corpus.ontology->template_types()[type].name,
                                       model.policy, *corpus.ontology)
                              .first;
        const std::vector<Action> before = remaining;
        StepOutcome out = step_episode(model, doc, enc, type, remaining, state, cfg, rng);
        if (before.empty()) {
          EXPECT_TRUE(out.record.stop);
          break;
        }
        EXPECT_TRUE(out.record.agent_rollout);
        EXPECT_EQ(out.record.executed, greedy_action(dist));
        EXPECT_NE(std::find(before.begin(), before.end(), out.record.oracle), before.end());
        EXPECT_NEAR(out.record.loss, -action_log_prob(dist, out.record.oracle.slots), 1e-12);
        state = out.next;
      }
    }
  }
}

TEST(EpisodeTest, OracleSupportIsRemainingGold) {
  const Corpus corpus = small_corpus(30);
  Model model(corpus.ontology, small_model());
  TrainConfig cfg;
  cfg.alpha = 0.5;
  cfg.beta = ExpertBeta::parse("uniform");
  std::mt19937_64 rng(4);
  for (const Document &doc : corpus.documents) {
    for (std::size_t type = 0; type < 2; ++type) {
      const auto gold = gold_sequence(corpus, doc, type);
      ad::Tape tape(false);
      EpisodeResult result;
      run_episode(tape, model, doc, type, corpus.gold_for(doc.id()), cfg, rng, &result);
      std::vector<Action> remaining = gold;
      for (const StepRecord &step : result.steps) {
        if (step.stop) {
          EXPECT_TRUE(remaining.empty());
          continue;
        }
        EXPECT_NE(std::find(remaining.begin(), remaining.end(), step.oracle), remaining.end());
        auto hit = std::find(remaining.begin(), remaining.end(), step.executed);
        if (hit != remaining.end()) remaining.erase(hit);
        EXPECT_GE(step.loss, 0.0);
        EXPECT_TRUE(std::isfinite(step.loss));
      }
    }
  }
}

TEST(EpisodeTest, DiscountScalesLaterSteps) {
  const Corpus corpus = small_corpus(40);
  Model model(corpus.ontology, small_model());
  const Document &doc = doc_with_templates(corpus, 0, 2);
  TrainConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = ExpertBeta::parse("fixed");
  std::mt19937_64 rng(1);
  ad::Tape tape(false);
  EpisodeResult full;
  run_episode(tape, model, doc, 0, corpus.gold_for(doc.id()), cfg, rng, &full);
  ASSERT_EQ(full.steps.size(), 3u);
  TrainConfig half = cfg;
  half.gamma = 0.5;
  EpisodeResult discounted;
  run_episode(tape, model, doc, 0, corpus.gold_for(doc.id()), half, rng, &discounted, &full);
  EXPECT_DOUBLE_EQ(discounted.steps[0].loss, full.steps[0].loss);
  EXPECT_DOUBLE_EQ(discounted.steps[1].loss, 0.5 * full.steps[1].loss);
  EXPECT_DOUBLE_EQ(discounted.steps[2].loss, 0.25 * full.steps[2].loss);
}

TEST(TrainTest, LossDecreasesOnOneTemplate) {
  SynthConfig synth;
  synth.n_docs = 1;
  synth.min_templates = synth.max_templates = 1;
  const Corpus corpus = generate(synth);
  Model model(corpus.ontology, small_model());
  TrainConfig cfg;
  cfg.alpha = 0.0;
  cfg.epochs = 200;
  const TrainResult result = train(model, corpus, cfg);
  ASSERT_EQ(result.epoch_loss.size(), 200u);
  EXPECT_LT(result.epoch_loss.back(), result.epoch_loss.front());
  EXPECT_LT(result.epoch_loss.back(), 0.1 * result.epoch_loss.front());
  EXPECT_EQ(loss_trace_csv(result).substr(0, 16), "epoch,mean_loss\n");
}

TEST(TrainTest, SeededRunsAreBitIdentical) {
  const Corpus corpus = small_corpus(6);
  TrainConfig cfg;
  cfg.epochs = 3;
  Model a(corpus.ontology, small_model());
  Model b(corpus.ontology, small_model());
  const TrainResult ra = train(a, corpus, cfg);
  const TrainResult rb = train(b, corpus, cfg);
  EXPECT_EQ(ra.epoch_loss, rb.epoch_loss);
  EXPECT_EQ(loss_trace_csv(ra), loss_trace_csv(rb));
  cfg.seed = 2;
  Model c(corpus.ontology, small_model());
  EXPECT_NE(train(c, corpus, cfg).epoch_loss, ra.epoch_loss);
}

TEST(TrainTest, Errors) {
  Corpus corpus = small_corpus(4);
  Model model(corpus.ontology, small_model());
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 1e200;
  try {
    train(model, corpus, cfg);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
  }
  Corpus empty = corpus;
  empty.gold.clear();
  Model fresh(corpus.ontology, small_model());
  try {
    train(fresh, empty, TrainConfig{});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGoldSet);
  }
  Model other(testing::attack_ontology(), small_model());
  try {
    train(other, corpus, TrainConfig{});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kOntologyMismatch);
  }
}

TEST(GradCheckTest, BothHeadsFullEpisode) {
  const Corpus corpus = small_corpus(20, 9);
  for (PolicyHead head : {PolicyHead::kIndependent, PolicyHead::kJoint}) {
    Model model(corpus.ontology, small_model());
    const Document &doc = doc_with_templates(corpus, 0, 2);
    TrainConfig cfg;
    cfg.head = head;
    cfg.alpha = 0.5;
    cfg.gamma = 0.9;
    const GradCheckResult r = grad_check(model, doc, corpus.gold_for(doc.id()), cfg, 1e-4);
    EXPECT_EQ(r.checked, 2 * model.parameter_count());  // one pass per template type
    EXPECT_LT(r.max_relative_error, 1e-3) << to_string(head) << " " << r.worst_parameter;
  }
}

TEST(CheckpointTest, RoundTrip) {
  const Corpus corpus = small_corpus(6);
  Model model(corpus.ontology, small_model());
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.alpha = 0.25;
  cfg.beta = ExpertBeta::parse("0.5");
  train(model, corpus, cfg);
  testing::TempDir dir;
  save_checkpoint(model, cfg, dir.file("model.json"));
  const Checkpoint loaded = load_checkpoint(dir.file("model.json"), corpus.ontology.get());
  EXPECT_EQ(loaded.train_config.alpha, 0.25);
  EXPECT_EQ(loaded.train_config.beta.to_string(), cfg.beta.to_string());
  EXPECT_EQ(loaded.model->parameter_count(), model.parameter_count());
  for (const Document &doc : corpus.documents) {
    EXPECT_EQ(extract(doc, *loaded.model, PolicyHead::kJoint, 10),
              extract(doc, model, PolicyHead::kJoint, 10));
  }
  save_checkpoint(*loaded.model, loaded.train_config, dir.file("again.json"));
  std::ifstream a(dir.file("model.json")), b(dir.file("again.json"));
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}),
            std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST(CheckpointTest, Errors) {
  const Corpus corpus = small_corpus(2);
  Model model(corpus.ontology, small_model());
  testing::TempDir dir;
  save_checkpoint(model, TrainConfig{}, dir.file("model.json"));
  auto expect_code = [&](const std::string &path, const Ontology *ontology, ErrorCode code) {
    try {
      load_checkpoint(path, ontology);
      FAIL();
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  expect_code(dir.file("model.json"), testing::attack_ontology().get(),
              ErrorCode::kOntologyMismatch);
  expect_code(dir.file("missing.json"), nullptr, ErrorCode::kIoError);
  std::ofstream(dir.file("bad.json")) << "{\"format\": \"iterx-checkpoint\"";
  expect_code(dir.file("bad.json"), nullptr, ErrorCode::kMalformedJson);
}

}  // namespace
}  // namespace iterx
