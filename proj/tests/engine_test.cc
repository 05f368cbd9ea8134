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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "iterx/engine.h"
#include "iterx/error.h"
#include "test_util.h"

namespace iterx {
namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

TEST(GruTest, MatchesHandCalculation) {
  std::mt19937_64 rng(3);
  GruParameters p = GruParameters::init(2, rng);
  const double x[4] = {0.2, -0.4, 0.9, 0.1};
  const double h[2] = {0.5, -0.3};
  std::vector<std::vector<double>> wz(4, std::vector<double>(2)), wr = wz, wh = wz;
  std::vector<std::vector<double>> uz(2, std::vector<double>(2)), ur = uz, uh = uz;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 2; ++j) {
      wz[i][j] = p.wz.value(i, j);
      wr[i][j] = p.wr.value(i, j);
      wh[i][j] = p.wh.value(i, j);
    }
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      uz[i][j] = p.uz.value(i, j);
      ur[i][j] = p.ur.value(i, j);
      uh[i][j] = p.uh.value(i, j);
    }
  }
  const double bz[2] = {0.1, -0.2}, br[2] = {0.3, 0.05}, bh[2] = {-0.15, 0.25};
  p.bz.value << bz[0], bz[1];
  p.br.value << br[0], br[1];
  p.bh.value << bh[0], bh[1];

  double z[2], r[2], expected[2];
  for (int j = 0; j < 2; ++j) {
    double az = bz[j], ar = br[j];
    for (int i = 0; i < 4; ++i) {
      az += x[i] * wz[i][j];
      ar += x[i] * wr[i][j];
    }
    for (int i = 0; i < 2; ++i) {
      az += h[i] * uz[i][j];
      ar += h[i] * ur[i][j];
    }
    z[j] = sigmoid(az);
    r[j] = sigmoid(ar);
  }
  for (int j = 0; j < 2; ++j) {
    double ah = bh[j];
    for (int i = 0; i < 4; ++i) ah += x[i] * wh[i][j];
    for (int i = 0; i < 2; ++i) ah += r[i] * h[i] * uh[i][j];
    const double candidate = std::tanh(ah);
    expected[j] = (1 - z[j]) * h[j] + z[j] * candidate;
  }
  Matrix input(1, 4), hidden(1, 2);
  input << x[0], x[1], x[2], x[3];
  hidden << h[0], h[1];
  Matrix out = gru_step(input, hidden, p);
  EXPECT_NEAR(out(0, 0), expected[0], 1e-14);
  EXPECT_NEAR(out(0, 1), expected[1], 1e-14);
}

TEST(StateInputTest, AddsMemory) {
  SpanEncoding enc{(Matrix(1, 2) << 1.0, 2.0).finished()};
  EpisodeState state = EpisodeState::initial(1, 2);
  EXPECT_EQ(state_input(enc, state), enc.rows);
  state.memory << 0.5, -1.0;
  EXPECT_EQ(state_input(enc, state), (Matrix(1, 2) << 1.5, 1.0).finished());
  state.memory = -enc.rows;
  EXPECT_TRUE(state_input(enc, state).isZero(0.0));
  EpisodeState wrong = EpisodeState::initial(2, 2);
  try {
    state_input(enc, wrong);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

class TransitionTest : public ::testing::Test {
 protected:
  TransitionTest()
      : ontology_(testing::attack_ontology()),
        doc_(testing::token_document("d", {"a", "b", "c"})) {
    std::mt19937_64 rng(5);
    gru_ = GruParameters::init(4, rng);
    slots_ = Matrix::Random(static_cast<Eigen::Index>(ontology_->slot_count()), 4);
    summary_ = RowVector::Random(4);
    state_ = EpisodeState::initial(3, 4);
    state_.memory = Matrix::Random(3, 4);
  }

  std::shared_ptr<const Ontology> ontology_;
  Document doc_;
  GruParameters gru_;
  Matrix slots_;
  RowVector summary_;
  EpisodeState state_;
};

TEST_F(TransitionTest, AllNullLeavesStateUntouched) {
  Action action = null_action(0, 3, *ontology_);
  EpisodeState next = transition(state_, action, summary_, gru_, slots_, doc_, *ontology_);
  EXPECT_EQ(next.memory, state_.memory);
  EXPECT_EQ(next.step, 0u);
  EXPECT_TRUE(next.generated.empty());
}

TEST_F(TransitionTest, OnlyAssignedRowsChange) {
  const std::size_t target = *ontology_->slot_index("Target");
  const std::size_t null = ontology_->null_slot();
  Action action{0, {null, target, null}};
  EpisodeState next = transition(state_, action, summary_, gru_, slots_, doc_, *ontology_);
  EXPECT_EQ(next.memory.row(0), state_.memory.row(0));
  EXPECT_EQ(next.memory.row(2), state_.memory.row(2));
  Matrix input(1, 8);
  input << slots_.row(static_cast<Eigen::Index>(target)), summary_;
  EXPECT_EQ(next.memory.row(1), gru_step(input, state_.memory.row(1), gru_));
  ASSERT_EQ(next.generated.size(), 1u);
  EXPECT_EQ(next.step, 1u);
  TemplateInstance expected{"Attack", {{"Target", {Filler::mention("m1")}}}};
  EXPECT_EQ(next.generated[0], expected);
}

TEST_F(TransitionTest, RepeatedActionKeepsMovingMemory) {
  Action action{0, {0, 1, ontology_->null_slot()}};
  EpisodeState one = transition(state_, action, summary_, gru_, slots_, doc_, *ontology_);
  EpisodeState two = transition(one, action, summary_, gru_, slots_, doc_, *ontology_);
  EXPECT_GT((two.memory - one.memory).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(two.generated.size(), 2u);
}

TEST_F(TransitionTest, IncompleteOrInvalidActionRejected) {
  const std::size_t victim = *ontology_->slot_index("Victim");
  for (const Action &bad : {Action{0, {0, 1}}, Action{0, {0, victim, 0}}}) {
    try {
      transition(state_, bad, summary_, gru_, slots_, doc_, *ontology_);
      FAIL();
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kIncompleteAssignment);
    }
  }
}

TEST(GreedyActionTest, TiesGoToLowestSlot) {
  SlotDistribution dist;
  dist.log_probs = (Matrix(2, 3) << std::log(0.5), -INFINITY, std::log(0.5),
                    std::log(0.25), std::log(0.25), std::log(0.5))
                       .finished();
  Action action = greedy_action(dist);
  EXPECT_EQ(action.slots, (std::vector<std::size_t>{0, 2}));
}

// One type "T" with one slot "A"; global slots [A, null]. With d = 2 the
// hand-set model sees only the first memory coordinate, which grows
// 0 -> 0.5c -> 0.75c with every update (z = 1/2, constant candidate c).
// Slot A wins while tanh(tanh(m)) < 0.5, so the policy fills A twice and
// then assigns the null slot everywhere.
class CountingModelTest : public ::testing::Test {
 protected:
  CountingModelTest() {
    std::vector<TemplateType> types{{"T", {{"A", SlotKind::kEntity, {}, false}}}};
    ModelConfig cfg;
    cfg.dim = 2;
    cfg.layers = 1;
    cfg.heads = 1;
    model_ = std::make_unique<Model>(std::make_shared<const Ontology>(types), cfg);
    PolicyParameters &p = model_->policy;
    p.template_embeddings.value.setZero();
    p.ind_w1.value.setZero();
    p.ind_w1.value(2, 0) = 1.0;
    p.ind_b1.value.setZero();
    p.ind_w2.value << 1.0, 0.0, 0.0, 0.0;
    p.ind_b2.value << 0.0, 1.0;
    const double k = 20.0;
    p.slot_embeddings.value << -k, k * 0.5 / std::tanh(1.0), 0.0, 0.0;
    GruParameters &g = model_->gru;
    for (Parameter *q : {&g.wz, &g.uz, &g.bz, &g.wh, &g.uh}) q->value.setZero();
    g.bh.value << 3.0, 0.0;
    doc_ = std::make_unique<Document>(testing::token_document("d", {"bomb"}));
    enc_.rows = Matrix::Zero(1, 2);
  }

  std::unique_ptr<Model> model_;
  std::unique_ptr<Document> doc_;
  SpanEncoding enc_;
};

TEST_F(CountingModelTest, TwoTemplatesThenStop) {
  DecodeStats stats;
  auto out = decode(*doc_, enc_, *model_, PolicyHead::kIndependent, 10, &stats);
  EXPECT_EQ(out.size(), 2u);
  EXPECT_EQ(stats.policy_evaluations, 3u);
  for (const TemplateInstance &t : out) {
    EXPECT_EQ(t, (TemplateInstance{"T", {{"A", {Filler::mention("m0")}}}}));
  }
}

TEST_F(CountingModelTest, MaxIterCapsTemplates) {
  DecodeStats stats;
  auto out = decode(*doc_, enc_, *model_, PolicyHead::kIndependent, 1, &stats);
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(stats.policy_evaluations, 1u);
  EXPECT_THROW(decode(*doc_, enc_, *model_, PolicyHead::kIndependent, 0), Error);
}

TEST_F(CountingModelTest, NullBiasStopsImmediately) {
  model_->policy.slot_embeddings.value.row(1) << 0.0, 100.0;
  // Joint head output pinned to [0, 1] by the final layer norm.
  model_->policy.final_gain.value.setZero();
  model_->policy.final_bias.value << 0.0, 1.0;
  for (PolicyHead head : {PolicyHead::kIndependent, PolicyHead::kJoint}) {
    DecodeStats stats;
    EXPECT_TRUE(decode(*doc_, enc_, *model_, head, 10, &stats).empty());
    EXPECT_EQ(stats.policy_evaluations, 1u);
  }
}

TEST(DecodeTest, ProperTemplatesAndNullMemoryConservation) {
  auto ontology = testing::attack_ontology();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.seed = seed;
    Model model(ontology, cfg);
    Document doc = testing::token_document("d", {"a", "b", "c", "d", "e"});
    for (PolicyHead head : {PolicyHead::kIndependent, PolicyHead::kJoint}) {
      DecodeStats stats;
      auto out = extract(doc, model, head, 4, &stats);
      EXPECT_LE(stats.policy_evaluations, 4 * ontology->type_count() + ontology->type_count());
      for (const TemplateInstance &t : out) {
        validate_template(t, doc, *ontology);
        EXPECT_EQ(t.fillers.count(std::string(Ontology::kNullSlot)), 0u);
      }
      EXPECT_EQ(out, extract(doc, model, head, 4));
    }
  }
}

}  // namespace
}  // namespace iterx
