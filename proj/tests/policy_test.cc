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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "iterx/error.h"
#include "iterx/policy.h"
#include "test_util.h"

namespace iterx {
namespace {

Matrix random_state(Eigen::Index rows, int dim, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

using HeadFn = std::pair<SlotDistribution, TemplateSummary> (*)(
    const Matrix &, std::string_view, const PolicyParameters &, const Ontology &);

class PolicyHeadTest : public ::testing::TestWithParam<PolicyHead> {
 protected:
  PolicyHeadTest() : ontology_(testing::attack_ontology()) {
    params_ = PolicyParameters::init(8, ontology_->type_count(),
                                     ontology_->slot_count(), 2, 2, 4, rng_);
  }
  std::pair<SlotDistribution, TemplateSummary> run(const Matrix &x,
                                                   std::string_view type) {
    HeadFn fn = GetParam() == PolicyHead::kIndependent ? &independent_policy
                                                       : &joint_policy;
    return fn(x, type, params_, *ontology_);
  }

  std::mt19937_64 rng_{21};
  std::shared_ptr<const Ontology> ontology_;
  PolicyParameters params_;
};

TEST_P(PolicyHeadTest, RowsAreStochasticAndMasked) {
  for (int trial = 0; trial < 20; ++trial) {
    for (const char *type : {"Attack", "Kidnapping"}) {
      Matrix x = random_state(5, 8, rng_);
      auto [dist, summary] = run(x, type);
      const std::size_t t = ontology_->require_type(type);
      Matrix p = dist.probabilities();
      ASSERT_EQ(p.rows(), 5);
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-6);
        for (std::size_t s = 0; s < ontology_->slot_count(); ++s) {
          const double v = p(i, static_cast<Eigen::Index>(s));
          EXPECT_GE(v, 0.0);
          EXPECT_LE(v, 1.0);
          if (!ontology_->slot_valid(t, s)) EXPECT_EQ(v, 0.0);
        }
      }
      EXPECT_TRUE(summary.allFinite());
    }
  }
}

TEST_P(PolicyHeadTest, UnknownTypeRejected) {
  try {
    run(random_state(2, 8, rng_), "Hijacking");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownTemplateType);
  }
}

TEST_P(PolicyHeadTest, NoSpansGivesEmptyDistribution) {
  auto [dist, summary] = run(Matrix(0, 8), "Attack");
  EXPECT_EQ(dist.span_count(), 0);
  EXPECT_EQ(summary.cols(), 8);
  EXPECT_TRUE(summary.allFinite());
}

TEST_P(PolicyHeadTest, PermutingSpansPermutesRows) {
  Matrix x = random_state(6, 8, rng_);
  std::vector<int> order{3, 0, 5, 1, 4, 2};
  Matrix permuted(6, 8);
  for (int i = 0; i < 6; ++i) permuted.row(i) = x.row(order[i]);
  auto [a, ta] = run(x, "Kidnapping");
  auto [b, tb] = run(permuted, "Kidnapping");
  Matrix pa = a.probabilities(), pb = b.probabilities();
  for (int i = 0; i < 6; ++i) {
    EXPECT_LT((pb.row(i) - pa.row(order[i])).norm(), 1e-12);
  }
  EXPECT_LT((ta - tb).norm(), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Heads, PolicyHeadTest,
                         ::testing::Values(PolicyHead::kIndependent,
                                           PolicyHead::kJoint),
                         [](const auto &info) {
                           return std::string(to_string(info.param));
                         });

TEST(IndependentPolicyTest, SummaryIsTemplateEmbedding) {
  std::mt19937_64 rng(2);
  auto ontology = testing::attack_ontology();
  auto params = PolicyParameters::init(4, 2, ontology->slot_count(), 1, 2, 4, rng);
  auto [dist, summary] = independent_policy(random_state(3, 4, rng), "Kidnapping",
                                            params, *ontology);
  EXPECT_EQ(summary, params.template_embeddings.value.row(1));
}

TEST(IndependentPolicyTest, SpansAreIndependent) {
  std::mt19937_64 rng(4);
  auto ontology = testing::attack_ontology();
  auto params = PolicyParameters::init(8, 2, ontology->slot_count(), 2, 2, 4, rng);
  Matrix x = random_state(4, 8, rng);
  Matrix y = x;
  y.row(2) = random_state(1, 8, rng);
  Matrix px = independent_policy(x, "Attack", params, *ontology).first.probabilities();
  Matrix py = independent_policy(y, "Attack", params, *ontology).first.probabilities();
  for (int i : {0, 1, 3}) EXPECT_EQ(px.row(i), py.row(i));
  EXPECT_NE(px.row(2), py.row(2));
  // The joint head mixes spans through attention.
  Matrix jx = joint_policy(x, "Attack", params, *ontology).first.probabilities();
  Matrix jy = joint_policy(y, "Attack", params, *ontology).first.probabilities();
  EXPECT_NE(jx.row(0), jy.row(0));
}

TEST(IndependentPolicyTest, NullOnlyTypeAssignsNullWithCertainty) {
  std::vector<TemplateType> types{{"Quiet", {}},
                                  {"Loud", {{"Noise", SlotKind::kEntity, {}, false}}}};
  Ontology ontology(types);
  std::mt19937_64 rng(8);
  auto params = PolicyParameters::init(4, 2, ontology.slot_count(), 1, 1, 4, rng);
  for (HeadFn fn : {HeadFn{&independent_policy}, HeadFn{&joint_policy}}) {
    auto [dist, summary] = fn(random_state(3, 4, rng), "Quiet", params, ontology);
    for (Eigen::Index i = 0; i < 3; ++i) {
      EXPECT_EQ(dist.log_probs(i, static_cast<Eigen::Index>(ontology.null_slot())), 0.0);
    }
    EXPECT_EQ(action_log_prob(dist, {ontology.null_slot(), ontology.null_slot(),
                                     ontology.null_slot()}),
              0.0);
  }
}

TEST(IndependentPolicyTest, MatchesHandCalculation) {
  // One type with slots A, B; global slots [A, B, null].
  std::vector<TemplateType> types{{"T", {{"A", SlotKind::kEntity, {}, false},
                                         {"B", SlotKind::kEntity, {}, false}}}};
  Ontology ontology(types);
  std::mt19937_64 rng(1);
  auto params = PolicyParameters::init(2, 1, 3, 0, 1, 1, rng);
  const double t[2] = {0.3, -0.7};
  const double x[2] = {1.1, 0.4};
  const double w1[4][2] = {{0.5, -0.2}, {0.1, 0.9}, {-0.6, 0.3}, {0.8, 0.05}};
  const double b1[2] = {0.1, -0.3};
  const double w2[2][2] = {{1.3, -0.4}, {0.7, 0.2}};
  const double b2[2] = {-0.05, 0.15};
  const double s[3][2] = {{0.9, -1.1}, {-0.4, 0.6}, {0.2, 0.3}};
  params.template_embeddings.value << t[0], t[1];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) params.ind_w1.value(i, j) = w1[i][j];
  params.ind_b1.value << b1[0], b1[1];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) params.ind_w2.value(i, j) = w2[i][j];
  params.ind_b2.value << b2[0], b2[1];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) params.slot_embeddings.value(i, j) = s[i][j];

  const double in[4] = {t[0], t[1], x[0], x[1]};
  double h1[2], h2[2];
  for (int j = 0; j < 2; ++j) {
    double acc = b1[j];
    for (int i = 0; i < 4; ++i) acc += in[i] * w1[i][j];
    h1[j] = std::tanh(acc);
  }
  for (int j = 0; j < 2; ++j) {
    double acc = b2[j];
    for (int i = 0; i < 2; ++i) acc += h1[i] * w2[i][j];
    h2[j] = std::tanh(acc);
  }
  double logits[3], z = 0;
  for (int k = 0; k < 3; ++k) {
    logits[k] = s[k][0] * h2[0] + s[k][1] * h2[1];
    z += std::exp(logits[k]);
  }
  Matrix state(1, 2);
  state << x[0], x[1];
  Matrix p = independent_policy(state, "T", params, ontology).first.probabilities();
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(p(0, k), std::exp(logits[k]) / z, 1e-14);
}

TEST(ActionLogProbTest, ProductOfSpanProbabilities) {
  SlotDistribution dist;
  dist.log_probs = (Matrix(2, 2) << std::log(0.7), std::log(0.3), std::log(0.2),
                    std::log(0.8))
                       .finished();
  EXPECT_NEAR(action_log_prob(dist, {0, 1}), std::log(0.56), 1e-15);
}

TEST(ActionLogProbTest, MaskedSlotGivesNegativeInfinity) {
  SlotDistribution dist;
  dist.log_probs = (Matrix(2, 3) << std::log(0.5), -std::numeric_limits<double>::infinity(),
                    std::log(0.5), 0.0, -std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity())
                       .finished();
  EXPECT_EQ(action_log_prob(dist, {0, 1}), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(action_log_prob(dist, {2, 0}), std::log(0.5));
}

TEST(ActionLogProbTest, IncompleteAssignmentRejected) {
  SlotDistribution dist;
  dist.log_probs = Matrix::Zero(2, 1);
  for (std::vector<std::size_t> bad : {std::vector<std::size_t>{0},
                                       std::vector<std::size_t>{0, 0, 0},
                                       std::vector<std::size_t>{0, 4}}) {
    try {
      action_log_prob(dist, bad);
      FAIL();
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kIncompleteAssignment);
    }
  }
}

TEST(PolicyParametersTest, CountIsFunctionOfShape) {
  auto count = [](int d, std::size_t types, std::size_t slots, int layers, int heads) {
    std::mt19937_64 rng(0);
    auto p = PolicyParameters::init(d, types, slots, layers, heads, 4, rng);
    std::size_t n = 0;
    p.for_each([&](Parameter &param) { n += static_cast<std::size_t>(param.size()); });
    return n;
  };
  const int d = 8;
  const std::size_t layer = 4 * d * d + 4 * d + 4 * d + 2 * (4 * d * d) + 4 * d + d;
  const std::size_t expected = 2 * d + 5 * d + (2 * d * d + d + d * d + d) +
                               2 * layer + 2 * d;
  EXPECT_EQ(count(d, 2, 5, 2, 4), expected);
  EXPECT_EQ(count(d, 2, 5, 2, 4), count(d, 2, 5, 2, 2));
  EXPECT_THROW(count(6, 1, 2, 1, 4), Error);
}

}  // namespace
}  // namespace iterx
