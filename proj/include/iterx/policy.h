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

// Slot-assignment policies. Both heads map span states X (M x d) and a
// template type t to a per-span distribution over the global slot inventory,
// with slots outside S_t and the null slot masked to probability zero.

#ifndef ITERX_POLICY_H_
#define ITERX_POLICY_H_

#include <cmath>
#include <optional>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "iterx/core.h"
#include "iterx/tape.h"

namespace iterx {

using ad::Matrix;
using ad::Parameter;
using ad::RowVector;

enum class PolicyHead { kIndependent, kJoint };

std::string_view to_string(PolicyHead head);
std::optional<PolicyHead> parse_policy_head(std::string_view text);

// Pre-norm self-attention block with a tanh feedforward sublayer.
struct TransformerLayer {
  Parameter norm1_gain, norm1_bias;
  Parameter query, query_bias, key, key_bias, value, value_bias;
  Parameter output, output_bias;
  Parameter norm2_gain, norm2_bias;
  Parameter ff1, ff1_bias, ff2, ff2_bias;

  template <typename F>
  void for_each(F &&f) {
    for (Parameter *p :
         {&norm1_gain, &norm1_bias, &query, &query_bias, &key, &key_bias,
          &value, &value_bias, &output, &output_bias, &norm2_gain, &norm2_bias,
          &ff1, &ff1_bias, &ff2, &ff2_bias}) {
      f(*p);
    }
  }
};

struct PolicyParameters {
  Parameter template_embeddings;  // |T| x d
  // |S| x d, null slot in the last row. Also the output projection of both
  // heads: slot logits are s^T h.
  Parameter slot_embeddings;
  // Independent head: FFN([t ; x]) with widths 2d -> d -> d.
  Parameter ind_w1, ind_b1, ind_w2, ind_b2;
  // Joint head: span-level transformer over (t, x_1, ..., x_M).
  std::vector<TransformerLayer> layers;
  Parameter final_gain, final_bias;
  int heads = 4;

  static PolicyParameters init(int dim, std::size_t template_types,
                               std::size_t slot_types, int layers, int heads,
                               int ff_multiplier, std::mt19937_64 &rng);

  int dim() const { return static_cast<int>(slot_embeddings.value.cols()); }

  template <typename F>
  void for_each(F &&f) {
    f(template_embeddings);
    f(slot_embeddings);
    f(ind_w1);
    f(ind_b1);
    f(ind_w2);
    f(ind_b2);
    for (TransformerLayer &layer : layers) layer.for_each(f);
    f(final_gain);
    f(final_bias);
  }
};

// Row i is P(. | t, x_i) over the global slot inventory.
struct SlotDistribution {
  Matrix log_probs;
  std::size_t type = 0;

  Eigen::Index span_count() const { return log_probs.rows(); }
  Matrix probabilities() const {
    // std::exp maps -infinity to exactly 0; vectorized exp does not.
    return log_probs.unaryExpr([](double v) { return std::exp(v); });
  }
};

using TemplateSummary = RowVector;

// Slots a span may take under type t: mention-valued slots of S_t plus the
// null slot. Boolean and categorical slots have no span fillers.
std::vector<bool> assignable_slots(const Ontology &ontology, std::size_t type);

// Tape-level forward pass shared by training and inference. `summary` is
// t for the independent head and the transformer output at position 0 for
// the joint head.
struct PolicyOutput {
  ad::Var log_probs;
  ad::Var summary;
};

PolicyOutput run_policy(ad::Tape &tape, PolicyHead head, const ad::Var &state,
                        std::size_t type, PolicyParameters &params,
                        const Ontology &ontology);

// Errors: kUnknownTemplateType.
std::pair<SlotDistribution, TemplateSummary> independent_policy(
    const Matrix &state, std::string_view type, const PolicyParameters &params,
    const Ontology &ontology);
std::pair<SlotDistribution, TemplateSummary> joint_policy(
    const Matrix &state, std::string_view type, const PolicyParameters &params,
    const Ontology &ontology);

// Sum over spans of log P(action[i] | t, x_i). Returns -infinity when any
// assigned slot is masked. Throws kIncompleteAssignment when the action does
// not cover every span with a known slot index.
double action_log_prob(const SlotDistribution &dist,
                       const std::vector<std::size_t> &action);

}  // namespace iterx

#endif  // ITERX_POLICY_H_
