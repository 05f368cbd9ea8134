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

#include "iterx/policy.h"

#include <cmath>
#include <limits>
#include <string>

#include "iterx/error.h"
#include "iterx/init.h"

namespace iterx {

std::string_view to_string(PolicyHead head) {
  return head == PolicyHead::kIndependent ? "independent" : "joint";
}

std::optional<PolicyHead> parse_policy_head(std::string_view text) {
  if (text == "independent") return PolicyHead::kIndependent;
  if (text == "joint") return PolicyHead::kJoint;
  return std::nullopt;
}

PolicyParameters PolicyParameters::init(int dim, std::size_t template_types,
                                        std::size_t slot_types, int layers,
                                        int heads, int ff_multiplier,
                                        std::mt19937_64 &rng) {
  if (dim <= 0 || heads <= 0 || dim % heads != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding width must be a positive multiple of the head count");
  }
  const double embed_std = 1.0 / std::sqrt(static_cast<double>(dim));
  PolicyParameters p;
  p.heads = heads;
  p.template_embeddings =
      gaussian_parameter("policy.template_embeddings",
                         static_cast<int>(template_types), dim, rng, 1.0);
  p.slot_embeddings = gaussian_parameter(
      "policy.slot_embeddings", static_cast<int>(slot_types), dim, rng,
      embed_std);
  p.ind_w1 = random_parameter("policy.independent.w1", 2 * dim, dim, rng);
  p.ind_b1 = zero_parameter("policy.independent.b1", 1, dim);
  p.ind_w2 = random_parameter("policy.independent.w2", dim, dim, rng);
  p.ind_b2 = zero_parameter("policy.independent.b2", 1, dim);
  const int ff = ff_multiplier * dim;
  for (int l = 0; l < layers; ++l) {
    const std::string prefix = "policy.joint.layer" + std::to_string(l) + ".";
    TransformerLayer layer;
    layer.norm1_gain = constant_parameter(prefix + "norm1_gain", 1, dim, 1.0);
    layer.norm1_bias = zero_parameter(prefix + "norm1_bias", 1, dim);
    layer.query = random_parameter(prefix + "query", dim, dim, rng);
    layer.query_bias = zero_parameter(prefix + "query_bias", 1, dim);
    layer.key = random_parameter(prefix + "key", dim, dim, rng);
    layer.key_bias = zero_parameter(prefix + "key_bias", 1, dim);
    layer.value = random_parameter(prefix + "value", dim, dim, rng);
    layer.value_bias = zero_parameter(prefix + "value_bias", 1, dim);
    layer.output = random_parameter(prefix + "output", dim, dim, rng);
    layer.output_bias = zero_parameter(prefix + "output_bias", 1, dim);
    layer.norm2_gain = constant_parameter(prefix + "norm2_gain", 1, dim, 1.0);
    layer.norm2_bias = zero_parameter(prefix + "norm2_bias", 1, dim);
    layer.ff1 = random_parameter(prefix + "ff1", dim, ff, rng);
    layer.ff1_bias = zero_parameter(prefix + "ff1_bias", 1, ff);
    layer.ff2 = random_parameter(prefix + "ff2", ff, dim, rng);
    layer.ff2_bias = zero_parameter(prefix + "ff2_bias", 1, dim);
    p.layers.push_back(std::move(layer));
  }
  p.final_gain = constant_parameter("policy.joint.final_gain", 1, dim, 1.0);
  p.final_bias = zero_parameter("policy.joint.final_bias", 1, dim);
  return p;
}

namespace {

ad::Var linear(ad::Tape &tape, const ad::Var &x, Parameter &w, Parameter &b) {
  return ad::add_row(ad::matmul(x, tape.parameter(w)), tape.parameter(b));
}

ad::Var self_attention(ad::Tape &tape, const ad::Var &x, TransformerLayer &layer,
                       int heads) {
  ad::Var q = linear(tape, x, layer.query, layer.query_bias);
  ad::Var k = linear(tape, x, layer.key, layer.key_bias);
  ad::Var v = linear(tape, x, layer.value, layer.value_bias);
  const Eigen::Index head_dim = x.cols() / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<ad::Var> outputs;
  for (int h = 0; h < heads; ++h) {
    ad::Var qh = ad::slice_cols(q, h * head_dim, head_dim);
    ad::Var kh = ad::slice_cols(k, h * head_dim, head_dim);
    ad::Var vh = ad::slice_cols(v, h * head_dim, head_dim);
    ad::Var weights = ad::softmax_rows(ad::affine(ad::matmul_nt(qh, kh), scale, 0.0));
    outputs.push_back(ad::matmul(weights, vh));
  }
  return linear(tape, ad::concat_cols(outputs), layer.output, layer.output_bias);
}

ad::Var transformer(ad::Tape &tape, ad::Var x, PolicyParameters &params) {
  for (TransformerLayer &layer : params.layers) {
    ad::Var normed = ad::layer_norm_rows(x, tape.parameter(layer.norm1_gain),
                                         tape.parameter(layer.norm1_bias));
    x = ad::add(x, self_attention(tape, normed, layer, params.heads));
    normed = ad::layer_norm_rows(x, tape.parameter(layer.norm2_gain),
                                 tape.parameter(layer.norm2_bias));
    ad::Var hidden = ad::tanh(linear(tape, normed, layer.ff1, layer.ff1_bias));
    x = ad::add(x, linear(tape, hidden, layer.ff2, layer.ff2_bias));
  }
  return ad::layer_norm_rows(x, tape.parameter(params.final_gain),
                             tape.parameter(params.final_bias));
}

}  // namespace

std::vector<bool> assignable_slots(const Ontology &ontology, std::size_t type) {
  std::vector<bool> valid(ontology.slot_count());
  for (std::size_t s = 0; s < valid.size(); ++s) {
    if (s == ontology.null_slot()) {
      valid[s] = true;
      continue;
    }
    const SlotDef *slot = ontology.slot_valid(type, s)
                              ? ontology.find_slot(type, ontology.slot_name(s))
                              : nullptr;
    valid[s] = slot != nullptr && slot->kind != SlotKind::kBoolean &&
               slot->kind != SlotKind::kCategorical;
  }
  return valid;
}

PolicyOutput run_policy(ad::Tape &tape, PolicyHead head, const ad::Var &state,
                        std::size_t type, PolicyParameters &params,
                        const Ontology &ontology) {
  if (type >= ontology.type_count()) {
    throw Error(ErrorCode::kUnknownTemplateType, "template type index out of range");
  }
  const Eigen::Index spans = state.rows();
  ad::Var slots = tape.parameter(params.slot_embeddings);
  ad::Var t = ad::slice_rows(tape.parameter(params.template_embeddings),
                             static_cast<Eigen::Index>(type), 1);
  const std::vector<bool> valid = assignable_slots(ontology, type);

  if (head == PolicyHead::kIndependent) {
    if (spans == 0) {
      return {tape.constant(Matrix(0, ontology.slot_count())), t};
    }
    ad::Var input = ad::concat_cols({ad::repeat_row(t, spans), state});
    ad::Var hidden = ad::tanh(linear(tape, input, params.ind_w1, params.ind_b1));
    ad::Var out = ad::tanh(linear(tape, hidden, params.ind_w2, params.ind_b2));
    return {ad::masked_log_softmax_rows(ad::matmul_nt(out, slots), valid), t};
  }

  ad::Var sequence = spans == 0 ? t : ad::concat_rows({t, state});
  ad::Var encoded = transformer(tape, sequence, params);
  ad::Var summary = ad::slice_rows(encoded, 0, 1);
  if (spans == 0) {
    return {tape.constant(Matrix(0, ontology.slot_count())), summary};
  }
  ad::Var span_states = ad::slice_rows(encoded, 1, spans);
  return {ad::masked_log_softmax_rows(ad::matmul_nt(span_states, slots), valid),
          summary};
}

namespace {

std::pair<SlotDistribution, TemplateSummary> evaluate_head(
    PolicyHead head, const Matrix &state, std::string_view type,
    const PolicyParameters &params, const Ontology &ontology) {
  const std::size_t type_index = ontology.require_type(type);
  if (!state.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "span states must be finite");
  }
  ad::Tape tape(/*record=*/false);
  // A non-recording tape only reads parameter values.
  auto &mutable_params = const_cast<PolicyParameters &>(params);
  PolicyOutput out = run_policy(tape, head, tape.constant(state), type_index,
                                mutable_params, ontology);
  return {SlotDistribution{out.log_probs.value(), type_index},
          out.summary.value()};
}

}  // namespace

std::pair<SlotDistribution, TemplateSummary> independent_policy(
    const Matrix &state, std::string_view type, const PolicyParameters &params,
    const Ontology &ontology) {
  return evaluate_head(PolicyHead::kIndependent, state, type, params, ontology);
}

std::pair<SlotDistribution, TemplateSummary> joint_policy(
    const Matrix &state, std::string_view type, const PolicyParameters &params,
    const Ontology &ontology) {
  return evaluate_head(PolicyHead::kJoint, state, type, params, ontology);
}

double action_log_prob(const SlotDistribution &dist,
                       const std::vector<std::size_t> &action) {
  if (static_cast<Eigen::Index>(action.size()) != dist.span_count()) {
    throw Error(ErrorCode::kIncompleteAssignment,
                "action covers " + std::to_string(action.size()) + " of " +
                    std::to_string(dist.span_count()) + " spans");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (static_cast<Eigen::Index>(action[i]) >= dist.log_probs.cols()) {
      throw Error(ErrorCode::kIncompleteAssignment, "unknown slot index");
    }
    const double lp = dist.log_probs(static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(action[i]));
    if (std::isinf(lp)) return -std::numeric_limits<double>::infinity();
    total += lp;
  }
  return total;
}

}  // namespace iterx
