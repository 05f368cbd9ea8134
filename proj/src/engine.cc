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

#include "iterx/engine.h"

#include <string>

#include "iterx/error.h"

namespace iterx {

bool Action::all_null(const Ontology &ontology) const {
  for (std::size_t s : slots) {
    if (s != ontology.null_slot()) return false;
  }
  return true;
}

Action null_action(std::size_t type, std::size_t spans, const Ontology &ontology) {
  return Action{type, std::vector<std::size_t>(spans, ontology.null_slot())};
}

EpisodeState EpisodeState::initial(Eigen::Index spans, int dim) {
  EpisodeState state;
  state.memory = Matrix::Zero(spans, dim);
  return state;
}

Matrix state_input(const SpanEncoding &enc, const EpisodeState &state) {
  if (enc.rows.rows() != state.memory.rows() ||
      enc.rows.cols() != state.memory.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "span encoding and memory shapes differ");
  }
  return enc.rows + state.memory;
}

Action greedy_action(const SlotDistribution &dist) {
  Action action;
  action.type = dist.type;
  action.slots.resize(static_cast<std::size_t>(dist.span_count()));
  for (Eigen::Index i = 0; i < dist.log_probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index s = 1; s < dist.log_probs.cols(); ++s) {
      if (dist.log_probs(i, s) > dist.log_probs(i, best)) best = s;
    }
    action.slots[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return action;
}

namespace {

void check_action(const Action &action, std::size_t spans,
                  const Ontology &ontology) {
  if (action.slots.size() != spans) {
    throw Error(ErrorCode::kIncompleteAssignment,
                "action covers " + std::to_string(action.slots.size()) +
                    " of " + std::to_string(spans) + " spans");
  }
  if (action.type >= ontology.type_count()) {
    throw Error(ErrorCode::kUnknownTemplateType, "template type index out of range");
  }
  const std::vector<bool> valid = assignable_slots(ontology, action.type);
  for (std::size_t s : action.slots) {
    if (s >= valid.size() || !valid[s]) {
      throw Error(ErrorCode::kIncompleteAssignment,
                  "slot index not assignable for this template type");
    }
  }
}

}  // namespace

TemplateInstance materialize(const Action &action, const Document &doc,
                             const Ontology &ontology) {
  check_action(action, doc.mention_count(), ontology);
  TemplateInstance instance;
  instance.type = ontology.template_types()[action.type].name;
  for (std::size_t i = 0; i < action.slots.size(); ++i) {
    const std::size_t s = action.slots[i];
    if (s == ontology.null_slot()) continue;
    instance.fillers[ontology.slot_name(s)].push_back(
        Filler::mention(doc.mentions()[i].id));
  }
  canonicalize(instance, doc);
  return instance;
}

ad::Var update_memory(ad::Tape &tape, const ad::Var &memory,
                      const Action &action, const ad::Var &summary,
                      const ad::Var &slot_embeddings, GruParameters &gru,
                      const Ontology &ontology) {
  std::vector<int> rows;
  std::vector<int> slots;
  for (std::size_t i = 0; i < action.slots.size(); ++i) {
    if (action.slots[i] == ontology.null_slot()) continue;
    rows.push_back(static_cast<int>(i));
    slots.push_back(static_cast<int>(action.slots[i]));
  }
  if (rows.empty()) return memory;
  const auto count = static_cast<Eigen::Index>(rows.size());
  ad::Var input = ad::concat_cols(
      {ad::gather_rows(slot_embeddings, slots), ad::repeat_row(summary, count)});
  ad::Var updated = gru_step(tape, input, ad::gather_rows(memory, rows), gru);
  return ad::scatter_rows(memory, rows, updated);
}

EpisodeState transition(const EpisodeState &state, const Action &action,
                        const TemplateSummary &summary,
                        const GruParameters &gru, const Matrix &slot_embeddings,
                        const Document &doc, const Ontology &ontology) {
  check_action(action, static_cast<std::size_t>(state.memory.rows()), ontology);
  if (action.all_null(ontology)) return state;
  EpisodeState next;
  ad::Tape tape(/*record=*/false);
  next.memory = update_memory(tape, tape.constant(state.memory), action,
                              tape.constant(summary), tape.constant(slot_embeddings),
                              const_cast<GruParameters &>(gru), ontology)
                    .value();
  next.generated = state.generated;
  next.generated.push_back(materialize(action, doc, ontology));
  next.step = state.step + 1;
  return next;
}

SpanEncoding encode_document(const Document &doc, const Model &model) {
  return encode_spans(doc, embed_tokens(doc, model.embedder()), model.encoder);
}

std::vector<TemplateInstance> decode(const Document &doc,
                                     const SpanEncoding &enc,
                                     const Model &model, PolicyHead head,
                                     std::size_t max_iter, DecodeStats *stats) {
  if (max_iter == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_iter must be at least 1");
  }
  const Ontology &ontology = model.ontology();
  std::vector<TemplateInstance> output;
  for (std::size_t type = 0; type < ontology.type_count(); ++type) {
    const std::string &name = ontology.template_types()[type].name;
    EpisodeState state = EpisodeState::initial(enc.rows.rows(), model.config().dim);
    while (state.step < max_iter) {
      const Matrix x = state_input(enc, state);
      auto [dist, summary] = head == PolicyHead::kIndependent
                                 ? independent_policy(x, name, model.policy, ontology)
                                 : joint_policy(x, name, model.policy, ontology);
      if (stats != nullptr) ++stats->policy_evaluations;
      const Action action = greedy_action(dist);
      if (action.all_null(ontology)) break;
      state = transition(state, action, summary, model.gru,
                         model.policy.slot_embeddings.value, doc, ontology);
    }
    for (TemplateInstance &t : state.generated) output.push_back(std::move(t));
  }
  return output;
}

std::vector<TemplateInstance> extract(const Document &doc, const Model &model,
                                      PolicyHead head, std::size_t max_iter,
                                      DecodeStats *stats) {
  return decode(doc, encode_document(doc, model), model, head, max_iter, stats);
}

TemplateMap extract_corpus(const Corpus &corpus, const Model &model, PolicyHead head,
                           std::size_t max_iter, DecodeStats *stats) {
  if (corpus.ontology && corpus.ontology->fingerprint() != model.ontology().fingerprint()) {
    throw Error(ErrorCode::kOntologyMismatch, "corpus and model ontologies differ");
  }
  TemplateMap out;
  for (const Document &doc : corpus.documents) {
    out[doc.id()] = extract(doc, model, head, max_iter, stats);
  }
  return out;
}

}  // namespace iterx
