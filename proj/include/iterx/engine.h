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

// The extraction environment: span memory, GRU transitions and the greedy
// decoder with the all-null stopping rule.

#ifndef ITERX_ENGINE_H_
#define ITERX_ENGINE_H_

#include <cstddef>
#include <vector>

#include "iterx/core.h"
#include "iterx/embed.h"
#include "iterx/model.h"
#include "iterx/policy.h"

namespace iterx {

// A full assignment for one template type: slots[i] is the global slot index
// given to candidate mention i.
struct Action {
  std::size_t type = 0;
  std::vector<std::size_t> slots;

  bool all_null(const Ontology &ontology) const;
  friend bool operator==(const Action &, const Action &) = default;
};

Action null_action(std::size_t type, std::size_t spans, const Ontology &ontology);

struct EpisodeState {
  Matrix memory;  // M x d, one row per span
  std::vector<TemplateInstance> generated;
  std::size_t step = 0;

  static EpisodeState initial(Eigen::Index spans, int dim);
};

// X = x_enc + x_mem. Throws kShapeMismatch.
Matrix state_input(const SpanEncoding &enc, const EpisodeState &state);

// Per-span argmax; ties go to the lowest slot index, which puts the null
// slot (last) behind every content slot.
Action greedy_action(const SlotDistribution &dist);

// The template given by the non-null assignments, in canonical form.
// Throws kIncompleteAssignment.
TemplateInstance materialize(const Action &action, const Document &doc,
                             const Ontology &ontology);

// Memory rows of spans with a non-null slot s become GRU(x_mem, [s ; t^]);
// the others pass through untouched.
ad::Var update_memory(ad::Tape &tape, const ad::Var &memory,
                      const Action &action, const ad::Var &summary,
                      const ad::Var &slot_embeddings, GruParameters &gru,
                      const Ontology &ontology);

// Applies an action. An all-null action leaves the state unchanged.
// Throws kIncompleteAssignment.
EpisodeState transition(const EpisodeState &state, const Action &action,
                        const TemplateSummary &summary,
                        const GruParameters &gru, const Matrix &slot_embeddings,
                        const Document &doc, const Ontology &ontology);

struct DecodeStats {
  std::size_t policy_evaluations = 0;
};

// Greedy decoding over every template type in ontology order. Each type runs
// until the policy assigns the null slot to every span or max_iter templates
// were emitted. Throws kInvalidArgument for max_iter == 0.
std::vector<TemplateInstance> decode(const Document &doc,
                                     const SpanEncoding &enc,
                                     const Model &model, PolicyHead head,
                                     std::size_t max_iter,
                                     DecodeStats *stats = nullptr);

// Embeds, encodes and decodes one document.
std::vector<TemplateInstance> extract(const Document &doc, const Model &model,
                                      PolicyHead head, std::size_t max_iter,
                                      DecodeStats *stats = nullptr);

// Extracts every document; `stats` accumulates over the corpus. Throws
// kOntologyMismatch.
TemplateMap extract_corpus(const Corpus &corpus, const Model &model, PolicyHead head,
                           std::size_t max_iter, DecodeStats *stats = nullptr);

SpanEncoding encode_document(const Document &doc, const Model &model);

}  // namespace iterx

#endif  // ITERX_ENGINE_H_
