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

// Granular template scoring with partial filler credit.
//
// Filler credit: boolean and categorical fillers score 1 on exact match.
// Entity fillers score only when every predicted mention lies in the
// reference entity; the credit of a mention halves for each more
// informative tier (name, nominal) present in the reference, and the best
// predicted mention counts. Event fillers score 1 when the predicted
// mentions are a subset of the reference event. Slots requiring time and
// irrealis give 0.5 * base + 0.25 per matching attachment set / irrealis
// value, provided base > 0.

#ifndef ITERX_GRANULAR_H_
#define ITERX_GRANULAR_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "iterx/core.h"
#include "iterx/metrics.h"
#include "json.hpp"

namespace iterx {

// Credit of one predicted filler against one reference filler of `slot`.
double filler_credit(const Filler &reference, const Filler &predicted,
                     const SlotDef &slot, const Document &doc);

struct GranularSlotRow {
  std::string slot;
  double credit = 0.0;
  std::size_t n_ref = 0;
  std::size_t n_pred = 0;
  std::size_t correct = 0;  // matched fillers with positive credit
};

struct GranularReport {
  Prf type_f1;
  Prf slot_f1;
  double combined = 0.0;  // type_f1.f1 * slot_f1.f1
  std::size_t matched_templates = 0;
  std::size_t n_ref_templates = 0;
  std::size_t n_pred_templates = 0;
  double slot_credit = 0.0;
  std::size_t n_ref_fillers = 0;
  std::size_t n_pred_fillers = 0;
  std::vector<GranularSlotRow> slots;  // global slot order
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> alignment;
};

// Throws kOntologyMismatch.
GranularReport granular_score(const std::vector<TemplateInstance> &reference,
                              const std::vector<TemplateInstance> &predicted,
                              const Document &doc, const Ontology &ontology);

// Micro pooling over documents. Throws kUnknownDocument.
GranularReport granular_corpus(const Corpus &corpus, const TemplateMap &predictions);

nlohmann::json to_json(const GranularReport &report);
std::string to_csv(const GranularReport &report);
std::string to_pretty(const GranularReport &report);

}  // namespace iterx

#endif  // ITERX_GRANULAR_H_
