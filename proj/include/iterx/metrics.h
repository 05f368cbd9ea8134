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

// CEAF-family template scoring.

#ifndef ITERX_METRICS_H_
#define ITERX_METRICS_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iterx/alignment.h"
#include "iterx/core.h"
#include "json.hpp"

namespace iterx {

enum class Phi { kPhi3, kPhi4, kPhiSubset };
enum class CeafVariant { kRmeRelaxed, kReeDef, kReeImpl };

std::string_view to_string(Phi phi);
std::string_view to_string(CeafVariant variant);
std::optional<Phi> parse_phi(std::string_view text);            // phi3 | phi4 | phi-subset
std::optional<CeafVariant> parse_variant(std::string_view text);  // rme | ree-def | ree-impl

// An entity as a sorted set of item keys. Mentions are keyed by their token
// boundaries, so two mentions with equal boundaries are the same item.
using EntityKey = std::vector<std::string>;

double phi_value(Phi phi, const EntityKey &reference, const EntityKey &predicted);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the matching denominator was zero (the value is reported as 0).
  bool precision_empty = false;
  bool recall_empty = false;
};

Prf make_prf(double p_num, double p_den, double r_num, double r_den);

struct Tally {
  double p_num = 0.0, p_den = 0.0;
  double r_num = 0.0, r_den = 0.0;
  std::size_t n_ref = 0, n_pred = 0;

  Tally &operator+=(const Tally &other);
  Prf prf() const { return make_prf(p_num, p_den, r_num, r_den); }
  bool has_mass() const { return p_den > 0.0 || r_den > 0.0; }
};

struct ScoreReport {
  CeafVariant variant = CeafVariant::kRmeRelaxed;
  Phi phi = Phi::kPhi3;
  bool legacy = false;  // ree_impl scores the template type as a slot
  // Global slot order, then the "type" pseudo-slot for ree_impl.
  std::vector<std::pair<std::string, Tally>> slots;
  std::vector<std::pair<std::string, Tally>> types;
  Tally micro_tally;
  Prf micro;
  Prf macro;  // means over slots with mass
  // Aligned (reference, predicted) template index pairs per document.
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> alignment;
  bool empty = false;  // no reference and no predicted mass at all

  const Tally *slot(std::string_view name) const;
};

inline constexpr std::string_view kTypePseudoSlot = "type";

// Scores one document. Throws kOntologyMismatch for templates whose type or
// slots are not in `ontology`.
ScoreReport entity_score(const std::vector<TemplateInstance> &reference,
                         const std::vector<TemplateInstance> &predicted,
                         const Document &doc, const Ontology &ontology,
                         CeafVariant variant, Phi phi);

// Pools numerators and denominators over all corpus documents. Throws
// kUnknownDocument for a prediction keyed by an unknown document.
ScoreReport score_corpus(const Corpus &corpus, const TemplateMap &predictions,
                         CeafVariant variant, Phi phi);

nlohmann::json to_json(const ScoreReport &report);
std::string to_csv(const ScoreReport &report);
std::string to_pretty(const ScoreReport &report);

}  // namespace iterx

#endif  // ITERX_METRICS_H_
