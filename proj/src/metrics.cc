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

#include "iterx/metrics.h"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "iterx/error.h"

namespace iterx {

std::string_view to_string(Phi phi) {
  switch (phi) {
    case Phi::kPhi3:
      return "phi3";
    case Phi::kPhi4:
      return "phi4";
    case Phi::kPhiSubset:
      return "phi-subset";
  }
  return "phi3";
}

std::string_view to_string(CeafVariant variant) {
  switch (variant) {
    case CeafVariant::kRmeRelaxed:
      return "rme";
    case CeafVariant::kReeDef:
      return "ree-def";
    case CeafVariant::kReeImpl:
      return "ree-impl";
  }
  return "rme";
}

std::optional<Phi> parse_phi(std::string_view text) {
  if (text == "phi3") return Phi::kPhi3;
  if (text == "phi4") return Phi::kPhi4;
  if (text == "phi-subset") return Phi::kPhiSubset;
  return std::nullopt;
}

std::optional<CeafVariant> parse_variant(std::string_view text) {
  if (text == "rme") return CeafVariant::kRmeRelaxed;
  if (text == "ree-def") return CeafVariant::kReeDef;
  if (text == "ree-impl") return CeafVariant::kReeImpl;
  return std::nullopt;
}

namespace {

std::size_t intersection_size(const EntityKey &a, const EntityKey &b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

}  // namespace

double phi_value(Phi phi, const EntityKey &reference, const EntityKey &predicted) {
  const auto common = static_cast<double>(intersection_size(reference, predicted));
  switch (phi) {
    case Phi::kPhi3:
      return common;
    case Phi::kPhi4: {
      const double size = static_cast<double>(reference.size() + predicted.size());
      return size == 0.0 ? 0.0 : 2.0 * common / size;
    }
    case Phi::kPhiSubset:
      return !predicted.empty() && common == static_cast<double>(predicted.size()) ? 1.0
                                                                                     : 0.0;
  }
  return 0.0;
}

Prf make_prf(double p_num, double p_den, double r_num, double r_den) {
  Prf out;
  out.precision_empty = p_den <= 0.0;
  out.recall_empty = r_den <= 0.0;
  out.precision = out.precision_empty ? 0.0 : p_num / p_den;
  out.recall = out.recall_empty ? 0.0 : r_num / r_den;
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

Tally &Tally::operator+=(const Tally &other) {
  p_num += other.p_num;
  p_den += other.p_den;
  r_num += other.r_num;
  r_den += other.r_den;
  n_ref += other.n_ref;
  n_pred += other.n_pred;
  return *this;
}

const Tally *ScoreReport::slot(std::string_view name) const {
  for (const auto &[slot_name, tally] : slots) {
    if (slot_name == name) return &tally;
  }
  return nullptr;
}

namespace {

// A template as slot name -> entities, plus its type index.
struct KeyedTemplate {
  std::size_t type = 0;
  std::map<std::string, std::vector<EntityKey>> slots;
};

std::string span_key(const Mention &m) {
  return "span:" + std::to_string(m.left) + ":" + std::to_string(m.right);
}

EntityKey filler_key(const Filler &filler, const Document &doc) {
  EntityKey key;
  switch (filler.kind) {
    case FillerKind::kMention:
    case FillerKind::kEntity:
    case FillerKind::kEvent:
      for (const std::string &id : filler.mentions) key.push_back(span_key(doc.mention(id)));
      break;
    case FillerKind::kBoolean:
      key.push_back(filler.flag ? "bool:true" : "bool:false");
      break;
    case FillerKind::kCategorical:
      key.push_back("value:" + filler.value);
      break;
  }
  std::sort(key.begin(), key.end());
  key.erase(std::unique(key.begin(), key.end()), key.end());
  return key;
}

KeyedTemplate keyed(const TemplateInstance &t, const Document &doc,
                    const Ontology &ontology, bool with_type) {
  KeyedTemplate out;
  const auto type = ontology.type_index(t.type);
  if (!type) {
    throw Error(ErrorCode::kOntologyMismatch,
                "template type '" + t.type + "' is not in the ontology");
  }
  out.type = *type;
  for (const auto &[slot, fillers] : t.fillers) {
    if (ontology.find_slot(*type, slot) == nullptr) {
      throw Error(ErrorCode::kOntologyMismatch,
                  "slot '" + slot + "' is not declared for type '" + t.type + "'");
    }
    auto &entities = out.slots[slot];
    for (const Filler &f : fillers) entities.push_back(filler_key(f, doc));
  }
  if (with_type) out.slots[std::string(kTypePseudoSlot)].push_back({"type:" + t.type});
  return out;
}

struct Credit {
  double p_num = 0.0;
  double r_num = 0.0;
};

EntityKey merged(const std::vector<const EntityKey *> &parts) {
  EntityKey out;
  for (const EntityKey *p : parts) out.insert(out.end(), p->begin(), p->end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Credit slot_credit(const std::vector<EntityKey> &ref, const std::vector<EntityKey> &pred,
                   CeafVariant variant, Phi phi) {
  Credit credit;
  if (ref.empty() || pred.empty()) return credit;
  Eigen::MatrixXd sim(static_cast<Eigen::Index>(ref.size()),
                      static_cast<Eigen::Index>(pred.size()));
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          phi_value(phi, ref[i], pred[j]);
    }
  }
  if (variant == CeafVariant::kReeDef) {
    credit.p_num = credit.r_num = align_optimal(sim).total;
    return credit;
  }
  // Relaxed: every prediction picks its best reference; references may be
  // reused. Recall credits each reference once against the union of the
  // predictions that picked it.
  std::vector<std::vector<const EntityKey *>> picked(ref.size());
  for (std::size_t j = 0; j < pred.size(); ++j) {
    Eigen::Index best = 0;
    sim.col(static_cast<Eigen::Index>(j)).maxCoeff(&best);
    const double value = sim(best, static_cast<Eigen::Index>(j));
    if (value <= 0.0) continue;
    credit.p_num += value;
    picked[static_cast<std::size_t>(best)].push_back(&pred[j]);
  }
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (!picked[i].empty()) credit.r_num += phi_value(phi, ref[i], merged(picked[i]));
  }
  return credit;
}

double self_mass(const EntityKey &entity, Phi phi) { return phi_value(phi, entity, entity); }

// Accumulates one document into per-slot and per-type tallies.
struct Accumulator {
  CeafVariant variant;
  Phi phi;
  const Ontology &ontology;
  std::map<std::string, Tally> slots;
  std::vector<Tally> types;
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> alignment;

  Accumulator(CeafVariant v, Phi p, const Ontology &o)
      : variant(v), phi(p), ontology(o), types(o.type_count()) {}

  void add(const std::string &doc_id, const std::vector<TemplateInstance> &reference,
           const std::vector<TemplateInstance> &predicted, const Document &doc) {
    const bool with_type = variant == CeafVariant::kReeImpl;
    std::vector<KeyedTemplate> ref, pred;
    for (const auto &t : reference) ref.push_back(keyed(t, doc, ontology, with_type));
    for (const auto &t : predicted) pred.push_back(keyed(t, doc, ontology, with_type));

    for (const KeyedTemplate &t : ref) {
      for (const auto &[slot, entities] : t.slots) {
        for (const EntityKey &e : entities) {
          slots[slot].r_den += self_mass(e, phi);
          types[t.type].r_den += self_mass(e, phi);
          ++slots[slot].n_ref;
          ++types[t.type].n_ref;
        }
      }
    }
    for (const KeyedTemplate &t : pred) {
      for (const auto &[slot, entities] : t.slots) {
        for (const EntityKey &e : entities) {
          slots[slot].p_den += self_mass(e, phi);
          types[t.type].p_den += self_mass(e, phi);
          ++slots[slot].n_pred;
          ++types[t.type].n_pred;
        }
      }
    }

    // Pairwise slot credits; cross-type pairs are never credited.
    const std::size_t n = ref.size(), m = pred.size();
    std::vector<std::vector<std::map<std::string, Credit>>> credits(
        n, std::vector<std::map<std::string, Credit>>(m));
    Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (ref[i].type != pred[j].type) continue;
        double total = 0.0;
        for (const auto &[slot, entities] : ref[i].slots) {
          auto it = pred[j].slots.find(slot);
          if (it == pred[j].slots.end()) continue;
          const Credit c = slot_credit(entities, it->second, variant, phi);
          credits[i][j][slot] = c;
          total += c.p_num + c.r_num;
        }
        sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = total;
      }
    }
    auto &pairs = alignment[doc_id];
    for (const auto &[i, j] : align_optimal(sim).pairs) {
      if (sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= 0.0) continue;
      pairs.emplace_back(i, j);
      for (const auto &[slot, c] : credits[i][j]) {
        slots[slot].p_num += c.p_num;
        slots[slot].r_num += c.r_num;
        types[ref[i].type].p_num += c.p_num;
        types[ref[i].type].r_num += c.r_num;
      }
    }
  }

  ScoreReport finish() const {
    ScoreReport report;
    report.variant = variant;
    report.phi = phi;
    report.legacy = variant == CeafVariant::kReeImpl;
    report.alignment = alignment;
    std::vector<std::string> order;
    for (std::size_t s = 0; s + 1 < ontology.slot_count(); ++s) {
      order.push_back(ontology.slot_name(s));
    }
    if (report.legacy) order.emplace_back(kTypePseudoSlot);
    double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0;
    std::size_t with_mass = 0;
    for (const std::string &name : order) {
      auto it = slots.find(name);
      const Tally tally = it == slots.end() ? Tally{} : it->second;
      report.slots.emplace_back(name, tally);
      report.micro_tally += tally;
      if (tally.has_mass()) {
        const Prf prf = tally.prf();
        macro_p += prf.precision;
        macro_r += prf.recall;
        macro_f += prf.f1;
        ++with_mass;
      }
    }
    for (std::size_t t = 0; t < types.size(); ++t) {
      report.types.emplace_back(ontology.template_types()[t].name, types[t]);
    }
    report.micro = report.micro_tally.prf();
    report.empty = !report.micro_tally.has_mass();
    if (with_mass > 0) {
      const double k = static_cast<double>(with_mass);
      report.macro.precision = macro_p / k;
      report.macro.recall = macro_r / k;
      report.macro.f1 = macro_f / k;
    } else {
      report.macro.precision_empty = report.macro.recall_empty = true;
    }
    return report;
  }
};

}  // namespace

ScoreReport entity_score(const std::vector<TemplateInstance> &reference,
                         const std::vector<TemplateInstance> &predicted,
                         const Document &doc, const Ontology &ontology,
                         CeafVariant variant, Phi phi) {
  Accumulator acc(variant, phi, ontology);
  acc.add(doc.id(), reference, predicted, doc);
  return acc.finish();
}

ScoreReport score_corpus(const Corpus &corpus, const TemplateMap &predictions,
                         CeafVariant variant, Phi phi) {
  for (const auto &[id, templates] : predictions) {
    if (corpus.find_document(id) == nullptr) {
      throw Error(ErrorCode::kUnknownDocument, "prediction for unknown document '" + id + "'");
    }
  }
  static const std::vector<TemplateInstance> kNone;
  Accumulator acc(variant, phi, *corpus.ontology);
  for (const Document &doc : corpus.documents) {
    auto it = predictions.find(doc.id());
    acc.add(doc.id(), corpus.gold_for(doc.id()), it == predictions.end() ? kNone : it->second,
            doc);
  }
  return acc.finish();
}

namespace {

nlohmann::json prf_json(const Prf &prf) {
  nlohmann::json out = {{"p", prf.precision}, {"r", prf.recall}, {"f1", prf.f1}};
  if (prf.precision_empty) out["p_empty"] = true;
  if (prf.recall_empty) out["r_empty"] = true;
  return out;
}

nlohmann::json row_json(const std::string &name, const Tally &tally, const char *key) {
  const Prf prf = tally.prf();
  nlohmann::json out = {{key, name},           {"p", prf.precision}, {"r", prf.recall},
                        {"f1", prf.f1},        {"n_ref", tally.n_ref}, {"n_pred", tally.n_pred}};
  return out;
}

}  // namespace

nlohmann::json to_json(const ScoreReport &report) {
  nlohmann::json slots = nlohmann::json::array();
  for (const auto &[name, tally] : report.slots) slots.push_back(row_json(name, tally, "slot"));
  nlohmann::json types = nlohmann::json::array();
  for (const auto &[name, tally] : report.types) types.push_back(row_json(name, tally, "type"));
  nlohmann::json alignment = nlohmann::json::object();
  for (const auto &[doc, pairs] : report.alignment) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto &[r, p] : pairs) list.push_back({r, p});
    alignment[doc] = list;
  }
  nlohmann::json out = {{"variant", std::string(to_string(report.variant))},
                        {"phi", std::string(to_string(report.phi))},
                        {"legacy", report.legacy},
                        {"empty", report.empty},
                        {"slots", slots},
                        {"types", types},
                        {"micro", prf_json(report.micro)},
                        {"macro", prf_json(report.macro)},
                        {"alignment", alignment}};
  return out;
}

std::string to_csv(const ScoreReport &report) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "row,name,p,r,f1,n_ref,n_pred\n";
  auto row = [&](const char *kind, const std::string &name, const Tally &t) {
    const Prf prf = t.prf();
    out << kind << ',' << name << ',' << prf.precision << ',' << prf.recall << ',' << prf.f1
        << ',' << t.n_ref << ',' << t.n_pred << '\n';
  };
  for (const auto &[name, tally] : report.slots) row("slot", name, tally);
  for (const auto &[name, tally] : report.types) row("type", name, tally);
  row("micro", "all", report.micro_tally);
  out << "macro,all," << report.macro.precision << ',' << report.macro.recall << ','
      << report.macro.f1 << ",,\n";
  return out.str();
}

std::string to_pretty(const ScoreReport &report) {
  std::ostringstream out;
  out << "CEAF " << to_string(report.variant) << " / " << to_string(report.phi);
  if (report.legacy) out << " (legacy: template type scored as a slot)";
  if (report.empty) out << " (empty)";
  out << "\n";
  out << std::left << std::setw(16) << "slot" << std::right << std::setw(9) << "P"
      << std::setw(9) << "R" << std::setw(9) << "F1" << std::setw(8) << "ref" << std::setw(8)
      << "pred" << "\n";
  out << std::fixed << std::setprecision(4);
  auto row = [&](const std::string &name, const Prf &prf, std::size_t n_ref, std::size_t n_pred) {
    out << std::left << std::setw(16) << name << std::right << std::setw(9) << prf.precision
        << std::setw(9) << prf.recall << std::setw(9) << prf.f1 << std::setw(8) << n_ref
        << std::setw(8) << n_pred << "\n";
  };
  for (const auto &[name, tally] : report.slots) row(name, tally.prf(), tally.n_ref, tally.n_pred);
  for (const auto &[name, tally] : report.types) {
    row("[" + name + "]", tally.prf(), tally.n_ref, tally.n_pred);
  }
  row("micro", report.micro, report.micro_tally.n_ref, report.micro_tally.n_pred);
  row("macro", report.macro, 0, 0);
  return out.str();
}

}  // namespace iterx
