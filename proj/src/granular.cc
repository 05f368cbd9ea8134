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

#include "iterx/granular.h"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "iterx/alignment.h"
#include "iterx/error.h"

namespace iterx {
namespace {

using Span = std::pair<int, int>;

std::vector<Span> spans_of(const Filler &filler, const Document &doc) {
  std::vector<Span> out;
  for (const std::string &id : filler.mentions) {
    const Mention &m = doc.mention(id);
    out.emplace_back(m.left, m.right);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool subset(const std::vector<Span> &small, const std::vector<Span> &large) {
  return !small.empty() && std::includes(large.begin(), large.end(), small.begin(), small.end());
}

bool name_tier(Informativity i) {
  return i == Informativity::kName || i == Informativity::kUnspecified;
}

double entity_credit(const Filler &reference, const Filler &predicted, const Document &doc) {
  if (!subset(spans_of(predicted, doc), spans_of(reference, doc))) return 0.0;
  bool has_name = false, has_nominal = false;
  for (const std::string &id : reference.mentions) {
    const Informativity i = doc.mention(id).informativity;
    has_name = has_name || name_tier(i);
    has_nominal = has_nominal || i == Informativity::kNominal;
  }
  double best = 0.0;
  for (const std::string &id : predicted.mentions) {
    const Informativity i = doc.mention(id).informativity;
    double credit = 1.0;
    if (i == Informativity::kNominal) {
      credit = has_name ? 0.5 : 1.0;
    } else if (i == Informativity::kPronoun) {
      credit = (has_name ? 0.5 : 1.0) * (has_nominal ? 0.5 : 1.0);
    }
    best = std::max(best, credit);
  }
  return best;
}

double event_credit(const Filler &reference, const Filler &predicted, const Document &doc) {
  return subset(spans_of(predicted, doc), spans_of(reference, doc)) ? 1.0 : 0.0;
}

double base_credit(const Filler &reference, const Filler &predicted, const SlotDef &slot,
                   const Document &doc) {
  switch (slot.kind) {
    case SlotKind::kBoolean:
      return reference.kind == FillerKind::kBoolean && predicted.kind == FillerKind::kBoolean &&
                     reference.flag == predicted.flag
                 ? 1.0
                 : 0.0;
    case SlotKind::kCategorical:
      return reference.kind == FillerKind::kCategorical &&
                     predicted.kind == FillerKind::kCategorical &&
                     reference.value == predicted.value
                 ? 1.0
                 : 0.0;
    case SlotKind::kEntity:
    case SlotKind::kEvent:
    case SlotKind::kMixed:
      break;
  }
  if (!reference.mention_valued() || !predicted.mention_valued()) return 0.0;
  FillerKind kind = reference.kind;
  if (slot.kind == SlotKind::kEntity) kind = FillerKind::kEntity;
  if (slot.kind == SlotKind::kEvent) kind = FillerKind::kEvent;
  if (kind == FillerKind::kMention) kind = FillerKind::kEntity;
  // A prediction declaring the other kind never matches.
  if (predicted.kind != FillerKind::kMention && predicted.kind != kind) return 0.0;
  return kind == FillerKind::kEvent ? event_credit(reference, predicted, doc)
                                    : entity_credit(reference, predicted, doc);
}

}  // namespace

double filler_credit(const Filler &reference, const Filler &predicted, const SlotDef &slot,
                     const Document &doc) {
  const double base = base_credit(reference, predicted, slot, doc);
  if (!slot.requires_time_irrealis || base <= 0.0) return base;
  std::vector<std::string> ref_time = reference.time_attachments;
  std::vector<std::string> pred_time = predicted.time_attachments;
  std::sort(ref_time.begin(), ref_time.end());
  std::sort(pred_time.begin(), pred_time.end());
  ref_time.erase(std::unique(ref_time.begin(), ref_time.end()), ref_time.end());
  pred_time.erase(std::unique(pred_time.begin(), pred_time.end()), pred_time.end());
  return 0.5 * base + (ref_time == pred_time ? 0.25 : 0.0) +
         (reference.irrealis == predicted.irrealis ? 0.25 : 0.0);
}

namespace {

struct PairScore {
  std::map<std::string, double> credit;
  std::map<std::string, std::size_t> correct;
  std::size_t total_correct = 0;
};

struct Accumulator {
  const Ontology &ontology;
  GranularReport report;
  std::map<std::string, GranularSlotRow> rows;

  explicit Accumulator(const Ontology &o) : ontology(o) {}

  std::size_t type_of(const TemplateInstance &t) const {
    const auto type = ontology.type_index(t.type);
    if (!type) {
      throw Error(ErrorCode::kOntologyMismatch, "template type '" + t.type + "' is not in the ontology");
    }
    for (const auto &[slot, fillers] : t.fillers) {
      if (ontology.find_slot(*type, slot) == nullptr) {
        throw Error(ErrorCode::kOntologyMismatch,
                    "slot '" + slot + "' is not declared for type '" + t.type + "'");
      }
    }
    return *type;
  }

  PairScore score_pair(const TemplateInstance &ref, const TemplateInstance &pred,
                       std::size_t type, const Document &doc) const {
    PairScore out;
    for (const SlotDef &slot : ontology.template_types()[type].slots) {
      auto r = ref.fillers.find(slot.name);
      auto p = pred.fillers.find(slot.name);
      if (r == ref.fillers.end() || p == pred.fillers.end()) continue;
      Eigen::MatrixXd credit(static_cast<Eigen::Index>(r->second.size()),
                             static_cast<Eigen::Index>(p->second.size()));
      for (std::size_t i = 0; i < r->second.size(); ++i) {
        for (std::size_t j = 0; j < p->second.size(); ++j) {
          credit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              filler_credit(r->second[i], p->second[j], slot, doc);
        }
      }
      const Alignment a = align_optimal(credit);
      std::size_t correct = 0;
      for (const auto &[i, j] : a.pairs) {
        if (credit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) ++correct;
      }
      out.credit[slot.name] = a.total;
      out.correct[slot.name] = correct;
      out.total_correct += correct;
    }
    return out;
  }

  void add(const std::string &doc_id, const std::vector<TemplateInstance> &reference,
           const std::vector<TemplateInstance> &predicted, const Document &doc) {
    std::vector<std::size_t> ref_types, pred_types;
    for (const auto &t : reference) ref_types.push_back(type_of(t));
    for (const auto &t : predicted) pred_types.push_back(type_of(t));
    report.n_ref_templates += reference.size();
    report.n_pred_templates += predicted.size();
    for (const auto &t : reference) {
      for (const auto &[slot, fillers] : t.fillers) {
        rows[slot].n_ref += fillers.size();
        report.n_ref_fillers += fillers.size();
      }
    }
    for (const auto &t : predicted) {
      for (const auto &[slot, fillers] : t.fillers) {
        rows[slot].n_pred += fillers.size();
        report.n_pred_fillers += fillers.size();
      }
    }

    // Maximizing correct-minus-incorrect fillers equals maximizing correct
    // fillers; the unit bonus prefers more same-type pairs among ties.
    const std::size_t n = reference.size(), m = predicted.size();
    const double unit = static_cast<double>(std::min(n, m) + 1);
    std::vector<std::vector<PairScore>> scores(n, std::vector<PairScore>(m));
    Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (ref_types[i] != pred_types[j]) continue;
        scores[i][j] = score_pair(reference[i], predicted[j], ref_types[i], doc);
        weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            static_cast<double>(scores[i][j].total_correct) * unit + 1.0;
      }
    }
    auto &pairs = report.alignment[doc_id];
    for (const auto &[i, j] : align_optimal(weight).pairs) {
      if (ref_types[i] != pred_types[j]) continue;
      pairs.emplace_back(i, j);
      ++report.matched_templates;
      for (const auto &[slot, credit] : scores[i][j].credit) {
        rows[slot].credit += credit;
        rows[slot].correct += scores[i][j].correct.at(slot);
        report.slot_credit += credit;
      }
    }
  }

  GranularReport finish() {
    for (std::size_t s = 0; s + 1 < ontology.slot_count(); ++s) {
      GranularSlotRow row = rows[ontology.slot_name(s)];
      row.slot = ontology.slot_name(s);
      report.slots.push_back(row);
    }
    const auto matched = static_cast<double>(report.matched_templates);
    report.type_f1 = make_prf(matched, static_cast<double>(report.n_pred_templates), matched,
                              static_cast<double>(report.n_ref_templates));
    report.slot_f1 = make_prf(report.slot_credit, static_cast<double>(report.n_pred_fillers),
                              report.slot_credit, static_cast<double>(report.n_ref_fillers));
    report.combined = report.type_f1.f1 * report.slot_f1.f1;
    return report;
  }
};

}  // namespace

GranularReport granular_score(const std::vector<TemplateInstance> &reference,
                              const std::vector<TemplateInstance> &predicted,
                              const Document &doc, const Ontology &ontology) {
  Accumulator acc(ontology);
  acc.add(doc.id(), reference, predicted, doc);
  return acc.finish();
}

GranularReport granular_corpus(const Corpus &corpus, const TemplateMap &predictions) {
  for (const auto &[id, templates] : predictions) {
    if (corpus.find_document(id) == nullptr) {
      throw Error(ErrorCode::kUnknownDocument, "prediction for unknown document '" + id + "'");
    }
  }
  static const std::vector<TemplateInstance> kNone;
  Accumulator acc(*corpus.ontology);
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

}  // namespace

nlohmann::json to_json(const GranularReport &report) {
  nlohmann::json slots = nlohmann::json::array();
  for (const GranularSlotRow &row : report.slots) {
    const Prf prf = make_prf(row.credit, static_cast<double>(row.n_pred), row.credit,
                             static_cast<double>(row.n_ref));
    slots.push_back({{"slot", row.slot},
                     {"credit", row.credit},
                     {"correct", row.correct},
                     {"n_ref", row.n_ref},
                     {"n_pred", row.n_pred},
                     {"p", prf.precision},
                     {"r", prf.recall},
                     {"f1", prf.f1}});
  }
  nlohmann::json alignment = nlohmann::json::object();
  for (const auto &[doc, pairs] : report.alignment) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto &[r, p] : pairs) list.push_back({r, p});
    alignment[doc] = list;
  }
  return {{"variant", "granular"},
          {"type_f1", prf_json(report.type_f1)},
          {"slot_f1", prf_json(report.slot_f1)},
          {"combined", report.combined},
          {"slot_pooling", "micro"},
          {"slots", slots},
          {"alignment", alignment}};
}

std::string to_csv(const GranularReport &report) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "row,name,p,r,f1,credit,n_ref,n_pred\n";
  for (const GranularSlotRow &row : report.slots) {
    const Prf prf = make_prf(row.credit, static_cast<double>(row.n_pred), row.credit,
                             static_cast<double>(row.n_ref));
    out << "slot," << row.slot << ',' << prf.precision << ',' << prf.recall << ',' << prf.f1
        << ',' << row.credit << ',' << row.n_ref << ',' << row.n_pred << '\n';
  }
  out << "type_f1,all," << report.type_f1.precision << ',' << report.type_f1.recall << ','
      << report.type_f1.f1 << ',' << report.matched_templates << ',' << report.n_ref_templates
      << ',' << report.n_pred_templates << '\n';
  out << "slot_f1,all," << report.slot_f1.precision << ',' << report.slot_f1.recall << ','
      << report.slot_f1.f1 << ',' << report.slot_credit << ',' << report.n_ref_fillers << ','
      << report.n_pred_fillers << '\n';
  out << "combined,all,,," << report.combined << ",,,\n";
  return out.str();
}

std::string to_pretty(const GranularReport &report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "Granular\n";
  out << "TypeF1   P " << report.type_f1.precision << "  R " << report.type_f1.recall
      << "  F1 " << report.type_f1.f1 << "\n";
  out << "SlotF1   P " << report.slot_f1.precision << "  R " << report.slot_f1.recall
      << "  F1 " << report.slot_f1.f1 << "\n";
  out << "Combined " << report.combined << "\n";
  for (const GranularSlotRow &row : report.slots) {
    out << "  " << std::left << std::setw(16) << row.slot << std::right << " credit "
        << row.credit << "  ref " << row.n_ref << "  pred " << row.n_pred << "\n";
  }
  return out.str();
}

}  // namespace iterx
