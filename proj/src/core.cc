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

#include "iterx/core.h"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include "iterx/error.h"

namespace iterx {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedJson: return "MalformedJson";
    case ErrorCode::kUnknownSlot: return "UnknownSlot";
    case ErrorCode::kUnknownTemplateType: return "UnknownTemplateType";
    case ErrorCode::kDanglingMention: return "DanglingMention";
    case ErrorCode::kDanglingDocument: return "DanglingDocument";
    case ErrorCode::kBoundaryError: return "BoundaryError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kKindMismatch: return "KindMismatch";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kIncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyGoldSet: return "EmptyGoldSet";
    case ErrorCode::kDivergence: return "DivergenceError";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kOntologyMismatch: return "OntologyMismatch";
    case ErrorCode::kUnknownDocument: return "UnknownDocument";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

namespace {

constexpr std::array<std::pair<Informativity, std::string_view>, 4>
    kInformativityNames{{{Informativity::kName, "name"},
                         {Informativity::kNominal, "nominal"},
                         {Informativity::kPronoun, "pronoun"},
                         {Informativity::kUnspecified, "unspecified"}}};

constexpr std::array<std::pair<Irrealis, std::string_view>, 6> kIrrealisNames{
    {{Irrealis::kCounterfactual, "counterfactual"},
     {Irrealis::kHypothetical, "hypothetical"},
     {Irrealis::kFuture, "future"},
     {Irrealis::kUnconfirmed, "unconfirmed"},
     {Irrealis::kUnspecified, "unspecified"},
     {Irrealis::kNonOccurrence, "non-occurrence"}}};

constexpr std::array<std::pair<SlotKind, std::string_view>, 5> kSlotKindNames{
    {{SlotKind::kEntity, "entity"},
     {SlotKind::kEvent, "event"},
     {SlotKind::kMixed, "mixed"},
     {SlotKind::kBoolean, "boolean"},
     {SlotKind::kCategorical, "categorical"}}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N> &t,
                         E value) {
  for (const auto &[e, name] : t) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N> &t,
                          std::string_view text) {
  for (const auto &[e, name] : t) {
    if (name == text) return e;
  }
  return std::nullopt;
}

// FNV-1a; only used to fingerprint ontologies, so it must be stable across
// platforms and standard libraries.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(Informativity value) {
  return name_of(kInformativityNames, value);
}
std::string_view to_string(Irrealis value) {
  return name_of(kIrrealisNames, value);
}
std::string_view to_string(SlotKind kind) {
  return name_of(kSlotKindNames, kind);
}
std::optional<Informativity> parse_informativity(std::string_view text) {
  return value_of(kInformativityNames, text);
}
std::optional<Irrealis> parse_irrealis(std::string_view text) {
  return value_of(kIrrealisNames, text);
}
std::optional<SlotKind> parse_slot_kind(std::string_view text) {
  return value_of(kSlotKindNames, text);
}

std::string_view to_string(FillerKind kind) {
  switch (kind) {
    case FillerKind::kMention: return "mention";
    case FillerKind::kEntity: return "entity";
    case FillerKind::kEvent: return "event";
    case FillerKind::kBoolean: return "boolean";
    case FillerKind::kCategorical: return "value";
  }
  return "?";
}

Document::Document(std::string id, std::vector<std::string> tokens,
                   std::vector<Mention> mentions)
    : id_(std::move(id)),
      tokens_(std::move(tokens)),
      mentions_(std::move(mentions)) {
  const int n = static_cast<int>(tokens_.size());
  for (std::size_t i = 0; i < mentions_.size(); ++i) {
    Mention &m = mentions_[i];
    if (m.left < 0 || m.left > m.right || m.right >= n) {
      throw Error(ErrorCode::kBoundaryError,
                  "mention '" + m.id + "' in document '" + id_ + "' spans [" +
                      std::to_string(m.left) + ", " + std::to_string(m.right) +
                      "] with " + std::to_string(n) + " tokens");
    }
    if (!index_.emplace(m.id, i).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "mention id '" + m.id + "' repeated in document '" + id_ + "'");
    }
    m.surface.clear();
    for (int t = m.left; t <= m.right; ++t) {
      if (t > m.left) m.surface += ' ';
      m.surface += tokens_[t];
    }
  }
}

std::optional<std::size_t> Document::find_mention(
    std::string_view mention_id) const {
  auto it = index_.find(std::string(mention_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Mention &Document::mention(std::string_view mention_id) const {
  auto index = find_mention(mention_id);
  if (!index) {
    throw Error(ErrorCode::kDanglingMention,
                "unknown mention '" + std::string(mention_id) +
                    "' in document '" + id_ + "'");
  }
  return mentions_[*index];
}

Ontology::Ontology(std::vector<TemplateType> types) : types_(std::move(types)) {
  if (types_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "ontology declares no template types");
  }
  std::set<std::string> type_names;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const TemplateType &type : types_) {
    if (!type_names.insert(type.name).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "template type '" + type.name + "' declared twice");
    }
    h = fnv1a("T:" + type.name + ";", h);
    std::set<std::string> names;
    std::vector<std::size_t> indices;
    for (const SlotDef &slot : type.slots) {
      if (slot.name == kNullSlot) {
        throw Error(ErrorCode::kInvalidArgument,
                    "the null slot name is reserved");
      }
      if (!names.insert(slot.name).second) {
        throw Error(ErrorCode::kDuplicateId, "slot '" + slot.name +
                                                 "' repeated in type '" +
                                                 type.name + "'");
      }
      auto found = std::find(slot_names_.begin(), slot_names_.end(), slot.name);
      indices.push_back(static_cast<std::size_t>(found - slot_names_.begin()));
      if (found == slot_names_.end()) slot_names_.push_back(slot.name);
      h = fnv1a("S:" + slot.name + ":" + std::string(to_string(slot.kind)) +
                    (slot.requires_time_irrealis ? ":ti" : ":-"),
                h);
      for (const std::string &c : slot.categories) h = fnv1a("C:" + c, h);
      h = fnv1a(";", h);
    }
    type_slots_.push_back(std::move(indices));
  }
  slot_names_.emplace_back(kNullSlot);
  for (const auto &indices : type_slots_) {
    std::vector<bool> valid(slot_names_.size(), false);
    for (std::size_t s : indices) valid[s] = true;
    valid.back() = true;
    valid_.push_back(std::move(valid));
  }
  fingerprint_ = h;
}

std::optional<std::size_t> Ontology::type_index(std::string_view name) const {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Ontology::require_type(std::string_view name) const {
  auto index = type_index(name);
  if (!index) {
    throw Error(ErrorCode::kUnknownTemplateType,
                "template type '" + std::string(name) + "' not in ontology");
  }
  return *index;
}

std::optional<std::size_t> Ontology::slot_index(std::string_view name) const {
  for (std::size_t i = 0; i < slot_names_.size(); ++i) {
    if (slot_names_[i] == name) return i;
  }
  return std::nullopt;
}

bool Ontology::slot_valid(std::size_t type, std::size_t slot) const {
  return slot < slot_names_.size() && valid_[type][slot];
}

const SlotDef *Ontology::find_slot(std::size_t type,
                                   std::string_view name) const {
  for (const SlotDef &slot : types_[type].slots) {
    if (slot.name == name) return &slot;
  }
  return nullptr;
}

Filler Filler::mention(std::string id) {
  Filler f;
  f.kind = FillerKind::kMention;
  f.mentions.push_back(std::move(id));
  return f;
}

Filler Filler::entity(std::vector<std::string> ids) {
  Filler f;
  f.kind = FillerKind::kEntity;
  f.mentions = std::move(ids);
  return f;
}

Filler Filler::event(std::vector<std::string> ids) {
  Filler f;
  f.kind = FillerKind::kEvent;
  f.mentions = std::move(ids);
  return f;
}

Filler Filler::boolean(bool flag) {
  Filler f;
  f.kind = FillerKind::kBoolean;
  f.flag = flag;
  return f;
}

Filler Filler::categorical(std::string value) {
  Filler f;
  f.kind = FillerKind::kCategorical;
  f.value = std::move(value);
  return f;
}

bool slot_accepts(const SlotDef &slot, const Filler &filler) {
  switch (slot.kind) {
    case SlotKind::kEntity:
      return filler.kind == FillerKind::kMention ||
             filler.kind == FillerKind::kEntity;
    case SlotKind::kEvent:
      return filler.kind == FillerKind::kMention ||
             filler.kind == FillerKind::kEvent;
    case SlotKind::kMixed:
      return filler.mention_valued();
    case SlotKind::kBoolean:
      return filler.kind == FillerKind::kBoolean;
    case SlotKind::kCategorical:
      return filler.kind == FillerKind::kCategorical &&
             (slot.categories.empty() ||
              std::find(slot.categories.begin(), slot.categories.end(),
                        filler.value) != slot.categories.end());
  }
  return false;
}

void validate_template(const TemplateInstance &instance, const Document &doc,
                       const Ontology &ontology) {
  const std::size_t type = ontology.require_type(instance.type);
  for (const auto &[slot_name, fillers] : instance.fillers) {
    const SlotDef *slot = ontology.find_slot(type, slot_name);
    if (slot == nullptr) {
      throw Error(ErrorCode::kUnknownSlot, "slot '" + slot_name +
                                               "' is not declared for type '" +
                                               instance.type + "'");
    }
    for (const Filler &filler : fillers) {
      if (!slot_accepts(*slot, filler)) {
        throw Error(ErrorCode::kKindMismatch,
                    "filler of kind '" + std::string(to_string(filler.kind)) +
                        "' does not fit slot '" + slot_name + "' of kind '" +
                        std::string(to_string(slot->kind)) + "'");
      }
      if (filler.mention_valued() && filler.mentions.empty()) {
        throw Error(ErrorCode::kKindMismatch,
                    "empty mention set in slot '" + slot_name + "'");
      }
      if (filler.kind == FillerKind::kMention && filler.mentions.size() != 1) {
        throw Error(ErrorCode::kKindMismatch,
                    "mention filler must reference exactly one mention");
      }
      for (const std::string &id : filler.mentions) doc.mention(id);
    }
  }
}

void canonicalize(TemplateInstance &instance, const Document &doc) {
  auto by_position = [&doc](const std::string &a, const std::string &b) {
    const Mention &ma = doc.mention(a);
    const Mention &mb = doc.mention(b);
    return std::tie(ma.left, ma.right, ma.id) <
           std::tie(mb.left, mb.right, mb.id);
  };
  for (auto it = instance.fillers.begin(); it != instance.fillers.end();) {
    std::vector<Filler> &fillers = it->second;
    for (Filler &f : fillers) {
      std::sort(f.mentions.begin(), f.mentions.end(), by_position);
      f.mentions.erase(std::unique(f.mentions.begin(), f.mentions.end()),
                       f.mentions.end());
      std::sort(f.time_attachments.begin(), f.time_attachments.end());
      f.time_attachments.erase(
          std::unique(f.time_attachments.begin(), f.time_attachments.end()),
          f.time_attachments.end());
    }
    std::sort(fillers.begin(), fillers.end());
    fillers.erase(std::unique(fillers.begin(), fillers.end()), fillers.end());
    if (fillers.empty()) {
      it = instance.fillers.erase(it);
    } else {
      ++it;
    }
  }
}

const Document *Corpus::find_document(std::string_view id) const {
  for (const Document &doc : documents) {
    if (doc.id() == id) return &doc;
  }
  return nullptr;
}

const std::vector<TemplateInstance> &Corpus::gold_for(
    std::string_view id) const {
  static const std::vector<TemplateInstance> kEmpty;
  auto it = gold.find(std::string(id));
  return it == gold.end() ? kEmpty : it->second;
}

bool same_template_set(std::vector<TemplateInstance> a,
                       std::vector<TemplateInstance> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return a == b;
}

}  // namespace iterx
