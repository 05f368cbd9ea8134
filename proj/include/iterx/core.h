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

// Domain types shared by every module: documents with candidate mentions,
// the template ontology, and template instances.

#ifndef ITERX_CORE_H_
#define ITERX_CORE_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace iterx {

enum class Informativity { kName, kNominal, kPronoun, kUnspecified };

enum class Irrealis {
  kCounterfactual,
  kHypothetical,
  kFuture,
  kUnconfirmed,
  kUnspecified,
  kNonOccurrence,
};

std::string_view to_string(Informativity value);
std::string_view to_string(Irrealis value);
std::optional<Informativity> parse_informativity(std::string_view text);
std::optional<Irrealis> parse_irrealis(std::string_view text);

// A candidate span. Boundaries are inclusive token indices.
struct Mention {
  std::string id;
  int left = 0;
  int right = 0;
  std::string surface;
  Informativity informativity = Informativity::kUnspecified;
};

class Document {
 public:
  // Validates boundaries and id uniqueness and fills in mention surfaces.
  Document(std::string id, std::vector<std::string> tokens,
           std::vector<Mention> mentions);

  const std::string &id() const { return id_; }
  const std::vector<std::string> &tokens() const { return tokens_; }
  const std::vector<Mention> &mentions() const { return mentions_; }
  std::size_t mention_count() const { return mentions_.size(); }

  std::optional<std::size_t> find_mention(std::string_view mention_id) const;
  const Mention &mention(std::string_view mention_id) const;

 private:
  std::string id_;
  std::vector<std::string> tokens_;
  std::vector<Mention> mentions_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class SlotKind { kEntity, kEvent, kMixed, kBoolean, kCategorical };

std::string_view to_string(SlotKind kind);
std::optional<SlotKind> parse_slot_kind(std::string_view text);

struct SlotDef {
  std::string name;
  SlotKind kind = SlotKind::kEntity;
  // Allowed values for categorical slots; empty means unrestricted.
  std::vector<std::string> categories;
  bool requires_time_irrealis = false;
};

struct TemplateType {
  std::string name;
  std::vector<SlotDef> slots;
};

// Template types plus the global slot inventory. Global slot indices list
// content slots in order of first appearance and put the null slot last.
class Ontology {
 public:
  static constexpr std::string_view kNullSlot = "ε";

  explicit Ontology(std::vector<TemplateType> types);

  const std::vector<TemplateType> &template_types() const { return types_; }
  std::size_t type_count() const { return types_.size(); }
  const TemplateType &type(std::size_t index) const { return types_[index]; }
  std::optional<std::size_t> type_index(std::string_view name) const;
  // Throws kUnknownTemplateType.
  std::size_t require_type(std::string_view name) const;

  std::size_t slot_count() const { return slot_names_.size(); }
  std::size_t null_slot() const { return slot_names_.size() - 1; }
  const std::string &slot_name(std::size_t index) const {
    return slot_names_[index];
  }
  std::optional<std::size_t> slot_index(std::string_view name) const;

  // Global indices of S_t in declaration order (null slot excluded).
  const std::vector<std::size_t> &slots_of(std::size_t type) const {
    return type_slots_[type];
  }
  // True for s in S_t or the null slot.
  bool slot_valid(std::size_t type, std::size_t slot) const;
  const SlotDef *find_slot(std::size_t type, std::string_view name) const;

  // Stable 64-bit fingerprint of the canonical serialized form.
  std::uint64_t fingerprint() const { return fingerprint_; }

  friend bool operator==(const Ontology &a, const Ontology &b) {
    return a.fingerprint_ == b.fingerprint_;
  }

 private:
  std::vector<TemplateType> types_;
  std::vector<std::string> slot_names_;
  std::vector<std::vector<std::size_t>> type_slots_;
  std::vector<std::vector<bool>> valid_;
  std::uint64_t fingerprint_ = 0;
};

enum class FillerKind { kMention, kEntity, kEvent, kBoolean, kCategorical };

std::string_view to_string(FillerKind kind);

// One slot filler. Mention-valued kinds use `mentions`; boolean uses `flag`;
// categorical uses `value`.
struct Filler {
  FillerKind kind = FillerKind::kMention;
  std::vector<std::string> mentions;
  bool flag = false;
  std::string value;
  std::vector<std::string> time_attachments;
  std::optional<Irrealis> irrealis;

  static Filler mention(std::string id);
  static Filler entity(std::vector<std::string> ids);
  static Filler event(std::vector<std::string> ids);
  static Filler boolean(bool flag);
  static Filler categorical(std::string value);

  bool mention_valued() const {
    return kind == FillerKind::kMention || kind == FillerKind::kEntity ||
           kind == FillerKind::kEvent;
  }

  friend auto operator<=>(const Filler &, const Filler &) = default;
  friend bool operator==(const Filler &, const Filler &) = default;
};

// A template instance (t, {s_k: X_k}). Unfilled slots are absent from the
// map after canonicalization.
struct TemplateInstance {
  std::string type;
  std::map<std::string, std::vector<Filler>> fillers;

  friend auto operator<=>(const TemplateInstance &,
                          const TemplateInstance &) = default;
  friend bool operator==(const TemplateInstance &,
                         const TemplateInstance &) = default;
};

bool slot_accepts(const SlotDef &slot, const Filler &filler);

// Checks a template against the ontology and the document's mentions.
// Throws kUnknownTemplateType, kUnknownSlot, kKindMismatch, kDanglingMention.
void validate_template(const TemplateInstance &instance, const Document &doc,
                       const Ontology &ontology);

// Sorts mentions by (left, right, id), sorts and dedups fillers and time
// attachments, and drops empty slots.
void canonicalize(TemplateInstance &instance, const Document &doc);

using TemplateMap = std::map<std::string, std::vector<TemplateInstance>>;

struct Corpus {
  std::vector<Document> documents;
  // Gold templates in dataset order, keyed by document id.
  TemplateMap gold;
  std::shared_ptr<const Ontology> ontology;

  const Document *find_document(std::string_view id) const;
  const std::vector<TemplateInstance> &gold_for(std::string_view id) const;
};

// Multiset equality of two template lists.
bool same_template_set(std::vector<TemplateInstance> a,
                       std::vector<TemplateInstance> b);

}  // namespace iterx

#endif  // ITERX_CORE_H_
