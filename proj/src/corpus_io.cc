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

#include "iterx/corpus_io.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include "iterx/error.h"

namespace iterx {
namespace {

[[noreturn]] void malformed(const std::string &what) {
  throw Error(ErrorCode::kMalformedJson, what);
}

const Json &member(const Json &object, const char *key) {
  if (!object.is_object() || !object.contains(key)) {
    malformed(std::string("missing member '") + key + "'");
  }
  return object.at(key);
}

template <typename T>
T get_as(const Json &json, const char *what) {
  try {
    return json.get<T>();
  } catch (const Json::exception &e) {
    malformed(std::string(what) + ": " + e.what());
  }
}

Document document_from_json(const Json &json) {
  auto id = get_as<std::string>(member(json, "id"), "document id");
  auto tokens =
      get_as<std::vector<std::string>>(member(json, "tokens"), "tokens");
  std::vector<Mention> mentions;
  const Json &list = member(json, "mentions");
  if (!list.is_array()) malformed("mentions must be an array");
  for (const Json &m : list) {
    Mention mention;
    mention.id = get_as<std::string>(member(m, "id"), "mention id");
    mention.left = get_as<int>(member(m, "left"), "mention left");
    mention.right = get_as<int>(member(m, "right"), "mention right");
    if (m.contains("informativity")) {
      auto text = get_as<std::string>(m.at("informativity"), "informativity");
      auto value = parse_informativity(text);
      if (!value) malformed("unknown informativity '" + text + "'");
      mention.informativity = *value;
    }
    mentions.push_back(std::move(mention));
  }
  return Document(std::move(id), std::move(tokens), std::move(mentions));
}

Json to_json(const Document &doc) {
  Json mentions = Json::array();
  for (const Mention &m : doc.mentions()) {
    Json j = {{"id", m.id}, {"left", m.left}, {"right", m.right}};
    if (m.informativity != Informativity::kUnspecified) {
      j["informativity"] = std::string(to_string(m.informativity));
    }
    mentions.push_back(std::move(j));
  }
  return {{"id", doc.id()}, {"tokens", doc.tokens()}, {"mentions", mentions}};
}

Filler filler_from_json(const Json &json) {
  if (!json.is_object()) malformed("filler must be an object");
  Filler filler;
  int payloads = 0;
  if (json.contains("mention")) {
    filler = Filler::mention(get_as<std::string>(json.at("mention"), "mention"));
    ++payloads;
  }
  if (json.contains("entity")) {
    filler = Filler::entity(
        get_as<std::vector<std::string>>(json.at("entity"), "entity"));
    ++payloads;
  }
  if (json.contains("event")) {
    filler = Filler::event(
        get_as<std::vector<std::string>>(json.at("event"), "event"));
    ++payloads;
  }
  if (json.contains("boolean")) {
    filler = Filler::boolean(get_as<bool>(json.at("boolean"), "boolean"));
    ++payloads;
  }
  if (json.contains("value")) {
    filler = Filler::categorical(get_as<std::string>(json.at("value"), "value"));
    ++payloads;
  }
  if (payloads != 1) malformed("filler must carry exactly one payload");
  if (json.contains("time")) {
    filler.time_attachments =
        get_as<std::vector<std::string>>(json.at("time"), "time");
  }
  if (json.contains("irrealis")) {
    auto text = get_as<std::string>(json.at("irrealis"), "irrealis");
    auto value = parse_irrealis(text);
    if (!value) malformed("unknown irrealis value '" + text + "'");
    filler.irrealis = *value;
  }
  return filler;
}

std::vector<TemplateInstance> templates_for(const Json &list,
                                            const Document &doc,
                                            const Ontology &ontology) {
  if (!list.is_array()) malformed("template list must be an array");
  std::vector<TemplateInstance> out;
  for (const Json &t : list) {
    TemplateInstance instance = template_from_json(t);
    validate_template(instance, doc, ontology);
    canonicalize(instance, doc);
    out.push_back(std::move(instance));
  }
  return out;
}

}  // namespace

Json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception &e) {
    malformed("'" + path + "': " + e.what());
  }
}

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for '" + path + "'");
}

Ontology ontology_from_json(const Json &json) {
  const Json &types = member(json, "template_types");
  if (!types.is_array()) malformed("template_types must be an array");
  std::vector<TemplateType> out;
  for (const Json &t : types) {
    TemplateType type;
    type.name = get_as<std::string>(member(t, "name"), "type name");
    for (const Json &s : member(t, "slots")) {
      SlotDef slot;
      slot.name = get_as<std::string>(member(s, "name"), "slot name");
      if (s.contains("kind")) {
        auto text = get_as<std::string>(s.at("kind"), "slot kind");
        auto kind = parse_slot_kind(text);
        if (!kind) malformed("unknown slot kind '" + text + "'");
        slot.kind = *kind;
      }
      if (s.contains("values")) {
        slot.categories =
            get_as<std::vector<std::string>>(s.at("values"), "slot values");
      }
      if (s.contains("time_irrealis")) {
        slot.requires_time_irrealis =
            get_as<bool>(s.at("time_irrealis"), "time_irrealis");
      }
      type.slots.push_back(std::move(slot));
    }
    out.push_back(std::move(type));
  }
  return Ontology(std::move(out));
}

Json to_json(const Ontology &ontology) {
  Json types = Json::array();
  for (const TemplateType &type : ontology.template_types()) {
    Json slots = Json::array();
    for (const SlotDef &slot : type.slots) {
      Json s = {{"name", slot.name},
                {"kind", std::string(to_string(slot.kind))},
                {"time_irrealis", slot.requires_time_irrealis}};
      if (!slot.categories.empty()) s["values"] = slot.categories;
      slots.push_back(std::move(s));
    }
    types.push_back({{"name", type.name}, {"slots", slots}});
  }
  return {{"template_types", types}};
}

Ontology load_ontology(const std::string &path) {
  return ontology_from_json(read_json_file(path));
}

void save_ontology(const Ontology &ontology, const std::string &path) {
  write_text_file(path, to_json(ontology).dump(2) + "\n");
}

Json to_json(const Filler &filler) {
  Json j = Json::object();
  switch (filler.kind) {
    case FillerKind::kMention: j["mention"] = filler.mentions.front(); break;
    case FillerKind::kEntity: j["entity"] = filler.mentions; break;
    case FillerKind::kEvent: j["event"] = filler.mentions; break;
    case FillerKind::kBoolean: j["boolean"] = filler.flag; break;
    case FillerKind::kCategorical: j["value"] = filler.value; break;
  }
  if (!filler.time_attachments.empty()) j["time"] = filler.time_attachments;
  if (filler.irrealis) j["irrealis"] = std::string(to_string(*filler.irrealis));
  return j;
}

Json to_json(const TemplateInstance &instance) {
  Json fillers = Json::object();
  for (const auto &[slot, list] : instance.fillers) {
    Json arr = Json::array();
    for (const Filler &f : list) arr.push_back(to_json(f));
    fillers[slot] = std::move(arr);
  }
  return {{"type", instance.type}, {"fillers", fillers}};
}

TemplateInstance template_from_json(const Json &json) {
  TemplateInstance instance;
  instance.type = get_as<std::string>(member(json, "type"), "template type");
  if (json.contains("fillers")) {
    const Json &fillers = json.at("fillers");
    if (!fillers.is_object()) malformed("fillers must be an object");
    for (const auto &[slot, list] : fillers.items()) {
      if (!list.is_array()) malformed("filler list must be an array");
      auto &out = instance.fillers[slot];
      for (const Json &f : list) out.push_back(filler_from_json(f));
    }
  }
  return instance;
}

Corpus corpus_from_json(const Json &json,
                        std::shared_ptr<const Ontology> ontology) {
  Corpus corpus;
  corpus.ontology = std::move(ontology);
  const Json &docs = member(json, "documents");
  if (!docs.is_array()) malformed("documents must be an array");
  for (const Json &d : docs) {
    Document doc = document_from_json(d);
    if (corpus.find_document(doc.id()) != nullptr) {
      throw Error(ErrorCode::kDuplicateId,
                  "document id '" + doc.id() + "' repeated");
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (json.contains("gold")) {
    const Json &gold = json.at("gold");
    if (!gold.is_object()) malformed("gold must be an object");
    for (const auto &[doc_id, list] : gold.items()) {
      const Document *doc = corpus.find_document(doc_id);
      if (doc == nullptr) {
        throw Error(ErrorCode::kDanglingDocument,
                    "gold references unknown document '" + doc_id + "'");
      }
      corpus.gold[doc_id] = templates_for(list, *doc, *corpus.ontology);
    }
  }
  return corpus;
}

Corpus load_corpus(const std::string &path, const std::string &ontology_path) {
  return load_corpus(path,
                     std::make_shared<const Ontology>(load_ontology(ontology_path)));
}

Corpus load_corpus(const std::string &path,
                   std::shared_ptr<const Ontology> ontology) {
  return corpus_from_json(read_json_file(path), std::move(ontology));
}

Json to_json(const Corpus &corpus) {
  Json docs = Json::array();
  for (const Document &doc : corpus.documents) docs.push_back(to_json(doc));
  Json gold = Json::object();
  for (const Document &doc : corpus.documents) {
    auto it = corpus.gold.find(doc.id());
    if (it == corpus.gold.end()) continue;
    Json list = Json::array();
    for (const TemplateInstance &t : it->second) list.push_back(to_json(t));
    gold[doc.id()] = std::move(list);
  }
  return {{"documents", docs}, {"gold", gold}};
}

void save_corpus(const Corpus &corpus, const std::string &path) {
  write_text_file(path, to_json(corpus).dump() + "\n");
}

TemplateMap predictions_from_json(const Json &json, const Corpus &corpus) {
  // A corpus file scores as predictions through its gold member.
  const bool corpus_shaped = json.is_object() && !json.contains("predictions") &&
                             json.contains("gold");
  const Json &preds = member(json, corpus_shaped ? "gold" : "predictions");
  if (!preds.is_object()) malformed("predictions must be an object");
  TemplateMap out;
  for (const auto &[doc_id, list] : preds.items()) {
    const Document *doc = corpus.find_document(doc_id);
    if (doc == nullptr) {
      throw Error(ErrorCode::kDanglingDocument,
                  "prediction for unknown document '" + doc_id + "'");
    }
    out[doc_id] = templates_for(list, *doc, *corpus.ontology);
  }
  return out;
}

TemplateMap load_predictions(const std::string &path, const Corpus &corpus) {
  return predictions_from_json(read_json_file(path), corpus);
}

Json predictions_to_json(const TemplateMap &predictions, const Corpus &corpus) {
  Json out = Json::object();
  for (const auto &[doc_id, templates] : predictions) {
    const Document *doc = corpus.find_document(doc_id);
    if (doc == nullptr) {
      throw Error(ErrorCode::kDanglingDocument,
                  "prediction for unknown document '" + doc_id + "'");
    }
    std::vector<TemplateInstance> canonical;
    for (TemplateInstance t : templates) {
      validate_template(t, *doc, *corpus.ontology);
      canonicalize(t, *doc);
      canonical.push_back(std::move(t));
    }
    std::sort(canonical.begin(), canonical.end());
    canonical.erase(std::unique(canonical.begin(), canonical.end()),
                    canonical.end());
    Json list = Json::array();
    for (const TemplateInstance &t : canonical) list.push_back(to_json(t));
    out[doc_id] = std::move(list);
  }
  return {{"predictions", out}};
}

void save_predictions(const TemplateMap &predictions, const Corpus &corpus,
                      const std::string &path) {
  write_text_file(path, predictions_to_json(predictions, corpus).dump(2) + "\n");
}

}  // namespace iterx
