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

// JSON serialization for ontologies, corpora and prediction files.
//
//   ontology:    {"template_types":[{"name":..,"slots":[{"name":..,
//                 "kind":"entity","time_irrealis":false}]}]}
//   corpus:      {"documents":[{"id":..,"tokens":[..],"mentions":[{"id":..,
//                 "left":0,"right":1,"informativity":"name"}]}],
//                 "gold":{"d1":[{"type":..,"fillers":{"Victim":
//                 [{"entity":["m1"]}]}}]}}
//   predictions: {"predictions":{"d1":[<template>, ...]}}
//
// A filler object carries exactly one of "mention", "entity", "event",
// "boolean" or "value", plus optional "time" and "irrealis" members.

#ifndef ITERX_CORPUS_IO_H_
#define ITERX_CORPUS_IO_H_

#include <memory>
#include <string>

#include "iterx/core.h"
#include "json.hpp"

namespace iterx {

using Json = nlohmann::json;

Ontology ontology_from_json(const Json &json);
Json to_json(const Ontology &ontology);
Ontology load_ontology(const std::string &path);
void save_ontology(const Ontology &ontology, const std::string &path);

Json to_json(const Filler &filler);
Json to_json(const TemplateInstance &instance);
TemplateInstance template_from_json(const Json &json);

// Rejects rather than repairs invalid input. Errors: kMalformedJson,
// kUnknownSlot, kDanglingMention, kBoundaryError, kIoError.
Corpus corpus_from_json(const Json &json,
                        std::shared_ptr<const Ontology> ontology);
Corpus load_corpus(const std::string &path, const std::string &ontology_path);
Corpus load_corpus(const std::string &path,
                   std::shared_ptr<const Ontology> ontology);
Json to_json(const Corpus &corpus);
void save_corpus(const Corpus &corpus, const std::string &path);

// Prediction files are validated against the documents of `corpus`; an
// unknown document id raises kDanglingDocument. Saving deduplicates each
// document's templates and writes them in canonical order.
TemplateMap predictions_from_json(const Json &json, const Corpus &corpus);
TemplateMap load_predictions(const std::string &path, const Corpus &corpus);
Json predictions_to_json(const TemplateMap &predictions, const Corpus &corpus);
void save_predictions(const TemplateMap &predictions, const Corpus &corpus,
                      const std::string &path);

Json read_json_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);

}  // namespace iterx

#endif  // ITERX_CORPUS_IO_H_
