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

#include "iterx/synth.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "iterx/error.h"

namespace iterx {

void SynthConfig::validate() const {
  if (n_docs < 0) throw Error(ErrorCode::kInvalidArgument, "n_docs must be >= 0");
  if (min_templates < 0 || max_templates < min_templates) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 <= min_templates <= max_templates");
  }
  if (n_template_types < 1 || slots_per_type < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one type and one slot");
  }
  if (filler_vocab < 1 || distractor_vocab < 1) {
    throw Error(ErrorCode::kInvalidArgument, "vocabularies must be nonempty");
  }
  if (!(distractor_rate >= 0.0 && distractor_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "distractor_rate must lie in [0, 1)");
  }
  if (!(slot_fill_rate > 0.0 && slot_fill_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "slot_fill_rate must lie in (0, 1]");
  }
}

std::shared_ptr<const Ontology> synth_ontology(const SynthConfig &config) {
  config.validate();
  std::vector<TemplateType> types;
  for (int t = 0; t < config.n_template_types; ++t) {
    TemplateType type{"Type" + std::to_string(t), {}};
    for (int s = 0; s < config.slots_per_type; ++s) {
      type.slots.push_back({"S" + std::to_string(s), SlotKind::kEntity, {}, false});
    }
    types.push_back(std::move(type));
  }
  return std::make_shared<const Ontology>(std::move(types));
}

Corpus generate(const SynthConfig &config) {
  return generate(config, synth_ontology(config));
}

namespace {

// A run of tokens; `mention` marks a unit that is a candidate mention.
struct Unit {
  std::vector<std::string> tokens;
  bool mention = false;
  int block = -1;  // template block of a filler, -1 otherwise
  std::string slot;
};

}  // namespace

Corpus generate(const SynthConfig &config, std::shared_ptr<const Ontology> ontology) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto coin = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  Corpus corpus;
  corpus.ontology = ontology;
  for (int d = 0; d < config.n_docs; ++d) {
    const int blocks = uniform_int(config.min_templates, config.max_templates);
    std::vector<Unit> units;
    std::vector<int> block_type;
    std::vector<int> ordinal_of_type(static_cast<std::size_t>(config.n_template_types), 0);
    int fillers = 0;
    for (int b = 0; b < blocks; ++b) {
      const int t = uniform_int(0, config.n_template_types - 1);
      const int k = ordinal_of_type[static_cast<std::size_t>(t)]++;
      block_type.push_back(t);
      units.push_back({{"TYPE" + std::to_string(t)}, false, -1, ""});
      std::vector<int> slots;
      for (int s = 0; s < config.slots_per_type; ++s) {
        if (coin(config.slot_fill_rate)) slots.push_back(s);
      }
      if (slots.empty()) slots.push_back(uniform_int(0, config.slots_per_type - 1));
      for (int s : slots) {
        const std::string marker = "T" + std::to_string(t) + ".S" + std::to_string(s) +
                                   "#" + std::to_string(k);
        const std::string filler = "f" + std::to_string(uniform_int(0, config.filler_vocab - 1));
        units.push_back({{marker, filler}, true, b, "S" + std::to_string(s)});
        ++fillers;
      }
    }
    // Distractors make up roughly distractor_rate of all mentions.
    int distractors = 0;
    if (config.distractor_rate > 0.0) {
      const double expected =
          fillers > 0 ? fillers * config.distractor_rate / (1.0 - config.distractor_rate)
                      : 1.0 + 2.0 * config.distractor_rate;
      distractors = static_cast<int>(std::floor(expected));
      if (coin(expected - distractors)) ++distractors;
    }
    for (int i = 0; i < distractors; ++i) {
      // Insert between units; never between a marker and its filler.
      const int at = uniform_int(0, static_cast<int>(units.size()));
      const std::string word = "x" + std::to_string(uniform_int(0, config.distractor_vocab - 1));
      units.insert(units.begin() + at, Unit{{word}, true, -1, ""});
    }

    std::vector<std::string> tokens;
    std::vector<Mention> mentions;
    std::vector<TemplateInstance> gold(static_cast<std::size_t>(blocks));
    for (int b = 0; b < blocks; ++b) {
      gold[static_cast<std::size_t>(b)].type =
          "Type" + std::to_string(block_type[static_cast<std::size_t>(b)]);
    }
    for (const Unit &unit : units) {
      const int left = static_cast<int>(tokens.size());
      tokens.insert(tokens.end(), unit.tokens.begin(), unit.tokens.end());
      if (!unit.mention) continue;
      Mention m;
      m.id = "m" + std::to_string(mentions.size());
      m.left = left;
      m.right = static_cast<int>(tokens.size()) - 1;
      mentions.push_back(m);
      if (unit.block >= 0) {
        gold[static_cast<std::size_t>(unit.block)].fillers[unit.slot].push_back(
            Filler::entity({m.id}));
      }
    }
    Document doc("d" + std::to_string(d), std::move(tokens), std::move(mentions));
    for (TemplateInstance &t : gold) {
      validate_template(t, doc, *ontology);
      canonicalize(t, doc);
    }
    corpus.gold[doc.id()] = std::move(gold);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace iterx
