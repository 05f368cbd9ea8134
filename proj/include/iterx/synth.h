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

// Synthetic corpora with planted templates.
//
// A document is a sequence of template blocks with distractor mentions
// interleaved. A block of type t opens with the token TYPE<t> and lists its
// filled slots as two-token mentions "T<t>.S<s>#<k> f<w>", where k counts
// earlier blocks of the same type in the document. Distractors are
// single-token mentions "x<w>".

#ifndef ITERX_SYNTH_H_
#define ITERX_SYNTH_H_

#include <cstdint>
#include <memory>

#include "iterx/core.h"

namespace iterx {

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_docs = 200;
  int min_templates = 1;
  int max_templates = 3;
  int n_template_types = 2;
  int slots_per_type = 3;
  int filler_vocab = 200;
  int distractor_vocab = 50;
  double distractor_rate = 0.3;
  // Probability that a slot is filled; every block fills at least one slot.
  double slot_fill_rate = 0.85;

  // Throws kInvalidArgument.
  void validate() const;
};

// Types Type0, Type1, ... each with entity slots S0, S1, ...
std::shared_ptr<const Ontology> synth_ontology(const SynthConfig &config);

Corpus generate(const SynthConfig &config);
Corpus generate(const SynthConfig &config, std::shared_ptr<const Ontology> ontology);

}  // namespace iterx

#endif  // ITERX_SYNTH_H_
