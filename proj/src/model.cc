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

#include "iterx/model.h"

#include <random>

#include "iterx/error.h"

namespace iterx {

Model::Model(std::shared_ptr<const Ontology> ontology, const ModelConfig &config)
    : ontology_(std::move(ontology)), config_(config) {
  if (!ontology_) throw Error(ErrorCode::kInvalidArgument, "model needs an ontology");
  if (config.dim <= 0 || config.dim % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding width must be positive and even");
  }
  if (config.layers < 0 || config.ff_multiplier <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid transformer shape");
  }
  embedder_.dim = config.dim;
  embedder_.seed = config.embed_seed;
  std::mt19937_64 rng(config.seed);
  encoder = SpanEncoderParameters::init(config.dim, rng);
  policy = PolicyParameters::init(config.dim, ontology_->type_count(),
                                  ontology_->slot_count(), config.layers,
                                  config.heads, config.ff_multiplier, rng);
  gru = GruParameters::init(config.dim, rng);
}

std::size_t Model::parameter_count() const {
  std::size_t total = 0;
  for_each_parameter([&](const Parameter &p) { total += p.value.size(); });
  return total;
}

bool Model::all_finite() const {
  bool finite = true;
  for_each_parameter([&](const Parameter &p) { finite = finite && p.value.allFinite(); });
  return finite;
}

void Model::zero_grad() {
  for_each_parameter([](Parameter &p) { p.zero_grad(); });
}

}  // namespace iterx
