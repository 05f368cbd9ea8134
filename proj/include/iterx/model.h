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

// All learnable state of an extractor, bundled with the ontology it was
// built for.

#ifndef ITERX_MODEL_H_
#define ITERX_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>

#include "iterx/core.h"
#include "iterx/embed.h"
#include "iterx/gru.h"
#include "iterx/policy.h"

namespace iterx {

struct ModelConfig {
  int dim = 32;
  int layers = 2;
  int heads = 4;
  int ff_multiplier = 4;
  std::uint64_t seed = 7;
  std::uint64_t embed_seed = 17;
};

class Model {
 public:
  Model(std::shared_ptr<const Ontology> ontology, const ModelConfig &config);

  const Ontology &ontology() const { return *ontology_; }
  std::shared_ptr<const Ontology> ontology_ptr() const { return ontology_; }
  const ModelConfig &config() const { return config_; }
  const EmbedderConfig &embedder() const { return embedder_; }

  SpanEncoderParameters encoder;
  PolicyParameters policy;
  GruParameters gru;

  // Visits every parameter in a fixed order (checkpoint and optimizer order).
  template <typename F>
  void for_each_parameter(F &&f) {
    encoder.for_each(f);
    policy.for_each(f);
    gru.for_each(f);
  }
  template <typename F>
  void for_each_parameter(F &&f) const {
    const_cast<Model *>(this)->for_each_parameter(
        [&](Parameter &p) { f(static_cast<const Parameter &>(p)); });
  }

  std::size_t parameter_count() const;
  bool all_finite() const;
  void zero_grad();

 private:
  std::shared_ptr<const Ontology> ontology_;
  ModelConfig config_;
  EmbedderConfig embedder_;
};

}  // namespace iterx

#endif  // ITERX_MODEL_H_
