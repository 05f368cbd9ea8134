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

// Span representations: a deterministic surrogate token embedder and the
// span encoder that turns candidate mentions into the initial span states.

#ifndef ITERX_EMBED_H_
#define ITERX_EMBED_H_

#include <cstdint>
#include <random>

#include "iterx/core.h"
#include "iterx/tape.h"

namespace iterx {

using ad::Matrix;
using ad::Parameter;
using ad::RowVector;

struct EmbedderConfig {
  int dim = 32;
  std::uint64_t seed = 17;
  // Kept for interface parity with chunked encoders; the surrogate embedder
  // is per-token, so chunking never changes its output.
  int chunk_size = 1024;
};

// Learned weights of the span encoder.
struct SpanEncoderParameters {
  Parameter pooling_query;  // 1 x d
  Parameter w1;             // 3d x d
  Parameter b1;             // 1 x d
  Parameter w2;             // d x d
  Parameter b2;             // 1 x d

  static SpanEncoderParameters init(int dim, std::mt19937_64 &rng);

  template <typename F>
  void for_each(F &&f) {
    f(pooling_query);
    f(w1);
    f(b1);
    f(w2);
    f(b2);
  }
};

// One row per candidate mention, in document mention order.
struct SpanEncoding {
  Matrix rows;
};

// Each row is a unit-norm Gaussian draw seeded by hash(token, seed), so
// identical tokens always map to identical rows.
Matrix embed_tokens(const Document &doc, const EmbedderConfig &config);

// Entry 2k is sin(offset / 10000^(2k/d)); entry 2k+1 the matching cosine.
RowVector positional_encoding(int offset, int dim);

// [first ; last ; attention-pooled] per span, compressed 3d -> d -> d with
// tanh, plus the positional encoding of the span's left offset.
ad::Var encode_spans(ad::Tape &tape, const Document &doc, const Matrix &tokens,
                     SpanEncoderParameters &params);
SpanEncoding encode_spans(const Document &doc, const Matrix &tokens,
                          const SpanEncoderParameters &params);

}  // namespace iterx

#endif  // ITERX_EMBED_H_
