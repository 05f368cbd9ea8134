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

#include "iterx/embed.h"

#include <cmath>
#include <string_view>

#include "iterx/error.h"
#include "iterx/init.h"

namespace iterx {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

}  // namespace

SpanEncoderParameters SpanEncoderParameters::init(int dim,
                                                  std::mt19937_64 &rng) {
  SpanEncoderParameters p;
  p.pooling_query = random_parameter("encoder.pooling_query", 1, dim, rng);
  p.w1 = random_parameter("encoder.w1", 3 * dim, dim, rng);
  p.b1 = zero_parameter("encoder.b1", 1, dim);
  p.w2 = random_parameter("encoder.w2", dim, dim, rng);
  p.b2 = zero_parameter("encoder.b2", 1, dim);
  return p;
}

Matrix embed_tokens(const Document &doc, const EmbedderConfig &config) {
  const auto &tokens = doc.tokens();
  Matrix out(static_cast<Eigen::Index>(tokens.size()), config.dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::mt19937_64 rng(token_hash(tokens[i], config.seed));
    std::normal_distribution<double> normal(0.0, 1.0);
    auto row = out.row(static_cast<Eigen::Index>(i));
    for (int k = 0; k < config.dim; ++k) row(k) = normal(rng);
    row /= row.norm();
  }
  return out;
}

RowVector positional_encoding(int offset, int dim) {
  if (offset < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative positional offset");
  }
  if (dim % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding width must be even");
  }
  RowVector out(dim);
  for (int k = 0; 2 * k < dim; ++k) {
    const double angle =
        offset / std::pow(10000.0, static_cast<double>(2 * k) / dim);
    out(2 * k) = std::sin(angle);
    out(2 * k + 1) = std::cos(angle);
  }
  return out;
}

ad::Var encode_spans(ad::Tape &tape, const Document &doc, const Matrix &tokens,
                     SpanEncoderParameters &params) {
  const Eigen::Index dim = params.b1.value.cols();
  if (tokens.rows() != static_cast<Eigen::Index>(doc.tokens().size()) ||
      tokens.cols() != dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "token matrix does not match the document");
  }
  const auto &mentions = doc.mentions();
  if (mentions.empty()) return tape.constant(Matrix(0, dim));

  ad::Var query = tape.parameter(params.pooling_query);
  std::vector<ad::Var> pooled;
  std::vector<int> lefts, rights;
  Matrix positions(static_cast<Eigen::Index>(mentions.size()), dim);
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    const Mention &m = mentions[i];
    lefts.push_back(m.left);
    rights.push_back(m.right);
    ad::Var span = tape.constant(tokens.middleRows(m.left, m.right - m.left + 1));
    ad::Var weights = ad::softmax_rows(ad::matmul_nt(query, span));
    pooled.push_back(ad::matmul(weights, span));
    positions.row(static_cast<Eigen::Index>(i)) =
        positional_encoding(m.left, static_cast<int>(dim));
  }
  ad::Var all_tokens = tape.constant(tokens);
  ad::Var features = ad::concat_cols({ad::gather_rows(all_tokens, lefts),
                                      ad::gather_rows(all_tokens, rights),
                                      ad::concat_rows(pooled)});
  ad::Var hidden = ad::tanh(ad::add_row(
      ad::matmul(features, tape.parameter(params.w1)), tape.parameter(params.b1)));
  ad::Var compressed = ad::tanh(ad::add_row(
      ad::matmul(hidden, tape.parameter(params.w2)), tape.parameter(params.b2)));
  return ad::add(compressed, tape.constant(std::move(positions)));
}

SpanEncoding encode_spans(const Document &doc, const Matrix &tokens,
                          const SpanEncoderParameters &params) {
  ad::Tape tape(/*record=*/false);
  // A non-recording tape only reads parameter values.
  auto &mutable_params = const_cast<SpanEncoderParameters &>(params);
  return SpanEncoding{encode_spans(tape, doc, tokens, mutable_params).value()};
}

}  // namespace iterx
