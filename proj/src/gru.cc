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

#include "iterx/gru.h"

#include "iterx/error.h"
#include "iterx/init.h"

namespace iterx {

GruParameters GruParameters::init(int dim, std::mt19937_64 &rng) {
  GruParameters p;
  p.wz = random_parameter("gru.wz", 2 * dim, dim, rng);
  p.uz = random_parameter("gru.uz", dim, dim, rng);
  p.bz = zero_parameter("gru.bz", 1, dim);
  p.wr = random_parameter("gru.wr", 2 * dim, dim, rng);
  p.ur = random_parameter("gru.ur", dim, dim, rng);
  p.br = zero_parameter("gru.br", 1, dim);
  p.wh = random_parameter("gru.wh", 2 * dim, dim, rng);
  p.uh = random_parameter("gru.uh", dim, dim, rng);
  p.bh = zero_parameter("gru.bh", 1, dim);
  return p;
}

ad::Var gru_step(ad::Tape &tape, const ad::Var &input, const ad::Var &hidden,
                 GruParameters &params) {
  if (input.rows() != hidden.rows() || input.cols() != 2 * hidden.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "GRU input must be rows x 2d");
  }
  auto gate = [&](Parameter &w, Parameter &u, Parameter &b, const ad::Var &h) {
    return ad::add_row(
        ad::add(ad::matmul(input, tape.parameter(w)), ad::matmul(h, tape.parameter(u))),
        tape.parameter(b));
  };
  ad::Var z = ad::sigmoid(gate(params.wz, params.uz, params.bz, hidden));
  ad::Var r = ad::sigmoid(gate(params.wr, params.ur, params.br, hidden));
  ad::Var candidate = ad::tanh(gate(params.wh, params.uh, params.bh, ad::mul(r, hidden)));
  // (1 - z) h + z h~ = h + z (h~ - h)
  return ad::add(hidden, ad::mul(z, ad::sub(candidate, hidden)));
}

Matrix gru_step(const Matrix &input, const Matrix &hidden,
                const GruParameters &params) {
  ad::Tape tape(/*record=*/false);
  auto &mutable_params = const_cast<GruParameters &>(params);
  return gru_step(tape, tape.constant(input), tape.constant(hidden), mutable_params)
      .value();
}

}  // namespace iterx
