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

#ifndef ITERX_GRU_H_
#define ITERX_GRU_H_

#include <random>

#include "iterx/tape.h"

namespace iterx {

using ad::Matrix;
using ad::Parameter;

// Gated recurrent unit with input width 2d and hidden width d. Rows of the
// input and hidden matrices are independent sequences.
//   z  = sigmoid(x Wz + h Uz + bz)
//   r  = sigmoid(x Wr + h Ur + br)
//   h~ = tanh(x Wh + (r * h) Uh + bh)
//   h' = (1 - z) * h + z * h~
struct GruParameters {
  Parameter wz, uz, bz;
  Parameter wr, ur, br;
  Parameter wh, uh, bh;

  static GruParameters init(int dim, std::mt19937_64 &rng);

  int dim() const { return static_cast<int>(uz.value.rows()); }

  template <typename F>
  void for_each(F &&f) {
    for (Parameter *p : {&wz, &uz, &bz, &wr, &ur, &br, &wh, &uh, &bh}) f(*p);
  }
};

ad::Var gru_step(ad::Tape &tape, const ad::Var &input, const ad::Var &hidden,
                 GruParameters &params);
Matrix gru_step(const Matrix &input, const Matrix &hidden,
                const GruParameters &params);

}  // namespace iterx

#endif  // ITERX_GRU_H_
