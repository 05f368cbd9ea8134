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

#ifndef ITERX_INIT_H_
#define ITERX_INIT_H_

#include <cmath>
#include <random>
#include <string>

#include "iterx/tape.h"

namespace iterx {

inline ad::Parameter gaussian_parameter(std::string name, int rows, int cols,
                                        std::mt19937_64 &rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  ad::Matrix value(rows, cols);
  for (Eigen::Index i = 0; i < value.size(); ++i) value.data()[i] = normal(rng);
  return ad::Parameter(std::move(name), std::move(value));
}

// Weight matrix for the x * W convention: rows is the fan-in.
inline ad::Parameter random_parameter(std::string name, int rows, int cols,
                                      std::mt19937_64 &rng,
                                      double scale = 1.0) {
  return gaussian_parameter(std::move(name), rows, cols, rng,
                            scale / std::sqrt(static_cast<double>(rows)));
}

inline ad::Parameter zero_parameter(std::string name, int rows, int cols) {
  return ad::Parameter(std::move(name), ad::Matrix::Zero(rows, cols));
}

inline ad::Parameter constant_parameter(std::string name, int rows, int cols,
                                        double value) {
  return ad::Parameter(std::move(name), ad::Matrix::Constant(rows, cols, value));
}

}  // namespace iterx

#endif  // ITERX_INIT_H_
