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

// Maximum-weight bipartite alignment between reference rows and predicted
// columns.

#ifndef ITERX_ALIGNMENT_H_
#define ITERX_ALIGNMENT_H_

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace iterx {

// (reference index, predicted index) pairs sorted by reference index.
// Matchings have maximum cardinality min(n_ref, n_pred); pairs of zero
// similarity are kept.
struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total = 0.0;
};

// Kuhn-Munkres on the zero-padded square problem. Among optimal matchings
// (within 1e-9 relative) the lexicographically smallest pair sequence is
// returned. Throws kInvalidArgument for non-finite entries.
Alignment align_optimal(const Eigen::MatrixXd &similarity);

// Exhaustive enumeration with the same tie rule. Throws kTooLarge when
// max(n_ref, n_pred) > 8.
Alignment align_bruteforce(const Eigen::MatrixXd &similarity);

inline constexpr std::size_t kBruteForceLimit = 8;

}  // namespace iterx

#endif  // ITERX_ALIGNMENT_H_
