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

#include "iterx/alignment.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "iterx/error.h"

namespace iterx {
namespace {

using Matrix = Eigen::MatrixXd;
using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

void check_finite(const Matrix &m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "similarity matrix has non-finite entries");
  }
}

// Minimum-cost perfect assignment on a square cost matrix (potentials
// method). Returns column of each row.
std::vector<int> hungarian(const Matrix &cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) assignment[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return assignment;
}

// Best total over maximum-cardinality matchings of the given rows/columns.
double optimum(const Matrix &sim, const std::vector<std::size_t> &rows,
               const std::vector<std::size_t> &cols) {
  const std::size_t n = std::max(rows.size(), cols.size());
  if (rows.empty() || cols.empty()) return 0.0;
  double top = 0.0;
  for (std::size_t r : rows) {
    for (std::size_t c : cols) top = std::max(top, sim(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
  }
  // Padding cells cost `top`, i.e. similarity zero.
  Matrix cost = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), top);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          top - sim(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  const std::vector<int> assignment = hungarian(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int j = assignment[i];
    if (j >= 0 && static_cast<std::size_t>(j) < cols.size()) {
      total += sim(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]));
    }
  }
  return total;
}

double tolerance(double best) { return 1e-9 * std::max(1.0, std::abs(best)); }

double pair_total(const Matrix &sim, const Pairs &pairs) {
  double total = 0.0;
  for (const auto &[r, c] : pairs) {
    total += sim(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return total;
}

}  // namespace

Alignment align_optimal(const Matrix &similarity) {
  check_finite(similarity);
  const auto n = static_cast<std::size_t>(similarity.rows());
  const auto m = static_cast<std::size_t>(similarity.cols());
  std::vector<std::size_t> rows(n), cols(m);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  const double best = optimum(similarity, rows, cols);
  const double slack = tolerance(best);

  // Fix references in order, each to the smallest predicted index (or to
  // nothing) that still admits an optimal completion.
  Pairs pairs;
  std::vector<char> col_used(m, 0);
  std::size_t needed = std::min(n, m);
  double fixed = 0.0;
  for (std::size_t r = 0; r < n && needed > 0; ++r) {
    std::vector<std::size_t> rest_rows(rows.begin() + static_cast<std::ptrdiff_t>(r) + 1, rows.end());
    auto feasible = [&](std::optional<std::size_t> c) {
      std::vector<std::size_t> rest_cols;
      for (std::size_t j = 0; j < m; ++j) {
        if (!col_used[j] && (!c || j != *c)) rest_cols.push_back(j);
      }
      const std::size_t still = needed - (c ? 1 : 0);
      if (std::min(rest_rows.size(), rest_cols.size()) < still) return false;
      const double gain = c ? similarity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*c)) : 0.0;
      return fixed + gain + optimum(similarity, rest_rows, rest_cols) >= best - slack;
    };
    bool placed = false;
    for (std::size_t c = 0; c < m && !placed; ++c) {
      if (col_used[c] || !feasible(c)) continue;
      pairs.emplace_back(r, c);
      col_used[c] = 1;
      fixed += similarity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      --needed;
      placed = true;
    }
  }
  return Alignment{pairs, pair_total(similarity, pairs)};
}

Alignment align_bruteforce(const Matrix &similarity) {
  check_finite(similarity);
  const auto n = static_cast<std::size_t>(similarity.rows());
  const auto m = static_cast<std::size_t>(similarity.cols());
  if (std::max(n, m) > kBruteForceLimit) {
    throw Error(ErrorCode::kTooLarge, "brute-force alignment is limited to 8 x 8");
  }
  // Every maximum-cardinality injective map, as sorted pair sequences.
  std::vector<Pairs> candidates;
  const bool rows_smaller = n <= m;
  const std::size_t small = rows_smaller ? n : m;
  const std::size_t large = rows_smaller ? m : n;
  std::vector<std::size_t> pick;
  std::vector<char> taken(large, 0);
  auto recurse = [&](auto &&self) -> void {
    if (pick.size() == small) {
      Pairs pairs;
      for (std::size_t i = 0; i < small; ++i) {
        pairs.emplace_back(rows_smaller ? std::make_pair(i, pick[i])
                                        : std::make_pair(pick[i], i));
      }
      std::sort(pairs.begin(), pairs.end());
      candidates.push_back(std::move(pairs));
      return;
    }
    for (std::size_t j = 0; j < large; ++j) {
      if (taken[j]) continue;
      taken[j] = 1;
      pick.push_back(j);
      self(self);
      pick.pop_back();
      taken[j] = 0;
    }
  };
  recurse(recurse);

  double best = -std::numeric_limits<double>::infinity();
  for (const Pairs &pairs : candidates) best = std::max(best, pair_total(similarity, pairs));
  const double slack = tolerance(best);
  const Pairs *chosen = nullptr;
  for (const Pairs &pairs : candidates) {
    if (pair_total(similarity, pairs) < best - slack) continue;
    if (chosen == nullptr || pairs < *chosen) chosen = &pairs;
  }
  return Alignment{*chosen, pair_total(similarity, *chosen)};
}

}  // namespace iterx
