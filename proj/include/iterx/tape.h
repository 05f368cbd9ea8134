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

// A small reverse-mode differentiation tape over dense matrices.
//
// Every operation records its output value and a closure that pushes the
// output gradient back to its inputs. Parameters are bound to a tape once;
// backward() accumulates their gradients into Parameter::grad. Row vectors
// are 1 x n matrices; per-span data is laid out one span per row.

#ifndef ITERX_TAPE_H_
#define ITERX_TAPE_H_

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace iterx::ad {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  Eigen::Index size() const { return value.size(); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape *tape, int id) : tape_(tape), id_(id) {}

  const Matrix &value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape *tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape *tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  // Called with the node id and its accumulated output gradient.
  using Backward = std::function<void(Tape &, int, const Matrix &)>;

  // With record == false, parameters are bound as constants and no backward
  // closures are kept; use for inference.
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var constant(Matrix value);
  Var parameter(Parameter &param);

  // `loss` must be 1 x 1. Adds d loss / d param into every bound parameter.
  void backward(const Var &loss);

  const Matrix &value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of node `id`, zero-initialized on first access.
  Matrix &grad(int id);
  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  Var push(Matrix value, const std::vector<int> &parents, Backward fn);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<Parameter *, int> bound_;
};

inline const Matrix &Var::value() const { return tape_->value(id_); }

Var matmul(const Var &a, const Var &b);
// a * b^T without materializing the transpose.
Var matmul_nt(const Var &a, const Var &b);
Var add(const Var &a, const Var &b);
Var sub(const Var &a, const Var &b);
// Adds the 1 x n row vector `row` to every row of `a`.
Var add_row(const Var &a, const Var &row);
Var mul(const Var &a, const Var &b);
// alpha * a + beta, elementwise.
Var affine(const Var &a, double alpha, double beta);
Var tanh(const Var &a);
Var sigmoid(const Var &a);

Var concat_cols(const std::vector<Var> &parts);
Var concat_rows(const std::vector<Var> &parts);
Var slice_rows(const Var &a, Eigen::Index start, Eigen::Index count);
Var slice_cols(const Var &a, Eigen::Index start, Eigen::Index count);
Var gather_rows(const Var &a, const std::vector<int> &rows);
// Copy of `base` whose rows `rows[k]` are replaced by row k of `replacement`.
Var scatter_rows(const Var &base, const std::vector<int> &rows,
                 const Var &replacement);
Var repeat_row(const Var &row, Eigen::Index count);

Var softmax_rows(const Var &a);
// Row-wise log-softmax restricted to columns where valid[c] is true; the
// remaining columns hold -infinity and receive no gradient.
Var masked_log_softmax_rows(const Var &logits, const std::vector<bool> &valid);
Var layer_norm_rows(const Var &a, const Var &gain, const Var &bias,
                    double epsilon = 1e-5);

// 1 x 1 sum of all entries.
Var sum(const Var &a);
// 1 x 1 sum of the listed (row, col) entries.
Var sum_entries(const Var &a,
                const std::vector<std::pair<int, int>> &coordinates);

}  // namespace iterx::ad

#endif  // ITERX_TAPE_H_
