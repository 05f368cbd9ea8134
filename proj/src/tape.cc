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

#include "iterx/tape.h"

#include <cmath>
#include <limits>

#include "iterx/error.h"

namespace iterx::ad {

Var Tape::constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::parameter(Parameter &param) {
  if (!record_) return constant(param.value);
  auto it = bound_.find(&param);
  if (it != bound_.end()) return Var(this, it->second);
  Node node;
  node.value = param.value;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size()) - 1;
  bound_.emplace(&param, id);
  return Var(this, id);
}

Matrix &Tape::grad(int id) {
  Node &node = nodes_[id];
  if (node.grad.rows() != node.value.rows() ||
      node.grad.cols() != node.value.cols()) {
    node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

Var Tape::push(Matrix value, const std::vector<int> &parents, Backward fn) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    for (int p : parents) node.requires_grad |= nodes_[p].requires_grad;
    if (node.requires_grad) node.backward = std::move(fn);
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(const Var &loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "backward() needs a 1 x 1 loss");
  }
  if (!record_) return;
  grad(loss.id()).setConstant(1.0);
  for (int id = loss.id(); id >= 0; --id) {
    Node &node = nodes_[id];
    if (!node.backward || node.grad.size() == 0) continue;
    // The closure only touches its parents' gradients, which have lower ids.
    const Matrix g = std::move(node.grad);
    node.backward(*this, id, g);
  }
  for (auto &[param, id] : bound_) {
    const Matrix &g = nodes_[id].grad;
    if (g.size() != 0 && g.rows() == param->value.rows()) param->grad += g;
  }
}

namespace {

Tape &tape_of(const Var &a) { return *a.tape(); }

void check(bool ok, const char *what) {
  if (!ok) throw Error(ErrorCode::kShapeMismatch, what);
}

}  // namespace

Var matmul(const Var &a, const Var &b) {
  check(a.cols() == b.rows(), "matmul: inner dimensions differ");
  const int ia = a.id(), ib = b.id();
  Matrix out = a.value() * b.value();
  return tape_of(a).push(std::move(out), {ia, ib},
                         [ia, ib](Tape &t, int, const Matrix &g) {
                           if (t.requires_grad(ia))
                             t.grad(ia).noalias() += g * t.value(ib).transpose();
                           if (t.requires_grad(ib))
                             t.grad(ib).noalias() += t.value(ia).transpose() * g;
                         });
}

Var matmul_nt(const Var &a, const Var &b) {
  check(a.cols() == b.cols(), "matmul_nt: inner dimensions differ");
  const int ia = a.id(), ib = b.id();
  Matrix out = a.value() * b.value().transpose();
  return tape_of(a).push(std::move(out), {ia, ib},
                         [ia, ib](Tape &t, int, const Matrix &g) {
                           if (t.requires_grad(ia))
                             t.grad(ia).noalias() += g * t.value(ib);
                           if (t.requires_grad(ib))
                             t.grad(ib).noalias() += g.transpose() * t.value(ia);
                         });
}

Var add(const Var &a, const Var &b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(), "add: shapes differ");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(a.value() + b.value(), {ia, ib},
                         [ia, ib](Tape &t, int, const Matrix &g) {
                           if (t.requires_grad(ia)) t.grad(ia) += g;
                           if (t.requires_grad(ib)) t.grad(ib) += g;
                         });
}

Var sub(const Var &a, const Var &b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shapes differ");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(a.value() - b.value(), {ia, ib},
                         [ia, ib](Tape &t, int, const Matrix &g) {
                           if (t.requires_grad(ia)) t.grad(ia) += g;
                           if (t.requires_grad(ib)) t.grad(ib) -= g;
                         });
}

Var add_row(const Var &a, const Var &row) {
  check(row.rows() == 1 && row.cols() == a.cols(), "add_row: bad bias shape");
  const int ia = a.id(), ir = row.id();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return tape_of(a).push(std::move(out), {ia, ir},
                         [ia, ir](Tape &t, int, const Matrix &g) {
                           if (t.requires_grad(ia)) t.grad(ia) += g;
                           if (t.requires_grad(ir))
                             t.grad(ir) += g.colwise().sum();
                         });
}

Var mul(const Var &a, const Var &b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(), "mul: shapes differ");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(
      a.value().cwiseProduct(b.value()), {ia, ib},
      [ia, ib](Tape &t, int, const Matrix &g) {
        if (t.requires_grad(ia)) t.grad(ia) += g.cwiseProduct(t.value(ib));
        if (t.requires_grad(ib)) t.grad(ib) += g.cwiseProduct(t.value(ia));
      });
}

Var affine(const Var &a, double alpha, double beta) {
  const int ia = a.id();
  Matrix out = (alpha * a.value()).array() + beta;
  return tape_of(a).push(std::move(out), {ia},
                         [ia, alpha](Tape &t, int, const Matrix &g) {
                           t.grad(ia) += alpha * g;
                         });
}

Var tanh(const Var &a) {
  const int ia = a.id();
  Matrix out = a.value().array().tanh();
  return tape_of(a).push(
      std::move(out), {ia}, [ia](Tape &t, int self, const Matrix &g) {
        const Matrix &y = t.value(self);
        t.grad(ia).array() += g.array() * (1.0 - y.array().square());
      });
}

Var sigmoid(const Var &a) {
  const int ia = a.id();
  Matrix out = (1.0 + (-a.value().array()).exp()).inverse();
  return tape_of(a).push(
      std::move(out), {ia}, [ia](Tape &t, int self, const Matrix &g) {
        const Matrix &y = t.value(self);
        t.grad(ia).array() += g.array() * y.array() * (1.0 - y.array());
      });
}

Var concat_cols(const std::vector<Var> &parts) {
  check(!parts.empty(), "concat_cols: no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var &p : parts) {
    check(p.rows() == rows, "concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;
  Eigen::Index offset = 0;
  for (const Var &p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    ids.push_back(p.id());
    spans.emplace_back(offset, p.cols());
    offset += p.cols();
  }
  return tape_of(parts.front())
      .push(std::move(out), ids,
            [ids, spans](Tape &t, int, const Matrix &g) {
              for (std::size_t k = 0; k < ids.size(); ++k) {
                if (t.requires_grad(ids[k]))
                  t.grad(ids[k]) += g.middleCols(spans[k].first, spans[k].second);
              }
            });
}

Var concat_rows(const std::vector<Var> &parts) {
  check(!parts.empty(), "concat_rows: no inputs");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const Var &p : parts) {
    check(p.cols() == cols, "concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;
  Eigen::Index offset = 0;
  for (const Var &p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    ids.push_back(p.id());
    spans.emplace_back(offset, p.rows());
    offset += p.rows();
  }
  return tape_of(parts.front())
      .push(std::move(out), ids,
            [ids, spans](Tape &t, int, const Matrix &g) {
              for (std::size_t k = 0; k < ids.size(); ++k) {
                if (t.requires_grad(ids[k]))
                  t.grad(ids[k]) += g.middleRows(spans[k].first, spans[k].second);
              }
            });
}

Var slice_rows(const Var &a, Eigen::Index start, Eigen::Index count) {
  check(start >= 0 && count >= 0 && start + count <= a.rows(),
        "slice_rows: out of range");
  const int ia = a.id();
  return tape_of(a).push(a.value().middleRows(start, count), {ia},
                         [ia, start, count](Tape &t, int, const Matrix &g) {
                           t.grad(ia).middleRows(start, count) += g;
                         });
}

Var slice_cols(const Var &a, Eigen::Index start, Eigen::Index count) {
  check(start >= 0 && count >= 0 && start + count <= a.cols(),
        "slice_cols: out of range");
  const int ia = a.id();
  return tape_of(a).push(a.value().middleCols(start, count), {ia},
                         [ia, start, count](Tape &t, int, const Matrix &g) {
                           t.grad(ia).middleCols(start, count) += g;
                         });
}

Var gather_rows(const Var &a, const std::vector<int> &rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    check(rows[k] >= 0 && rows[k] < a.rows(), "gather_rows: out of range");
    out.row(static_cast<Eigen::Index>(k)) = a.value().row(rows[k]);
  }
  const int ia = a.id();
  return tape_of(a).push(std::move(out), {ia},
                         [ia, rows](Tape &t, int, const Matrix &g) {
                           Matrix &ga = t.grad(ia);
                           for (std::size_t k = 0; k < rows.size(); ++k)
                             ga.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
                         });
}

Var scatter_rows(const Var &base, const std::vector<int> &rows,
                 const Var &replacement) {
  check(replacement.rows() == static_cast<Eigen::Index>(rows.size()) &&
            (rows.empty() || replacement.cols() == base.cols()),
        "scatter_rows: bad replacement shape");
  Matrix out = base.value();
  std::vector<bool> replaced(static_cast<std::size_t>(base.rows()), false);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    check(rows[k] >= 0 && rows[k] < base.rows(), "scatter_rows: out of range");
    check(!replaced[rows[k]], "scatter_rows: row replaced twice");
    replaced[rows[k]] = true;
    out.row(rows[k]) = replacement.value().row(static_cast<Eigen::Index>(k));
  }
  const int ib = base.id(), ir = replacement.id();
  return tape_of(base).push(
      std::move(out), {ib, ir},
      [ib, ir, rows, replaced](Tape &t, int, const Matrix &g) {
        if (t.requires_grad(ib)) {
          Matrix &gb = t.grad(ib);
          for (Eigen::Index r = 0; r < g.rows(); ++r) {
            if (!replaced[r]) gb.row(r) += g.row(r);
          }
        }
        if (t.requires_grad(ir)) {
          Matrix &gr = t.grad(ir);
          for (std::size_t k = 0; k < rows.size(); ++k)
            gr.row(static_cast<Eigen::Index>(k)) += g.row(rows[k]);
        }
      });
}

Var repeat_row(const Var &row, Eigen::Index count) {
  check(row.rows() == 1, "repeat_row: input must be a row vector");
  Matrix out = row.value().replicate(count, 1);
  const int ir = row.id();
  return tape_of(row).push(std::move(out), {ir},
                           [ir](Tape &t, int, const Matrix &g) {
                             t.grad(ir) += g.colwise().sum();
                           });
}

Var softmax_rows(const Var &a) {
  Matrix out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double top = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - top).exp();
    out.row(r) /= out.row(r).sum();
  }
  const int ia = a.id();
  return tape_of(a).push(
      std::move(out), {ia}, [ia](Tape &t, int self, const Matrix &g) {
        const Matrix &y = t.value(self);
        const Eigen::VectorXd inner = (g.cwiseProduct(y)).rowwise().sum();
        t.grad(ia) += y.cwiseProduct(g - inner.replicate(1, g.cols()));
      });
}

Var masked_log_softmax_rows(const Var &logits, const std::vector<bool> &valid) {
  check(static_cast<Eigen::Index>(valid.size()) == logits.cols(),
        "masked_log_softmax_rows: mask width differs");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const Matrix &x = logits.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double top = kNegInf;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (valid[c]) top = std::max(top, x(r, c));
    }
    double total = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (valid[c]) total += std::exp(x(r, c) - top);
    }
    const double log_norm = top + std::log(total);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out(r, c) = valid[c] ? x(r, c) - log_norm : kNegInf;
    }
  }
  const int il = logits.id();
  return tape_of(logits).push(
      std::move(out), {il}, [il, valid](Tape &t, int self, const Matrix &g) {
        const Matrix &y = t.value(self);
        Matrix &gl = t.grad(il);
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
          double total = 0.0;
          for (Eigen::Index c = 0; c < y.cols(); ++c) {
            if (valid[c]) total += g(r, c);
          }
          for (Eigen::Index c = 0; c < y.cols(); ++c) {
            if (valid[c]) gl(r, c) += g(r, c) - std::exp(y(r, c)) * total;
          }
        }
      });
}

Var layer_norm_rows(const Var &a, const Var &gain, const Var &bias,
                    double epsilon) {
  check(gain.rows() == 1 && gain.cols() == a.cols() && bias.rows() == 1 &&
            bias.cols() == a.cols(),
        "layer_norm_rows: bad gain or bias shape");
  const Matrix &x = a.value();
  const Eigen::Index n = x.cols();
  Matrix normalized(x.rows(), n);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + epsilon);
    normalized.row(r) = (x.row(r).array() - mean) * inv_std(r);
  }
  Matrix out = (normalized.array().rowwise() * gain.value().row(0).array())
                   .rowwise() +
               bias.value().row(0).array();
  const int ia = a.id(), ig = gain.id(), ib = bias.id();
  return tape_of(a).push(
      std::move(out), {ia, ig, ib},
      [ia, ig, ib, normalized, inv_std](Tape &t, int, const Matrix &g) {
        if (t.requires_grad(ig))
          t.grad(ig) += g.cwiseProduct(normalized).colwise().sum();
        if (t.requires_grad(ib)) t.grad(ib) += g.colwise().sum();
        if (!t.requires_grad(ia)) return;
        const double n = static_cast<double>(normalized.cols());
        const Matrix gx_hat =
            g.array().rowwise() * t.value(ig).row(0).array();
        Matrix &ga = t.grad(ia);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          const double mean_g = gx_hat.row(r).mean();
          const double mean_gx = gx_hat.row(r).dot(normalized.row(r)) / n;
          ga.row(r).array() += inv_std(r) * (gx_hat.row(r).array() - mean_g -
                                             normalized.row(r).array() * mean_gx);
        }
      });
}

Var sum(const Var &a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const int ia = a.id();
  return tape_of(a).push(std::move(out), {ia},
                         [ia](Tape &t, int, const Matrix &g) {
                           t.grad(ia).array() += g(0, 0);
                         });
}

Var sum_entries(const Var &a,
                const std::vector<std::pair<int, int>> &coordinates) {
  Matrix out(1, 1);
  out(0, 0) = 0.0;
  for (const auto &[r, c] : coordinates) {
    check(r >= 0 && r < a.rows() && c >= 0 && c < a.cols(),
          "sum_entries: out of range");
    out(0, 0) += a.value()(r, c);
  }
  const int ia = a.id();
  return tape_of(a).push(std::move(out), {ia},
                         [ia, coordinates](Tape &t, int, const Matrix &g) {
                           Matrix &ga = t.grad(ia);
                           for (const auto &[r, c] : coordinates) ga(r, c) += g(0, 0);
                         });
}

}  // namespace iterx::ad
