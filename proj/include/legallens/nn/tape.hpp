/*
 * Copyright 2026 The LegalLens Pipeline Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reverse-mode differentiation over dense Eigen matrices.
//
// A Tape records every operation applied to its Vars. Parameters enter the
// tape by reference (no copy); after backward() their gradients are read back
// with gradient(param). A tape built with recording disabled only evaluates,
// which is what inference uses.
//
//   Tape<double> tape;
//   auto x = tape.constant(input);
//   auto w = tape.parameter(weights);
//   auto loss = softmax_cross_entropy(relu(x * w), target);
//   tape.backward(loss);
//   const auto& dw = tape.gradient(weights);

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace legallens::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
class Tape;

template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<Scalar>& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Matrix<Scalar>& value() const { return tape_->value(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  Tape<Scalar>* tape_ = nullptr;
  std::size_t id_ = 0;
};

template <typename Scalar>
class Tape {
 public:
  using MatrixType = Matrix<Scalar>;
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var<Scalar> constant(MatrixType value) {
    nodes_.push_back(Node{std::move(value), nullptr, {}, {}});
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  // The referenced matrix must outlive the tape.
  Var<Scalar> parameter(const MatrixType& param) {
    nodes_.push_back(Node{{}, &param, {}, {}});
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  // Adds a node computed from its inputs. `backward` receives the node id and
  // pushes grad(id) into the inputs' grads through accumulate().
  Var<Scalar> push(MatrixType value, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), nullptr, {},
                          record_ ? std::move(backward) : BackwardFn{}});
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  const MatrixType& value(const Var<Scalar>& v) const {
    const Node& node = nodes_[v.id()];
    return node.ref ? *node.ref : node.value;
  }
  const MatrixType& value(std::size_t id) const {
    const Node& node = nodes_[id];
    return node.ref ? *node.ref : node.value;
  }

  const MatrixType& grad(std::size_t id) const { return nodes_[id].grad; }
  bool has_grad(std::size_t id) const { return nodes_[id].grad.size() != 0; }

  template <typename Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& delta) {
    Node& node = nodes_[id];
    if (node.grad.size() == 0) {
      const MatrixType& v = value(id);
      node.grad = MatrixType::Zero(v.rows(), v.cols());
    }
    node.grad += delta;
  }

  // Gradients for sparse row updates (embedding tables).
  template <typename Derived>
  void accumulate_row(std::size_t id, Eigen::Index row,
                      const Eigen::MatrixBase<Derived>& delta) {
    Node& node = nodes_[id];
    if (node.grad.size() == 0) {
      const MatrixType& v = value(id);
      node.grad = MatrixType::Zero(v.rows(), v.cols());
    }
    node.grad.row(row) += delta;
  }

  // Seeds d(output)/d(output) = 1 for a 1x1 output and runs the chain rule.
  void backward(const Var<Scalar>& output) {
    assert(record_);
    assert(value(output).size() == 1);
    accumulate(output.id(), MatrixType::Ones(1, 1));
    for (std::size_t i = output.id() + 1; i-- > 0;) {
      Node& node = nodes_[i];
      if (node.grad.size() == 0) continue;
      if (node.backward) node.backward(*this, i);
    }
  }

  // Gradient of the last backward() w.r.t. a parameter, summed over every use
  // of that parameter on this tape. Zero matrix when it was not reached.
  MatrixType gradient(const MatrixType& param) const {
    MatrixType total = MatrixType::Zero(param.rows(), param.cols());
    for (const Node& node : nodes_) {
      if (node.ref == &param && node.grad.size() != 0) total += node.grad;
    }
    return total;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    MatrixType value;
    const MatrixType* ref;
    MatrixType grad;
    BackwardFn backward;
  };

  bool record_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Operations. Each returns a new Var on the operands' tape.
// ---------------------------------------------------------------------------

template <typename Scalar>
Var<Scalar> operator*(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return tape.push(a.value() * b.value(), [ia, ib](Tape<Scalar>& t,
                                                   std::size_t self) {
    const auto& g = t.grad(self);
    t.accumulate(ia, g * t.value(ib).transpose());
    t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

template <typename Scalar>
Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  return tape.push(a.value() + b.value(),
                   [ia, ib](Tape<Scalar>& t, std::size_t self) {
                     t.accumulate(ia, t.grad(self));
                     t.accumulate(ib, t.grad(self));
                   });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar factor) {
  const std::size_t ia = a.id();
  return a.tape().push(a.value() * factor,
                       [ia, factor](Tape<Scalar>& t, std::size_t self) {
                         t.accumulate(ia, t.grad(self) * factor);
                       });
}

// a (n x d) + b (1 x d) broadcast over rows.
template <typename Scalar>
Var<Scalar> add_row(const Var<Scalar>& a, const Var<Scalar>& b) {
  assert(b.rows() == 1 && b.cols() == a.cols());
  const std::size_t ia = a.id(), ib = b.id();
  Matrix<Scalar> out = a.value().rowwise() + b.value().row(0);
  return a.tape().push(std::move(out),
                       [ia, ib](Tape<Scalar>& t, std::size_t self) {
                         t.accumulate(ia, t.grad(self));
                         t.accumulate(ib, t.grad(self).colwise().sum());
                       });
}

template <typename Scalar>
Var<Scalar> transpose(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  return a.tape().push(a.value().transpose(),
                       [ia](Tape<Scalar>& t, std::size_t self) {
                         t.accumulate(ia, t.grad(self).transpose());
                       });
}

template <typename Scalar>
Var<Scalar> relu(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  return a.tape().push(a.value().cwiseMax(Scalar(0)),
                       [ia](Tape<Scalar>& t, std::size_t self) {
                         auto mask = (t.value(ia).array() > Scalar(0))
                                         .template cast<Scalar>();
                         t.accumulate(ia, (t.grad(self).array() * mask)
                                              .matrix());
                       });
}

template <typename Scalar>
Matrix<Scalar> sigmoid_values(const Matrix<Scalar>& logits) {
  return logits.unaryExpr([](Scalar x) {
    // Split by sign so exp never overflows.
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
  });
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  return a.tape().push(
      sigmoid_values(a.value()), [ia](Tape<Scalar>& t, std::size_t self) {
        const auto& s = t.value(self).array();
        t.accumulate(ia, (t.grad(self).array() * s * (Scalar(1) - s))
                             .matrix());
      });
}

template <typename Scalar>
Matrix<Scalar> softmax_rows_values(const Matrix<Scalar>& x) {
  Matrix<Scalar> out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar peak = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - peak).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Scalar>
Var<Scalar> softmax_rows(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  return a.tape().push(
      softmax_rows_values(a.value()), [ia](Tape<Scalar>& t, std::size_t self) {
        const auto& s = t.value(self);
        const auto& g = t.grad(self);
        Matrix<Scalar> inner = (g.array() * s.array()).rowwise().sum();
        Matrix<Scalar> d =
            s.array() * (g.colwise() - inner.col(0)).array();
        t.accumulate(ia, d);
      });
}

// Row-wise layer normalization followed by gain (1 x d) and bias (1 x d).
template <typename Scalar>
Var<Scalar> layer_norm(const Var<Scalar>& x, const Var<Scalar>& gain,
                       const Var<Scalar>& bias, Scalar eps = Scalar(1e-5)) {
  const auto& v = x.value();
  const Eigen::Index d = v.cols();
  Matrix<Scalar> normed(v.rows(), d);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std(v.rows());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const Scalar mean = v.row(r).mean();
    const Scalar var = (v.row(r).array() - mean).square().mean();
    inv_std(r) = Scalar(1) / std::sqrt(var + eps);
    normed.row(r) = (v.row(r).array() - mean) * inv_std(r);
  }
  Matrix<Scalar> out = (normed.array().rowwise() * gain.value().row(0).array())
                           .rowwise() +
                       bias.value().row(0).array();
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.tape().push(
      std::move(out), [ix, ig, ib, normed = std::move(normed),
                       inv_std = std::move(inv_std)](Tape<Scalar>& t,
                                                     std::size_t self) {
        const auto& g = t.grad(self);
        const auto& gain_v = t.value(ig);
        t.accumulate(ig, (g.array() * normed.array()).colwise().sum().matrix());
        t.accumulate(ib, g.colwise().sum());
        Matrix<Scalar> gn = g.array().rowwise() * gain_v.row(0).array();
        const Scalar n = static_cast<Scalar>(gn.cols());
        Matrix<Scalar> dx(gn.rows(), gn.cols());
        for (Eigen::Index r = 0; r < gn.rows(); ++r) {
          const Scalar mean_g = gn.row(r).mean();
          const Scalar mean_gx = (gn.row(r).array() * normed.row(r).array())
                                     .sum() / n;
          dx.row(r) = inv_std(r) * (gn.row(r).array() - mean_g -
                                    normed.row(r).array() * mean_gx);
        }
        t.accumulate(ix, dx);
      });
}

// Inverted dropout. Identity when rate is 0 or rng is null.
template <typename Scalar, typename Rng>
Var<Scalar> dropout(const Var<Scalar>& x, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return x;
  const Scalar keep = Scalar(1.0 - rate);
  std::bernoulli_distribution coin(1.0 - rate);
  Matrix<Scalar> mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = coin(*rng) ? Scalar(1) / keep : Scalar(0);
  }
  const std::size_t ix = x.id();
  Matrix<Scalar> out = x.value().cwiseProduct(mask);
  return x.tape().push(std::move(out), [ix, mask = std::move(mask)](
                                           Tape<Scalar>& t, std::size_t self) {
    t.accumulate(ix, t.grad(self).cwiseProduct(mask));
  });
}

// Selects rows of `table` (a parameter or any Var) by index; repeated indices
// accumulate their gradients.
template <typename Scalar>
Var<Scalar> gather_rows(const Var<Scalar>& table,
                        std::span<const Eigen::Index> rows) {
  const auto& v = table.value();
  Matrix<Scalar> out(static_cast<Eigen::Index>(rows.size()), v.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    assert(rows[i] >= 0 && rows[i] < v.rows());
    out.row(static_cast<Eigen::Index>(i)) = v.row(rows[i]);
  }
  const std::size_t it = table.id();
  std::vector<Eigen::Index> index(rows.begin(), rows.end());
  return table.tape().push(
      std::move(out),
      [it, index = std::move(index)](Tape<Scalar>& t, std::size_t self) {
        const auto& g = t.grad(self);
        for (std::size_t i = 0; i < index.size(); ++i) {
          t.accumulate_row(it, index[i], g.row(static_cast<Eigen::Index>(i)));
        }
      });
}

// [a | b] side by side.
template <typename Scalar>
Var<Scalar> concat_cols(const Var<Scalar>& a, const Var<Scalar>& b) {
  assert(a.rows() == b.rows());
  Matrix<Scalar> out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const std::size_t ia = a.id(), ib = b.id();
  const Eigen::Index ca = a.cols(), cb = b.cols();
  return a.tape().push(std::move(out), [ia, ib, ca, cb](Tape<Scalar>& t,
                                                        std::size_t self) {
    const auto& g = t.grad(self);
    t.accumulate(ia, g.leftCols(ca));
    t.accumulate(ib, g.rightCols(cb));
  });
}

// Stacks the parts vertically.
template <typename Scalar>
Var<Scalar> concat_rows(std::span<const Var<Scalar>> parts) {
  assert(!parts.empty());
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix<Scalar> out(rows, parts.front().cols());
  std::vector<std::pair<std::size_t, Eigen::Index>> layout;
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    layout.emplace_back(p.id(), p.rows());
    offset += p.rows();
  }
  return parts.front().tape().push(
      std::move(out),
      [layout = std::move(layout)](Tape<Scalar>& t, std::size_t self) {
        const auto& g = t.grad(self);
        Eigen::Index offset = 0;
        for (const auto& [id, n] : layout) {
          t.accumulate(id, g.middleRows(offset, n));
          offset += n;
        }
      });
}

template <typename Scalar>
Var<Scalar> mean_rows(const Var<Scalar>& x) {
  const std::size_t ix = x.id();
  const Eigen::Index n = x.rows();
  return x.tape().push(
      x.value().colwise().mean(), [ix, n](Tape<Scalar>& t, std::size_t self) {
        t.accumulate(ix, t.grad(self).replicate(n, 1) / Scalar(n));
      });
}

// Mean negative log-likelihood of `target` under softmax(logits) for a single
// row of logits.
template <typename Scalar>
Var<Scalar> softmax_cross_entropy(const Var<Scalar>& logits,
                                  Eigen::Index target) {
  assert(logits.rows() == 1);
  Matrix<Scalar> probs = softmax_rows_values(logits.value());
  Matrix<Scalar> out(1, 1);
  out(0, 0) = -std::log(std::max(probs(0, target),
                                 std::numeric_limits<Scalar>::min()));
  const std::size_t il = logits.id();
  return logits.tape().push(
      std::move(out), [il, target, probs = std::move(probs)](
                          Tape<Scalar>& t, std::size_t self) {
        Matrix<Scalar> d = probs;
        d(0, target) -= Scalar(1);
        t.accumulate(il, d * t.grad(self)(0, 0));
      });
}

}  // namespace legallens::nn
