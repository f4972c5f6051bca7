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

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "legallens/nn/tape.hpp"

namespace legallens::nn {

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
};

// Named parameter tensors in insertion order. Element addresses are stable
// once construction is finished; tapes hold references into the store.
template <typename Scalar>
class ParamStore {
 public:
  using MatrixType = Matrix<Scalar>;

  MatrixType& add(const std::string& name, MatrixType value) {
    if (index_.contains(name)) {
      throw std::logic_error("duplicate parameter " + name);
    }
    index_.emplace(name, params_.size());
    params_.push_back({name, std::move(value)});
    return params_.back().value;
  }

  // Uniform Glorot initialisation.
  template <typename Rng>
  MatrixType& add_glorot(const std::string& name, Eigen::Index rows,
                         Eigen::Index cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    MatrixType m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<Scalar>(dist(rng));
    }
    return add(name, std::move(m));
  }

  template <typename Rng>
  MatrixType& add_normal(const std::string& name, Eigen::Index rows,
                         Eigen::Index cols, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    MatrixType m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<Scalar>(dist(rng));
    }
    return add(name, std::move(m));
  }

  MatrixType& add_zeros(const std::string& name, Eigen::Index rows,
                        Eigen::Index cols) {
    return add(name, MatrixType::Zero(rows, cols));
  }
  MatrixType& add_ones(const std::string& name, Eigen::Index rows,
                       Eigen::Index cols) {
    return add(name, MatrixType::Ones(rows, cols));
  }

  bool contains(std::string_view name) const {
    return index_.find(std::string(name)) != index_.end();
  }

  const MatrixType& at(std::string_view name) const {
    return params_.at(lookup(name)).value;
  }
  MatrixType& at(std::string_view name) {
    return params_.at(lookup(name)).value;
  }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  const Parameter<Scalar>& operator[](std::size_t i) const { return params_[i]; }
  Parameter<Scalar>& operator[](std::size_t i) { return params_[i]; }

  bool all_finite() const {
    for (const auto& p : params_) {
      if (!p.value.allFinite()) return false;
    }
    return true;
  }

  // Same names and shapes in the same order.
  bool same_layout(const ParamStore& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      const auto& a = params_[i];
      const auto& b = other.params_[i];
      if (a.name != b.name || a.value.rows() != b.value.rows() ||
          a.value.cols() != b.value.cols()) {
        return false;
      }
    }
    return true;
  }

  // Copies values from a store with the same layout.
  void assign_values(const ParamStore& other) {
    if (!same_layout(other)) throw std::logic_error("parameter layout differs");
    for (std::size_t i = 0; i < size(); ++i) {
      params_[i].value = other.params_[i].value;
    }
  }

 private:
  std::size_t lookup(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
      throw std::out_of_range("no parameter named " + std::string(name));
    }
    return it->second;
  }

  std::vector<Parameter<Scalar>> params_;
  std::map<std::string, std::size_t> index_;
};

// One gradient matrix per parameter, in store order.
template <typename Scalar>
using Gradients = std::vector<Matrix<Scalar>>;

template <typename Scalar>
Gradients<Scalar> zero_gradients(const ParamStore<Scalar>& params) {
  Gradients<Scalar> grads;
  grads.reserve(params.size());
  for (const auto& p : params) {
    grads.push_back(Matrix<Scalar>::Zero(p.value.rows(), p.value.cols()));
  }
  return grads;
}

// Adds the tape's parameter gradients into `grads`.
template <typename Scalar>
void collect_gradients(const Tape<Scalar>& tape,
                       const ParamStore<Scalar>& params,
                       Gradients<Scalar>& grads) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    grads[i] += tape.gradient(params[i].value);
  }
}

}  // namespace legallens::nn
