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

// Binary focal loss over a matrix of probabilities.
//
// For each cell with probability p and target t:
//   t = 1:  -alpha       * (1 - p)^gamma * log(p)
//   t = 0:  -(1 - alpha) * p^gamma       * log(1 - p)
// averaged over all cells. Probabilities are clamped to [eps, 1 - eps]
// before the log; the gradient is zero outside that interval.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>

#include <Eigen/Core>

#include "legallens/nn/tape.hpp"

namespace legallens {

struct FocalConfig {
  double alpha = 0.75;
  double gamma = 2.0;
};

template <typename Scalar>
inline constexpr Scalar kProbabilityEpsilon = Scalar(1e-7);

namespace detail {

template <typename Scalar>
Scalar focal_cell(Scalar p, bool positive, Scalar alpha, Scalar gamma) {
  constexpr Scalar eps = kProbabilityEpsilon<Scalar>;
  p = std::clamp(p, eps, Scalar(1) - eps);
  if (positive) return -alpha * std::pow(Scalar(1) - p, gamma) * std::log(p);
  return -(Scalar(1) - alpha) * std::pow(p, gamma) * std::log(Scalar(1) - p);
}

template <typename Scalar>
Scalar focal_cell_derivative(Scalar p, bool positive, Scalar alpha,
                             Scalar gamma) {
  constexpr Scalar eps = kProbabilityEpsilon<Scalar>;
  if (p < eps || p > Scalar(1) - eps) return Scalar(0);
  if (positive) {
    const Scalar q = Scalar(1) - p;
    const Scalar modulating_slope =
        gamma == Scalar(0) ? Scalar(0)
                           : gamma * std::pow(q, gamma - Scalar(1));
    return alpha * (modulating_slope * std::log(p) - std::pow(q, gamma) / p);
  }
  const Scalar q = Scalar(1) - p;
  const Scalar modulating_slope =
      gamma == Scalar(0) ? Scalar(0) : gamma * std::pow(p, gamma - Scalar(1));
  return -(Scalar(1) - alpha) *
         (modulating_slope * std::log(q) - std::pow(p, gamma) / q);
}

}  // namespace detail

// Mean focal loss. `targets` holds 0/1 entries of the same shape as `scores`.
template <typename DerivedS, typename DerivedT>
typename DerivedS::Scalar focal_loss(const Eigen::MatrixBase<DerivedS>& scores,
                                     const Eigen::MatrixBase<DerivedT>& targets,
                                     const FocalConfig& cfg) {
  using Scalar = typename DerivedS::Scalar;
  assert(scores.rows() == targets.rows() && scores.cols() == targets.cols());
  const auto alpha = static_cast<Scalar>(cfg.alpha);
  const auto gamma = static_cast<Scalar>(cfg.gamma);
  Scalar total(0);
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      total += detail::focal_cell(scores(i, j), targets(i, j) > 0.5, alpha,
                                  gamma);
    }
  }
  return total / static_cast<Scalar>(scores.size());
}

// d focal_loss / d scores.
template <typename DerivedS, typename DerivedT>
Eigen::Matrix<typename DerivedS::Scalar, Eigen::Dynamic, Eigen::Dynamic>
focal_loss_gradient(const Eigen::MatrixBase<DerivedS>& scores,
                    const Eigen::MatrixBase<DerivedT>& targets,
                    const FocalConfig& cfg) {
  using Scalar = typename DerivedS::Scalar;
  const auto alpha = static_cast<Scalar>(cfg.alpha);
  const auto gamma = static_cast<Scalar>(cfg.gamma);
  const auto n = static_cast<Scalar>(scores.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> grad(scores.rows(),
                                                             scores.cols());
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      grad(i, j) = detail::focal_cell_derivative(
                       scores(i, j), targets(i, j) > 0.5, alpha, gamma) /
                   n;
    }
  }
  return grad;
}

namespace nn {

// Tape node wrapping focal_loss; `scores` are probabilities.
template <typename Scalar>
Var<Scalar> focal_loss(const Var<Scalar>& scores, Matrix<Scalar> targets,
                       const FocalConfig& cfg) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = legallens::focal_loss(scores.value(), targets, cfg);
  const std::size_t is = scores.id();
  return scores.tape().push(
      std::move(out), [is, targets = std::move(targets), cfg](
                          Tape<Scalar>& t, std::size_t self) {
        t.accumulate(is, legallens::focal_loss_gradient(t.value(is), targets,
                                                        cfg) *
                             t.grad(self)(0, 0));
      });
}

}  // namespace nn
}  // namespace legallens
