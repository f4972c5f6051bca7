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
#include <vector>

#include "legallens/nn/params.hpp"

namespace legallens::nn {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay. Per-parameter learning rates and decay
// masks are supplied on every step so schedulers and parameter groups stay
// outside the optimizer.
template <typename Scalar>
class AdamW {
 public:
  AdamW(const ParamStore<Scalar>& params, AdamWConfig cfg)
      : cfg_(cfg), m_(zero_gradients(params)), v_(zero_gradients(params)) {}

  void step(ParamStore<Scalar>& params, const Gradients<Scalar>& grads,
            const std::vector<double>& lr, const std::vector<bool>& decay) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(cfg_.beta1);
    const auto b2 = static_cast<Scalar>(cfg_.beta2);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& w = params[i].value;
      const auto rate = static_cast<Scalar>(lr[i]);
      if (decay[i]) {
        w *= Scalar(1) - rate * static_cast<Scalar>(cfg_.weight_decay);
      }
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * grads[i];
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * grads[i].cwiseAbs2();
      const auto m_hat = m_[i].array() / static_cast<Scalar>(c1);
      const auto v_hat = v_[i].array() / static_cast<Scalar>(c2);
      w.array() -= rate * m_hat / (v_hat.sqrt() + static_cast<Scalar>(cfg_.eps));
    }
  }

  std::size_t steps_taken() const { return t_; }

 private:
  AdamWConfig cfg_;
  Gradients<Scalar> m_;
  Gradients<Scalar> v_;
  std::size_t t_ = 0;
};

// Rescales gradients in place so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename Scalar>
double clip_global_norm(Gradients<Scalar>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += static_cast<double>(g.squaredNorm());
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const auto factor = static_cast<Scalar>(max_norm / norm);
    for (auto& g : grads) g *= factor;
  }
  return norm;
}

}  // namespace legallens::nn
