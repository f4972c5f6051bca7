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

// Small trainable stand-in for a pretrained text encoder: hashed word
// embeddings, sinusoidal positions, then post-norm blocks of bidirectional
// single-head self-attention and a ReLU feed-forward layer, each with a
// residual connection.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "legallens/nn/params.hpp"
#include "legallens/nn/tape.hpp"

namespace legallens::nn {

struct EncoderConfig {
  int hidden_dim = 64;
  int num_layers = 1;
  int hash_buckets = 4096;
  double dropout = 0.5;
};

// Buckets below kFirstWordBucket are reserved for marker tokens.
inline constexpr Eigen::Index kSepBucket = 1;
inline constexpr Eigen::Index kClsBucket = 2;
inline constexpr Eigen::Index kFirstWordBucket = 4;

// FNV-1a, stable across platforms and runs.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Case-folded word -> embedding row.
inline Eigen::Index word_bucket(std::string_view word, int buckets) {
  std::string folded(word);
  for (auto& c : folded) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  const auto span = static_cast<std::uint64_t>(buckets - kFirstWordBucket);
  return kFirstWordBucket + static_cast<Eigen::Index>(fnv1a(folded) % span);
}

template <typename Scalar>
Matrix<Scalar> sinusoidal_positions(Eigen::Index n, Eigen::Index d) {
  Matrix<Scalar> pe(n, d);
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) /
                                static_cast<double>(d));
      const double angle = static_cast<double>(pos) * rate;
      pe(pos, i) = static_cast<Scalar>(i % 2 == 0 ? std::sin(angle)
                                                  : std::cos(angle));
    }
  }
  return pe;
}

template <typename Scalar, typename Rng>
void init_encoder(ParamStore<Scalar>& params, const std::string& prefix,
                  const EncoderConfig& cfg, Rng& rng) {
  const Eigen::Index d = cfg.hidden_dim;
  params.add_normal(prefix + ".embed", cfg.hash_buckets, d, 1.0, rng);
  params.add_ones(prefix + ".embed_norm.gain", 1, d);
  params.add_zeros(prefix + ".embed_norm.bias", 1, d);
  for (int l = 0; l < cfg.num_layers; ++l) {
    const std::string layer = prefix + ".layer" + std::to_string(l);
    params.add_glorot(layer + ".attn.query", d, d, rng);
    params.add_glorot(layer + ".attn.key", d, d, rng);
    params.add_glorot(layer + ".attn.value", d, d, rng);
    params.add_glorot(layer + ".attn.output", d, d, rng);
    params.add_ones(layer + ".attn_norm.gain", 1, d);
    params.add_zeros(layer + ".attn_norm.bias", 1, d);
    params.add_glorot(layer + ".ffn.in.weight", d, 2 * d, rng);
    params.add_zeros(layer + ".ffn.in.bias", 1, 2 * d);
    params.add_glorot(layer + ".ffn.out.weight", 2 * d, d, rng);
    params.add_zeros(layer + ".ffn.out.bias", 1, d);
    params.add_ones(layer + ".ffn_norm.gain", 1, d);
    params.add_zeros(layer + ".ffn_norm.bias", 1, d);
  }
}

// Scaled dot-product attention of `queries` over `keys_values`, followed by
// the output projection.
template <typename Scalar>
Var<Scalar> attention(const Var<Scalar>& queries, const Var<Scalar>& keys_values,
                      const Var<Scalar>& w_query, const Var<Scalar>& w_key,
                      const Var<Scalar>& w_value, const Var<Scalar>& w_output) {
  const auto q = queries * w_query;
  const auto k = keys_values * w_key;
  const auto v = keys_values * w_value;
  const Scalar temperature =
      Scalar(1) / std::sqrt(static_cast<Scalar>(q.cols()));
  const auto weights = softmax_rows(scale(q * transpose(k), temperature));
  return (weights * v) * w_output;
}

// Embeds a sequence in which every position is the mean of one or more
// buckets (multi-word labels occupy a single position).
template <typename Scalar>
Var<Scalar> embed(Tape<Scalar>& tape, const ParamStore<Scalar>& params,
                  const std::string& prefix,
                  const std::vector<std::vector<Eigen::Index>>& positions) {
  std::vector<Eigen::Index> flat;
  for (const auto& pieces : positions) {
    flat.insert(flat.end(), pieces.begin(), pieces.end());
  }
  auto table = tape.parameter(params.at(prefix + ".embed"));
  auto rows = gather_rows(table, flat);
  if (flat.size() == positions.size()) return rows;
  Matrix<Scalar> pool = Matrix<Scalar>::Zero(
      static_cast<Eigen::Index>(positions.size()),
      static_cast<Eigen::Index>(flat.size()));
  Eigen::Index col = 0;
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const auto share = Scalar(1) / static_cast<Scalar>(positions[p].size());
    for (std::size_t k = 0; k < positions[p].size(); ++k) {
      pool(static_cast<Eigen::Index>(p), col++) = share;
    }
  }
  return tape.constant(std::move(pool)) * rows;
}

// Runs the encoder stack over embedded inputs (n x d). `rng` enables dropout.
template <typename Scalar, typename Rng>
Var<Scalar> encode(Tape<Scalar>& tape, const ParamStore<Scalar>& params,
                   const std::string& prefix, const EncoderConfig& cfg,
                   Var<Scalar> x, Rng* rng) {
  auto p = [&](const std::string& name) {
    return tape.parameter(params.at(prefix + name));
  };
  x = x + tape.constant(sinusoidal_positions<Scalar>(x.rows(), x.cols()));
  x = layer_norm(x, p(".embed_norm.gain"), p(".embed_norm.bias"));
  x = dropout(x, cfg.dropout, rng);
  for (int l = 0; l < cfg.num_layers; ++l) {
    const std::string layer = ".layer" + std::to_string(l);
    auto attended = attention(x, x, p(layer + ".attn.query"),
                              p(layer + ".attn.key"), p(layer + ".attn.value"),
                              p(layer + ".attn.output"));
    x = layer_norm(x + dropout(attended, cfg.dropout, rng),
                   p(layer + ".attn_norm.gain"), p(layer + ".attn_norm.bias"));
    auto hidden = relu(add_row(x * p(layer + ".ffn.in.weight"),
                               p(layer + ".ffn.in.bias")));
    auto ffn = add_row(hidden * p(layer + ".ffn.out.weight"),
                       p(layer + ".ffn.out.bias"));
    x = layer_norm(x + dropout(ffn, cfg.dropout, rng),
                   p(layer + ".ffn_norm.gain"), p(layer + ".ffn_norm.bias"));
  }
  return x;
}

// Biases and normalisation parameters are excluded from weight decay.
inline bool decays(std::string_view name) {
  const bool is_bias = name.size() >= 5 && name.substr(name.size() - 5) == ".bias";
  return !is_bias && name.find("_norm.") == std::string_view::npos;
}

}  // namespace legallens::nn
