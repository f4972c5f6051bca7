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

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "legallens/nn/adamw.hpp"
#include "legallens/nn/encoder.hpp"
#include "legallens/nn/params.hpp"
#include "legallens/nn/tape.hpp"

namespace legallens::nn {
namespace {

using M = Matrix<double>;
using V = Var<double>;

M random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> dist(0.0, 1.0);
  M m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

// Scalar-valued graph over one parameter matrix.
using Graph = std::function<V(Tape<double>&, const V&)>;

double evaluate(const Graph& graph, const M& x) {
  Tape<double> tape(/*record=*/false);
  return graph(tape, tape.parameter(x)).value()(0, 0);
}

// Relative error between the tape gradient and central differences.
double gradient_error(const Graph& graph, M x) {
  Tape<double> tape;
  auto out = graph(tape, tape.parameter(x));
  tape.backward(out);
  const M analytic = tape.gradient(x);
  M numeric(x.rows(), x.cols());
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    M plus = x, minus = x;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    numeric.data()[i] = (evaluate(graph, plus) - evaluate(graph, minus)) / (2 * h);
  }
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12);
}

// Reduces any matrix to a scalar with fixed random weights.
V weighted_sum(Tape<double>& tape, const V& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto w = tape.constant(random_matrix(rng, x.cols(), 1));
  return mean_rows(x * w);
}

TEST(TapeTest, MatmulAddRowRelu) {
  std::mt19937_64 rng(1);
  const M w = random_matrix(rng, 4, 3);
  const M b = random_matrix(rng, 1, 3);
  const M x = random_matrix(rng, 5, 4);
  EXPECT_LT(gradient_error(
                [&](Tape<double>& t, const V& p) {
                  auto h = relu(add_row(t.constant(x) * p, t.constant(b)));
                  return weighted_sum(t, h, 7);
                },
                w),
            1e-6);
}

TEST(TapeTest, LayerNormInput) {
  std::mt19937_64 rng(2);
  const M x = random_matrix(rng, 3, 6);
  const M gain = random_matrix(rng, 1, 6);
  const M bias = random_matrix(rng, 1, 6);
  EXPECT_LT(gradient_error(
                [&](Tape<double>& t, const V& p) {
                  return weighted_sum(
                      t, layer_norm(p, t.constant(gain), t.constant(bias)), 3);
                },
                x),
            1e-5);
}

TEST(TapeTest, LayerNormGain) {
  std::mt19937_64 rng(3);
  const M x = random_matrix(rng, 3, 6);
  const M gain = random_matrix(rng, 1, 6);
  const M bias = random_matrix(rng, 1, 6);
  EXPECT_LT(gradient_error(
                [&](Tape<double>& t, const V& p) {
                  return weighted_sum(
                      t, layer_norm(t.constant(x), p, t.constant(bias)), 4);
                },
                gain),
            1e-6);
}

TEST(TapeTest, SoftmaxSigmoidTranspose) {
  std::mt19937_64 rng(4);
  const M x = random_matrix(rng, 4, 4);
  EXPECT_LT(gradient_error(
                [&](Tape<double>& t, const V& p) {
                  auto s = softmax_rows(scale(p * transpose(p), 0.5));
                  return weighted_sum(t, sigmoid(s * p), 5);
                },
                x),
            1e-6);
}

TEST(TapeTest, GatherConcatMean) {
  std::mt19937_64 rng(5);
  const M table = random_matrix(rng, 6, 3);
  const std::vector<Eigen::Index> rows = {0, 2, 2, 5};
  EXPECT_LT(gradient_error(
                [&](Tape<double>& t, const V& p) {
                  auto g = gather_rows(p, std::span<const Eigen::Index>(rows));
                  auto c = concat_cols(g, g);
                  std::vector<V> parts = {c, c};
                  auto r = concat_rows(std::span<const V>(parts));
                  return weighted_sum(t, mean_rows(r), 6);
                },
                table),
            1e-6);
}

TEST(TapeTest, SoftmaxCrossEntropy) {
  std::mt19937_64 rng(6);
  const M logits = random_matrix(rng, 1, 3);
  for (Eigen::Index target = 0; target < 3; ++target) {
    EXPECT_LT(gradient_error(
                  [&](Tape<double>&, const V& p) {
                    return softmax_cross_entropy(p, target);
                  },
                  logits),
              1e-6);
  }
}

TEST(TapeTest, SharedParameterGradientsAccumulate) {
  M x(1, 1);
  x << 3.0;
  Tape<double> tape;
  auto a = tape.parameter(x);
  auto b = tape.parameter(x);
  auto y = a * b;  // x^2
  tape.backward(y);
  EXPECT_DOUBLE_EQ(tape.gradient(x)(0, 0), 6.0);
}

TEST(TapeTest, DropoutWithoutRngIsIdentity) {
  std::mt19937_64 rng(7);
  const M x = random_matrix(rng, 3, 3);
  Tape<double> tape;
  auto v = dropout<double, std::mt19937_64>(tape.constant(x), 0.5, nullptr);
  EXPECT_EQ(v.value(), x);
}

TEST(TapeTest, DropoutKeepsExpectation) {
  std::mt19937_64 rng(8);
  const M x = M::Ones(200, 50);
  Tape<double> tape;
  auto v = dropout(tape.constant(x), 0.5, &rng);
  EXPECT_NEAR(v.value().mean(), 1.0, 0.05);
}

TEST(EncoderTest, WordBucketsAvoidReservedIds) {
  for (const char* w : {"law", "LAW", "", "x", "Telephone"}) {
    const auto b = word_bucket(w, 64);
    EXPECT_GE(b, kFirstWordBucket);
    EXPECT_LT(b, 64);
  }
  EXPECT_EQ(word_bucket("Law", 4096), word_bucket("law", 4096));
}

TEST(ParamStoreTest, LayoutAndAssign) {
  std::mt19937_64 rng(9);
  ParamStore<double> a, b;
  a.add_glorot("w", 3, 2, rng);
  a.add_zeros("b", 1, 2);
  b.add_zeros("w", 3, 2);
  b.add_ones("b", 1, 2);
  EXPECT_TRUE(a.same_layout(b));
  a.assign_values(b);
  EXPECT_TRUE(a.at("b").isOnes());
  ParamStore<double> c;
  c.add_zeros("w", 2, 3);
  EXPECT_FALSE(a.same_layout(c));
  EXPECT_THROW(a.add_zeros("w", 1, 1), std::logic_error);
}

TEST(AdamWTest, MinimisesQuadratic) {
  ParamStore<double> params;
  params.add("x", M::Constant(1, 2, 5.0));
  AdamW<double> opt(params, {0.9, 0.999, 1e-8, 0.0});
  for (int i = 0; i < 500; ++i) {
    Gradients<double> g = {2.0 * params.at("x")};
    opt.step(params, g, {0.05}, {false});
  }
  EXPECT_LT(params.at("x").norm(), 1e-2);
}

TEST(AdamWTest, DecayOnlyWhereMasked) {
  ParamStore<double> params;
  params.add("a", M::Constant(1, 1, 1.0));
  params.add("b", M::Constant(1, 1, 1.0));
  AdamW<double> opt(params, {0.9, 0.999, 1e-8, 0.5});
  Gradients<double> zero = zero_gradients(params);
  opt.step(params, zero, {0.1, 0.1}, {true, false});
  EXPECT_DOUBLE_EQ(params.at("a")(0, 0), 0.95);
  EXPECT_DOUBLE_EQ(params.at("b")(0, 0), 1.0);
}

TEST(ClipTest, GlobalNorm) {
  Gradients<double> g = {M::Constant(1, 1, 3.0), M::Constant(1, 1, 4.0)};
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g[0](0, 0), 0.6, 1e-12);
  EXPECT_NEAR(g[1](0, 0), 0.8, 1e-12);
  Gradients<double> small = {M::Constant(1, 1, 0.1)};
  clip_global_norm(small, 1.0);
  EXPECT_DOUBLE_EQ(small[0](0, 0), 0.1);
}

TEST(DecayTest, BiasAndNormTensorsExcluded) {
  EXPECT_FALSE(decays("span_head.hidden.bias"));
  EXPECT_FALSE(decays("token_encoder.embed_norm.gain"));
  EXPECT_FALSE(decays("encoder.layer0.ffn_norm.bias"));
  EXPECT_TRUE(decays("span_head.hidden.weight"));
  EXPECT_TRUE(decays("encoder.embed"));
}

}  // namespace
}  // namespace legallens::nn
