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

// Span-based open-label entity recognition.
//
// Every candidate span of a sentence is scored against every label string.
// Three ways of encoding labels and tokens are supported:
//   kUnified      labels and tokens share one joint sequence and encoder;
//   kBiEncoder    labels and tokens are encoded by separate encoders;
//   kPolyEncoder  bi-encoder outputs followed by one residual layer of
//                 bidirectional cross-attention between labels and tokens.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "legallens/corpus.hpp"
#include "legallens/focal_loss.hpp"
#include "legallens/nn/encoder.hpp"
#include "legallens/nn/params.hpp"
#include "legallens/nn/tape.hpp"

namespace legallens::span_ner {

using Real = double;
using Rng = std::mt19937_64;
using ParamStore = nn::ParamStore<Real>;
using Tape = nn::Tape<Real>;
using Var = nn::Var<Real>;

enum class Variant { kUnified, kBiEncoder, kPolyEncoder };

std::string_view variant_name(Variant variant);  // "unified", "bi", "poly"
std::optional<Variant> parse_variant(std::string_view name);

struct SpanScorerConfig {
  Variant variant = Variant::kBiEncoder;
  int hidden_dim = 64;
  int num_layers = 1;
  int max_span_width = 16;
  double dropout = 0.5;
  int vocab_hash_buckets = 4096;

  // Throws UsageError when a field is out of range.
  void validate() const;
  nn::EncoderConfig encoder() const;
  friend bool operator==(const SpanScorerConfig&,
                         const SpanScorerConfig&) = default;
};

struct DecodeConfig {
  double threshold = 0.8;
  bool flat_spans = true;
  bool dedupe_by_type = true;
};

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  friend bool operator==(const Span&, const Span&) = default;
};

struct EntityPrediction {
  std::string entity_type;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  double confidence = 0.0;
  friend bool operator==(const EntityPrediction&,
                         const EntityPrediction&) = default;
};

// All spans of width <= max_width in lexicographic (start, end) order.
std::vector<Span> enumerate_spans(std::size_t n, std::size_t max_width);

// Default label set: the canonical names of the four entity types.
std::vector<std::string> default_labels();

class SpanScorer {
 public:
  // Fresh model with seeded random initialisation.
  SpanScorer(SpanScorerConfig config, std::uint64_t seed);
  // Model over existing parameters; throws CheckpointMismatch when the
  // parameter layout does not match what `config` requires.
  SpanScorer(SpanScorerConfig config, ParamStore params);

  const SpanScorerConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

 private:
  SpanScorerConfig config_;
  ParamStore params_;
};

// Builds the parameter layout for a configuration.
ParamStore init_span_scorer_params(const SpanScorerConfig& config,
                                   std::uint64_t seed);

// Label and token representations recorded on a tape.
struct EncodedVars {
  Var label_reprs;  // num_labels x hidden_dim
  Var token_reprs;  // num_tokens x hidden_dim
};

struct Encoded {
  Eigen::MatrixXd label_reprs;
  Eigen::MatrixXd token_reprs;
};

// Dispatches on the model variant. `rng` enables dropout (training only).
EncodedVars encode(Tape& tape, const SpanScorer& model,
                   std::span<const std::string> labels,
                   std::span<const std::string> tokens, Rng* rng = nullptr);

// Evaluation-mode encoders; each throws VariantMismatch when called on a
// model of another variant.
Encoded encode_unified(const SpanScorer& model,
                       std::span<const std::string> labels,
                       std::span<const std::string> tokens);
Encoded encode_bi(const SpanScorer& model, std::span<const std::string> labels,
                  std::span<const std::string> tokens);
Encoded encode_poly(const SpanScorer& model,
                    std::span<const std::string> labels,
                    std::span<const std::string> tokens);

struct SpanScores {
  std::vector<Span> spans;
  std::vector<std::string> labels;
  Eigen::MatrixXd scores;  // spans x labels, entries in (0, 1)
};

// Probability-valued span x label scores recorded on a tape.
Var score_spans(Tape& tape, const SpanScorer& model,
                std::span<const std::string> labels,
                std::span<const std::string> tokens,
                std::span<const Span> spans, Rng* rng = nullptr);

SpanScores score_spans(const SpanScorer& model,
                       std::span<const std::string> tokens,
                       std::span<const std::string> labels);

// 0/1 targets aligned with enumerate_spans(tokens, max_span_width) x labels.
// Gold spans wider than the window cannot be represented and are skipped.
Eigen::MatrixXd span_targets(const corpus::NerExample& example,
                             std::span<const Span> spans,
                             std::span<const std::string> labels);

// Mean focal loss of one example; the returned Var is 1x1.
Var example_loss(Tape& tape, const SpanScorer& model,
                 const corpus::NerExample& example,
                 std::span<const std::string> labels, const FocalConfig& focal,
                 Rng* rng);

// threshold -> greedy flat decode -> per-type deduplication.
std::vector<EntityPrediction> decode(const Eigen::MatrixXd& scores,
                                     std::span<const Span> spans,
                                     std::span<const std::string> labels,
                                     const DecodeConfig& cfg);

// Keeps the most confident prediction of each entity type (earlier start on
// ties) and preserves the relative order of the survivors.
std::vector<EntityPrediction> filter_duplicates(
    std::span<const EntityPrediction> preds);

// score_spans followed by decode.
std::vector<EntityPrediction> predict(const SpanScorer& model,
                                      std::span<const std::string> tokens,
                                      std::span<const std::string> labels,
                                      const DecodeConfig& cfg);

// Maps predictions of the canonical labels back to gold spans; predictions
// whose label is not one of the four types are dropped.
std::vector<corpus::GoldSpan> to_gold_spans(
    std::span<const EntityPrediction> preds);

// Checkpoint I/O. The file carries a versioned config and named tensors.
struct CheckpointInfo {
  double dev_metric = 0.0;
  int epoch = 0;
  int phase = 0;
};
void save_checkpoint(const std::filesystem::path& path,
                     const SpanScorer& model, const CheckpointInfo& info = {});
SpanScorer load_checkpoint(const std::filesystem::path& path,
                           CheckpointInfo* info = nullptr);
// Also throws CheckpointMismatch when the stored config differs from
// `expected`.
SpanScorer load_checkpoint(const std::filesystem::path& path,
                           const SpanScorerConfig& expected);

}  // namespace legallens::span_ner
