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

// Three-way premise/hypothesis classification, leave-one-domain-out splits
// and the max-confidence ensemble over per-domain models.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "legallens/corpus.hpp"
#include "legallens/nn/encoder.hpp"
#include "legallens/nn/params.hpp"
#include "legallens/nn/tape.hpp"

namespace legallens::nli {

using Real = double;
using Rng = std::mt19937_64;
using ParamStore = nn::ParamStore<Real>;
using Tape = nn::Tape<Real>;
using Var = nn::Var<Real>;

struct NliModelConfig {
  int hidden_dim = 64;
  int num_layers = 1;
  double dropout = 0.1;
  int vocab_hash_buckets = 4096;
  int max_seq_len = 256;

  void validate() const;
  nn::EncoderConfig encoder() const;
  friend bool operator==(const NliModelConfig&, const NliModelConfig&) = default;
};

class NliModel {
 public:
  NliModel(NliModelConfig config, std::uint64_t seed);
  // Throws CheckpointMismatch when the parameter layout does not match.
  NliModel(NliModelConfig config, ParamStore params);

  const NliModelConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

 private:
  NliModelConfig config_;
  ParamStore params_;
};

struct NliPrediction {
  corpus::NliLabel label = corpus::NliLabel::kNeutral;
  double confidence = 0.0;
  std::array<double, 3> distribution{};  // Entailed, Contradict, Neutral
};

// "[CLS] premise [SEP] hypothesis" as embedding buckets, cut from the right
// to max_seq_len positions.
std::vector<Eigen::Index> encode_pair(const NliModelConfig& config,
                                      std::string_view premise,
                                      std::string_view hypothesis);

// 1 x 3 logits on a tape. `rng` enables dropout.
Var logits(Tape& tape, const NliModel& model, const corpus::NliRecord& record,
           Rng* rng = nullptr);

// Cross-entropy against the gold label; 1x1.
Var example_loss(Tape& tape, const NliModel& model,
                 const corpus::NliRecord& record, Rng* rng);

// Throws EmptyInput on a blank premise or hypothesis.
NliPrediction classify(const NliModel& model, const corpus::NliRecord& record);

// Builds a prediction from a probability distribution.
NliPrediction from_distribution(const std::array<double, 3>& distribution);

struct LooSplit {
  corpus::Domain held_out_domain;
  std::vector<corpus::NliRecord> train;
  std::vector<corpus::NliRecord> test;
};

// One split per domain in fixed domain order; throws MissingDomain.
std::vector<LooSplit> loo_splits(std::span<const corpus::NliRecord> records);

// A model trained with `held_out_domain` excluded from its training data.
struct DomainModel {
  corpus::Domain held_out_domain;
  NliModel model;
};

struct EnsemblePrediction {
  NliPrediction prediction;
  corpus::Domain source_model;
};

// Picks the member prediction with maximal confidence. Members are given
// with their held-out domain; ties go to the earlier domain in the fixed
// order ConsumerProtection < Privacy < TCPA < Wage. Throws WrongModelCount
// unless there are exactly four members with distinct domains.
EnsemblePrediction combine_by_confidence(
    std::span<const std::pair<corpus::Domain, NliPrediction>> members);

EnsemblePrediction ensemble_predict(std::span<const DomainModel> models,
                                    const corpus::NliRecord& record);

// Checkpoint I/O; the held-out domain travels with the model.
struct NliCheckpointInfo {
  double dev_metric = 0.0;
  int epoch = 0;
  int phase = 0;
};
void save_checkpoint(const std::filesystem::path& path,
                     const DomainModel& model,
                     const NliCheckpointInfo& info = {});
DomainModel load_checkpoint(const std::filesystem::path& path,
                            NliCheckpointInfo* info = nullptr);
// Loads every "*.ckpt.json" file of a directory; throws WrongModelCount
// unless it yields exactly four models with distinct held-out domains.
std::vector<DomainModel> load_ensemble(const std::filesystem::path& dir);

std::string checkpoint_filename(corpus::Domain held_out_domain);

}  // namespace legallens::nli
