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

// INI run configuration. Keys mirror the struct field names one-to-one:
//
//   version = 1
//   [trainer]   batch_size, backbone_lr, head_lr, nli_lr, phase2_lr,
//               max_epochs_phase1, max_epochs_phase2, warmup_fraction,
//               scheduler, patience, seed, weight_decay, max_grad_norm
//   [focal]     alpha, gamma
//   [span_ner]  variant, hidden_dim, num_layers, max_span_width, dropout,
//               vocab_hash_buckets
//   [decode]    threshold, flat_spans, dedupe_by_type
//   [nli]       hidden_dim, num_layers, dropout, vocab_hash_buckets,
//               max_seq_len
//   [augment]   factor, max_in_flight, model_name, temperature,
//               max_output_tokens, timeout_seconds, max_retries
//
// Unknown sections or keys are usage errors.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "legallens/augment.hpp"
#include "legallens/nli.hpp"
#include "legallens/span_ner.hpp"
#include "legallens/trainer.hpp"

namespace legallens::config {

inline constexpr int kConfigVersion = 1;

struct AugmentSection {
  int factor = 1;
  int max_in_flight = 4;
  std::string model_name = "mock";
  double temperature = 0.7;
  int max_output_tokens = 512;
  int timeout_seconds = 60;
  int max_retries = 3;

  augment::ClientSettings client_settings() const;
};

struct RunConfig {
  trainer::TrainConfig trainer;
  span_ner::SpanScorerConfig span_ner;
  span_ner::DecodeConfig decode;
  nli::NliModelConfig nli;
  AugmentSection augment;
};

// Defaults for a task: trainer fields come from ner_defaults/nli_defaults.
RunConfig defaults(trainer::Task task);

// Overlays the document on `base`. Throws UsageError on an unknown key,
// a bad value or a missing/unsupported version.
RunConfig parse_config(std::istream& in, RunConfig base);
RunConfig load_config(const std::filesystem::path& path, RunConfig base);

// Writes every field; parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace legallens::config
