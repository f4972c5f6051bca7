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

// Two-phase fine-tuning.
//
// Phase 1 trains for at most max_epochs_phase1 epochs under the configured
// schedule and keeps the checkpoint with the best dev metric. Phase 2 restarts
// from that checkpoint at the constant phase2_lr and stops once the dev metric
// has not improved on the best value seen so far for `patience` consecutive
// evaluations. Dev evaluation happens once per epoch in both phases.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "legallens/corpus.hpp"
#include "legallens/focal_loss.hpp"
#include "legallens/nli.hpp"
#include "legallens/nn/params.hpp"
#include "legallens/span_ner.hpp"

namespace legallens::trainer {

using ParamStore = nn::ParamStore<double>;
using Gradients = nn::Gradients<double>;
using Rng = std::mt19937_64;

enum class Task { kNer, kNli };
enum class Schedule { kWarmupLinear, kCosine };

std::string_view task_name(Task task);
std::optional<Task> parse_task(std::string_view name);
std::string_view schedule_name(Schedule schedule);
std::optional<Schedule> parse_schedule(std::string_view name);

struct TrainConfig {
  Task task = Task::kNer;
  int batch_size = 8;
  double backbone_lr = 1e-5;
  double head_lr = 5e-5;
  double nli_lr = 2e-5;
  double phase2_lr = 5e-6;
  int max_epochs_phase1 = 10;
  // Upper bound on phase 2 in case the dev metric keeps creeping up.
  int max_epochs_phase2 = 50;
  double warmup_fraction = 0.10;
  Schedule scheduler = Schedule::kWarmupLinear;
  int patience = 3;
  std::optional<std::uint64_t> seed;
  FocalConfig focal;
  double weight_decay = 0.01;
  double max_grad_norm = 1.0;

  static TrainConfig ner_defaults();
  static TrainConfig nli_defaults();
  // Throws UsageError on out-of-range values or a missing seed.
  void validate() const;
};

// Schedule factor in [0, 1] applied to each group's base rate.
//   WarmupLinear: 0 -> 1 over the first ceil(warmup_fraction * total) steps,
//                 then 1 -> 0 linearly at `total`.
//   Cosine:       (1 + cos(pi * step / total)) / 2.
double lr_multiplier(std::size_t step, std::size_t total, Schedule schedule,
                     double warmup_fraction);
double lr_at(std::size_t step, std::size_t total, const TrainConfig& cfg,
             double base_lr);

struct ParamGroup {
  std::string name;
  std::vector<std::size_t> members;  // indices into the ParamStore
  double lr = 0.0;
};

// NER: encoder tensors at backbone_lr and heads/fusion at head_lr.
// NLI: a single group at nli_lr. Throws UnclassifiedParameter on a tensor
// whose name matches no group.
std::vector<ParamGroup> make_param_groups(const ParamStore& params,
                                          const TrainConfig& cfg);

// What the loop needs from a model + data pair.
class TrainingTask {
 public:
  virtual ~TrainingTask() = default;
  virtual ParamStore& params() = 0;
  virtual std::size_t train_size() const = 0;
  // Adds the gradient of the mean loss over `batch` into `grads` and returns
  // that mean loss.
  virtual double batch_gradient(std::span<const std::size_t> batch,
                                Gradients& grads, Rng& rng) = 0;
  virtual double dev_metric() = 0;
};

struct Checkpoint {
  ParamStore params;
  double dev_metric = 0.0;
  int epoch = 0;
  int phase = 0;
  std::size_t step = 0;
};

struct EvalLogEntry {
  int phase = 0;
  int epoch = 0;
  std::size_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double dev_metric = 0.0;
  std::string tag;  // e.g. the held-out domain of a LOO run

  std::string to_json_line() const;
};
using LogSink = std::function<void(const EvalLogEntry&)>;

// Runs one phase. Phase 2 requires `start` (the phase-1 result) and returns
// the best checkpoint across `start` and its own evaluations. On return the
// task's parameters hold the returned checkpoint. Throws EmptyData and
// NonFiniteLoss.
Checkpoint train_phase(TrainingTask& task, const TrainConfig& cfg, int phase,
                       const Checkpoint* start = nullptr,
                       const LogSink& log = {});

// Phase 1 followed by phase 2.
Checkpoint train_two_phase(TrainingTask& task, const TrainConfig& cfg,
                           const LogSink& log = {});

class NerTask final : public TrainingTask {
 public:
  NerTask(span_ner::SpanScorer& model,
          std::span<const corpus::NerExample> train,
          std::span<const corpus::NerExample> dev, FocalConfig focal,
          span_ner::DecodeConfig decode,
          std::vector<std::string> labels = span_ner::default_labels());

  ParamStore& params() override { return model_.params(); }
  std::size_t train_size() const override { return train_.size(); }
  double batch_gradient(std::span<const std::size_t> batch, Gradients& grads,
                        Rng& rng) override;
  // Micro-F1 over the dev set.
  double dev_metric() override;

 private:
  span_ner::SpanScorer& model_;
  std::span<const corpus::NerExample> train_;
  std::span<const corpus::NerExample> dev_;
  FocalConfig focal_;
  span_ner::DecodeConfig decode_;
  std::vector<std::string> labels_;
};

// Micro-F1 of a model's decoded predictions against gold spans.
double ner_micro_f1(const span_ner::SpanScorer& model,
                    std::span<const corpus::NerExample> examples,
                    const span_ner::DecodeConfig& decode,
                    std::span<const std::string> labels);

class NliTask final : public TrainingTask {
 public:
  NliTask(nli::NliModel& model, std::span<const corpus::NliRecord> train,
          std::span<const corpus::NliRecord> dev);

  ParamStore& params() override { return model_.params(); }
  std::size_t train_size() const override { return train_.size(); }
  double batch_gradient(std::span<const std::size_t> batch, Gradients& grads,
                        Rng& rng) override;
  // Class-macro F1 over the dev set.
  double dev_metric() override;

 private:
  nli::NliModel& model_;
  std::span<const corpus::NliRecord> train_;
  std::span<const corpus::NliRecord> dev_;
};

// Class-macro F1 of a model over records; throws LeakageError if any record
// comes from a domain the model was trained on.
double evaluate_held_out(const nli::DomainModel& model,
                         std::span<const corpus::NliRecord> records);

struct LooResult {
  nli::DomainModel model;
  Checkpoint checkpoint;
  double held_out_f1 = 0.0;
};

// One independently seeded two-phase run per split (seed + domain index).
// Dev selection and the reported score use the split's held-out records.
// `parallel` runs the four splits on separate threads.
std::vector<LooResult> run_loo_training(
    std::span<const nli::LooSplit> splits, const TrainConfig& cfg,
    const nli::NliModelConfig& model_config, const LogSink& log = {},
    bool parallel = false);

}  // namespace legallens::trainer
