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

#include "legallens/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "legallens/errors.hpp"
#include "legallens/metrics.hpp"
#include "legallens/nn/adamw.hpp"
#include "legallens/nn/encoder.hpp"

namespace legallens::trainer {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

struct PhaseState {
  Checkpoint best;
  bool has_best = false;
};

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with raw engine draws keeps the order independent of the
  // standard library's distribution implementations.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

Checkpoint snapshot(TrainingTask& task, double metric, int epoch, int phase,
                    std::size_t step) {
  return {task.params(), metric, epoch, phase, step};
}

}  // namespace

std::string_view task_name(Task task) {
  return task == Task::kNer ? "ner" : "nli";
}

std::optional<Task> parse_task(std::string_view name) {
  if (name == "ner" || name == "NER") return Task::kNer;
  if (name == "nli" || name == "NLI") return Task::kNli;
  return std::nullopt;
}

std::string_view schedule_name(Schedule schedule) {
  return schedule == Schedule::kWarmupLinear ? "warmup_linear" : "cosine";
}

std::optional<Schedule> parse_schedule(std::string_view name) {
  if (name == "warmup_linear" || name == "WarmupLinear" || name == "linear") {
    return Schedule::kWarmupLinear;
  }
  if (name == "cosine" || name == "Cosine") return Schedule::kCosine;
  return std::nullopt;
}

TrainConfig TrainConfig::ner_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::nli_defaults() {
  TrainConfig cfg;
  cfg.task = Task::kNli;
  cfg.phase2_lr = 2e-6;
  cfg.max_epochs_phase1 = 7;
  cfg.scheduler = Schedule::kCosine;
  return cfg;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  for (double lr : {backbone_lr, head_lr, nli_lr, phase2_lr}) {
    if (!(lr > 0.0)) throw UsageError("learning rates must be positive");
  }
  const double phase1_min =
      task == Task::kNer ? std::min(backbone_lr, head_lr) : nli_lr;
  if (!(phase2_lr < phase1_min)) {
    throw UsageError("phase2_lr must be below the phase-1 learning rates");
  }
  if (max_epochs_phase1 < 1 || max_epochs_phase2 < 1) {
    throw UsageError("epoch limits must be >= 1");
  }
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw UsageError("warmup_fraction must lie in [0, 1]");
  }
  if (patience < 1) throw UsageError("patience must be >= 1");
  if (!(focal.alpha >= 0.0 && focal.alpha <= 1.0)) {
    throw UsageError("focal alpha must lie in [0, 1]");
  }
  if (!(focal.gamma >= 0.0)) throw UsageError("focal gamma must be >= 0");
  if (!seed) throw UsageError("a seed is required for training");
}

double lr_multiplier(std::size_t step, std::size_t total, Schedule schedule,
                     double warmup_fraction) {
  if (total == 0) return 0.0;
  step = std::min(step, total);
  const double s = static_cast<double>(step);
  const double n = static_cast<double>(total);
  if (schedule == Schedule::kCosine) {
    return (1.0 + std::cos(std::numbers::pi * s / n)) / 2.0;
  }
  const auto warmup =
      static_cast<std::size_t>(std::ceil(warmup_fraction * n - 1e-9));
  if (step < warmup) return s / static_cast<double>(warmup);
  if (warmup == total) return 1.0;
  return std::max(0.0, (n - s) / (n - static_cast<double>(warmup)));
}

double lr_at(std::size_t step, std::size_t total, const TrainConfig& cfg,
             double base_lr) {
  return base_lr * lr_multiplier(step, total, cfg.scheduler,
                                 cfg.warmup_fraction);
}

std::vector<ParamGroup> make_param_groups(const ParamStore& params,
                                          const TrainConfig& cfg) {
  if (cfg.task == Task::kNli) {
    ParamGroup all{"nli", {}, cfg.nli_lr};
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& name = params[i].name;
      if (!starts_with(name, "encoder.") && !starts_with(name, "head.")) {
        throw UnclassifiedParameter("parameter '" + name +
                                    "' belongs to no NLI group");
      }
      all.members.push_back(i);
    }
    return {all};
  }
  ParamGroup backbone{"backbone", {}, cfg.backbone_lr};
  ParamGroup heads{"heads", {}, cfg.head_lr};
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& name = params[i].name;
    if (starts_with(name, "token_encoder.") ||
        starts_with(name, "label_encoder.")) {
      backbone.members.push_back(i);
    } else if (starts_with(name, "span_head.") ||
               starts_with(name, "label_head.") ||
               starts_with(name, "fusion.")) {
      heads.members.push_back(i);
    } else {
      throw UnclassifiedParameter("parameter '" + name +
                                  "' belongs to no NER group");
    }
  }
  return {backbone, heads};
}

std::string EvalLogEntry::to_json_line() const {
  nlohmann::json j = {{"phase", phase},           {"epoch", epoch},
                      {"step", step},             {"lr", lr},
                      {"train_loss", train_loss}, {"dev_metric", dev_metric}};
  if (!tag.empty()) j["tag"] = tag;
  return j.dump();
}

Checkpoint train_phase(TrainingTask& task, const TrainConfig& cfg, int phase,
                       const Checkpoint* start, const LogSink& log) {
  if (phase != 1 && phase != 2) throw UsageError("phase must be 1 or 2");
  if (phase == 2 && start == nullptr) {
    throw UsageError("phase 2 needs the phase-1 checkpoint");
  }
  if (task.train_size() == 0) throw EmptyData("no training examples");
  if (!cfg.seed) throw UsageError("a seed is required for training");

  if (start != nullptr) task.params().assign_values(start->params);
  Rng rng(*cfg.seed + static_cast<std::uint64_t>(phase) * 0x9E3779B97F4A7C15ull);

  const auto groups = make_param_groups(task.params(), cfg);
  const std::size_t n_params = task.params().size();
  std::vector<double> base_lr(n_params, 0.0);
  for (const auto& g : groups) {
    for (auto i : g.members) base_lr[i] = g.lr;
  }
  std::vector<bool> decay(n_params);
  for (std::size_t i = 0; i < n_params; ++i) {
    decay[i] = nn::decays(task.params()[i].name);
  }

  nn::AdamW<double> optimizer(task.params(),
                              {0.9, 0.999, 1e-8, cfg.weight_decay});
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t steps_per_epoch = (task.train_size() + batch - 1) / batch;
  const int max_epochs =
      phase == 1 ? cfg.max_epochs_phase1 : cfg.max_epochs_phase2;
  const std::size_t total_steps =
      steps_per_epoch * static_cast<std::size_t>(max_epochs);

  PhaseState state;
  if (start != nullptr) {
    state.best = *start;
    state.has_best = true;
  }
  int stale = 0;
  std::size_t step = 0;
  std::vector<double> lr(n_params);
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    const auto order = shuffled(task.train_size(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    double last_lr = 0.0;
    for (std::size_t offset = 0; offset < order.size(); offset += batch) {
      const std::size_t len = std::min(batch, order.size() - offset);
      std::span<const std::size_t> members(order.data() + offset, len);
      auto grads = nn::zero_gradients(task.params());
      const double loss = task.batch_gradient(members, grads, rng);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss (" << loss << ") in phase " << phase
            << ", epoch " << epoch << ", step " << step;
        throw NonFiniteLoss(msg.str());
      }
      for (const auto& g : grads) {
        if (!g.allFinite()) {
          std::ostringstream msg;
          msg << "non-finite gradient in phase " << phase << ", epoch "
              << epoch << ", step " << step;
          throw NonFiniteLoss(msg.str());
        }
      }
      nn::clip_global_norm(grads, cfg.max_grad_norm);
      for (std::size_t i = 0; i < n_params; ++i) {
        lr[i] = phase == 1 ? lr_at(step, total_steps, cfg, base_lr[i])
                           : cfg.phase2_lr;
      }
      last_lr = groups.empty() || groups.front().members.empty()
                    ? 0.0
                    : lr[groups.front().members.front()];
      optimizer.step(task.params(), grads, lr, decay);
      loss_sum += loss;
      ++batches;
      ++step;
    }

    const double metric = task.dev_metric();
    if (log) {
      log({phase, epoch, step, last_lr,
           loss_sum / static_cast<double>(batches), metric, {}});
    }
    if (!state.has_best || metric > state.best.dev_metric) {
      state.best = snapshot(task, metric, epoch, phase, step);
      state.has_best = true;
      stale = 0;
    } else if (phase == 2 && ++stale >= cfg.patience) {
      break;
    }
  }

  task.params().assign_values(state.best.params);
  return state.best;
}

Checkpoint train_two_phase(TrainingTask& task, const TrainConfig& cfg,
                           const LogSink& log) {
  const Checkpoint first = train_phase(task, cfg, 1, nullptr, log);
  return train_phase(task, cfg, 2, &first, log);
}

// ---------------------------------------------------------------------------

NerTask::NerTask(span_ner::SpanScorer& model,
                 std::span<const corpus::NerExample> train,
                 std::span<const corpus::NerExample> dev, FocalConfig focal,
                 span_ner::DecodeConfig decode,
                 std::vector<std::string> labels)
    : model_(model),
      train_(train),
      dev_(dev),
      focal_(focal),
      decode_(decode),
      labels_(std::move(labels)) {}

double NerTask::batch_gradient(std::span<const std::size_t> batch,
                               Gradients& grads, Rng& rng) {
  double total = 0.0;
  const double share = 1.0 / static_cast<double>(batch.size());
  for (auto i : batch) {
    span_ner::Tape tape;
    auto loss = span_ner::example_loss(tape, model_, train_[i], labels_,
                                       focal_, &rng);
    auto scaled = nn::scale(loss, share);
    tape.backward(scaled);
    nn::collect_gradients(tape, model_.params(), grads);
    total += loss.value()(0, 0);
  }
  return total * share;
}

double NerTask::dev_metric() {
  return ner_micro_f1(model_, dev_, decode_, labels_);
}

double ner_micro_f1(const span_ner::SpanScorer& model,
                    std::span<const corpus::NerExample> examples,
                    const span_ner::DecodeConfig& decode,
                    std::span<const std::string> labels) {
  metrics::SpansById gold, pred;
  for (const auto& ex : examples) {
    gold.emplace_back(ex.id, ex.entities);
    pred.emplace_back(ex.id, span_ner::to_gold_spans(span_ner::predict(
                                 model, ex.tokens, labels, decode)));
  }
  return metrics::entity_prf(gold, pred).micro.f1;
}

NliTask::NliTask(nli::NliModel& model, std::span<const corpus::NliRecord> train,
                 std::span<const corpus::NliRecord> dev)
    : model_(model), train_(train), dev_(dev) {}

double NliTask::batch_gradient(std::span<const std::size_t> batch,
                               Gradients& grads, Rng& rng) {
  double total = 0.0;
  const double share = 1.0 / static_cast<double>(batch.size());
  for (auto i : batch) {
    nli::Tape tape;
    auto loss = nli::example_loss(tape, model_, train_[i], &rng);
    tape.backward(nn::scale(loss, share));
    nn::collect_gradients(tape, model_.params(), grads);
    total += loss.value()(0, 0);
  }
  return total * share;
}

double NliTask::dev_metric() {
  if (dev_.empty()) return 0.0;
  std::vector<corpus::NliLabel> gold, pred;
  for (const auto& r : dev_) {
    gold.push_back(r.label);
    pred.push_back(nli::classify(model_, r).label);
  }
  return metrics::nli_domain_f1(gold, pred);
}

double evaluate_held_out(const nli::DomainModel& model,
                         std::span<const corpus::NliRecord> records) {
  std::vector<corpus::NliLabel> gold, pred;
  for (const auto& r : records) {
    if (r.domain != model.held_out_domain) {
      throw LeakageError(
          "record '" + r.id + "' is from training domain '" +
          std::string(corpus::domain_name(r.domain)) +
          "' of the model held out on '" +
          std::string(corpus::domain_name(model.held_out_domain)) + "'");
    }
    gold.push_back(r.label);
    pred.push_back(nli::classify(model.model, r).label);
  }
  return metrics::nli_domain_f1(gold, pred);
}

std::vector<LooResult> run_loo_training(std::span<const nli::LooSplit> splits,
                                        const TrainConfig& cfg,
                                        const nli::NliModelConfig& model_config,
                                        const LogSink& log, bool parallel) {
  cfg.validate();
  std::mutex log_mutex;
  auto run = [&](const nli::LooSplit& split) {
    const auto index = corpus::index_of(split.held_out_domain);
    for (const auto& r : split.train) {
      if (r.domain == split.held_out_domain) {
        throw LeakageError("split for '" +
                           std::string(corpus::domain_name(split.held_out_domain)) +
                           "' trains on its own held-out domain");
      }
    }
    TrainConfig local = cfg;
    local.seed = *cfg.seed + index;
    nli::DomainModel member{split.held_out_domain,
                            nli::NliModel(model_config, *local.seed)};
    NliTask task(member.model, split.train, split.test);
    const std::string tag(corpus::domain_name(split.held_out_domain));
    LogSink tagged;
    if (log) {
      tagged = [&](const EvalLogEntry& e) {
        EvalLogEntry copy = e;
        copy.tag = tag;
        std::lock_guard lock(log_mutex);
        log(copy);
      };
    }
    try {
      Checkpoint best = train_two_phase(task, local, tagged);
      const double f1 = evaluate_held_out(member, split.test);
      return LooResult{std::move(member), std::move(best), f1};
    } catch (const NonFiniteLoss& e) {
      throw NonFiniteLoss("[" + tag + "] " + e.what());
    } catch (const EmptyData& e) {
      throw EmptyData("[" + tag + "] " + e.what());
    }
  };

  std::vector<LooResult> results;
  if (parallel) {
    std::vector<std::future<LooResult>> futures;
    for (const auto& split : splits) {
      futures.push_back(std::async(std::launch::async, run, std::cref(split)));
    }
    for (auto& f : futures) results.push_back(f.get());
  } else {
    for (const auto& split : splits) results.push_back(run(split));
  }
  return results;
}

}  // namespace legallens::trainer
