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

#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legallens/errors.hpp"
#include "test_support.hpp"

namespace legallens::trainer {
namespace {

TEST(ScheduleTest, WarmupLinearShape) {
  const auto m = [](std::size_t s) {
    return lr_multiplier(s, 100, Schedule::kWarmupLinear, 0.1);
  };
  EXPECT_NEAR(m(0), 0.0, 1e-12);
  EXPECT_NEAR(m(5), 0.5, 1e-12);
  EXPECT_NEAR(m(10), 1.0, 1e-12);
  EXPECT_NEAR(m(55), 0.5, 1e-12);
  EXPECT_NEAR(m(100), 0.0, 1e-12);
  for (std::size_t s = 1; s <= 100; ++s) {
    if (s <= 10) EXPECT_GE(m(s), m(s - 1));
    if (s > 10) EXPECT_LE(m(s), m(s - 1));
  }
}

TEST(ScheduleTest, WarmupRoundsUp) {
  // 0.1 * 25 = 2.5 warm-up steps round up to 3.
  EXPECT_NEAR(lr_multiplier(3, 25, Schedule::kWarmupLinear, 0.1), 1.0, 1e-12);
  EXPECT_NEAR(lr_multiplier(2, 25, Schedule::kWarmupLinear, 0.1), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(lr_multiplier(0, 10, Schedule::kWarmupLinear, 0.0), 1.0, 1e-12);
}

TEST(ScheduleTest, CosineShape) {
  const auto m = [](std::size_t s) {
    return lr_multiplier(s, 80, Schedule::kCosine, 0.1);
  };
  EXPECT_NEAR(m(0), 1.0, 1e-12);
  EXPECT_NEAR(m(40), 0.5, 1e-12);
  EXPECT_NEAR(m(80), 0.0, 1e-12);
  EXPECT_NEAR(m(20), (1 + std::cos(std::numbers::pi / 4)) / 2, 1e-12);
}

TEST(ScheduleTest, LrAtScalesBaseRate) {
  auto cfg = TrainConfig::ner_defaults();
  EXPECT_NEAR(lr_at(55, 100, cfg, 5e-5), 2.5e-5, 1e-12);
  EXPECT_NEAR(lr_at(10, 100, cfg, 1e-5), 1e-5, 1e-12);
}

TEST(TrainConfigTest, Validation) {
  auto ok = TrainConfig::ner_defaults();
  ok.seed = 1;
  EXPECT_NO_THROW(ok.validate());
  auto bad = ok;
  bad.seed.reset();
  EXPECT_THROW(bad.validate(), UsageError);
  bad = ok;
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = ok;
  bad.phase2_lr = bad.head_lr;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = ok;
  bad.warmup_fraction = 1.5;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = ok;
  bad.focal.alpha = -0.1;
  EXPECT_THROW(bad.validate(), UsageError);
}

TEST(ParamGroupsTest, NerSplitsEncoderAndHeads) {
  for (auto variant : {span_ner::Variant::kUnified, span_ner::Variant::kBiEncoder,
                       span_ner::Variant::kPolyEncoder}) {
    span_ner::SpanScorerConfig mc;
    mc.variant = variant;
    mc.hidden_dim = 8;
    span_ner::SpanScorer model(mc, 1);
    const auto cfg = TrainConfig::ner_defaults();
    const auto groups = make_param_groups(model.params(), cfg);
    std::size_t covered = 0;
    for (const auto& g : groups) {
      covered += g.members.size();
      for (auto i : g.members) {
        const auto& name = model.params()[i].name;
        const bool encoder = name.find("_encoder.") != std::string::npos;
        EXPECT_EQ(g.lr, encoder ? cfg.backbone_lr : cfg.head_lr) << name;
      }
    }
    EXPECT_EQ(covered, model.params().size());
  }
}

TEST(ParamGroupsTest, UnknownTensorRejected) {
  ParamStore params;
  params.add("mystery.weight", Eigen::MatrixXd::Zero(2, 2));
  EXPECT_THROW(make_param_groups(params, TrainConfig::ner_defaults()),
               UnclassifiedParameter);
  nli::NliModelConfig nc;
  nc.hidden_dim = 8;
  nli::NliModel model(nc, 1);
  const auto groups = make_param_groups(model.params(), TrainConfig::nli_defaults());
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].members.size(), model.params().size());
}

// A one-tensor task whose dev metric follows a script.
class ScriptedTask : public TrainingTask {
 public:
  ScriptedTask(std::vector<double> metrics, double loss = 1.0)
      : metrics_(std::move(metrics)), loss_(loss) {
    params_.add("head.weight", Eigen::MatrixXd::Constant(1, 1, 1.0));
  }
  ParamStore& params() override { return params_; }
  std::size_t train_size() const override { return 4; }
  double batch_gradient(std::span<const std::size_t>, Gradients& grads,
                        Rng&) override {
    grads[0](0, 0) += 1.0;
    return loss_;
  }
  double dev_metric() override {
    const double m = metrics_.at(std::min(evals_, metrics_.size() - 1));
    ++evals_;
    return m;
  }
  std::size_t evals() const { return evals_; }

 private:
  ParamStore params_;
  std::vector<double> metrics_;
  double loss_;
  std::size_t evals_ = 0;
};

TrainConfig scripted_config() {
  auto cfg = TrainConfig::nli_defaults();
  cfg.seed = 7;
  cfg.batch_size = 2;
  cfg.max_epochs_phase1 = 3;
  cfg.max_epochs_phase2 = 20;
  cfg.patience = 3;
  return cfg;
}

TEST(PatienceTest, StopsAfterThreeStaleEvaluations) {
  ScriptedTask task({0.80, 0.80, 0.79, 0.79, 0.95});
  Checkpoint start{task.params(), 0.75, 3, 1, 6};
  std::vector<EvalLogEntry> log;
  const auto best = train_phase(task, scripted_config(), 2, &start,
                                [&](const EvalLogEntry& e) { log.push_back(e); });
  EXPECT_EQ(task.evals(), 4u);
  ASSERT_EQ(log.size(), 4u);
  EXPECT_DOUBLE_EQ(best.dev_metric, 0.80);
  EXPECT_EQ(best.epoch, 1);
  EXPECT_EQ(best.phase, 2);
  EXPECT_EQ(task.params()[0].value, best.params[0].value);
  EXPECT_NE(task.params()[0].value, start.params[0].value);
  for (const auto& e : log) EXPECT_DOUBLE_EQ(e.lr, scripted_config().phase2_lr);
}

TEST(PatienceTest, StartCheckpointCanWin) {
  ScriptedTask task({0.70, 0.71, 0.72});
  Checkpoint start{task.params(), 0.75, 3, 1, 6};
  const auto best = train_phase(task, scripted_config(), 2, &start);
  EXPECT_EQ(task.evals(), 3u);
  EXPECT_EQ(best.phase, 1);
  EXPECT_EQ(task.params()[0].value, start.params[0].value);
}

TEST(PatienceTest, PhaseOneRunsAllEpochs) {
  ScriptedTask task({0.1, 0.5, 0.3});
  const auto best = train_phase(task, scripted_config(), 1);
  EXPECT_EQ(task.evals(), 3u);
  EXPECT_EQ(best.epoch, 2);
  EXPECT_EQ(best.step, 4u);
}

TEST(TrainPhaseTest, NonFiniteLossThrows) {
  ScriptedTask task({0.5}, std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(train_phase(task, scripted_config(), 1), NonFiniteLoss);
}

TEST(TrainPhaseTest, PhaseTwoNeedsStart) {
  ScriptedTask task({0.5});
  EXPECT_THROW(train_phase(task, scripted_config(), 2), UsageError);
}

TEST(LogTest, JsonLineFields) {
  EvalLogEntry e{2, 3, 40, 5e-6, 0.25, 0.5, {}};
  const auto j = nlohmann::json::parse(e.to_json_line());
  EXPECT_EQ(j["phase"], 2);
  EXPECT_EQ(j["epoch"], 3);
  EXPECT_EQ(j["step"], 40);
  EXPECT_DOUBLE_EQ(j["lr"].get<double>(), 5e-6);
  EXPECT_DOUBLE_EQ(j["train_loss"].get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(j["dev_metric"].get<double>(), 0.5);
  EXPECT_FALSE(j.contains("tag"));
}

std::vector<std::string> seeded_ner_run(std::uint64_t seed,
                                        ParamStore* params_out) {
  const auto data = testing::synthetic_ner(8);
  span_ner::SpanScorerConfig mc;
  mc.hidden_dim = 8;
  mc.max_span_width = 3;
  span_ner::SpanScorer model(mc, seed);
  auto cfg = TrainConfig::ner_defaults();
  cfg.seed = seed;
  cfg.batch_size = 4;
  cfg.max_epochs_phase1 = 2;
  cfg.max_epochs_phase2 = 2;
  NerTask task(model, data, data, cfg.focal, {});
  std::vector<std::string> lines;
  train_two_phase(task, cfg,
                  [&](const EvalLogEntry& e) { lines.push_back(e.to_json_line()); });
  *params_out = model.params();
  return lines;
}

TEST(DeterminismTest, SameSeedSameRun) {
  ParamStore a, b, c;
  const auto run_a = seeded_ner_run(5, &a);
  const auto run_b = seeded_ner_run(5, &b);
  EXPECT_EQ(run_a, run_b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value);
  seeded_ner_run(6, &c);
  EXPECT_NE(a[0].value, c[0].value);
}

}  // namespace
}  // namespace legallens::trainer
