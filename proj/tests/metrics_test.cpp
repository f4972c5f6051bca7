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

#include "legallens/metrics.hpp"

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "legallens/errors.hpp"

namespace legallens::metrics {
namespace {

using corpus::Domain;
using corpus::EntityType;
using corpus::GoldSpan;
using corpus::NliLabel;

constexpr auto E = NliLabel::kEntailed;
constexpr auto C = NliLabel::kContradict;
constexpr auto N = NliLabel::kNeutral;

struct PrfRow {
  double precision, recall, f1;
};

// Published rows are rounded to two decimals, so the harmonic mean of the
// rounded inputs can differ from the rounded output by a little under 0.01.
constexpr double kRoundingTolerance = 0.011;

TEST(F1FromPrTest, ArchitectureComparisonRows) {
  for (const PrfRow& r : {PrfRow{70.26, 45.83, 55.47}, PrfRow{71.30, 47.02, 56.67},
                          PrfRow{72.32, 45.71, 56.02}, PrfRow{83.30, 46.31, 59.53},
                          PrfRow{74.00, 48.39, 58.52}, PrfRow{71.04, 49.64, 58.44}}) {
    EXPECT_NEAR(f1_from_pr(r.precision, r.recall), r.f1, kRoundingTolerance)
        << r.precision << "/" << r.recall;
  }
}

TEST(F1FromPrTest, EntityTypeRows) {
  for (const PrfRow& r : {PrfRow{73.40, 92.00, 81.66}, PrfRow{88.16, 89.33, 88.74},
                          PrfRow{71.43, 73.33, 72.37}, PrfRow{68.17, 39.29, 49.85},
                          PrfRow{71.93, 51.49, 60.01}}) {
    EXPECT_NEAR(f1_from_pr(r.precision, r.recall), r.f1, kRoundingTolerance)
        << r.precision << "/" << r.recall;
  }
}

TEST(F1FromPrTest, ZeroWhenBothZero) {
  EXPECT_EQ(f1_from_pr(0.0, 0.0), 0.0);
  EXPECT_EQ(f1_from_pr(0.0f, 1.0f), 0.0f);
}

TEST(MacroF1Test, DomainTableRows) {
  const std::map<Domain, double> original = {{Domain::kConsumerProtection, 85.48},
                                             {Domain::kPrivacy, 76.07},
                                             {Domain::kTcpa, 62.16},
                                             {Domain::kWage, 81.56}};
  const std::map<Domain, double> augmented = {{Domain::kConsumerProtection, 88.71},
                                              {Domain::kPrivacy, 85.88},
                                              {Domain::kTcpa, 79.72},
                                              {Domain::kWage, 84.61}};
  EXPECT_NEAR(macro_f1(original), 76.31, 0.01);
  EXPECT_NEAR(macro_f1(augmented), 84.73, 0.01);
}

TEST(MacroF1Test, MissingDomainThrows) {
  const std::map<Domain, double> three = {{Domain::kConsumerProtection, 0.8},
                                          {Domain::kPrivacy, 0.7},
                                          {Domain::kWage, 0.6}};
  EXPECT_THROW(macro_f1(three), MissingDomain);
  std::ostringstream out;
  print_domain_table(out, three);
  EXPECT_NE(out.str().find('-'), std::string::npos);
  EXPECT_TRUE(domain_table_json(three)["macro_f1"].is_null());
}

TEST(NliDomainF1Test, HandComputedValues) {
  // Entailed F1 1, Contradict F1 2/3, Neutral F1 2/3.
  const std::vector<NliLabel> gold = {E, C, N, C};
  const std::vector<NliLabel> pred = {E, C, N, N};
  EXPECT_NEAR(nli_domain_f1(gold, pred), 7.0 / 9.0, 1e-12);
  // Only Contradict has any overlap: P 1/2, R 1 -> F1 2/3; others zero.
  const std::vector<NliLabel> gold2 = {C, E, N};
  const std::vector<NliLabel> pred2 = {C, C, E};
  EXPECT_NEAR(nli_domain_f1(gold2, pred2), 2.0 / 9.0, 1e-12);
  // A class absent from both sides scores zero.
  const std::vector<NliLabel> gold3 = {E, E, C, C};
  const std::vector<NliLabel> pred3 = {E, C, C, C};
  EXPECT_NEAR(nli_domain_f1(gold3, pred3), (2.0 / 3.0 + 0.8) / 3.0, 1e-12);
}

// One-vs-rest F1 from raw label lists, without the confusion matrix.
double oracle_macro_f1(const std::vector<NliLabel>& gold,
                       const std::vector<NliLabel>& pred) {
  double total = 0.0;
  for (auto label : corpus::kNliLabels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      tp += gold[i] == label && pred[i] == label;
      fp += gold[i] != label && pred[i] == label;
      fn += gold[i] == label && pred[i] != label;
    }
    total += tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
  }
  return total / 3.0;
}

TEST(NliDomainF1Test, MatchesOracleOnRandomLabels) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<NliLabel> gold, pred;
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(corpus::kNliLabels[rng() % 3]);
      pred.push_back(corpus::kNliLabels[rng() % 3]);
    }
    EXPECT_NEAR(nli_domain_f1(gold, pred), oracle_macro_f1(gold, pred), 1e-12);
  }
}

TEST(ConfusionMatrixTest, LayoutAndErrors) {
  const std::vector<NliLabel> gold = {E, E, C, C, N, N, N};
  const std::vector<NliLabel> pred = {C, N, E, N, E, C, N};
  const auto cm = confusion_matrix(gold, pred);
  EXPECT_EQ(cm.sum(), 7);
  EXPECT_EQ(cm(0, 1), 1);
  EXPECT_EQ(cm(2, 2), 1);
  EXPECT_EQ(error_classes(cm), (ErrorClasses{2, 2, 2}));
  EXPECT_THROW(confusion_matrix(gold, std::vector<NliLabel>{E}), LengthMismatch);
  EXPECT_THROW(confusion_matrix(std::vector<NliLabel>{}, std::vector<NliLabel>{}),
               LengthMismatch);
}

TEST(ErrorClassesTest, HandTallies) {
  ConfusionMatrix cm;
  cm << 10, 3, 4,  //
      1, 20, 5,    //
      6, 2, 30;
  EXPECT_EQ(error_classes(cm), (ErrorClasses{4, 9, 8}));
}

TEST(EntityPrfTest, ExactMatchOnly) {
  const SpansById gold = {
      {"a", {{EntityType::kLaw, 0, 1}, {EntityType::kViolation, 3, 8}}},
      {"b", {{EntityType::kViolatedBy, 0, 0}}}};
  const SpansById pred = {
      {"b", {{EntityType::kViolatedBy, 0, 0}, {EntityType::kLaw, 4, 4}}},
      {"a", {{EntityType::kLaw, 0, 1}, {EntityType::kViolation, 3, 7}}}};
  const auto s = entity_prf(gold, pred);
  EXPECT_EQ(s.micro.tp, 2u);
  EXPECT_EQ(s.micro.fp, 2u);
  EXPECT_EQ(s.micro.fn, 1u);
  EXPECT_DOUBLE_EQ(s.micro.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.micro.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.micro.f1, f1_from_pr(0.5, 2.0 / 3.0));
  EXPECT_EQ(s.per_type.at(EntityType::kLaw).tp, 1u);
  EXPECT_EQ(s.per_type.at(EntityType::kLaw).fp, 1u);
  EXPECT_EQ(s.per_type.at(EntityType::kViolation).f1, 0.0);
}

TEST(EntityPrfTest, GoldMatchesOnce) {
  const SpansById gold = {{"a", {{EntityType::kLaw, 0, 1}}}};
  const SpansById pred = {{"a", {{EntityType::kLaw, 0, 1}, {EntityType::kLaw, 0, 1}}}};
  const auto s = entity_prf(gold, pred);
  EXPECT_EQ(s.micro.tp, 1u);
  EXPECT_EQ(s.micro.fp, 1u);
}

TEST(EntityPrfTest, IdSetsMustAgree) {
  const SpansById gold = {{"a", {}}};
  const SpansById pred = {{"b", {}}};
  EXPECT_THROW(entity_prf(gold, pred), IdMismatch);
}

TEST(ReportTest, PercentFormatting) {
  EXPECT_EQ(percent(0.6001), "60.01");
  EXPECT_EQ(percent(1.0), "100.00");
  std::ostringstream out;
  const std::map<Domain, double> all = {{Domain::kConsumerProtection, 0.8548},
                                        {Domain::kPrivacy, 0.7607},
                                        {Domain::kTcpa, 0.6216},
                                        {Domain::kWage, 0.8156}};
  print_domain_table(out, all);
  EXPECT_NE(out.str().find("76.3"), std::string::npos);
  EXPECT_NEAR(domain_table_json(all)["macro_f1"].get<double>(), 0.763175, 1e-9);
}

}  // namespace
}  // namespace legallens::metrics
