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

// Entity-level NER scores (exact span and type match) and NLI scores
// (class-macro F1 within a domain, unweighted mean across domains).
//
// Scores live in [0, 1]; percentages only appear in formatted reports.

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "legallens/corpus.hpp"

namespace legallens::metrics {

// Harmonic mean of precision and recall; zero when both are zero.
template <typename Scalar>
Scalar f1_from_pr(Scalar precision, Scalar recall) {
  const Scalar sum = precision + recall;
  if (sum == Scalar(0)) return Scalar(0);
  return Scalar(2) * precision * recall / sum;
}

template <typename Scalar>
Scalar safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? Scalar(0) : static_cast<Scalar>(num) / static_cast<Scalar>(den);
}

struct PrfScore {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PrfScore from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
};

struct EntityScores {
  std::map<corpus::EntityType, PrfScore> per_type;
  PrfScore micro;
};

// Example id -> spans. Gold and predicted sets must cover the same ids.
using SpansById = std::vector<std::pair<std::string, std::vector<corpus::GoldSpan>>>;

// A prediction is a true positive when an unmatched gold span of the same
// example has identical (type, start, end); each gold span matches once.
// Throws IdMismatch when the id sets differ.
EntityScores entity_prf(const SpansById& gold, const SpansById& pred);

[[noreturn]] void throw_missing_domain(corpus::Domain domain);

// Unweighted mean over the four domains; throws MissingDomain.
template <typename Scalar>
Scalar macro_f1(const std::map<corpus::Domain, Scalar>& domain_scores) {
  Scalar total(0);
  for (auto domain : corpus::kDomains) {
    auto it = domain_scores.find(domain);
    if (it == domain_scores.end()) throw_missing_domain(domain);
    total += it->second;
  }
  return total / Scalar(corpus::kDomains.size());
}

// Rows are gold, columns predicted, both in (Entailed, Contradict, Neutral)
// order. Throws LengthMismatch on unequal or empty inputs.
using ConfusionMatrix = Eigen::Matrix<long long, 3, 3>;
ConfusionMatrix confusion_matrix(std::span<const corpus::NliLabel> gold,
                                 std::span<const corpus::NliLabel> pred);

// Mean over the three classes of the one-vs-rest F1.
double class_macro_f1(const ConfusionMatrix& cm);
double nli_domain_f1(std::span<const corpus::NliLabel> gold,
                     std::span<const corpus::NliLabel> pred);

// Confusion classes between the three labels:
//   first:  Contradict <-> Entailed
//   second: Contradict or Entailed predicted as Neutral
//   third:  Neutral predicted as Contradict or Entailed
struct ErrorClasses {
  long long first = 0;
  long long second = 0;
  long long third = 0;
  friend bool operator==(const ErrorClasses&, const ErrorClasses&) = default;
};
ErrorClasses error_classes(const ConfusionMatrix& cm);

// Plain-text and machine-readable reports.
void print_entity_table(std::ostream& out, const EntityScores& scores);
nlohmann::json entity_table_json(const EntityScores& scores);
void print_domain_table(std::ostream& out,
                        const std::map<corpus::Domain, double>& domain_f1);
nlohmann::json domain_table_json(
    const std::map<corpus::Domain, double>& domain_f1);
void print_confusion_matrix(std::ostream& out, const ConfusionMatrix& cm);
nlohmann::json confusion_matrix_json(const ConfusionMatrix& cm);
void print_word_stats(std::ostream& out,
                      const std::map<corpus::EntityType, double>& stats);
nlohmann::json word_stats_json(
    const std::map<corpus::EntityType, double>& stats);

// Formats a [0, 1] score as a percentage with two decimals.
std::string percent(double score);

}  // namespace legallens::metrics
