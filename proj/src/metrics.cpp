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

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <set>

#include "legallens/errors.hpp"

namespace legallens::metrics {

using corpus::Domain;
using corpus::EntityType;
using corpus::NliLabel;
using nlohmann::json;

PrfScore PrfScore::from_counts(std::size_t tp, std::size_t fp,
                               std::size_t fn) {
  PrfScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.precision = safe_ratio<double>(tp, tp + fp);
  s.recall = safe_ratio<double>(tp, tp + fn);
  s.f1 = f1_from_pr(s.precision, s.recall);
  return s;
}

EntityScores entity_prf(const SpansById& gold, const SpansById& pred) {
  std::map<std::string, const std::vector<corpus::GoldSpan>*> gold_by_id;
  for (const auto& [id, spans] : gold) {
    if (!gold_by_id.emplace(id, &spans).second) {
      throw IdMismatch("duplicate gold id '" + id + "'");
    }
  }
  std::set<std::string> pred_ids;
  for (const auto& [id, spans] : pred) {
    if (!gold_by_id.contains(id)) {
      throw IdMismatch("prediction for unknown id '" + id + "'");
    }
    if (!pred_ids.insert(id).second) {
      throw IdMismatch("duplicate prediction id '" + id + "'");
    }
  }
  if (pred_ids.size() != gold_by_id.size()) {
    throw IdMismatch("gold and prediction id sets differ");
  }

  std::array<std::size_t, 4> tp{}, fp{}, fn{};
  for (const auto& [id, predicted] : pred) {
    const auto& expected = *gold_by_id.at(id);
    std::vector<bool> matched(expected.size(), false);
    for (const auto& p : predicted) {
      bool hit = false;
      for (std::size_t g = 0; g < expected.size(); ++g) {
        if (!matched[g] && expected[g] == p) {
          matched[g] = true;
          hit = true;
          break;
        }
      }
      ++(hit ? tp : fp)[corpus::index_of(p.entity_type)];
    }
    for (std::size_t g = 0; g < expected.size(); ++g) {
      if (!matched[g]) ++fn[corpus::index_of(expected[g].entity_type)];
    }
  }

  EntityScores scores;
  std::size_t all_tp = 0, all_fp = 0, all_fn = 0;
  for (auto type : corpus::kEntityTypes) {
    const auto i = corpus::index_of(type);
    if (tp[i] + fp[i] + fn[i] > 0) {
      scores.per_type[type] = PrfScore::from_counts(tp[i], fp[i], fn[i]);
    }
    all_tp += tp[i];
    all_fp += fp[i];
    all_fn += fn[i];
  }
  scores.micro = PrfScore::from_counts(all_tp, all_fp, all_fn);
  return scores;
}

void throw_missing_domain(Domain domain) {
  throw MissingDomain("no score for domain '" +
                      std::string(corpus::domain_name(domain)) + "'");
}

ConfusionMatrix confusion_matrix(std::span<const NliLabel> gold,
                                 std::span<const NliLabel> pred) {
  if (gold.size() != pred.size()) {
    throw LengthMismatch("gold has " + std::to_string(gold.size()) +
                         " labels, predictions " + std::to_string(pred.size()));
  }
  if (gold.empty()) throw LengthMismatch("no labels to compare");
  ConfusionMatrix cm = ConfusionMatrix::Zero();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++cm(static_cast<Eigen::Index>(corpus::index_of(gold[i])),
         static_cast<Eigen::Index>(corpus::index_of(pred[i])));
  }
  return cm;
}

double class_macro_f1(const ConfusionMatrix& cm) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < 3; ++c) {
    const auto tp = static_cast<std::size_t>(cm(c, c));
    const auto fp = static_cast<std::size_t>(cm.col(c).sum() - cm(c, c));
    const auto fn = static_cast<std::size_t>(cm.row(c).sum() - cm(c, c));
    total += PrfScore::from_counts(tp, fp, fn).f1;
  }
  return total / 3.0;
}

double nli_domain_f1(std::span<const NliLabel> gold,
                     std::span<const NliLabel> pred) {
  return class_macro_f1(confusion_matrix(gold, pred));
}

ErrorClasses error_classes(const ConfusionMatrix& cm) {
  constexpr Eigen::Index e = 0, c = 1, n = 2;
  return {cm(c, e) + cm(e, c), cm(c, n) + cm(e, n), cm(n, c) + cm(n, e)};
}

std::string percent(double score) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", score * 100.0);
  return buf;
}

void print_entity_table(std::ostream& out, const EntityScores& scores) {
  out << std::left << std::setw(14) << "Entity Type" << std::right
      << std::setw(11) << "Precision" << std::setw(9) << "Recall"
      << std::setw(8) << "F1" << '\n';
  auto row = [&](std::string_view name, const PrfScore& s) {
    out << std::left << std::setw(14) << name << std::right << std::setw(11)
        << percent(s.precision) << std::setw(9) << percent(s.recall)
        << std::setw(8) << percent(s.f1) << '\n';
  };
  for (const auto& [type, s] : scores.per_type) {
    row(corpus::display_name(type), s);
  }
  row("micro avg", scores.micro);
}

json entity_table_json(const EntityScores& scores) {
  auto record = [](const PrfScore& s) {
    return json{{"precision", s.precision}, {"recall", s.recall},
                {"f1", s.f1},               {"tp", s.tp},
                {"fp", s.fp},               {"fn", s.fn}};
  };
  json per_type = json::object();
  for (const auto& [type, s] : scores.per_type) {
    per_type[std::string(corpus::canonical_name(type))] = record(s);
  }
  return {{"table", "entity_prf"},
          {"per_type", per_type},
          {"micro", record(scores.micro)}};
}

void print_domain_table(std::ostream& out,
                        const std::map<Domain, double>& domain_f1) {
  for (auto d : corpus::kDomains) {
    out << std::setw(21) << corpus::domain_title(d);
  }
  out << std::setw(11) << "Macro F1" << '\n';
  for (auto d : corpus::kDomains) {
    auto it = domain_f1.find(d);
    out << std::setw(21) << (it == domain_f1.end() ? "-" : percent(it->second));
  }
  const bool complete = domain_f1.size() == corpus::kDomains.size();
  out << std::setw(11) << (complete ? percent(macro_f1(domain_f1)) : "-")
      << '\n';
}

json domain_table_json(const std::map<Domain, double>& domain_f1) {
  json per_domain = json::object();
  for (const auto& [d, f1] : domain_f1) {
    per_domain[std::string(corpus::domain_name(d))] = f1;
  }
  json macro = nullptr;
  if (domain_f1.size() == corpus::kDomains.size()) macro = macro_f1(domain_f1);
  return {{"table", "nli_domain_f1"},
          {"per_domain", per_domain},
          {"macro_f1", macro}};
}

void print_confusion_matrix(std::ostream& out, const ConfusionMatrix& cm) {
  out << std::left << std::setw(12) << "gold\\pred" << std::right;
  for (auto label : corpus::kNliLabels) {
    out << std::setw(12) << corpus::label_name(label);
  }
  out << '\n';
  for (auto gold : corpus::kNliLabels) {
    out << std::left << std::setw(12) << corpus::label_name(gold) << std::right;
    for (auto pred : corpus::kNliLabels) {
      out << std::setw(12)
          << cm(static_cast<Eigen::Index>(corpus::index_of(gold)),
                static_cast<Eigen::Index>(corpus::index_of(pred)));
    }
    out << '\n';
  }
}

json confusion_matrix_json(const ConfusionMatrix& cm) {
  json labels = json::array();
  for (auto label : corpus::kNliLabels) labels.push_back(corpus::label_name(label));
  json rows = json::array();
  for (Eigen::Index r = 0; r < 3; ++r) {
    rows.push_back({cm(r, 0), cm(r, 1), cm(r, 2)});
  }
  const auto errors = error_classes(cm);
  return {{"table", "confusion_matrix"},
          {"labels", labels},
          {"matrix", rows},
          {"error_classes",
           {{"first", errors.first},
            {"second", errors.second},
            {"third", errors.third}}}};
}

void print_word_stats(std::ostream& out,
                      const std::map<EntityType, double>& stats) {
  for (auto type : corpus::kEntityTypes) {
    out << std::setw(14) << corpus::display_name(type);
  }
  out << '\n';
  for (auto type : corpus::kEntityTypes) {
    auto it = stats.find(type);
    char buf[32] = "-";
    if (it != stats.end()) std::snprintf(buf, sizeof(buf), "%.2f", it->second);
    out << std::setw(14) << buf;
  }
  out << '\n';
}

json word_stats_json(const std::map<EntityType, double>& stats) {
  json means = json::object();
  for (const auto& [type, mean] : stats) {
    means[std::string(corpus::canonical_name(type))] = mean;
  }
  return {{"table", "entity_word_stats"}, {"mean_words", means}};
}

}  // namespace legallens::metrics
