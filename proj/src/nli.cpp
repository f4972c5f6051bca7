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

#include "legallens/nli.hpp"

#include <algorithm>
#include <set>

#include "legallens/checkpoint.hpp"
#include "legallens/errors.hpp"

namespace legallens::nli {

using corpus::Domain;
using corpus::NliLabel;
using corpus::NliRecord;

namespace {

constexpr const char* kEncoder = "encoder";

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

ParamStore init_params(const NliModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ParamStore params;
  nn::init_encoder(params, kEncoder, config.encoder(), rng);
  params.add_glorot("head.weight", config.hidden_dim, 3, rng);
  params.add_zeros("head.bias", 1, 3);
  return params;
}

nlohmann::json config_to_json(const NliModelConfig& cfg) {
  return {{"hidden_dim", cfg.hidden_dim},
          {"num_layers", cfg.num_layers},
          {"dropout", cfg.dropout},
          {"vocab_hash_buckets", cfg.vocab_hash_buckets},
          {"max_seq_len", cfg.max_seq_len}};
}

NliModelConfig config_from_json(const nlohmann::json& j) {
  try {
    NliModelConfig cfg;
    cfg.hidden_dim = j.at("hidden_dim").get<int>();
    cfg.num_layers = j.at("num_layers").get<int>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.vocab_hash_buckets = j.at("vocab_hash_buckets").get<int>();
    cfg.max_seq_len = j.at("max_seq_len").get<int>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointMismatch(std::string("bad config record: ") + e.what());
  } catch (const UsageError& e) {
    throw CheckpointMismatch(std::string("bad config record: ") + e.what());
  }
}

}  // namespace

void NliModelConfig::validate() const {
  if (hidden_dim <= 0) throw UsageError("hidden_dim must be positive");
  if (num_layers <= 0) throw UsageError("num_layers must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw UsageError("dropout must lie in [0, 1)");
  }
  if (vocab_hash_buckets <= nn::kFirstWordBucket) {
    throw UsageError("vocab_hash_buckets too small");
  }
  if (max_seq_len < 3) throw UsageError("max_seq_len must be at least 3");
}

nn::EncoderConfig NliModelConfig::encoder() const {
  return {hidden_dim, num_layers, vocab_hash_buckets, dropout};
}

NliModel::NliModel(NliModelConfig config, std::uint64_t seed)
    : config_(config), params_(init_params(config, seed)) {}

NliModel::NliModel(NliModelConfig config, ParamStore params)
    : config_(config), params_(std::move(params)) {
  if (!params_.same_layout(init_params(config_, 0))) {
    throw CheckpointMismatch(
        "parameter tensors do not match the model configuration");
  }
}

std::vector<Eigen::Index> encode_pair(const NliModelConfig& config,
                                      std::string_view premise,
                                      std::string_view hypothesis) {
  std::vector<Eigen::Index> ids{nn::kClsBucket};
  for (const auto& w : corpus::split_words(premise)) {
    ids.push_back(nn::word_bucket(w, config.vocab_hash_buckets));
  }
  ids.push_back(nn::kSepBucket);
  for (const auto& w : corpus::split_words(hypothesis)) {
    ids.push_back(nn::word_bucket(w, config.vocab_hash_buckets));
  }
  if (ids.size() > static_cast<std::size_t>(config.max_seq_len)) {
    ids.resize(static_cast<std::size_t>(config.max_seq_len));
  }
  return ids;
}

Var logits(Tape& tape, const NliModel& model, const NliRecord& record,
           Rng* rng) {
  if (blank(record.premise) || blank(record.hypothesis)) {
    throw EmptyInput("premise and hypothesis must be non-empty");
  }
  const auto& cfg = model.config();
  std::vector<std::vector<Eigen::Index>> positions;
  for (auto id : encode_pair(cfg, record.premise, record.hypothesis)) {
    positions.push_back({id});
  }
  auto input = nn::embed(tape, model.params(), kEncoder, positions);
  auto encoded =
      nn::encode(tape, model.params(), kEncoder, cfg.encoder(), input, rng);
  auto pooled = nn::mean_rows(encoded);
  return nn::add_row(pooled * tape.parameter(model.params().at("head.weight")),
                     tape.parameter(model.params().at("head.bias")));
}

Var example_loss(Tape& tape, const NliModel& model, const NliRecord& record,
                 Rng* rng) {
  return nn::softmax_cross_entropy(
      logits(tape, model, record, rng),
      static_cast<Eigen::Index>(corpus::index_of(record.label)));
}

NliPrediction from_distribution(const std::array<double, 3>& distribution) {
  NliPrediction p;
  p.distribution = distribution;
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (distribution[i] > distribution[best]) best = i;
  }
  p.label = corpus::kNliLabels[best];
  p.confidence = distribution[best];
  return p;
}

NliPrediction classify(const NliModel& model, const NliRecord& record) {
  Tape tape(/*record=*/false);
  const auto probs = nn::softmax_rows_values(logits(tape, model, record).value());
  return from_distribution({probs(0, 0), probs(0, 1), probs(0, 2)});
}

std::vector<LooSplit> loo_splits(std::span<const NliRecord> records) {
  std::set<Domain> present;
  for (const auto& r : records) present.insert(r.domain);
  for (auto d : corpus::kDomains) {
    if (!present.contains(d)) {
      throw MissingDomain("no records for domain '" +
                          std::string(corpus::domain_name(d)) + "'");
    }
  }
  std::vector<LooSplit> splits;
  for (auto held_out : corpus::kDomains) {
    LooSplit split{held_out, {}, {}};
    for (const auto& r : records) {
      (r.domain == held_out ? split.test : split.train).push_back(r);
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

EnsemblePrediction combine_by_confidence(
    std::span<const std::pair<Domain, NliPrediction>> members) {
  if (members.size() != corpus::kDomains.size()) {
    throw WrongModelCount("ensemble needs exactly 4 models, got " +
                          std::to_string(members.size()));
  }
  std::vector<std::pair<Domain, NliPrediction>> ordered(members.begin(),
                                                        members.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].first != corpus::kDomains[i]) {
      throw WrongModelCount("ensemble needs one model per held-out domain");
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i].second.confidence > ordered[best].second.confidence) best = i;
  }
  return {ordered[best].second, ordered[best].first};
}

EnsemblePrediction ensemble_predict(std::span<const DomainModel> models,
                                    const NliRecord& record) {
  if (models.size() != corpus::kDomains.size()) {
    throw WrongModelCount("ensemble needs exactly 4 models, got " +
                          std::to_string(models.size()));
  }
  std::vector<std::pair<Domain, NliPrediction>> members;
  for (const auto& m : models) {
    members.emplace_back(m.held_out_domain, classify(m.model, record));
  }
  return combine_by_confidence(members);
}

std::string checkpoint_filename(Domain held_out_domain) {
  return "nli_" + std::string(corpus::domain_name(held_out_domain)) +
         ".ckpt.json";
}

void save_checkpoint(const std::filesystem::path& path,
                     const DomainModel& model, const NliCheckpointInfo& info) {
  nlohmann::json training_domains = nlohmann::json::array();
  for (auto d : corpus::kDomains) {
    if (d != model.held_out_domain) training_domains.push_back(corpus::domain_name(d));
  }
  checkpoint::write(
      path, "nli_model",
      {{"config", config_to_json(model.model.config())},
       {"held_out_domain", corpus::domain_name(model.held_out_domain)},
       {"training_domains", training_domains},
       {"meta",
        {{"dev_metric", info.dev_metric},
         {"epoch", info.epoch},
         {"phase", info.phase}}},
       {"tensors", checkpoint::tensors_to_json(model.model.params())}});
}

DomainModel load_checkpoint(const std::filesystem::path& path,
                            NliCheckpointInfo* info) {
  const auto body = checkpoint::read(path, "nli_model");
  if (!body.contains("config") || !body.contains("tensors") ||
      !body.contains("held_out_domain") ||
      !body.at("held_out_domain").is_string()) {
    throw CheckpointMismatch(path.string() + " is missing required fields");
  }
  auto domain = corpus::parse_domain(body.at("held_out_domain").get<std::string>());
  if (!domain) {
    throw CheckpointMismatch(path.string() + " has an unknown held-out domain");
  }
  if (info != nullptr && body.contains("meta")) {
    const auto& meta = body.at("meta");
    info->dev_metric = meta.value("dev_metric", 0.0);
    info->epoch = meta.value("epoch", 0);
    info->phase = meta.value("phase", 0);
  }
  return {*domain, NliModel(config_from_json(body.at("config")),
                            checkpoint::tensors_from_json(body.at("tensors")))};
}

std::vector<DomainModel> load_ensemble(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError(dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 10 &&
        name.substr(name.size() - 10) == ".ckpt.json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.size() != corpus::kDomains.size()) {
    throw WrongModelCount(dir.string() + " holds " +
                          std::to_string(files.size()) +
                          " checkpoints, expected 4");
  }
  std::vector<DomainModel> models;
  std::set<Domain> seen;
  for (const auto& f : files) {
    models.push_back(load_checkpoint(f));
    if (!seen.insert(models.back().held_out_domain).second) {
      throw WrongModelCount(dir.string() +
                            " holds two checkpoints for one held-out domain");
    }
  }
  std::sort(models.begin(), models.end(), [](const auto& a, const auto& b) {
    return a.held_out_domain < b.held_out_domain;
  });
  return models;
}

}  // namespace legallens::nli
