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

#include "legallens/span_ner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "legallens/checkpoint.hpp"
#include "legallens/errors.hpp"

namespace legallens::span_ner {

namespace {

constexpr const char* kTokenEncoder = "token_encoder";
constexpr const char* kLabelEncoder = "label_encoder";

// "VIOLATED_BY" -> buckets of "violated", "by".
std::vector<Eigen::Index> label_pieces(std::string_view label, int buckets) {
  std::vector<Eigen::Index> pieces;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) pieces.push_back(nn::word_bucket(word, buckets));
    word.clear();
  };
  for (char c : label) {
    if (c == '_' || c == ' ' || c == '-') {
      flush();
    } else {
      word.push_back(c);
    }
  }
  flush();
  if (pieces.empty()) pieces.push_back(nn::word_bucket(label, buckets));
  return pieces;
}

std::vector<std::vector<Eigen::Index>> token_positions(
    std::span<const std::string> tokens, int buckets) {
  std::vector<std::vector<Eigen::Index>> positions;
  positions.reserve(tokens.size());
  for (const auto& t : tokens) positions.push_back({nn::word_bucket(t, buckets)});
  return positions;
}

std::vector<Eigen::Index> iota_rows(Eigen::Index first, std::size_t count,
                                    Eigen::Index stride = 1) {
  std::vector<Eigen::Index> rows(count);
  for (std::size_t i = 0; i < count; ++i) {
    rows[i] = first + static_cast<Eigen::Index>(i) * stride;
  }
  return rows;
}

EncodedVars encode_unified_vars(Tape& tape, const SpanScorer& model,
                                std::span<const std::string> labels,
                                std::span<const std::string> tokens,
                                Rng* rng) {
  const auto& cfg = model.config();
  // [label_1, SEP, label_2, SEP, ..., label_m, SEP, token_1 ... token_n]
  std::vector<std::vector<Eigen::Index>> positions;
  for (const auto& label : labels) {
    positions.push_back(label_pieces(label, cfg.vocab_hash_buckets));
    positions.push_back({nn::kSepBucket});
  }
  for (auto& p : token_positions(tokens, cfg.vocab_hash_buckets)) {
    positions.push_back(std::move(p));
  }
  auto input = nn::embed(tape, model.params(), kTokenEncoder, positions);
  auto joint = nn::encode(tape, model.params(), kTokenEncoder, cfg.encoder(),
                          input, rng);
  const auto m = static_cast<Eigen::Index>(labels.size());
  return {nn::gather_rows(joint, iota_rows(0, labels.size(), 2)),
          nn::gather_rows(joint, iota_rows(2 * m, tokens.size()))};
}

EncodedVars encode_bi_vars(Tape& tape, const SpanScorer& model,
                           std::span<const std::string> labels,
                           std::span<const std::string> tokens, Rng* rng) {
  const auto& cfg = model.config();
  auto token_input = nn::embed(tape, model.params(), kTokenEncoder,
                               token_positions(tokens, cfg.vocab_hash_buckets));
  auto token_reprs = nn::encode(tape, model.params(), kTokenEncoder,
                                cfg.encoder(), token_input, rng);
  std::vector<Var> label_rows;
  for (const auto& label : labels) {
    std::vector<std::vector<Eigen::Index>> positions;
    for (auto piece : label_pieces(label, cfg.vocab_hash_buckets)) {
      positions.push_back({piece});
    }
    auto input = nn::embed(tape, model.params(), kLabelEncoder, positions);
    auto encoded = nn::encode(tape, model.params(), kLabelEncoder,
                              cfg.encoder(), input, rng);
    label_rows.push_back(nn::mean_rows(encoded));
  }
  return {nn::concat_rows<Real>(label_rows), token_reprs};
}

EncodedVars encode_poly_vars(Tape& tape, const SpanScorer& model,
                             std::span<const std::string> labels,
                             std::span<const std::string> tokens, Rng* rng) {
  auto [label_reprs, token_reprs] =
      encode_bi_vars(tape, model, labels, tokens, rng);
  auto p = [&](const char* name) {
    return tape.parameter(model.params().at(std::string("fusion.") + name));
  };
  // Both directions read the pre-fusion representations.
  auto label_update =
      nn::attention(label_reprs, token_reprs, p("label.query"), p("label.key"),
                    p("label.value"), p("label.output"));
  auto token_update =
      nn::attention(token_reprs, label_reprs, p("token.query"), p("token.key"),
                    p("token.value"), p("token.output"));
  return {label_reprs + label_update, token_reprs + token_update};
}

void require_variant(const SpanScorer& model, Variant expected) {
  if (model.config().variant != expected) {
    throw VariantMismatch("model variant is '" +
                          std::string(variant_name(model.config().variant)) +
                          "', operation requires '" +
                          std::string(variant_name(expected)) + "'");
  }
}

void require_labels(std::span<const std::string> labels) {
  if (labels.empty()) throw UsageError("at least one label is required");
}

Encoded evaluate(const SpanScorer& model, std::span<const std::string> labels,
                 std::span<const std::string> tokens) {
  Tape tape(/*record=*/false);
  auto vars = encode(tape, model, labels, tokens);
  return {vars.label_reprs.value(), vars.token_reprs.value()};
}

nlohmann::json config_to_json(const SpanScorerConfig& cfg) {
  return {{"variant", variant_name(cfg.variant)},
          {"hidden_dim", cfg.hidden_dim},
          {"num_layers", cfg.num_layers},
          {"max_span_width", cfg.max_span_width},
          {"dropout", cfg.dropout},
          {"vocab_hash_buckets", cfg.vocab_hash_buckets}};
}

SpanScorerConfig config_from_json(const nlohmann::json& j) {
  try {
    SpanScorerConfig cfg;
    auto variant = parse_variant(j.at("variant").get<std::string>());
    if (!variant) throw CheckpointMismatch("unknown variant in checkpoint");
    cfg.variant = *variant;
    cfg.hidden_dim = j.at("hidden_dim").get<int>();
    cfg.num_layers = j.at("num_layers").get<int>();
    cfg.max_span_width = j.at("max_span_width").get<int>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.vocab_hash_buckets = j.at("vocab_hash_buckets").get<int>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointMismatch(std::string("bad config record: ") + e.what());
  } catch (const UsageError& e) {
    throw CheckpointMismatch(std::string("bad config record: ") + e.what());
  }
}

}  // namespace

std::string_view variant_name(Variant variant) {
  switch (variant) {
    case Variant::kUnified: return "unified";
    case Variant::kBiEncoder: return "bi";
    case Variant::kPolyEncoder: return "poly";
  }
  return "";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "unified" || name == "uni") return Variant::kUnified;
  if (name == "bi" || name == "bi-encoder" || name == "biencoder") {
    return Variant::kBiEncoder;
  }
  if (name == "poly" || name == "poly-encoder" || name == "polyencoder") {
    return Variant::kPolyEncoder;
  }
  return std::nullopt;
}

void SpanScorerConfig::validate() const {
  if (hidden_dim <= 0 || hidden_dim % 2 != 0) {
    throw UsageError("hidden_dim must be a positive even number");
  }
  if (num_layers <= 0) throw UsageError("num_layers must be positive");
  if (max_span_width < 1) throw UsageError("max_span_width must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw UsageError("dropout must lie in [0, 1)");
  }
  if (vocab_hash_buckets <= nn::kFirstWordBucket) {
    throw UsageError("vocab_hash_buckets too small");
  }
}

nn::EncoderConfig SpanScorerConfig::encoder() const {
  return {hidden_dim, num_layers, vocab_hash_buckets, dropout};
}

std::vector<Span> enumerate_spans(std::size_t n, std::size_t max_width) {
  std::vector<Span> spans;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t e = s; e < n && e - s + 1 <= max_width; ++e) {
      spans.push_back({s, e});
    }
  }
  return spans;
}

std::vector<std::string> default_labels() {
  std::vector<std::string> labels;
  for (auto type : corpus::kEntityTypes) {
    labels.emplace_back(corpus::canonical_name(type));
  }
  return labels;
}

ParamStore init_span_scorer_params(const SpanScorerConfig& config,
                                   std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ParamStore params;
  const Eigen::Index d = config.hidden_dim;
  nn::init_encoder(params, kTokenEncoder, config.encoder(), rng);
  if (config.variant != Variant::kUnified) {
    nn::init_encoder(params, kLabelEncoder, config.encoder(), rng);
  }
  params.add_glorot("span_head.hidden.weight", 2 * d, d, rng);
  params.add_zeros("span_head.hidden.bias", 1, d);
  params.add_glorot("span_head.output.weight", d, d, rng);
  params.add_zeros("span_head.output.bias", 1, d);
  params.add_glorot("label_head.hidden.weight", d, d, rng);
  params.add_zeros("label_head.hidden.bias", 1, d);
  params.add_glorot("label_head.output.weight", d, d, rng);
  params.add_zeros("label_head.output.bias", 1, d);
  // Fusion comes last so bi and poly models built from one seed share every
  // other tensor.
  if (config.variant == Variant::kPolyEncoder) {
    for (const char* side : {"label", "token"}) {
      for (const char* w : {"query", "key", "value", "output"}) {
        params.add_glorot(std::string("fusion.") + side + "." + w, d, d, rng);
      }
    }
  }
  return params;
}

SpanScorer::SpanScorer(SpanScorerConfig config, std::uint64_t seed)
    : config_(config), params_(init_span_scorer_params(config, seed)) {}

SpanScorer::SpanScorer(SpanScorerConfig config, ParamStore params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  if (!params_.same_layout(init_span_scorer_params(config_, 0))) {
    throw CheckpointMismatch(
        "parameter tensors do not match the model configuration");
  }
}

EncodedVars encode(Tape& tape, const SpanScorer& model,
                   std::span<const std::string> labels,
                   std::span<const std::string> tokens, Rng* rng) {
  require_labels(labels);
  switch (model.config().variant) {
    case Variant::kUnified:
      return encode_unified_vars(tape, model, labels, tokens, rng);
    case Variant::kBiEncoder:
      return encode_bi_vars(tape, model, labels, tokens, rng);
    case Variant::kPolyEncoder:
      return encode_poly_vars(tape, model, labels, tokens, rng);
  }
  throw VariantMismatch("unknown variant");
}

Encoded encode_unified(const SpanScorer& model,
                       std::span<const std::string> labels,
                       std::span<const std::string> tokens) {
  require_variant(model, Variant::kUnified);
  return evaluate(model, labels, tokens);
}

Encoded encode_bi(const SpanScorer& model, std::span<const std::string> labels,
                  std::span<const std::string> tokens) {
  require_variant(model, Variant::kBiEncoder);
  return evaluate(model, labels, tokens);
}

Encoded encode_poly(const SpanScorer& model,
                    std::span<const std::string> labels,
                    std::span<const std::string> tokens) {
  require_variant(model, Variant::kPolyEncoder);
  return evaluate(model, labels, tokens);
}

Var score_spans(Tape& tape, const SpanScorer& model,
                std::span<const std::string> labels,
                std::span<const std::string> tokens,
                std::span<const Span> spans, Rng* rng) {
  const auto& params = model.params();
  const double rate = model.config().dropout;
  auto p = [&](const char* name) { return tape.parameter(params.at(name)); };
  auto [label_reprs, token_reprs] = encode(tape, model, labels, tokens, rng);

  std::vector<Eigen::Index> starts, ends;
  starts.reserve(spans.size());
  ends.reserve(spans.size());
  for (const auto& s : spans) {
    starts.push_back(static_cast<Eigen::Index>(s.start));
    ends.push_back(static_cast<Eigen::Index>(s.end));
  }
  auto endpoints = nn::concat_cols(nn::gather_rows(token_reprs, starts),
                                   nn::gather_rows(token_reprs, ends));
  auto span_hidden = nn::dropout(
      nn::relu(nn::add_row(endpoints * p("span_head.hidden.weight"),
                           p("span_head.hidden.bias"))),
      rate, rng);
  auto span_reprs = nn::add_row(span_hidden * p("span_head.output.weight"),
                                p("span_head.output.bias"));

  auto label_hidden =
      nn::relu(nn::add_row(label_reprs * p("label_head.hidden.weight"),
                           p("label_head.hidden.bias")));
  auto label_out = nn::add_row(label_hidden * p("label_head.output.weight"),
                               p("label_head.output.bias"));

  const Real temperature =
      Real(1) / std::sqrt(static_cast<Real>(model.config().hidden_dim));
  return nn::sigmoid(
      nn::scale(span_reprs * nn::transpose(label_out), temperature));
}

SpanScores score_spans(const SpanScorer& model,
                       std::span<const std::string> tokens,
                       std::span<const std::string> labels) {
  SpanScores out;
  out.labels.assign(labels.begin(), labels.end());
  out.spans = enumerate_spans(
      tokens.size(), static_cast<std::size_t>(model.config().max_span_width));
  if (out.spans.empty()) {
    out.scores.resize(0, static_cast<Eigen::Index>(labels.size()));
    return out;
  }
  Tape tape(/*record=*/false);
  out.scores = score_spans(tape, model, labels, tokens, out.spans).value();
  return out;
}

Eigen::MatrixXd span_targets(const corpus::NerExample& example,
                             std::span<const Span> spans,
                             std::span<const std::string> labels) {
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(spans.size()),
      static_cast<Eigen::Index>(labels.size()));
  std::map<std::pair<std::size_t, std::size_t>, Eigen::Index> row_of;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    row_of[{spans[i].start, spans[i].end}] = static_cast<Eigen::Index>(i);
  }
  for (const auto& gold : example.entities) {
    auto row = row_of.find({gold.start, gold.end});
    if (row == row_of.end()) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      auto parsed = corpus::parse_entity_type(labels[j]);
      if (parsed && *parsed == gold.entity_type) {
        targets(row->second, static_cast<Eigen::Index>(j)) = 1.0;
      }
    }
  }
  return targets;
}

Var example_loss(Tape& tape, const SpanScorer& model,
                 const corpus::NerExample& example,
                 std::span<const std::string> labels, const FocalConfig& focal,
                 Rng* rng) {
  const auto spans = enumerate_spans(
      example.tokens.size(),
      static_cast<std::size_t>(model.config().max_span_width));
  if (spans.empty()) throw EmptyData("example '" + example.id + "' has no tokens");
  auto scores = score_spans(tape, model, labels, example.tokens, spans, rng);
  return nn::focal_loss(scores, span_targets(example, spans, labels), focal);
}

std::vector<EntityPrediction> filter_duplicates(
    std::span<const EntityPrediction> preds) {
  std::map<std::string, std::size_t> best;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto [it, inserted] = best.emplace(preds[i].entity_type, i);
    if (inserted) continue;
    const auto& current = preds[it->second];
    if (preds[i].confidence > current.confidence ||
        (preds[i].confidence == current.confidence &&
         preds[i].start < current.start)) {
      it->second = i;
    }
  }
  std::vector<EntityPrediction> kept;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (best.at(preds[i].entity_type) == i) kept.push_back(preds[i]);
  }
  return kept;
}

std::vector<EntityPrediction> decode(const Eigen::MatrixXd& scores,
                                     std::span<const Span> spans,
                                     std::span<const std::string> labels,
                                     const DecodeConfig& cfg) {
  struct Candidate {
    EntityPrediction pred;
    std::size_t label_index;
  };
  std::vector<Candidate> candidates;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (scores(i, j) < cfg.threshold) continue;
      const auto& span = spans[static_cast<std::size_t>(i)];
      candidates.push_back({{labels[static_cast<std::size_t>(j)], span.start,
                             span.end, scores(i, j)},
                            static_cast<std::size_t>(j)});
    }
  }

  std::vector<Candidate> accepted;
  if (cfg.flat_spans) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.pred.confidence != b.pred.confidence) {
                         return a.pred.confidence > b.pred.confidence;
                       }
                       if (a.pred.start != b.pred.start) {
                         return a.pred.start < b.pred.start;
                       }
                       return a.pred.end < b.pred.end;
                     });
    for (const auto& c : candidates) {
      const bool overlaps = std::any_of(
          accepted.begin(), accepted.end(), [&](const Candidate& a) {
            return c.pred.start <= a.pred.end && a.pred.start <= c.pred.end;
          });
      if (!overlaps) accepted.push_back(c);
    }
  } else {
    accepted = std::move(candidates);
  }
  std::stable_sort(accepted.begin(), accepted.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.pred.start != b.pred.start) {
                       return a.pred.start < b.pred.start;
                     }
                     if (a.pred.end != b.pred.end) return a.pred.end < b.pred.end;
                     return a.label_index < b.label_index;
                   });
  std::vector<EntityPrediction> preds;
  preds.reserve(accepted.size());
  for (auto& c : accepted) preds.push_back(std::move(c.pred));
  if (cfg.dedupe_by_type) return filter_duplicates(preds);
  return preds;
}

std::vector<EntityPrediction> predict(const SpanScorer& model,
                                      std::span<const std::string> tokens,
                                      std::span<const std::string> labels,
                                      const DecodeConfig& cfg) {
  if (tokens.empty()) return {};
  const auto scored = score_spans(model, tokens, labels);
  return decode(scored.scores, scored.spans, scored.labels, cfg);
}

std::vector<corpus::GoldSpan> to_gold_spans(
    std::span<const EntityPrediction> preds) {
  std::vector<corpus::GoldSpan> spans;
  for (const auto& p : preds) {
    if (auto type = corpus::parse_entity_type(p.entity_type)) {
      spans.push_back({*type, p.start, p.end});
    }
  }
  return spans;
}

void save_checkpoint(const std::filesystem::path& path,
                     const SpanScorer& model, const CheckpointInfo& info) {
  checkpoint::write(path, "span_scorer",
                    {{"config", config_to_json(model.config())},
                     {"meta",
                      {{"dev_metric", info.dev_metric},
                       {"epoch", info.epoch},
                       {"phase", info.phase}}},
                     {"tensors", checkpoint::tensors_to_json(model.params())}});
}

SpanScorer load_checkpoint(const std::filesystem::path& path,
                           CheckpointInfo* info) {
  const auto body = checkpoint::read(path, "span_scorer");
  if (!body.contains("config") || !body.contains("tensors")) {
    throw CheckpointMismatch(path.string() + " lacks config or tensors");
  }
  if (info != nullptr && body.contains("meta")) {
    const auto& meta = body.at("meta");
    info->dev_metric = meta.value("dev_metric", 0.0);
    info->epoch = meta.value("epoch", 0);
    info->phase = meta.value("phase", 0);
  }
  return SpanScorer(config_from_json(body.at("config")),
                    checkpoint::tensors_from_json(body.at("tensors")));
}

SpanScorer load_checkpoint(const std::filesystem::path& path,
                           const SpanScorerConfig& expected) {
  SpanScorer model = load_checkpoint(path);
  if (!(model.config() == expected)) {
    throw CheckpointMismatch(path.string() +
                             " was saved with a different model configuration");
  }
  return model;
}

}  // namespace legallens::span_ner
