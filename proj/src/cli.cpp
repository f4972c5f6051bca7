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

#include "legallens/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "legallens/augment.hpp"
#include "legallens/config.hpp"
#include "legallens/corpus.hpp"
#include "legallens/errors.hpp"
#include "legallens/metrics.hpp"
#include "legallens/nli.hpp"
#include "legallens/span_ner.hpp"
#include "legallens/trainer.hpp"

namespace legallens::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Flag values shared by several subcommands.
struct Options {
  std::string ner_path;
  std::string nli_path;
  std::string format;
  std::string out_path;
  std::string config_path;
  std::string log_path;
  std::string model_path;
  std::string models_dir;
  std::string input_path;
  std::string train_path;
  std::string dev_path;
  std::string data_path;
  std::string prompts_dir;
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<int> augment_factor;
  std::optional<int> max_in_flight;
  bool no_dedupe = false;
  bool no_flat = false;
  bool mock = false;
  bool as_json = false;
  bool parallel = false;
};

// Destination for results: the --out file when given, `fallback` otherwise.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
      return;
    }
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    file_ = std::make_unique<std::ofstream>(p);
    if (!*file_) throw UsageError("cannot write " + path);
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

corpus::FileFormat file_format(const Options& o, const fs::path& path) {
  if (o.format.empty()) return corpus::guess_format(path);
  auto f = corpus::parse_file_format(o.format);
  if (!f) throw UsageError("--format must be jsonl or csv");
  return *f;
}

std::vector<corpus::NerExample> load_ner(const Options& o,
                                         const std::string& path) {
  return corpus::parse_ner_dataset(path, file_format(o, path));
}

std::vector<corpus::NliRecord> load_nli(const Options& o,
                                        const std::string& path) {
  return corpus::parse_nli_dataset(path, file_format(o, path));
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

span_ner::DecodeConfig decode_config(const Options& o,
                                     span_ner::DecodeConfig base) {
  if (o.threshold) base.threshold = *o.threshold;
  if (o.no_dedupe) base.dedupe_by_type = false;
  if (o.no_flat) base.flat_spans = false;
  return base;
}

config::RunConfig run_config(const Options& o, trainer::Task task) {
  auto cfg = config::defaults(task);
  if (!o.config_path.empty()) cfg = config::load_config(o.config_path, cfg);
  if (o.seed) cfg.trainer.seed = *o.seed;
  if (!o.variant.empty()) {
    auto v = span_ner::parse_variant(o.variant);
    if (!v) throw UsageError("--variant must be unified, bi or poly");
    cfg.span_ner.variant = *v;
  }
  if (o.augment_factor) cfg.augment.factor = *o.augment_factor;
  if (o.max_in_flight) cfg.augment.max_in_flight = *o.max_in_flight;
  cfg.decode = decode_config(o, cfg.decode);
  return cfg;
}

std::string join_tokens(std::span<const std::string> tokens, std::size_t start,
                        std::size_t end) {
  std::string text;
  for (std::size_t i = start; i <= end && i < tokens.size(); ++i) {
    if (i > start) text += ' ';
    text += tokens[i];
  }
  return text;
}

// Inference inputs only need an id and text; gold fields are ignored.
struct InferNer {
  std::string id;
  std::vector<std::string> tokens;
};

struct InferNli {
  std::string id;
  std::string premise;
  std::string hypothesis;
};

template <typename Record, typename Build>
std::vector<Record> read_json_lines(const std::string& path, Build build) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Record> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json object = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (object.is_discarded() || !object.is_object()) {
      throw MalformedRecord(number, "not a JSON object");
    }
    try {
      records.push_back(build(object, number));
    } catch (const json::exception& e) {
      throw MalformedRecord(number, e.what());
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(number, e.what());
    }
  }
  return records;
}

std::string record_id(const json& object, const std::string& fallback) {
  if (!object.contains("id")) return fallback;
  const auto& id = object.at("id");
  return id.is_string() ? id.get<std::string>() : id.dump();
}

std::vector<InferNer> read_infer_ner(const std::string& path) {
  return read_json_lines<InferNer>(path, [](const json& o, std::size_t line) {
    InferNer r{record_id(o, "ner-" + std::to_string(line)), {}};
    if (o.contains("tokens")) {
      r.tokens = o.at("tokens").get<std::vector<std::string>>();
    } else if (o.contains("text")) {
      r.tokens = corpus::split_words(o.at("text").get<std::string>());
    } else {
      throw MalformedRecord("record needs 'tokens' or 'text'");
    }
    return r;
  });
}

std::vector<InferNli> read_infer_nli(const std::string& path) {
  return read_json_lines<InferNli>(path, [](const json& o, std::size_t line) {
    return InferNli{record_id(o, "nli-" + std::to_string(line)),
                    o.at("premise").get<std::string>(),
                    o.at("hypothesis").get<std::string>()};
  });
}

std::string percent_line(double v) { return metrics::percent(v); }

// ---------------------------------------------------------------------------
// Commands

int cmd_validate(const Options& o, std::ostream& out) {
  if (o.ner_path.empty() == o.nli_path.empty()) {
    throw UsageError("give exactly one of --ner or --nli");
  }
  if (!o.ner_path.empty()) {
    const auto examples = load_ner(o, o.ner_path);
    std::size_t spans = 0;
    for (const auto& e : examples) spans += e.entities.size();
    out << "ok: " << examples.size() << " NER examples, " << spans
        << " entities\n";
  } else {
    const auto records = load_nli(o, o.nli_path);
    out << "ok: " << records.size() << " NLI records\n";
  }
  return kOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
  if (o.ner_path.empty() == o.nli_path.empty()) {
    throw UsageError("give exactly one of --ner or --nli");
  }
  Output dest(o.out_path, out);
  if (!o.ner_path.empty()) {
    const auto stats = corpus::entity_word_stats(load_ner(o, o.ner_path));
    if (o.as_json) {
      *dest << metrics::word_stats_json(stats).dump() << '\n';
    } else {
      metrics::print_word_stats(*dest, stats);
    }
    return kOk;
  }
  const auto records = load_nli(o, o.nli_path);
  std::map<corpus::Domain, std::array<std::size_t, 3>> counts;
  for (const auto& r : records) ++counts[r.domain][corpus::index_of(r.label)];
  if (o.as_json) {
    json per_domain = json::object();
    for (const auto& [d, c] : counts) {
      json row = json::object();
      for (auto label : corpus::kNliLabels) {
        row[std::string(corpus::label_name(label))] = c[corpus::index_of(label)];
      }
      per_domain[std::string(corpus::domain_name(d))] = row;
    }
    *dest << json{{"table", "nli_label_counts"}, {"per_domain", per_domain}}
                 .dump()
          << '\n';
    return kOk;
  }
  *dest << std::left << std::setw(21) << "Domain" << std::right;
  for (auto label : corpus::kNliLabels) {
    *dest << std::setw(12) << corpus::label_name(label);
  }
  *dest << '\n';
  for (const auto& [d, c] : counts) {
    *dest << std::left << std::setw(21) << corpus::domain_title(d)
          << std::right;
    for (auto n : c) *dest << std::setw(12) << n;
    *dest << '\n';
  }
  return kOk;
}

int cmd_augment(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.ner_path.empty() == o.nli_path.empty()) {
    throw UsageError("give exactly one of --ner or --nli");
  }
  const auto cfg = run_config(o, trainer::Task::kNli);
  if (cfg.augment.factor != 1 && cfg.augment.factor != 2) {
    throw UsageError("--augment-factor must be 1 or 2");
  }
  const auto prompts = o.prompts_dir.empty()
                           ? augment::PromptSet{}
                           : augment::PromptSet::from_directory(o.prompts_dir);
  auto settings = cfg.augment.client_settings();
  std::unique_ptr<augment::ChatClient> client;
  if (o.mock) {
    client = std::make_unique<augment::MockChatClient>(settings);
  } else {
    client = std::make_unique<augment::HttpChatClient>(
        augment::HttpChatClient::from_environment(settings));
  }
  const std::uint64_t seed = cfg.trainer.seed.value_or(0);
  Output dest(o.out_path, out);

  if (!o.nli_path.empty()) {
    const auto records = load_nli(o, o.nli_path);
    const auto augmented = augment::augment_nli(
        records, *client, {cfg.augment.factor, seed, cfg.augment.max_in_flight},
        prompts);
    corpus::write_nli(*dest, augmented);
    err << "augmented " << records.size() << " NLI records to "
        << augmented.size() << '\n';
    return kOk;
  }

  const auto pool = load_ner(o, o.ner_path);
  std::vector<corpus::NerExample> output = pool;
  const std::size_t wanted =
      pool.size() * static_cast<std::size_t>(cfg.augment.factor);
  for (std::size_t i = 0; i < wanted; ++i) {
    augment::SynthesisOptions synth;
    synth.seed = seed * 1000003u + i;
    auto example = augment::synthesize_ner(pool, *client, synth, prompts);
    example.id = "synth-" + std::to_string(i);
    output.push_back(std::move(example));
  }
  corpus::write_ner(*dest, output);
  err << "synthesized " << wanted << " NER examples from a pool of "
      << pool.size() << '\n';
  return kOk;
}

trainer::LogSink log_sink(std::ostream& stream) {
  return [&stream](const trainer::EvalLogEntry& e) {
    stream << e.to_json_line() << '\n' << std::flush;
  };
}

int cmd_train_ner(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.train_path, "--train");
  require(o.dev_path, "--dev");
  require(o.out_path, "--out");
  auto cfg = run_config(o, trainer::Task::kNer);
  cfg.trainer.task = trainer::Task::kNer;
  cfg.trainer.validate();
  cfg.span_ner.validate();
  const auto train = load_ner(o, o.train_path);
  const auto dev = load_ner(o, o.dev_path);

  span_ner::SpanScorer model(cfg.span_ner, *cfg.trainer.seed);
  trainer::NerTask task(model, train, dev, cfg.trainer.focal, cfg.decode);
  Output log(o.log_path, out);
  const auto best = trainer::train_two_phase(task, cfg.trainer, log_sink(*log));

  const fs::path path(o.out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  span_ner::save_checkpoint(path, model,
                            {best.dev_metric, best.epoch, best.phase});
  err << "best dev micro-F1 " << percent_line(best.dev_metric) << " (phase "
      << best.phase << ", epoch " << best.epoch << "), saved " << o.out_path
      << '\n';
  return kOk;
}

int cmd_train_nli(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.data_path, "--data");
  require(o.out_path, "--out");
  auto cfg = run_config(o, trainer::Task::kNli);
  cfg.trainer.task = trainer::Task::kNli;
  cfg.trainer.validate();
  cfg.nli.validate();
  const auto records = load_nli(o, o.data_path);
  const auto splits = nli::loo_splits(records);

  Output log(o.log_path, out);
  const auto results = trainer::run_loo_training(
      splits, cfg.trainer, cfg.nli, log_sink(*log), o.parallel);

  fs::create_directories(o.out_path);
  std::map<corpus::Domain, double> scores;
  for (const auto& r : results) {
    nli::save_checkpoint(
        fs::path(o.out_path) / nli::checkpoint_filename(r.model.held_out_domain),
        r.model,
        {r.checkpoint.dev_metric, r.checkpoint.epoch, r.checkpoint.phase});
    scores[r.model.held_out_domain] = r.held_out_f1;
  }
  metrics::print_domain_table(err, scores);
  return kOk;
}

int cmd_eval_ner(const Options& o, std::ostream& out) {
  require(o.model_path, "--model");
  require(o.data_path, "--data");
  const auto model = span_ner::load_checkpoint(o.model_path);
  const auto decode = decode_config(o, config::defaults(trainer::Task::kNer).decode);
  const auto examples = load_ner(o, o.data_path);
  const auto labels = span_ner::default_labels();
  metrics::SpansById gold, pred;
  for (const auto& ex : examples) {
    gold.emplace_back(ex.id, ex.entities);
    pred.emplace_back(ex.id, span_ner::to_gold_spans(span_ner::predict(
                                 model, ex.tokens, labels, decode)));
  }
  const auto scores = metrics::entity_prf(gold, pred);
  Output dest(o.out_path, out);
  if (o.as_json) {
    *dest << metrics::entity_table_json(scores).dump() << '\n';
  } else {
    metrics::print_entity_table(*dest, scores);
  }
  return kOk;
}

int cmd_eval_nli(const Options& o, std::ostream& out) {
  require(o.models_dir, "--models");
  require(o.data_path, "--data");
  const auto models = nli::load_ensemble(o.models_dir);
  const auto records = load_nli(o, o.data_path);

  std::map<corpus::Domain, double> domain_f1;
  for (const auto& m : models) {
    std::vector<corpus::NliRecord> held_out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(held_out),
                 [&](const auto& r) { return r.domain == m.held_out_domain; });
    if (!held_out.empty()) {
      domain_f1[m.held_out_domain] = trainer::evaluate_held_out(m, held_out);
    }
  }
  std::vector<corpus::NliLabel> gold, pred;
  for (const auto& r : records) {
    gold.push_back(r.label);
    pred.push_back(nli::ensemble_predict(models, r).prediction.label);
  }
  const auto cm = metrics::confusion_matrix(gold, pred);

  Output dest(o.out_path, out);
  if (o.as_json) {
    *dest << metrics::domain_table_json(domain_f1).dump() << '\n'
          << metrics::confusion_matrix_json(cm).dump() << '\n';
    return kOk;
  }
  metrics::print_domain_table(*dest, domain_f1);
  *dest << "\nEnsemble over all records (macro-F1 "
        << metrics::percent(metrics::class_macro_f1(cm)) << ")\n";
  metrics::print_confusion_matrix(*dest, cm);
  const auto errors = metrics::error_classes(cm);
  *dest << "errors: first " << errors.first << ", second " << errors.second
        << ", third " << errors.third << '\n';
  return kOk;
}

int cmd_infer_ner(const Options& o, std::ostream& out) {
  require(o.model_path, "--model");
  require(o.input_path, "--input");
  const auto model = span_ner::load_checkpoint(o.model_path);
  const auto decode = decode_config(o, config::defaults(trainer::Task::kNer).decode);
  const auto inputs = read_infer_ner(o.input_path);
  const auto labels = span_ner::default_labels();
  Output dest(o.out_path, out);
  for (const auto& r : inputs) {
    json entities = json::array();
    if (!r.tokens.empty()) {
      for (const auto& p : span_ner::predict(model, r.tokens, labels, decode)) {
        entities.push_back({{"type", p.entity_type},
                            {"start", p.start},
                            {"end", p.end},
                            {"text", join_tokens(r.tokens, p.start, p.end)},
                            {"confidence", p.confidence}});
      }
    }
    *dest << json{{"id", r.id}, {"entities", entities}}.dump() << '\n';
  }
  return kOk;
}

int cmd_infer_nli(const Options& o, std::ostream& out) {
  require(o.models_dir, "--models");
  require(o.input_path, "--input");
  const auto models = nli::load_ensemble(o.models_dir);
  const auto inputs = read_infer_nli(o.input_path);
  Output dest(o.out_path, out);
  for (const auto& r : inputs) {
    corpus::NliRecord record{r.id, r.premise, r.hypothesis,
                             corpus::NliLabel::kNeutral,
                             corpus::Domain::kConsumerProtection,
                             std::nullopt};
    const auto result = nli::ensemble_predict(models, record);
    const auto& p = result.prediction;
    json distribution = json::object();
    for (auto label : corpus::kNliLabels) {
      distribution[std::string(corpus::label_name(label))] =
          p.distribution[corpus::index_of(label)];
    }
    *dest << json{{"premise_id", r.id},
                  {"label", corpus::label_name(p.label)},
                  {"confidence", p.confidence},
                  {"distribution", distribution},
                  {"source_model", corpus::domain_name(result.source_model)}}
                 .dump()
          << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Legal violation extraction and matching pipeline",
               "legallens"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Input format (jsonl or csv)")
        ->check(CLI::IsMember({"jsonl", "csv"}));
  };
  auto add_decode = [&](CLI::App* sub) {
    sub->add_option("--threshold", o.threshold,
                    "Minimum span score to keep (default 0.8)")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--no-dedupe", o.no_dedupe,
                  "Keep several predictions of the same type");
    sub->add_flag("--no-flat", o.no_flat, "Allow overlapping predictions");
  };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "INI run configuration")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Random seed (overrides the config)");
  };

  auto* validate = app.add_subcommand("validate", "Check a dataset file");
  validate->add_option("--ner", o.ner_path, "NER dataset")->check(CLI::ExistingFile);
  validate->add_option("--nli", o.nli_path, "NLI dataset")->check(CLI::ExistingFile);
  add_format(validate);

  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("--ner", o.ner_path, "NER dataset")->check(CLI::ExistingFile);
  stats->add_option("--nli", o.nli_path, "NLI dataset")->check(CLI::ExistingFile);
  stats->add_option("--out", o.out_path, "Write the table here");
  stats->add_flag("--json", o.as_json, "Machine-readable output");
  add_format(stats);

  auto* augment_cmd = app.add_subcommand("augment", "Paraphrase or synthesize data");
  augment_cmd->add_option("--ner", o.ner_path, "NER pool to synthesize from")
      ->check(CLI::ExistingFile);
  augment_cmd->add_option("--nli", o.nli_path, "NLI records to paraphrase")
      ->check(CLI::ExistingFile);
  augment_cmd->add_option("--out", o.out_path, "Output JSONL file");
  augment_cmd->add_option("--augment-factor", o.augment_factor,
                          "Generated copies per record (1 or 2)")
      ->check(CLI::IsMember({1, 2}));
  augment_cmd->add_option("--max-in-flight", o.max_in_flight,
                          "Concurrent client requests")
      ->check(CLI::PositiveNumber);
  augment_cmd->add_option("--prompts", o.prompts_dir, "Prompt template directory")
      ->check(CLI::ExistingDirectory);
  augment_cmd->add_flag("--mock", o.mock, "Use the offline deterministic client");
  add_config(augment_cmd);
  add_format(augment_cmd);

  auto* train_ner = app.add_subcommand("train-ner", "Train a span NER model");
  train_ner->add_option("--train", o.train_path, "Training set")->check(CLI::ExistingFile);
  train_ner->add_option("--dev", o.dev_path, "Dev set for model selection")
      ->check(CLI::ExistingFile);
  train_ner->add_option("--out", o.out_path, "Checkpoint path");
  train_ner->add_option("--log", o.log_path, "Training log (JSONL)");
  train_ner->add_option("--variant", o.variant, "unified, bi or poly");
  add_config(train_ner);
  add_decode(train_ner);
  add_format(train_ner);

  auto* train_nli = app.add_subcommand("train-nli",
                                       "Train four leave-one-domain-out NLI models");
  train_nli->add_option("--data", o.data_path, "NLI records of all four domains")
      ->check(CLI::ExistingFile);
  train_nli->add_option("--out", o.out_path, "Checkpoint directory");
  train_nli->add_option("--log", o.log_path, "Training log (JSONL)");
  train_nli->add_flag("--parallel", o.parallel, "Train the four models concurrently");
  add_config(train_nli);
  add_format(train_nli);

  auto* eval_ner = app.add_subcommand("eval-ner", "Entity-level P/R/F1");
  eval_ner->add_option("--model", o.model_path, "Checkpoint")->check(CLI::ExistingFile);
  eval_ner->add_option("--data", o.data_path, "Gold NER data")->check(CLI::ExistingFile);
  eval_ner->add_option("--out", o.out_path, "Write the table here");
  eval_ner->add_flag("--json", o.as_json, "Machine-readable output");
  add_decode(eval_ner);
  add_format(eval_ner);

  auto* eval_nli = app.add_subcommand("eval-nli",
                                      "Held-out domain F1 and ensemble confusion matrix");
  eval_nli->add_option("--models", o.models_dir, "Checkpoint directory")
      ->check(CLI::ExistingDirectory);
  eval_nli->add_option("--data", o.data_path, "Gold NLI data")->check(CLI::ExistingFile);
  eval_nli->add_option("--out", o.out_path, "Write the tables here");
  eval_nli->add_flag("--json", o.as_json, "Machine-readable output");
  add_format(eval_nli);

  auto* infer_ner = app.add_subcommand("infer-ner", "Predict entities");
  infer_ner->add_option("--model", o.model_path, "Checkpoint")->check(CLI::ExistingFile);
  infer_ner->add_option("--input", o.input_path, "JSONL with tokens or text")
      ->check(CLI::ExistingFile);
  infer_ner->add_option("--out", o.out_path, "Prediction file");
  add_decode(infer_ner);

  auto* infer_nli = app.add_subcommand("infer-nli", "Ensemble NLI predictions");
  infer_nli->add_option("--models", o.models_dir, "Checkpoint directory")
      ->check(CLI::ExistingDirectory);
  infer_nli->add_option("--input", o.input_path, "JSONL with premise and hypothesis")
      ->check(CLI::ExistingFile);
  infer_nli->add_option("--out", o.out_path, "Prediction file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (stats->parsed()) return cmd_stats(o, out);
    if (augment_cmd->parsed()) return cmd_augment(o, out, err);
    if (train_ner->parsed()) return cmd_train_ner(o, out, err);
    if (train_nli->parsed()) return cmd_train_nli(o, out, err);
    if (eval_ner->parsed()) return cmd_eval_ner(o, out);
    if (eval_nli->parsed()) return cmd_eval_nli(o, out);
    if (infer_ner->parsed()) return cmd_infer_ner(o, out);
    if (infer_nli->parsed()) return cmd_infer_nli(o, out);
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace legallens::cli
