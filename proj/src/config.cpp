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

#include "legallens/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "legallens/errors.hpp"

namespace legallens::config {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw UsageError("config key '" + key + "': expected " + expected +
                   ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || value.empty()) {
    bad_value(key, value, "a number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  bad_value(key, value, "a boolean");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string& key,
                                  const std::string& value)>;

// Builds the "section.key" -> setter table.
std::map<std::string, Setter> setters() {
  std::map<std::string, Setter> s;
  auto integer = [](auto member) {
    return [member](RunConfig& c, const std::string& k, const std::string& v) {
      member(c) = parse_number<int>(k, v);
    };
  };
  auto real = [](auto member) {
    return [member](RunConfig& c, const std::string& k, const std::string& v) {
      member(c) = parse_number<double>(k, v);
    };
  };
  auto boolean = [](auto member) {
    return [member](RunConfig& c, const std::string& k, const std::string& v) {
      member(c) = parse_bool(k, v);
    };
  };

  // trainer
  s["trainer.batch_size"] = integer([](RunConfig& c) -> int& { return c.trainer.batch_size; });
  s["trainer.backbone_lr"] = real([](RunConfig& c) -> double& { return c.trainer.backbone_lr; });
  s["trainer.head_lr"] = real([](RunConfig& c) -> double& { return c.trainer.head_lr; });
  s["trainer.nli_lr"] = real([](RunConfig& c) -> double& { return c.trainer.nli_lr; });
  s["trainer.phase2_lr"] = real([](RunConfig& c) -> double& { return c.trainer.phase2_lr; });
  s["trainer.max_epochs_phase1"] = integer([](RunConfig& c) -> int& { return c.trainer.max_epochs_phase1; });
  s["trainer.max_epochs_phase2"] = integer([](RunConfig& c) -> int& { return c.trainer.max_epochs_phase2; });
  s["trainer.warmup_fraction"] = real([](RunConfig& c) -> double& { return c.trainer.warmup_fraction; });
  s["trainer.patience"] = integer([](RunConfig& c) -> int& { return c.trainer.patience; });
  s["trainer.weight_decay"] = real([](RunConfig& c) -> double& { return c.trainer.weight_decay; });
  s["trainer.max_grad_norm"] = real([](RunConfig& c) -> double& { return c.trainer.max_grad_norm; });
  s["trainer.scheduler"] = [](RunConfig& c, const std::string& k,
                              const std::string& v) {
    auto parsed = trainer::parse_schedule(v);
    if (!parsed) bad_value(k, v, "warmup_linear or cosine");
    c.trainer.scheduler = *parsed;
  };
  s["trainer.seed"] = [](RunConfig& c, const std::string& k,
                         const std::string& v) {
    c.trainer.seed = parse_number<std::uint64_t>(k, v);
  };

  // focal
  s["focal.alpha"] = real([](RunConfig& c) -> double& { return c.trainer.focal.alpha; });
  s["focal.gamma"] = real([](RunConfig& c) -> double& { return c.trainer.focal.gamma; });

  // span_ner
  s["span_ner.variant"] = [](RunConfig& c, const std::string& k,
                             const std::string& v) {
    auto parsed = span_ner::parse_variant(v);
    if (!parsed) bad_value(k, v, "unified, bi or poly");
    c.span_ner.variant = *parsed;
  };
  s["span_ner.hidden_dim"] = integer([](RunConfig& c) -> int& { return c.span_ner.hidden_dim; });
  s["span_ner.num_layers"] = integer([](RunConfig& c) -> int& { return c.span_ner.num_layers; });
  s["span_ner.max_span_width"] = integer([](RunConfig& c) -> int& { return c.span_ner.max_span_width; });
  s["span_ner.dropout"] = real([](RunConfig& c) -> double& { return c.span_ner.dropout; });
  s["span_ner.vocab_hash_buckets"] = integer([](RunConfig& c) -> int& { return c.span_ner.vocab_hash_buckets; });

  // decode
  s["decode.threshold"] = real([](RunConfig& c) -> double& { return c.decode.threshold; });
  s["decode.flat_spans"] = boolean([](RunConfig& c) -> bool& { return c.decode.flat_spans; });
  s["decode.dedupe_by_type"] = boolean([](RunConfig& c) -> bool& { return c.decode.dedupe_by_type; });

  // nli
  s["nli.hidden_dim"] = integer([](RunConfig& c) -> int& { return c.nli.hidden_dim; });
  s["nli.num_layers"] = integer([](RunConfig& c) -> int& { return c.nli.num_layers; });
  s["nli.dropout"] = real([](RunConfig& c) -> double& { return c.nli.dropout; });
  s["nli.vocab_hash_buckets"] = integer([](RunConfig& c) -> int& { return c.nli.vocab_hash_buckets; });
  s["nli.max_seq_len"] = integer([](RunConfig& c) -> int& { return c.nli.max_seq_len; });

  // augment
  s["augment.factor"] = integer([](RunConfig& c) -> int& { return c.augment.factor; });
  s["augment.max_in_flight"] = integer([](RunConfig& c) -> int& { return c.augment.max_in_flight; });
  s["augment.model_name"] = [](RunConfig& c, const std::string&,
                               const std::string& v) {
    c.augment.model_name = v;
  };
  s["augment.temperature"] = real([](RunConfig& c) -> double& { return c.augment.temperature; });
  s["augment.max_output_tokens"] = integer([](RunConfig& c) -> int& { return c.augment.max_output_tokens; });
  s["augment.timeout_seconds"] = integer([](RunConfig& c) -> int& { return c.augment.timeout_seconds; });
  s["augment.max_retries"] = integer([](RunConfig& c) -> int& { return c.augment.max_retries; });
  return s;
}

}  // namespace

augment::ClientSettings AugmentSection::client_settings() const {
  augment::ClientSettings s;
  s.model_name = model_name;
  s.temperature = temperature;
  s.max_output_tokens = max_output_tokens;
  s.timeout = std::chrono::seconds(timeout_seconds);
  s.retry.max_retries = max_retries;
  return s;
}

RunConfig defaults(trainer::Task task) {
  RunConfig c;
  c.trainer = task == trainer::Task::kNer ? trainer::TrainConfig::ner_defaults()
                                          : trainer::TrainConfig::nli_defaults();
  return c;
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  static const auto table = setters();
  bool saw_version = false;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      if (name != "version") {
        throw UsageError("config: key '" + name + "' outside any section");
      }
      const auto v = node.get_value<std::string>();
      if (parse_number<int>("version", v) != kConfigVersion) {
        throw UsageError("config: unsupported version " + v);
      }
      saw_version = true;
      continue;
    }
    for (const auto& [key, leaf] : node) {
      const std::string full = name + "." + key;
      auto it = table.find(full);
      if (it == table.end()) {
        throw UsageError("config: unknown key '" + full + "'");
      }
      it->second(base, full, leaf.get_value<std::string>());
    }
  }
  if (!saw_version) throw UsageError("config: missing 'version = 1'");
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

void write_config(std::ostream& out, const RunConfig& c) {
  const auto& t = c.trainer;
  out << "version = " << kConfigVersion << "\n\n[trainer]\n"
      << "batch_size = " << t.batch_size << '\n'
      << "backbone_lr = " << format_double(t.backbone_lr) << '\n'
      << "head_lr = " << format_double(t.head_lr) << '\n'
      << "nli_lr = " << format_double(t.nli_lr) << '\n'
      << "phase2_lr = " << format_double(t.phase2_lr) << '\n'
      << "max_epochs_phase1 = " << t.max_epochs_phase1 << '\n'
      << "max_epochs_phase2 = " << t.max_epochs_phase2 << '\n'
      << "warmup_fraction = " << format_double(t.warmup_fraction) << '\n'
      << "scheduler = " << trainer::schedule_name(t.scheduler) << '\n'
      << "patience = " << t.patience << '\n';
  if (t.seed) out << "seed = " << *t.seed << '\n';
  out << "weight_decay = " << format_double(t.weight_decay) << '\n'
      << "max_grad_norm = " << format_double(t.max_grad_norm) << "\n\n"
      << "[focal]\n"
      << "alpha = " << format_double(t.focal.alpha) << '\n'
      << "gamma = " << format_double(t.focal.gamma) << "\n\n"
      << "[span_ner]\n"
      << "variant = " << span_ner::variant_name(c.span_ner.variant) << '\n'
      << "hidden_dim = " << c.span_ner.hidden_dim << '\n'
      << "num_layers = " << c.span_ner.num_layers << '\n'
      << "max_span_width = " << c.span_ner.max_span_width << '\n'
      << "dropout = " << format_double(c.span_ner.dropout) << '\n'
      << "vocab_hash_buckets = " << c.span_ner.vocab_hash_buckets << "\n\n"
      << "[decode]\n"
      << "threshold = " << format_double(c.decode.threshold) << '\n'
      << "flat_spans = " << (c.decode.flat_spans ? "true" : "false") << '\n'
      << "dedupe_by_type = " << (c.decode.dedupe_by_type ? "true" : "false")
      << "\n\n[nli]\n"
      << "hidden_dim = " << c.nli.hidden_dim << '\n'
      << "num_layers = " << c.nli.num_layers << '\n'
      << "dropout = " << format_double(c.nli.dropout) << '\n'
      << "vocab_hash_buckets = " << c.nli.vocab_hash_buckets << '\n'
      << "max_seq_len = " << c.nli.max_seq_len << "\n\n"
      << "[augment]\n"
      << "factor = " << c.augment.factor << '\n'
      << "max_in_flight = " << c.augment.max_in_flight << '\n'
      << "model_name = " << c.augment.model_name << '\n'
      << "temperature = " << format_double(c.augment.temperature) << '\n'
      << "max_output_tokens = " << c.augment.max_output_tokens << '\n'
      << "timeout_seconds = " << c.augment.timeout_seconds << '\n'
      << "max_retries = " << c.augment.max_retries << '\n';
}

}  // namespace legallens::config
