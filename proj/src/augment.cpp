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

#include "legallens/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "legallens/errors.hpp"

namespace legallens::augment {

using corpus::NerExample;
using corpus::NliRecord;
using nlohmann::json;

namespace {

constexpr std::string_view kQuotes = "\"\"\"";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

std::uint64_t hash_text(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool identifier_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Walks the template, calling `on_text` for literal runs and `on_name` for
// placeholders.
template <typename Text, typename Name>
void scan_template(std::string_view text, Text on_text, Name on_name) {
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if ((c == '{' || c == '}') && i + 1 < text.size() && text[i + 1] == c) {
      on_text(std::string_view(&text[i], 1));
      i += 2;
      continue;
    }
    if (c == '{' && i + 1 < text.size() && identifier_start(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < text.size() && identifier_char(text[j])) ++j;
      if (j < text.size() && text[j] == '}') {
        on_name(text.substr(i + 1, j - i - 1));
        i = j + 1;
        continue;
      }
    }
    on_text(std::string_view(&text[i], 1));
    ++i;
  }
}

std::string ner_example_json(const NerExample& example) {
  return json{{"tokens", example.tokens},
              {"ner_tags", corpus::spans_to_bio(example.tokens.size(),
                                                example.entities)}}
      .dump();
}

void default_sleep(std::chrono::milliseconds delay) {
  std::this_thread::sleep_for(delay);
}

}  // namespace

// ---------------------------------------------------------------------------
// Prompts

std::string render_prompt(const PromptTemplate& prompt,
                          const Bindings& bindings) {
  std::string out;
  scan_template(
      prompt.text, [&](std::string_view s) { out += s; },
      [&](std::string_view name) {
        auto it = bindings.find(name);
        if (it == bindings.end()) {
          throw UnboundPlaceholder("template '" + prompt.name +
                                   "' has no binding for '{" +
                                   std::string(name) + "}'");
        }
        out += it->second;
      });
  return out;
}

std::vector<std::string> placeholders(const PromptTemplate& prompt) {
  std::vector<std::string> names;
  scan_template(
      prompt.text, [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
          names.emplace_back(name);
        }
      });
  return names;
}

PromptTemplate default_template(std::string_view name) {
  if (name == kPremisePrompt) {
    return {std::string(name),
            "You rewrite summaries of resolved class-action lawsuits.\n"
            "Paraphrase the summary below. Keep every party, product, date, "
            "amount and legal claim, and do not add information.\n"
            "Answer with the paraphrase only.\n\n"
            "Summary:\n\"\"\"{text}\"\"\"\n"};
  }
  if (name == kHypothesisPrompt) {
    return {std::string(name),
            "You rewrite short first-person complaints about possible legal "
            "violations.\n"
            "Paraphrase the complaint below in the same voice. Keep what "
            "happened and who did it, and do not add information.\n"
            "Answer with the paraphrase only.\n\n"
            "Complaint:\n\"\"\"{text}\"\"\"\n"};
  }
  if (name == kNerFewshot) {
    return {std::string(name),
            "You annotate text about legal violations with four entity "
            "types:\n"
            "LAW (the law or statute), VIOLATED_BY (the party responsible), "
            "VIOLATED_ON (the party harmed) and VIOLATION (what happened).\n"
            "Each example is a JSON object with \"tokens\" and BIO "
            "\"ner_tags\" of equal length.\n\n"
            "{examples}\n\n"
            "Write one new example in the same format on a single line. "
            "Answer with the JSON object only.\n"};
  }
  throw UsageError("unknown prompt template '" + std::string(name) + "'");
}

PromptTemplate load_template(const std::filesystem::path& path,
                             std::string name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prompt template " + path.string());
  std::string line, text;
  bool header = true;
  while (std::getline(in, line)) {
    if (header && !line.empty() && line.front() == '#') continue;
    header = false;
    text += line;
    text += '\n';
  }
  return {std::move(name), std::move(text)};
}

PromptSet PromptSet::from_directory(const std::filesystem::path& dir) {
  PromptSet set;
  auto load = [&](PromptTemplate& slot, std::string_view name) {
    const auto file = dir / (std::string(name) + ".txt");
    if (std::filesystem::exists(file)) {
      slot = load_template(file, std::string(name));
    }
  };
  load(set.premise, kPremisePrompt);
  load(set.hypothesis, kHypothesisPrompt);
  load(set.ner_fewshot, kNerFewshot);
  return set;
}

// ---------------------------------------------------------------------------
// Clients

ChatClient::ChatClient(ClientSettings settings)
    : settings_(std::move(settings)) {
  if (!settings_.retry.sleep) settings_.retry.sleep = default_sleep;
  if (settings_.temperature < 0.0) {
    throw UsageError("temperature must be >= 0");
  }
  if (settings_.max_output_tokens < 1) {
    throw UsageError("max_output_tokens must be positive");
  }
  if (settings_.retry.max_retries < 0) {
    throw UsageError("max_retries must be >= 0");
  }
}

CompletionRequest ChatClient::request(std::string_view prompt,
                                      std::uint64_t seed) const {
  return {settings_.model_name, std::string(prompt), settings_.temperature,
          settings_.max_output_tokens, seed};
}

std::string ChatClient::complete(std::string_view prompt,
                                 std::uint64_t seed) const {
  const auto req = request(prompt, seed);
  const auto& retry = settings_.retry;
  auto delay = retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return complete_once(req);
    } catch (const TransientClientError& e) {
      if (attempt >= retry.max_retries) {
        throw ClientError("giving up after " + std::to_string(attempt + 1) +
                          " attempts: " + e.what());
      }
    }
    retry.sleep(delay);
    delay = std::chrono::milliseconds(static_cast<long long>(
        static_cast<double>(delay.count()) * retry.backoff_multiplier));
  }
}

std::string request_body(const CompletionRequest& request) {
  return json{{"model_name", request.model_name},
              {"prompt", request.prompt},
              {"temperature", request.temperature},
              {"max_output_tokens", request.max_output_tokens}}
      .dump();
}

std::string response_text(std::string_view body) {
  json parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw ClientError("response is not a JSON object");
  }
  auto it = parsed.find("text");
  if (it == parsed.end() || !it->is_string()) {
    throw ClientError("response has no string field 'text'");
  }
  return it->get<std::string>();
}

HttpChatClient::HttpChatClient(ClientSettings settings, std::string api_key)
    : ChatClient(std::move(settings)), api_key_(std::move(api_key)) {
  static const std::regex url(R"(^(http)://([^/\s]+)(/\S*)?$)");
  std::smatch m;
  const std::string& endpoint = this->settings().endpoint;
  if (!std::regex_match(endpoint, m, url)) {
    throw UsageError("endpoint must be an http:// URL, got '" + endpoint +
                     "'");
  }
  scheme_host_port_ = m[1].str() + "://" + m[2].str();
  path_ = m[3].matched ? m[3].str() : "/";
}

HttpChatClient HttpChatClient::from_environment(ClientSettings base) {
  const char* endpoint = std::getenv("LLM_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') {
    throw UsageError("LLM_ENDPOINT is not set (use --mock for offline runs)");
  }
  base.endpoint = endpoint;
  if (const char* model = std::getenv("LLM_MODEL"); model && *model) {
    base.model_name = model;
  }
  const char* key = std::getenv("LLM_API_KEY");
  return HttpChatClient(std::move(base), key ? key : "");
}

std::string HttpChatClient::complete_once(
    const CompletionRequest& request) const {
  httplib::Client client(scheme_host_port_);
  const auto timeout = settings().timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }
  auto res = client.Post(path_, headers, request_body(request),
                         "application/json");
  if (!res) {
    throw TransientClientError("request failed: " +
                               httplib::to_string(res.error()));
  }
  if (res->status == 408 || res->status == 429 || res->status >= 500) {
    throw TransientClientError("server answered " +
                               std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ClientError("server answered " + std::to_string(res->status) +
                      ": " + res->body.substr(0, 200));
  }
  return response_text(res->body);
}

std::vector<std::string> quoted_blocks(std::string_view prompt) {
  std::vector<std::string> blocks;
  std::size_t pos = 0;
  while (true) {
    const auto open = prompt.find(kQuotes, pos);
    if (open == std::string_view::npos) break;
    const auto start = open + kQuotes.size();
    const auto close = prompt.find(kQuotes, start);
    if (close == std::string_view::npos) break;
    blocks.emplace_back(prompt.substr(start, close - start));
    pos = close + kQuotes.size();
  }
  return blocks;
}

std::string last_quoted_block(std::string_view prompt) {
  auto blocks = quoted_blocks(prompt);
  return blocks.empty() ? std::string(prompt) : blocks.back();
}

std::string mock_paraphrase(std::string_view text, std::uint64_t seed) {
  static const std::map<std::string, std::string, std::less<>> swaps = {
      {"company", "firm"},         {"firm", "company"},
      {"customers", "clients"},    {"clients", "customers"},
      {"consumers", "customers"},  {"employees", "workers"},
      {"workers", "employees"},    {"alleged", "claimed"},
      {"alleges", "claims"},       {"claimed", "alleged"},
      {"violated", "breached"},    {"breached", "violated"},
      {"received", "got"},         {"got", "received"},
      {"calls", "phone calls"},    {"lawsuit", "suit"},
      {"suit", "lawsuit"},         {"wages", "pay"},
      {"purchased", "bought"},     {"bought", "purchased"},
      {"without", "lacking"},      {"consent", "permission"},
      {"permission", "consent"},   {"data", "information"},
      {"information", "data"},     {"settled", "resolved"},
      {"resolved", "settled"},     {"told", "informed"},
  };
  std::string out;
  std::size_t i = 0;
  std::uint64_t state = mix(seed, hash_text(text));
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      out += text[i++];
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    std::string word(text.substr(i, j - i));
    std::string lower = word;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    auto it = swaps.find(lower);
    state = splitmix64(state);
    if (it != swaps.end() && (state & 3u) != 0) {
      std::string repl = it->second;
      if (std::isupper(static_cast<unsigned char>(word[0]))) {
        repl[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(repl[0])));
      }
      out += repl;
    } else {
      out += word;
    }
    i = j;
  }
  return out;
}

MockChatClient::MockChatClient(ClientSettings settings, Responder responder)
    : ChatClient(std::move(settings)), responder_(std::move(responder)) {}

MockChatClient::MockChatClient(ClientSettings settings)
    : MockChatClient(std::move(settings),
                     [](std::string_view prompt, std::uint64_t seed) {
                       const auto blocks = quoted_blocks(prompt);
                       if (blocks.size() > 1) {
                         const auto pick =
                             mix(seed, hash_text(prompt)) % blocks.size();
                         return blocks[pick];
                       }
                       return mock_paraphrase(last_quoted_block(prompt), seed);
                     }) {}

MockChatClient MockChatClient::identity(ClientSettings settings) {
  return MockChatClient(std::move(settings),
                        [](std::string_view prompt, std::uint64_t) {
                          return last_quoted_block(prompt);
                        });
}

MockChatClient MockChatClient::fixed(std::string text,
                                     ClientSettings settings) {
  return MockChatClient(
      std::move(settings),
      [text = std::move(text)](std::string_view, std::uint64_t) {
        return text;
      });
}

MockChatClient MockChatClient::scripted(Responder responder,
                                        ClientSettings settings) {
  return MockChatClient(std::move(settings), std::move(responder));
}

std::string MockChatClient::complete_once(
    const CompletionRequest& request) const {
  return responder_(request.prompt, request.seed);
}

// ---------------------------------------------------------------------------
// Operations

NliRecord paraphrase_record(const NliRecord& record, const ChatClient& client,
                            const PromptSet& prompts, std::uint64_t seed,
                            int round) {
  corpus::validate(record);
  const std::uint64_t base = mix(mix(seed, hash_text(record.id)),
                                 static_cast<std::uint64_t>(round));
  auto generate = [&](const PromptTemplate& prompt, const std::string& text,
                      std::uint64_t salt) {
    std::string out = trim(client.complete(
        render_prompt(prompt, {{"text", text}}), mix(base, salt)));
    if (blank(out)) {
      throw EmptyGeneration("blank completion for '" + prompt.name +
                            "' on record '" + record.id + "'");
    }
    return out;
  };
  NliRecord out = record;
  out.id = record.id + "-para" + std::to_string(round);
  out.premise = generate(prompts.premise, record.premise, 1);
  out.hypothesis = generate(prompts.hypothesis, record.hypothesis, 2);
  out.provenance = corpus::Provenance{
      record.id, prompts.premise.name + "+" + prompts.hypothesis.name,
      client.settings().model_name};
  return out;
}

std::vector<NliRecord> augment_nli(std::span<const NliRecord> records,
                                   const ChatClient& client,
                                   const AugmentOptions& options,
                                   const PromptSet& prompts) {
  if (records.empty()) throw EmptyDataset("nothing to augment");
  if (options.factor != 1 && options.factor != 2) {
    throw UsageError("augment factor must be 1 or 2");
  }
  if (options.max_in_flight < 1) {
    throw UsageError("max_in_flight must be >= 1");
  }
  const std::size_t n = records.size();
  const std::size_t jobs = n * static_cast<std::size_t>(options.factor);
  std::vector<std::optional<NliRecord>> results(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      const std::size_t index = job % n;
      const int round = static_cast<int>(job / n) + 1;
      try {
        results[job] =
            paraphrase_record(records[index], client, prompts, options.seed,
                              round);
      } catch (...) {
        errors[job] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const auto threads = std::min<std::size_t>(
      static_cast<std::size_t>(options.max_in_flight), jobs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Report the failure of the earliest record so the error does not depend
  // on thread timing.
  for (std::size_t job = 0; job < jobs; ++job) {
    if (!errors[job]) continue;
    const std::size_t index = job % n;
    try {
      std::rethrow_exception(errors[job]);
    } catch (const ClientError& e) {
      throw RecordClientError(index, e.what());
    } catch (const EmptyGeneration& e) {
      throw EmptyGeneration("record " + std::to_string(index) + ": " +
                            e.what());
    }
  }

  std::vector<NliRecord> out(records.begin(), records.end());
  out.reserve(n + jobs);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

NerExample parse_generated_ner(std::string_view completion, std::string id) {
  const auto open = completion.find('{');
  const auto close = completion.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open) {
    throw GenerationInvalid("completion holds no JSON object");
  }
  json object = json::parse(completion.substr(open, close - open + 1),
                            nullptr, /*allow_exceptions=*/false);
  if (object.is_discarded() || !object.is_object()) {
    throw GenerationInvalid("completion is not valid JSON");
  }
  object["id"] = std::move(id);
  try {
    auto example = corpus::ner_from_json_line(object.dump());
    corpus::validate(example);
    if (example.tokens.empty()) throw GenerationInvalid("no tokens");
    return example;
  } catch (const DataError& e) {
    throw GenerationInvalid(std::string("generated record rejected: ") +
                            e.what());
  }
}

std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k,
                                                    std::uint64_t seed) {
  if (k > n) throw PoolTooSmall("cannot draw " + std::to_string(k) +
                                " examples from a pool of " +
                                std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t state = splitmix64(seed);
  for (std::size_t i = 0; i < k; ++i) {
    state = splitmix64(state);
    const std::size_t j = i + static_cast<std::size_t>(state % (n - i));
    std::swap(order[i], order[j]);
  }
  order.resize(k);
  return order;
}

NerExample synthesize_ner(std::span<const NerExample> pool,
                          const ChatClient& client,
                          const SynthesisOptions& options,
                          const PromptSet& prompts) {
  if (options.k == 0) throw UsageError("k must be positive");
  if (pool.size() < options.k) {
    throw PoolTooSmall("pool holds " + std::to_string(pool.size()) +
                       " examples, need " + std::to_string(options.k));
  }
  if (options.retry_budget < 0) throw UsageError("retry budget must be >= 0");
  std::string examples;
  for (auto i : sample_without_replacement(pool.size(), options.k,
                                           options.seed)) {
    if (!examples.empty()) examples += '\n';
    examples += "\"\"\"" + ner_example_json(pool[i]) + "\"\"\"";
  }
  const std::string prompt =
      render_prompt(prompts.ner_fewshot, {{"examples", examples}});
  const std::string id = "synth-" + std::to_string(options.seed);
  std::string last_reason;
  for (int attempt = 0; attempt <= options.retry_budget; ++attempt) {
    const std::string reply = client.complete(
        prompt, mix(options.seed, static_cast<std::uint64_t>(attempt)));
    try {
      return parse_generated_ner(reply, id);
    } catch (const GenerationInvalid& e) {
      last_reason = e.what();
    }
  }
  throw GenerationInvalid("no valid example after " +
                          std::to_string(options.retry_budget + 1) +
                          " generations; last: " + last_reason);
}

}  // namespace legallens::augment
