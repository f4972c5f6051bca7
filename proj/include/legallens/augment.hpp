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

// LLM-backed augmentation: label-preserving NLI paraphrases and few-shot NER
// synthesis behind a generic single-turn completion client.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "legallens/corpus.hpp"

namespace legallens::augment {

// ---------------------------------------------------------------------------
// Prompts

inline constexpr std::string_view kNerFewshot = "ner_fewshot";
inline constexpr std::string_view kPremisePrompt = "nli_premise_paraphrase";
inline constexpr std::string_view kHypothesisPrompt =
    "nli_hypothesis_paraphrase";

// Template text with `{name}` placeholders. `{{` and `}}` are literal braces.
struct PromptTemplate {
  std::string name;
  std::string text;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

// Throws UnboundPlaceholder naming the first placeholder without a binding.
std::string render_prompt(const PromptTemplate& prompt,
                          const Bindings& bindings);

// Placeholder names in order of first appearance.
std::vector<std::string> placeholders(const PromptTemplate& prompt);

// Built-in text for the three known prompts; throws UsageError otherwise.
PromptTemplate default_template(std::string_view name);

// Reads a template file. Leading lines starting with '#' are comments.
PromptTemplate load_template(const std::filesystem::path& path,
                             std::string name);

struct PromptSet {
  PromptTemplate premise = default_template(kPremisePrompt);
  PromptTemplate hypothesis = default_template(kHypothesisPrompt);
  PromptTemplate ner_fewshot = default_template(kNerFewshot);

  // Loads "<name>.txt" for each prompt found in `dir`; missing files keep the
  // built-in text.
  static PromptSet from_directory(const std::filesystem::path& dir);
};

// ---------------------------------------------------------------------------
// Clients

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
  // Defaults to std::this_thread::sleep_for; tests inject a recorder.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct ClientSettings {
  std::string endpoint;
  std::string model_name = "mock";
  double temperature = 0.7;
  int max_output_tokens = 512;
  std::chrono::seconds timeout{60};
  RetryPolicy retry;
};

struct CompletionRequest {
  std::string model_name;
  std::string prompt;
  double temperature = 0.7;
  int max_output_tokens = 512;
  std::uint64_t seed = 0;
};

class ChatClient {
 public:
  explicit ChatClient(ClientSettings settings);
  virtual ~ChatClient() = default;

  const ClientSettings& settings() const { return settings_; }

  // One completion with retries on TransientClientError and exponential
  // backoff between attempts. Throws ClientError once retries are exhausted
  // or on a non-transient failure.
  std::string complete(std::string_view prompt, std::uint64_t seed) const;

  CompletionRequest request(std::string_view prompt, std::uint64_t seed) const;

 protected:
  // A single attempt. Implementations must be safe for concurrent calls.
  virtual std::string complete_once(const CompletionRequest& request) const = 0;

 private:
  ClientSettings settings_;
};

// Request body {model_name, prompt, temperature, max_output_tokens} as JSON.
std::string request_body(const CompletionRequest& request);
// Extracts "text" from a response body; throws ClientError.
std::string response_text(std::string_view body);

// POSTs the request body to a plain-http endpoint. Non-empty api keys are
// sent as a bearer token.
class HttpChatClient final : public ChatClient {
 public:
  HttpChatClient(ClientSettings settings, std::string api_key = {});

  // Reads LLM_ENDPOINT, LLM_API_KEY and LLM_MODEL; throws UsageError when
  // the endpoint is unset.
  static HttpChatClient from_environment(ClientSettings base = {});

 protected:
  std::string complete_once(const CompletionRequest& request) const override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
};

// Text between the last pair of triple double quotes, or the whole prompt
// when there is none.
std::string last_quoted_block(std::string_view prompt);
std::vector<std::string> quoted_blocks(std::string_view prompt);

// Deterministic given (prompt, seed); safe for concurrent use.
class MockChatClient final : public ChatClient {
 public:
  using Responder =
      std::function<std::string(std::string_view prompt, std::uint64_t seed)>;

  // Default behaviour: a prompt with one quoted block gets a light
  // word-substitution rewrite of that block; a prompt with several blocks
  // (few-shot) gets one of them verbatim, picked by hashing prompt and seed.
  explicit MockChatClient(ClientSettings settings = {});

  // Echoes the last quoted block unchanged.
  static MockChatClient identity(ClientSettings settings = {});
  // Always answers `text`.
  static MockChatClient fixed(std::string text, ClientSettings settings = {});
  // Delegates to `responder`; exceptions it throws pass through the retry
  // logic like real client failures.
  static MockChatClient scripted(Responder responder,
                                 ClientSettings settings = {});

 protected:
  std::string complete_once(const CompletionRequest& request) const override;

 private:
  MockChatClient(ClientSettings settings, Responder responder);
  Responder responder_;
};

// The default mock rewrite, exposed for tests.
std::string mock_paraphrase(std::string_view text, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Operations

// Paraphrases premise and hypothesis with two separate prompts. Label and
// domain are copied; provenance records the source id, prompts and model.
// `round` distinguishes the ids and seeds of repeated paraphrases.
// Throws ClientError and EmptyGeneration.
corpus::NliRecord paraphrase_record(const corpus::NliRecord& record,
                                    const ChatClient& client,
                                    const PromptSet& prompts = {},
                                    std::uint64_t seed = 0, int round = 1);

struct AugmentOptions {
  int factor = 1;  // paraphrases per original (1 doubles, 2 triples)
  std::uint64_t seed = 0;
  int max_in_flight = 4;
};

// Originals followed by `factor` rounds of paraphrases, each round in input
// order. Throws EmptyDataset on empty input, UsageError on a bad factor, and
// RecordClientError with the index of the first failing record.
std::vector<corpus::NliRecord> augment_nli(
    std::span<const corpus::NliRecord> records, const ChatClient& client,
    const AugmentOptions& options = {}, const PromptSet& prompts = {});

struct SynthesisOptions {
  std::size_t k = 3;
  std::uint64_t seed = 0;
  int retry_budget = 3;  // extra generations after the first rejected one
};

// Parses a completion into an example; throws GenerationInvalid.
corpus::NerExample parse_generated_ner(std::string_view completion,
                                       std::string id);

// Renders the few-shot prompt with k pool examples sampled without
// replacement and parses the reply. Invalid replies are regenerated up to
// the retry budget. Throws PoolTooSmall and GenerationInvalid.
corpus::NerExample synthesize_ner(std::span<const corpus::NerExample> pool,
                                  const ChatClient& client,
                                  const SynthesisOptions& options = {},
                                  const PromptSet& prompts = {});

// Indices of k distinct pool members drawn with `seed`.
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k,
                                                    std::uint64_t seed);

}  // namespace legallens::augment
