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

#include <atomic>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legallens/errors.hpp"
#include "test_support.hpp"

// After the Eigen headers: resolv.h defines a `_res` macro.
#include <httplib.h>

namespace legallens::augment {
namespace {

using corpus::NliRecord;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

std::vector<NliRecord> nli_pool(std::size_t n, std::uint64_t seed = 41) {
  std::mt19937_64 rng(seed);
  return testing::random_nli(n, rng);
}

ClientSettings no_sleep(std::vector<std::chrono::milliseconds>* slept = nullptr) {
  ClientSettings s;
  s.retry.sleep = [slept](std::chrono::milliseconds d) {
    if (slept) slept->push_back(d);
  };
  return s;
}

TEST(AugmentNliTest, DoublesAndPreservesHistograms) {
  const auto records = nli_pool(312);
  const MockChatClient client;
  const auto out = augment_nli(records, client);
  ASSERT_EQ(out.size(), 624u);
  std::map<std::pair<corpus::NliLabel, corpus::Domain>, int> before, after;
  for (const auto& r : records) ++before[{r.label, r.domain}];
  for (const auto& r : out) ++after[{r.label, r.domain}];
  for (const auto& [key, n] : before) EXPECT_EQ(after[key], 2 * n);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(out[i], records[i]);
    const auto& p = out[records.size() + i];
    ASSERT_TRUE(p.provenance.has_value());
    EXPECT_EQ(p.provenance->source_id, records[i].id);
    EXPECT_EQ(p.provenance->model_name, "mock");
    EXPECT_EQ(p.id, records[i].id + "-para1");
  }
}

TEST(AugmentNliTest, FactorTwoTriples) {
  const auto records = nli_pool(20);
  const MockChatClient client;
  const auto out = augment_nli(records, client, {2, 0, 4});
  ASSERT_EQ(out.size(), 60u);
  EXPECT_EQ(out[40].id, records[0].id + "-para2");
  EXPECT_THROW(augment_nli(records, client, {3, 0, 4}), UsageError);
  EXPECT_THROW(augment_nli(std::span<const NliRecord>{}, client), EmptyDataset);
}

TEST(AugmentNliTest, DeterministicAcrossConcurrency) {
  const auto records = nli_pool(60);
  const MockChatClient client;
  const auto serial = augment_nli(records, client, {1, 9, 1});
  for (int in_flight : {2, 8, 32}) {
    EXPECT_EQ(augment_nli(records, client, {1, 9, in_flight}), serial);
  }
  const auto seeded = MockChatClient::scripted(
      [](std::string_view prompt, std::uint64_t seed) {
        return std::string(prompt.substr(prompt.size() - 8)) + std::to_string(seed);
      });
  const auto a = augment_nli(records, seeded, {1, 9, 1});
  EXPECT_EQ(augment_nli(records, seeded, {1, 9, 16}), a);
  EXPECT_NE(augment_nli(records, seeded, {1, 10, 16}), a);
}

TEST(ParaphraseTest, FixedAndIdentityClients) {
  const auto record = nli_pool(1)[0];
  const auto p = paraphrase_record(record, MockChatClient::scripted(
      [](std::string_view prompt, std::uint64_t) {
        return std::string(prompt.find("hypothesis") != std::string_view::npos ||
                                   prompt.find("complaint") != std::string_view::npos
                               ? "H2"
                               : "P2");
      }));
  EXPECT_EQ(p.label, record.label);
  EXPECT_EQ(p.domain, record.domain);
  const auto same = paraphrase_record(record, MockChatClient::identity());
  EXPECT_EQ(same.premise, record.premise);
  EXPECT_EQ(same.hypothesis, record.hypothesis);
  const auto fixed = paraphrase_record(record, MockChatClient::fixed("X"));
  EXPECT_EQ(fixed.premise, "X");
  EXPECT_EQ(fixed.hypothesis, "X");
  EXPECT_THROW(paraphrase_record(record, MockChatClient::fixed("  \n")),
               EmptyGeneration);
}

TEST(ParaphraseTest, PromptsCarryTheTextsSeparately) {
  const auto record = nli_pool(1)[0];
  std::mutex mu;
  std::vector<std::string> prompts;
  const auto client = MockChatClient::scripted(
      [&](std::string_view prompt, std::uint64_t) {
        std::lock_guard lock(mu);
        prompts.emplace_back(prompt);
        return std::string("ok");
      });
  paraphrase_record(record, client);
  ASSERT_EQ(prompts.size(), 2u);
  EXPECT_EQ(last_quoted_block(prompts[0]), record.premise);
  EXPECT_EQ(last_quoted_block(prompts[1]), record.hypothesis);
}

TEST(RetryTest, BacksOffExponentiallyThenGivesUp) {
  std::vector<std::chrono::milliseconds> slept;
  std::atomic<int> calls{0};
  const auto client = MockChatClient::scripted(
      [&](std::string_view, std::uint64_t) -> std::string {
        ++calls;
        throw TransientClientError("busy");
      },
      no_sleep(&slept));
  EXPECT_THROW(client.complete("p", 0), ClientError);
  EXPECT_EQ(calls.load(), 4);
  using std::chrono::milliseconds;
  EXPECT_THAT(slept, ElementsAre(milliseconds(500), milliseconds(1000),
                                 milliseconds(2000)));
}

TEST(RetryTest, RecoversAndStopsOnPermanentErrors) {
  std::atomic<int> calls{0};
  const auto flaky = MockChatClient::scripted(
      [&](std::string_view, std::uint64_t) -> std::string {
        if (++calls < 3) throw TransientClientError("busy");
        return "fine";
      },
      no_sleep());
  EXPECT_EQ(flaky.complete("p", 0), "fine");
  calls = 0;
  const auto broken = MockChatClient::scripted(
      [&](std::string_view, std::uint64_t) -> std::string {
        ++calls;
        throw ClientError("bad request");
      },
      no_sleep());
  EXPECT_THROW(broken.complete("p", 0), ClientError);
  EXPECT_EQ(calls.load(), 1);
}

TEST(RetryTest, FailingRecordIsReportedByIndex) {
  const auto records = nli_pool(12);
  const std::string poison = records[7].premise;
  const auto client = MockChatClient::scripted(
      [&](std::string_view prompt, std::uint64_t) -> std::string {
        if (last_quoted_block(prompt) == poison) throw ClientError("refused");
        return "fine";
      },
      no_sleep());
  try {
    augment_nli(records, client, {1, 0, 4});
    FAIL() << "expected RecordClientError";
  } catch (const RecordClientError& e) {
    EXPECT_EQ(e.index(), 7u);
  }
}

TEST(PromptTest, RenderAndPlaceholders) {
  const PromptTemplate t{"t", "Say {{hi}} to {name} about {topic}, {name}."};
  EXPECT_THAT(placeholders(t), ElementsAre("name", "topic"));
  EXPECT_EQ(render_prompt(t, {{"name", "Ana"}, {"topic", "fees"}}),
            "Say {hi} to Ana about fees, Ana.");
  EXPECT_THROW(render_prompt(t, {{"name", "Ana"}}), UnboundPlaceholder);
  EXPECT_THROW(default_template("nope"), UsageError);
  for (auto name : {kNerFewshot, kPremisePrompt, kHypothesisPrompt}) {
    EXPECT_FALSE(placeholders(default_template(name)).empty());
  }
}

TEST(PromptTest, LoadsTemplatesFromDirectory) {
  testing::TempDir dir("prompts");
  testing::write_text(dir / "nli_premise_paraphrase.txt",
                      "# comment line\nRewrite: \"\"\"{text}\"\"\"\n");
  const auto set = PromptSet::from_directory(dir.path());
  EXPECT_EQ(set.premise.text.rfind("Rewrite:", 0), 0u);
  EXPECT_EQ(set.hypothesis.text, default_template(kHypothesisPrompt).text);
}

TEST(QuotedBlocksTest, Extraction) {
  EXPECT_THAT(quoted_blocks("a \"\"\"x\"\"\" b \"\"\"y z\"\"\""),
              ElementsAre("x", "y z"));
  EXPECT_EQ(last_quoted_block("plain"), "plain");
}

const char* kValidReply =
    R"(Here you go: {"tokens": ["Globex", "broke", "the", "TCPA"],
        "ner_tags": ["B-VIOLATED_BY", "O", "O", "B-LAW"]})";

TEST(SynthesizeNerTest, AcceptsValidReply) {
  const auto pool = testing::synthetic_ner(10);
  const auto ex = synthesize_ner(pool, MockChatClient::fixed(kValidReply),
                                 {3, 1, 3});
  EXPECT_THAT(ex.tokens, ElementsAre("Globex", "broke", "the", "TCPA"));
  ASSERT_EQ(ex.entities.size(), 2u);
  EXPECT_EQ(ex.entities[1], (corpus::GoldSpan{corpus::EntityType::kLaw, 3, 3}));
}

TEST(SynthesizeNerTest, RetriesInvalidRepliesThenFails) {
  const auto pool = testing::synthetic_ner(10);
  std::atomic<int> calls{0};
  const auto orphan = MockChatClient::scripted(
      [&](std::string_view, std::uint64_t) {
        ++calls;
        return std::string(R"({"tokens": ["a", "b"], "ner_tags": ["O", "I-LAW"]})");
      });
  EXPECT_THROW(synthesize_ner(pool, orphan, {3, 1, 3}), GenerationInvalid);
  EXPECT_EQ(calls.load(), 4);
  std::atomic<int> n{0};
  const auto second_try = MockChatClient::scripted(
      [&](std::string_view, std::uint64_t) {
        return std::string(++n == 1 ? "not json" : kValidReply);
      });
  EXPECT_NO_THROW(synthesize_ner(pool, second_try, {3, 1, 3}));
}

TEST(SynthesizeNerTest, PoolTooSmall) {
  const auto pool = testing::synthetic_ner(2);
  EXPECT_THROW(synthesize_ner(pool, MockChatClient::fixed(kValidReply), {3, 1, 3}),
               PoolTooSmall);
}

TEST(SynthesizeNerTest, DefaultMockReturnsAPoolExample) {
  const auto pool = testing::synthetic_ner(10);
  const auto ex = synthesize_ner(pool, MockChatClient{}, {3, 5, 3});
  bool found = false;
  for (const auto& p : pool) found |= p.tokens == ex.tokens && p.entities == ex.entities;
  EXPECT_TRUE(found);
}

TEST(SamplingTest, DistinctAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = sample_without_replacement(10, 3, seed);
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 3u);
    for (auto i : s) EXPECT_LT(i, 10u);
    EXPECT_EQ(s, sample_without_replacement(10, 3, seed));
  }
  EXPECT_THROW(sample_without_replacement(2, 3, 0), PoolTooSmall);
}

TEST(WireFormatTest, RequestAndResponseBodies) {
  const CompletionRequest req{"m", "hello", 0.5, 64, 3};
  const auto j = nlohmann::json::parse(request_body(req));
  EXPECT_EQ(j.size(), 4u);
  EXPECT_EQ(j["model_name"], "m");
  EXPECT_EQ(j["prompt"], "hello");
  EXPECT_DOUBLE_EQ(j["temperature"].get<double>(), 0.5);
  EXPECT_EQ(j["max_output_tokens"], 64);
  EXPECT_EQ(response_text(R"({"text": "hi"})"), "hi");
  EXPECT_THROW(response_text("{}"), ClientError);
  EXPECT_THROW(response_text("garbage"), ClientError);
}

TEST(HttpClientTest, TalksToLocalServer) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string last_body, last_auth;
  std::mutex mu;
  server.Post("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mu);
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
    }
    if (++hits == 1) {
      res.status = 503;
      return;
    }
    const auto j = nlohmann::json::parse(req.body);
    res.set_content(nlohmann::json{{"text", "echo: " + j["prompt"].get<std::string>()}}.dump(),
                    "application/json");
  });
  server.Post("/v1/bad", [](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto settings = no_sleep();
  settings.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/complete";
  settings.model_name = "local";
  HttpChatClient client(settings, "secret");
  EXPECT_EQ(client.complete("ping", 0), "echo: ping");
  EXPECT_EQ(hits.load(), 2);
  {
    std::lock_guard lock(mu);
    EXPECT_EQ(last_auth, "Bearer secret");
    EXPECT_EQ(nlohmann::json::parse(last_body)["model_name"], "local");
  }
  settings.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/bad";
  HttpChatClient bad(settings);
  EXPECT_THROW(bad.complete("ping", 0), ClientError);

  server.stop();
  thread.join();
}

TEST(HttpClientTest, RejectsUnsupportedEndpoints) {
  ClientSettings s;
  s.endpoint = "https://example.com/v1";
  EXPECT_THROW(HttpChatClient{s}, UsageError);
  s.endpoint = "not a url";
  EXPECT_THROW(HttpChatClient{s}, UsageError);
}

}  // namespace
}  // namespace legallens::augment
