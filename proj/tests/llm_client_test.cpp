#include "argllm/llm_client.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "stub_server.hpp"

using namespace argllm;
using argllm::oracle::StubEndpoint;
using argllm::oracle::StubReply;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("argllm_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

ModelConfig config_for(const StubEndpoint& stub) {
  ModelConfig c;
  c.endpoint_url = stub.url();
  c.model_name = "stub-model";
  c.api_key = "secret";
  c.initial_backoff = std::chrono::milliseconds(1);
  c.timeout_seconds = 5;
  return c;
}

}  // namespace

TEST(ModelConfig, Defaults) {
  ModelConfig c;
  EXPECT_EQ(c.temperature, 0.7);
  EXPECT_EQ(c.top_p, 0.95);
  EXPECT_EQ(c.repetition_penalty, 1.0);
  EXPECT_EQ(c.max_new_tokens(Purpose::argument), 128);
  EXPECT_EQ(c.max_new_tokens(Purpose::score), 128);
  EXPECT_EQ(c.max_new_tokens(Purpose::baseline), 768);
}

TEST(Endpoint, Parsing) {
  auto e = parse_endpoint("https://api.example.com/v1/chat/completions");
  EXPECT_EQ(e.scheme_host_port, "https://api.example.com");
  EXPECT_EQ(e.path, "/v1/chat/completions");
  EXPECT_EQ(parse_endpoint("http://localhost:8000").path, "/v1/chat/completions");
  EXPECT_THROW(parse_endpoint("localhost:8000"), Error);
}

TEST(LlmClient, RequestsCarryConfiguredDecodingFields) {
  StubEndpoint stub;
  LlmClient client(config_for(stub));
  client.complete("argument prompt", Purpose::argument);
  client.complete("baseline prompt", Purpose::baseline);
  auto reqs = stub.requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0]["model"], "stub-model");
  EXPECT_EQ(reqs[0]["max_tokens"], 128);
  EXPECT_EQ(reqs[1]["max_tokens"], 768);
  for (const auto& r : reqs) {
    EXPECT_EQ(r["temperature"].get<double>(), 0.7);
    EXPECT_EQ(r["top_p"].get<double>(), 0.95);
    EXPECT_EQ(r["repetition_penalty"].get<double>(), 1.0);
    EXPECT_EQ(r["messages"][0]["role"], "user");
    EXPECT_EQ(r.size(), 6u);
  }
  EXPECT_EQ(reqs[0]["messages"][0]["content"], "argument prompt");
  EXPECT_EQ(stub.auth_headers()[0], "Bearer secret");
}

TEST(LlmClient, WarmCacheReturnsIdenticalBytesWithoutNetwork) {
  StubEndpoint stub;
  auto cache = std::make_shared<ResponseCache>(fresh_dir("warm"));
  LlmClient first(config_for(stub), cache);
  auto a = first.complete("p1", Purpose::score);
  EXPECT_EQ(stub.calls(), 1u);

  LlmClient second(config_for(stub), cache);
  auto b = second.complete("p1", Purpose::score);
  EXPECT_EQ(a, b);
  EXPECT_EQ(stub.calls(), 1u);
  EXPECT_EQ(second.network_calls(), 0u);
  EXPECT_EQ(second.cache_hits(), 1u);

  // Reads bypassed: goes to the network again.
  LlmClient bypass(config_for(stub), cache, CachePolicy{false, true});
  bypass.complete("p1", Purpose::score);
  EXPECT_EQ(stub.calls(), 2u);
  std::filesystem::remove_all(cache->directory());
}

TEST(LlmClient, RetryAttemptIsAFreshCacheKey) {
  EXPECT_NE(ResponseCache::make_key("e", "m", "b", 0), ResponseCache::make_key("e", "m", "b", 1));
  EXPECT_EQ(ResponseCache::make_key("e", "m", "b"), ResponseCache::make_key("e", "m", "b", 0));
}

TEST(LlmClient, RetriesServerErrorsThenSucceeds) {
  std::atomic<int> n{0};
  StubEndpoint stub([&](const Json&) { return ++n < 3 ? StubReply{503, ""} : StubReply{200, "ok"}; });
  LlmClient client(config_for(stub));
  EXPECT_EQ(client.complete("x", Purpose::argument), "ok");
  EXPECT_EQ(stub.calls(), 3u);
}

TEST(LlmClient, GivesUpAfterThreeAttempts) {
  StubEndpoint stub([](const Json&) { return StubReply{429, ""}; });
  LlmClient client(config_for(stub));
  try {
    client.complete("x", Purpose::argument);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::rate_limited);
  }
  EXPECT_EQ(stub.calls(), 3u);
}

TEST(LlmClient, AuthErrorsAreNotRetried) {
  StubEndpoint stub([](const Json&) { return StubReply{401, ""}; });
  LlmClient client(config_for(stub));
  try {
    client.complete("x", Purpose::argument);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::auth_error);
  }
  EXPECT_EQ(stub.calls(), 1u);
}

TEST(LlmClient, NetworkErrorWhenNothingListens) {
  ModelConfig c;
  c.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
  c.initial_backoff = std::chrono::milliseconds(1);
  c.timeout_seconds = 1;
  LlmClient client(c);
  try {
    client.complete("x", Purpose::argument);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::network_error);
  }
}

TEST(LlmClient, MalformedResponse) {
  httplib::Server srv;
  srv.Post("/v1/chat/completions",
           [](const httplib::Request&, httplib::Response& res) { res.set_content(R"({"choices": []})", "application/json"); });
  int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  ModelConfig c;
  c.endpoint_url = "http://127.0.0.1:" + std::to_string(port);
  LlmClient client(c);
  try {
    client.complete("x", Purpose::argument);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_response);
  }
  srv.stop();
  t.join();
}

// Store-then-fetch is the identity; distinct prompts never share a key.
TEST(ResponseCache, RoundTripAndDistinctKeys) {
  auto cache = ResponseCache(fresh_dir("fuzz"));
  LlmClient client(ModelConfig{});
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(0, 40), ch(0, 255);
  std::set<std::string> prompts, keys;
  for (int i = 0; i < 500; ++i) {
    std::string p(len(rng), '\0');
    for (auto& c : p) c = static_cast<char>(ch(rng));
    if (!prompts.insert(p).second) continue;
    auto key = client.cache_key(p, Purpose::argument);
    EXPECT_TRUE(keys.insert(key).second);
    std::string response = "resp-" + std::to_string(i) + "\n\t\"quoted\"";
    cache.put(key, Json::object(), response);
    auto got = cache.get(key);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(got->response_text, response);
    EXPECT_EQ(got->key, key);
  }
  EXPECT_FALSE(cache.get("absent").has_value());
  std::filesystem::remove_all(cache.directory());
}

TEST(LlmBackend, RoutesPurposeFromTask) {
  StubEndpoint stub;
  LlmBackend backend(std::make_shared<LlmClient>(config_for(stub)));
  CompletionRequest req;
  req.task = Task::cot_reasoning;
  req.prompt = "why";
  backend.complete(req);
  req.task = Task::score_claim;
  backend.complete(req);
  auto reqs = stub.requests();
  EXPECT_EQ(reqs[0]["max_tokens"], 768);
  EXPECT_EQ(reqs[1]["max_tokens"], 128);
}
