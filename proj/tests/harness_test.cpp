#include "argllm/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "argllm/llm_client.hpp"
#include "stub_server.hpp"

using namespace argllm;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "inline");
}

std::string fixture(const std::string& name) { return std::string(ARGLLM_DATA_DIR) + "/fixtures/" + name; }

ErrorCode code_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::precondition;
}

}  // namespace

TEST(LoadDataset, FourLinesBalanced) {
  auto ds = parse(R"({"id":"1","claim":"a","label":true}
{"id":"2","claim":"b","label":false}

{"id":"3","claim":"c","label":true}
{"id":"4","claim":"d","label":false}
)");
  EXPECT_EQ(ds.claims.size(), 4u);
  EXPECT_EQ(ds.balance(), 0.5);
  EXPECT_FALSE(ds.conditioned);
}

TEST(LoadDataset, ErrorsCarryLineNumbers) {
  try {
    parse("{\"id\":\"1\",\"claim\":\"a\",\"label\":true}\n{\"id\":\"2\",\"claim\":\"b\"}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_field);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
  EXPECT_EQ(code_of("not json\n"), ErrorCode::parse_error);
  EXPECT_EQ(code_of(R"({"claim":"a","label":"maybe"})"), ErrorCode::parse_error);
  EXPECT_EQ(code_of(R"({"claim":"","label":true})"), ErrorCode::parse_error);
}

TEST(LoadDataset, ContextOnAllRecordsMeansConditioned) {
  auto ds = load_dataset(fixture("medclaims4.jsonl"));
  EXPECT_TRUE(ds.conditioned);
  EXPECT_EQ(ds.claims.size(), 4u);
  EXPECT_EQ(code_of(R"({"claim":"a","label":true,"context":"x"}
{"claim":"b","label":false})"),
            ErrorCode::parse_error);
}

TEST(LoadDataset, ShippedTwentyClaimFixture) {
  auto ds = load_dataset(fixture("claims20.jsonl"));
  EXPECT_EQ(ds.name, "claims20");
  EXPECT_EQ(ds.claims.size(), 20u);
  EXPECT_EQ(ds.balance(), 0.5);
}

TEST(BalancedSample, SeededAndBalanced) {
  auto ds = load_dataset(fixture("claims20.jsonl"));
  auto a = balanced_sample(ds, 10, 42);
  auto b = balanced_sample(ds, 10, 42);
  ASSERT_EQ(a.claims.size(), 10u);
  EXPECT_EQ(a.count_true(), 5u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.claims[i].id, b.claims[i].id);
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::string ids;
    for (const auto& c : balanced_sample(ds, 10, seed).claims) ids += c.id + ",";
    seen.insert(ids);
  }
  EXPECT_GT(seen.size(), 1u);
  EXPECT_THROW(balanced_sample(parse(R"({"claim":"a","label":true})"), 10, 0), Error);
}

TEST(Run, ConstantTrueOnBalancedSetScoresHalf) {
  auto ds = load_dataset(fixture("claims20.jsonl"));
  FunctionBackend yes([](const CompletionRequest&) { return std::string("True"); });
  auto r = run(ds, {MethodConfig::baseline(Method::direct_question)}, yes);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(*r[0].accuracy(), 0.5);
  EXPECT_EQ(r[0].skipped, 0u);
}

TEST(Run, FailuresBecomeSkipsExcludedFromDenominator) {
  auto ds = load_dataset(fixture("claims20.jsonl"));
  // Answers only for the first four claims, which are true,false,true,false.
  FunctionBackend be([](const CompletionRequest& r) {
    for (const char* known : {"boils", "Great Wall", "two senses", "Goldfish"})
      if (r.subject.find(known) != std::string::npos) return std::string("True");
    return std::string("no idea");
  });
  auto r = run(ds, {MethodConfig::baseline(Method::chain_of_thought)}, be);
  EXPECT_EQ(r[0].skipped, 16u);
  EXPECT_EQ(r[0].evaluated(), 4u);
  EXPECT_EQ(*r[0].accuracy(), 0.5);
  EXPECT_FALSE(r[0].records[5].error.empty());
  EXPECT_NE(format_table(r).find("16"), std::string::npos);
}

TEST(Run, AllSkippedHasNoAccuracy) {
  FunctionBackend be([](const CompletionRequest&) { return std::string("?"); });
  auto r = run(parse(R"({"claim":"a","label":true})"), {MethodConfig::baseline(Method::direct_question)}, be);
  EXPECT_FALSE(r[0].accuracy().has_value());
  EXPECT_NE(format_csv(r).find("n/a"), std::string::npos);
}

TEST(Run, MockFourVariantsDeterministicAndConcurrencyInvariant) {
  auto ds = load_dataset(fixture("claims20.jsonl"));
  auto methods = MethodConfig::argllm_variants();
  MockBackend m1(7), m2(7);
  auto serial = run(ds, methods, m1);
  RunOptions opts;
  opts.concurrency = 4;
  auto parallel = run(ds, methods, m2, opts);
  ASSERT_EQ(serial.size(), 4u);
  EXPECT_EQ(format_table(serial), format_table(parallel));
  EXPECT_EQ(format_csv(serial), format_csv(parallel));
  EXPECT_EQ(format_records(serial), format_records(parallel));
}

TEST(Run, SampleLargerThanDatasetIsAnError) {
  auto ds = parse(R"({"claim":"a","label":true}
{"claim":"b","label":false}
{"claim":"c","label":true}
{"claim":"d","label":false})");
  MockBackend m;
  RunOptions opts;
  opts.sample = 10;
  EXPECT_THROW(run(ds, MethodConfig::argllm_variants(), m, opts), Error);
}

TEST(Run, ConditionedClaimsReachTheBackend) {
  auto ds = load_dataset(fixture("medclaims4.jsonl"));
  std::vector<std::string> prompts;
  std::mutex mu;
  FunctionBackend be([&](const CompletionRequest& r) {
    std::lock_guard lock(mu);
    prompts.push_back(r.prompt);
    return std::string("80");
  });
  run(ds, {MethodConfig::baseline(Method::est_confidence)}, be);
  ASSERT_EQ(prompts.size(), 4u);
  for (const auto& p : prompts) EXPECT_NE(p.find("Consider the following background information"), std::string::npos);
}

TEST(Run, WarmCacheChangesNothingAndMakesNoCalls) {
  oracle::StubEndpoint stub;
  auto dir = std::filesystem::temp_directory_path() / ("argllm_harness_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  auto cache = std::make_shared<ResponseCache>(dir);
  ModelConfig mc;
  mc.endpoint_url = stub.url();
  auto ds = load_dataset(fixture("claims20.jsonl"));
  std::vector<MethodConfig> methods{MethodConfig::argllm_variants()[2],
                                    MethodConfig::baseline(Method::est_confidence)};
  LlmBackend cold(std::make_shared<LlmClient>(mc, cache));
  auto a = run(ds, methods, cold);
  const auto calls = stub.calls();
  EXPECT_GT(calls, 0u);
  LlmBackend warm(std::make_shared<LlmClient>(mc, cache));
  auto b = run(ds, methods, warm);
  EXPECT_EQ(stub.calls(), calls);
  EXPECT_EQ(warm.client().network_calls(), 0u);
  EXPECT_EQ(format_table(a), format_table(b));
  std::filesystem::remove_all(dir);
}

TEST(Output, TableShapeAndFiles) {
  auto ds = load_dataset(fixture("claims20.jsonl"));
  MockBackend m(1);
  std::vector<MethodConfig> methods{MethodConfig::baseline(Method::direct_question),
                                    MethodConfig::baseline(Method::est_confidence),
                                    MethodConfig::baseline(Method::chain_of_thought)};
  for (auto& v : MethodConfig::argllm_variants()) methods.push_back(v);
  auto r = run(ds, methods, m);
  const std::string table = format_table(r);
  for (const char* col : {"Direct Question", "Est. Confidence", "Chain-of-Thought", "0.5 Base Arg (D=1)",
                          "Est. Base Arg (D=2)", "claims20", "skipped"})
    EXPECT_NE(table.find(col), std::string::npos) << col;

  auto dir = std::filesystem::temp_directory_path() / ("argllm_out_" + std::to_string(::getpid()));
  write_outputs(r, dir);
  for (const char* f : {"results.txt", "results.csv", "records.jsonl", "audit.jsonl"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::istringstream records(read_text_file((dir / "records.jsonl").string()));
  std::size_t lines = 0;
  for (std::string l; std::getline(records, l);) {
    ++lines;
    EXPECT_NO_THROW(Json::parse(l));
  }
  EXPECT_EQ(lines, 7u * 20u);
  std::filesystem::remove_all(dir);
}

TEST(Output, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
}
