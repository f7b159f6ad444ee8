#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "got/error.hpp"
#include "got/experiment.hpp"

using namespace got;

namespace {

RunRecord record(double error, rational cost = 0, std::string scheme = "got") {
  RunRecord r;
  r.scheme = std::move(scheme);
  r.usecase = "sorting";
  r.size = 32;
  r.error_raw = r.error_clipped = static_cast<std::int64_t>(error);
  r.positive = 32 - *r.error_clipped;
  r.exact = error == 0;
  r.cost = cost;
  return r;
}

Summary summary_with(double median, rational mean_cost) {
  Summary s;
  s.usecase = "sorting";
  s.size = 32;
  s.median = median;
  s.mean_cost = mean_cost;
  return s;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST(Batch, PerfectGotSorting) {
  auto sc = build_scheme("got", UseCaseId::sorting, 32);
  BackendConfig bc;
  BatchOptions bo;
  bo.samples = 100;
  auto res = run_batch(sc, bc, bo);
  ASSERT_EQ(res.records.size(), 100u);
  std::uint64_t calls = 0;
  for (const auto& r : res.records) {
    EXPECT_EQ(r.error_clipped, 0);
    EXPECT_EQ(r.exact, true);
    calls += r.calls;
  }
  EXPECT_EQ(calls, 3100u);
  EXPECT_FALSE(res.budget_exceeded);
}

TEST(Batch, FaultyIoShowsErrors) {
  auto sc = build_scheme("io", UseCaseId::sorting, 32);
  BackendConfig bc;
  bc.spec = "mock-faulty:0.5";
  BatchOptions bo;
  bo.samples = 10;
  auto res = run_batch(sc, bc, bo);
  ASSERT_EQ(res.records.size(), 10u);
  int nonzero = 0;
  for (const auto& r : res.records) nonzero += *r.error_clipped != 0;
  EXPECT_GE(nonzero, 1);
}

TEST(Batch, SingleSampleAndSeeds) {
  auto sc = build_scheme("io", UseCaseId::sorting, 32);
  BatchOptions bo;
  bo.seed0 = 41;
  auto res = run_batch(sc, BackendConfig{}, bo);
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].seed, 41u);
  bo.samples = 0;
  EXPECT_THROW(run_batch(sc, BackendConfig{}, bo), ConfigError);
}

TEST(Batch, ReRunIsByteIdentical) {
  auto sc = build_scheme("got", UseCaseId::keyword_counting, 16);
  BackendConfig bc;
  bc.spec = "mock-faulty:0.3";
  bc.cost = {parse_decimal("0.0015"), parse_decimal("0.002")};
  std::vector<std::string> first, second;
  BatchOptions bo;
  bo.samples = 5;
  bo.sink = [&](const RunRecord& r) { first.push_back(record_to_json(r)); };
  run_batch(sc, bc, bo);
  bo.sink = [&](const RunRecord& r) { second.push_back(record_to_json(r)); };
  bc.window = 3;
  run_batch(sc, bc, bo);
  EXPECT_EQ(first, second);
}

TEST(Batch, BudgetStopsBatch) {
  auto sc = build_scheme("io", UseCaseId::sorting, 32);
  BackendConfig bc;
  bc.cost = {parse_decimal("0.0015"), parse_decimal("0.002")};
  BatchOptions bo;
  bo.samples = 50;
  bo.max_cost = parse_decimal("0.002");
  int sunk = 0;
  bo.sink = [&](const RunRecord&) { ++sunk; };
  auto res = run_batch(sc, bc, bo);
  EXPECT_TRUE(res.budget_exceeded);
  EXPECT_LT(res.records.size(), 50u);
  EXPECT_EQ(static_cast<std::size_t>(sunk), res.records.size());
  rational total = 0;
  for (const auto& r : res.records) total += r.cost;
  EXPECT_LE(total, *bo.max_cost);
}

TEST(Batch, BackendFailureIsRecorded) {
  auto script = temp_file("got_empty_script.json", R"({"rules": []})");
  auto sc = build_scheme("io", UseCaseId::sorting, 32);
  BackendConfig bc;
  bc.spec = "scripted:" + script.string();
  BatchOptions bo;
  bo.samples = 2;
  auto res = run_batch(sc, bc, bo);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_TRUE(res.backend_failed);
  EXPECT_TRUE(res.records[0].failed);
  EXPECT_EQ(res.records[0].error_raw, 32);
  EXPECT_EQ(res.records[0].error_clipped, 32);
  EXPECT_EQ(res.records[0].positive, 0);
  std::filesystem::remove(script);
}

TEST(Batch, DocMergeRecordsScore) {
  auto sc = build_scheme("got", UseCaseId::document_merging, 4);
  auto res = run_batch(sc, BackendConfig{}, BatchOptions{});
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_FALSE(res.records[0].error_raw.has_value());
  ASSERT_TRUE(res.records[0].score.has_value());
  EXPECT_GT(*res.records[0].score, 0);
  EXPECT_EQ(res.records[0].calls, 80u);
}

TEST(Records, JsonRoundTrip) {
  RunRecord r = record(3, rational(7, 2000));
  r.seed = 9;
  r.calls = 31;
  r.prompt_tokens = 100;
  r.response_tokens = 20;
  r.score = 2.5;
  std::string line = record_to_json(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_NE(line.find("\"cost\":\"7/2000\""), std::string::npos);
  RunRecord back = record_from_json(line);
  EXPECT_EQ(record_to_json(back), line);
  EXPECT_EQ(back.cost, rational(7, 2000));
  EXPECT_THROW(record_from_json("{\"format\": \"other\"}"), ParseFailure);
}

TEST(Records, ReadFile) {
  auto p = temp_file("got_runs.jsonl", record_to_json(record(1)) + "\n" + record_to_json(record(2)) + "\n");
  auto rs = read_records(p.string());
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[1].error_clipped, 2);
  std::filesystem::remove(p);
}

TEST(Summary, NearestRankMedian) {
  EXPECT_EQ(nearest_rank({0, 0, 1, 1, 2}, 0.5), 1);
  EXPECT_EQ(nearest_rank({0, 4}, 0.5), 0);
  EXPECT_THROW(nearest_rank({}, 0.5), EmptyInput);
  auto s = summarize({record(0, 1), record(4, 3)});
  EXPECT_EQ(s.median, 0);
  EXPECT_EQ(s.mean_cost, 2);
  EXPECT_EQ(s.total_cost, 4);
  EXPECT_EQ(s.runs, 2u);
}

TEST(Summary, Quartiles) {
  std::vector<RunRecord> rs;
  for (int e : {5, 1, 3, 2, 4, 0, 6, 7}) rs.push_back(record(e));
  auto s = summarize(rs);
  EXPECT_EQ(s.q1, 1);
  EXPECT_EQ(s.median, 3);
  EXPECT_EQ(s.q3, 5);
  EXPECT_NE(summary_to_json(s).find("summary-v1"), std::string::npos);
}

TEST(Summary, RejectsMixedExperiments) {
  EXPECT_THROW(summarize({record(0), record(1, 0, "io")}), MismatchedExperiments);
  EXPECT_THROW(summarize({}), EmptyInput);
}

TEST(Compare, RelativeDeltas) {
  auto c = compare(summary_with(38, 1), summary_with(100, 1));
  ASSERT_TRUE(c.median_delta);
  EXPECT_NEAR(*c.median_delta, -0.62, 1e-12);
  auto cost = compare(summary_with(1, parse_decimal("0.69")), summary_with(1, 1));
  ASSERT_TRUE(cost.cost_delta);
  EXPECT_NEAR(*cost.cost_delta, -0.31, 1e-12);
  auto zero = compare(summary_with(3, 0), summary_with(0, 0));
  EXPECT_TRUE(zero.median_baseline_zero);
  EXPECT_FALSE(zero.median_delta);
  EXPECT_TRUE(zero.cost_baseline_zero);
  EXPECT_NE(comparison_to_json(zero).find("baseline zero"), std::string::npos);
  auto other = summary_with(1, 1);
  other.size = 64;
  EXPECT_THROW(compare(summary_with(1, 1), other), MismatchedExperiments);
}

TEST(Config, BackendSpecs) {
  BackendConfig bc;
  EXPECT_EQ(make_backend(bc, 0)->name(), "mock-perfect");
  bc.spec = "mock-faulty:0.2:drop,swap";
  EXPECT_EQ(make_backend(bc, 0)->name(), "mock-faulty");
  bc.spec = "mock-faulty:high";
  EXPECT_THROW(make_backend(bc, 0), ConfigError);
  bc.spec = "telepathy";
  EXPECT_THROW(make_backend(bc, 0), ConfigError);
  bc.spec = "http";
  EXPECT_EQ(make_backend(bc, 0)->name(), "http");
}

TEST(Config, FileOverrides) {
  auto p = temp_file("got_cfg.json",
                     R"({"model": "m", "retry_budget": 1, "window": 2, "pricing": {"prompt_per_1k": "0.0015", "response_per_1k": "0.002"}})");
  BackendConfig bc;
  apply_config_file(bc, p.string());
  EXPECT_EQ(bc.http.model, "m");
  EXPECT_EQ(bc.http.retry_budget, 1);
  EXPECT_EQ(bc.window, 2);
  EXPECT_EQ(bc.cost.prompt_per_1k, rational(3, 2000));
  auto bad = temp_file("got_bad_cfg.json", R"({"window": 0})");
  EXPECT_THROW(apply_config_file(bc, bad.string()), ConfigError);
  EXPECT_THROW(apply_config_file(bc, "/nonexistent/cfg.json"), ConfigError);
  std::filesystem::remove(p);
  std::filesystem::remove(bad);
}
