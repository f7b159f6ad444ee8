#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "got/engine.hpp"
#include "got/llm_backend.hpp"
#include "got/schemes.hpp"

namespace got {

struct RunRecord {
  std::string scheme;
  std::string usecase;
  int size = 0;
  std::uint64_t seed = 0;
  // Absent for document merging, which has no reference solution.
  std::optional<std::int64_t> error_raw;
  std::optional<std::int64_t> error_clipped;
  std::optional<std::int64_t> positive;
  std::optional<bool> exact;
  std::optional<double> score;
  bool failed = false;
  std::string failure;
  std::uint64_t calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t response_tokens = 0;
  rational cost = 0;
  std::optional<double> wall_ms;
};

// One "runs-v1" JSON line without the trailing newline.
std::string record_to_json(const RunRecord& r);
RunRecord record_from_json(const std::string& line);
std::vector<RunRecord> read_records(const std::string& path);

struct BackendConfig {
  // mock-perfect | mock-faulty:<rate>[:kinds] | scripted:<file> | http
  std::string spec = "mock-perfect";
  HttpConfig http;
  CostModel cost;
  int window = 1;
  double temperature = 1.0;
  int max_tokens = 4096;
};

// JSON config: model, url, api_key_env, organization, retry_budget, backoff_base_ms, window,
// temperature, max_tokens, pricing {prompt_per_1k, response_per_1k} as decimal strings.
void apply_config_file(BackendConfig& config, const std::string& path);
// Throws ConfigError.
std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config, std::uint64_t seed);

struct RunOutcome {
  RunRecord record;
  RunResult result;
};

// A backend failure is reported in the record instead of being thrown.
RunOutcome run_one(const SchemeConfig& scheme, const ProblemInstance& instance, LlmBackend& backend,
                   const EngineOptions& options, bool timing = false);

struct BatchOptions {
  std::uint64_t seed0 = 0;
  int samples = 1;
  std::optional<rational> max_cost;
  bool timing = false;
  // Called with each finished record, in seed order.
  std::function<void(const RunRecord&)> sink;
};

struct BatchResult {
  std::vector<RunRecord> records;
  // Set when the batch stopped early on a budget overrun.
  bool budget_exceeded = false;
  bool backend_failed = false;
};

// Throws ConfigError before any run starts.
BatchResult run_batch(const SchemeConfig& scheme, const BackendConfig& backend, const BatchOptions& options);

struct Summary {
  std::string scheme;
  std::string usecase;
  int size = 0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  // Clipped error quartiles when errors exist, otherwise score quartiles.
  std::string metric = "error";
  double median = 0;
  double q1 = 0;
  double q3 = 0;
  rational total_cost = 0;
  rational mean_cost = 0;
  std::uint64_t calls = 0;
};

// Nearest-rank percentile: the value at rank ceil(p * n), 1-based. Throws EmptyInput.
double nearest_rank(std::vector<double> values, double p);
// Throws EmptyInput, MismatchedExperiments.
Summary summarize(const std::vector<RunRecord>& records);
std::string summary_to_json(const Summary& s);

struct Comparison {
  std::optional<double> median_delta;
  std::optional<double> cost_delta;
  bool median_baseline_zero = false;
  bool cost_baseline_zero = false;
};

// Relative deltas of a against baseline b. Throws MismatchedExperiments.
Comparison compare(const Summary& a, const Summary& b);
std::string comparison_to_json(const Comparison& c);

}  // namespace got
