#include "got/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "got/error.hpp"

namespace got {

using ojson = nlohmann::ordered_json;

std::string record_to_json(const RunRecord& r) {
  ojson j;
  j["format"] = "runs-v1";
  j["scheme"] = r.scheme;
  j["usecase"] = r.usecase;
  j["size"] = r.size;
  j["seed"] = r.seed;
  auto opt = [&](const char* key, const auto& v) {
    if (v) {
      j[key] = *v;
    } else {
      j[key] = nullptr;
    }
  };
  opt("error_raw", r.error_raw);
  opt("error_clipped", r.error_clipped);
  opt("positive", r.positive);
  opt("exact", r.exact);
  if (r.score && std::isfinite(*r.score)) {
    j["score"] = *r.score;
  } else {
    j["score"] = nullptr;
  }
  j["failed"] = r.failed;
  if (r.failed) j["failure"] = r.failure;
  j["calls"] = r.calls;
  j["prompt_tokens"] = r.prompt_tokens;
  j["response_tokens"] = r.response_tokens;
  j["cost"] = format_rational(r.cost);
  j["cost_float"] = to_double(r.cost);
  if (r.wall_ms) j["wall_ms"] = *r.wall_ms;
  return j.dump();
}

RunRecord record_from_json(const std::string& line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "runs-v1") {
    throw ParseFailure("not a runs-v1 record");
  }
  try {
    RunRecord r;
    r.scheme = j.at("scheme").get<std::string>();
    r.usecase = j.at("usecase").get<std::string>();
    r.size = j.at("size").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    auto opt_int = [&](const char* key) -> std::optional<std::int64_t> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<std::int64_t>();
    };
    r.error_raw = opt_int("error_raw");
    r.error_clipped = opt_int("error_clipped");
    r.positive = opt_int("positive");
    if (j.contains("exact") && !j["exact"].is_null()) r.exact = j["exact"].get<bool>();
    if (j.contains("score") && !j["score"].is_null()) r.score = j["score"].get<double>();
    r.failed = j.value("failed", false);
    r.failure = j.value("failure", "");
    r.calls = j.value("calls", std::uint64_t{0});
    r.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
    r.response_tokens = j.value("response_tokens", std::int64_t{0});
    r.cost = parse_rational(j.value("cost", "0"));
    if (j.contains("wall_ms")) r.wall_ms = j["wall_ms"].get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseFailure(std::string("malformed runs-v1 record: ") + e.what());
  }
}

std::vector<RunRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<RunRecord> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(record_from_json(line));
  }
  return out;
}

void apply_config_file(BackendConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");
  try {
    c.http.model = j.value("model", c.http.model);
    c.http.url = j.value("url", c.http.url);
    c.http.api_key_env = j.value("api_key_env", c.http.api_key_env);
    c.http.organization = j.value("organization", c.http.organization);
    c.http.retry_budget = j.value("retry_budget", c.http.retry_budget);
    c.http.backoff_base_ms = j.value("backoff_base_ms", c.http.backoff_base_ms);
    c.http.timeout_s = j.value("timeout_s", c.http.timeout_s);
    c.window = j.value("window", c.window);
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    if (j.contains("pricing")) {
      const auto& p = j["pricing"];
      if (p.contains("prompt_per_1k")) c.cost.prompt_per_1k = parse_decimal(p["prompt_per_1k"].get<std::string>());
      if (p.contains("response_per_1k")) {
        c.cost.response_per_1k = parse_decimal(p["response_per_1k"].get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  if (c.window < 1) throw ConfigError("window must be at least 1");
  if (c.http.retry_budget < 0) throw ConfigError("retry_budget must be non-negative");
  if (c.temperature < 0) throw ConfigError("temperature must be non-negative");
}

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& c, std::uint64_t seed) {
  const std::string& s = c.spec;
  if (s == "mock-perfect") return std::make_unique<OracleBackend>(seed);
  if (s.rfind("mock-faulty:", 0) == 0) {
    std::string rest = s.substr(12);
    auto colon = rest.find(':');
    FaultConfig f;
    std::string rate = rest.substr(0, colon);
    try {
      std::size_t used = 0;
      f.rate = std::stod(rate, &used);
      if (used != rate.size()) throw std::invalid_argument(rate);
    } catch (const std::exception&) {
      throw ConfigError("bad fault rate '" + rate + "'");
    }
    if (colon != std::string::npos) f.kinds = parse_fault_kinds(rest.substr(colon + 1));
    return std::make_unique<OracleBackend>(seed, f);
  }
  if (s.rfind("scripted:", 0) == 0) return ScriptedBackend::from_file(s.substr(9));
  if (s == "http") return std::make_unique<HttpBackend>(c.http);
  throw ConfigError("unknown backend '" + s + "'");
}

RunOutcome run_one(const SchemeConfig& scheme, const ProblemInstance& instance, LlmBackend& backend,
                   const EngineOptions& options, bool timing) {
  RunOutcome out;
  RunRecord& r = out.record;
  r.scheme = scheme.scheme;
  r.usecase = usecase_name(instance.usecase);
  r.size = instance.size;
  r.seed = instance.seed;
  auto start = std::chrono::steady_clock::now();
  std::uint64_t calls_before = backend.calls();
  try {
    out.result = run(scheme.goo, instance, backend, default_registry(), instance.seed, options);
  } catch (const BudgetExceeded&) {
    throw;
  } catch (const BackendFailure& e) {
    r.failed = true;
    r.failure = e.what();
  } catch (const ContractViolation& e) {
    r.failed = true;
    r.failure = e.what();
  }
  if (timing) r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  bool has_truth = instance.truth.has_value();
  if (r.failed) {
    r.calls = backend.calls() - calls_before;
    if (has_truth) {
      r.error_raw = r.error_clipped = instance.size;
      r.positive = 0;
      r.exact = false;
    }
    return out;
  }
  const auto& res = out.result;
  r.calls = res.trace.total_calls();
  r.prompt_tokens = res.ledger.prompt_tokens();
  r.response_tokens = res.ledger.response_tokens();
  r.cost = total_cost(res.ledger, options.cost);
  if (!res.final_thoughts.empty()) {
    const auto& t = res.state.at(res.final_thoughts.front());
    if (t.score) r.score = *t.score;
    if (t.truth) {
      r.error_raw = t.truth->error;
      r.error_clipped = clip_error(t.truth->error, instance.size).value;
      r.positive = positive_score(t.truth->error, instance.size);
      r.exact = t.truth->exact;
    }
  }
  return out;
}

BatchResult run_batch(const SchemeConfig& scheme, const BackendConfig& config, const BatchOptions& options) {
  if (options.samples < 1) throw ConfigError("samples must be at least 1");
  auto backend = make_backend(config, 0);
  auto report = validate_goo(scheme.goo, &default_registry());
  if (!report.ok()) throw ConfigError("invalid plan: " + report.joined());

  BatchResult out;
  EngineOptions eo;
  eo.window = config.window;
  eo.cost = config.cost;
  eo.max_cost = options.max_cost;
  for (int i = 0; i < options.samples; ++i) {
    std::uint64_t seed = options.seed0 + static_cast<std::uint64_t>(i);
    auto instance = generate_instance(scheme.usecase, scheme.size, seed);
    RunOutcome o;
    try {
      o = run_one(scheme, instance, *backend, eo, options.timing);
    } catch (const BudgetExceeded&) {
      out.budget_exceeded = true;
      break;
    }
    if (o.record.failed) out.backend_failed = true;
    eo.spent += o.record.cost;
    if (options.sink) options.sink(o.record);
    out.records.push_back(std::move(o.record));
  }
  return out;
}

double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyInput("no values");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

Summary summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) throw EmptyInput("no records to summarize");
  Summary s;
  s.scheme = records.front().scheme;
  s.usecase = records.front().usecase;
  s.size = records.front().size;
  bool errors = false;
  for (const auto& r : records) {
    if (r.scheme != s.scheme || r.usecase != s.usecase || r.size != s.size) {
      throw MismatchedExperiments("records mix different experiments");
    }
    errors = errors || r.error_clipped.has_value();
  }
  s.metric = errors ? "error" : "score";
  std::vector<double> values;
  for (const auto& r : records) {
    ++s.runs;
    if (r.failed) ++s.failed;
    s.total_cost += r.cost;
    s.calls += r.calls;
    if (errors) {
      values.push_back(static_cast<double>(r.error_clipped.value_or(r.size)));
    } else {
      values.push_back(r.score && std::isfinite(*r.score) ? *r.score : 0.0);
    }
  }
  s.mean_cost = s.total_cost / static_cast<long long>(s.runs);
  s.median = nearest_rank(values, 0.5);
  s.q1 = nearest_rank(values, 0.25);
  s.q3 = nearest_rank(values, 0.75);
  return s;
}

std::string summary_to_json(const Summary& s) {
  ojson j;
  j["format"] = "summary-v1";
  j["scheme"] = s.scheme;
  j["usecase"] = s.usecase;
  j["size"] = s.size;
  j["runs"] = s.runs;
  j["failed"] = s.failed;
  j["metric"] = s.metric;
  j["median"] = s.median;
  j["q1"] = s.q1;
  j["q3"] = s.q3;
  j["total_cost"] = format_rational(s.total_cost);
  j["total_cost_float"] = to_double(s.total_cost);
  j["mean_cost"] = format_rational(s.mean_cost);
  j["mean_cost_float"] = to_double(s.mean_cost);
  j["calls"] = s.calls;
  return j.dump(2) + "\n";
}

Comparison compare(const Summary& a, const Summary& b) {
  if (a.usecase != b.usecase || a.size != b.size || a.metric != b.metric) {
    throw MismatchedExperiments("summaries cover different experiments");
  }
  Comparison c;
  if (b.median == 0) {
    c.median_baseline_zero = true;
  } else {
    c.median_delta = (a.median - b.median) / b.median;
  }
  if (b.mean_cost == 0) {
    c.cost_baseline_zero = true;
  } else {
    c.cost_delta = to_double((a.mean_cost - b.mean_cost) / b.mean_cost);
  }
  return c;
}

std::string comparison_to_json(const Comparison& c) {
  ojson j;
  j["format"] = "compare-v1";
  if (c.median_delta) {
    j["median_delta"] = *c.median_delta;
  } else {
    j["median_delta"] = "baseline zero";
  }
  if (c.cost_delta) {
    j["cost_delta"] = *c.cost_delta;
  } else {
    j["cost_delta"] = "baseline zero";
  }
  return j.dump(2) + "\n";
}

}  // namespace got
