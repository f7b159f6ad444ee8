#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace got {

using rational = boost::multiprecision::cpp_rational;

struct Message {
  std::string role;
  std::string text;
};

struct CompletionRequest {
  std::vector<Message> messages;
  double temperature = 1.0;
  int max_tokens = 4096;
  int n = 1;
  std::vector<std::string> stop;
  // Assigned by the engine at dispatch time; mocks derive their randomness from it.
  std::uint64_t call_index = 0;
  std::uint64_t seed = 0;

  static CompletionRequest user(std::string text);
  // Concatenated message texts.
  std::string prompt() const;
  void check() const;
};

struct CompletionResponse {
  std::vector<std::string> texts;
  std::int64_t prompt_tokens = 0;
  std::int64_t response_tokens = 0;
};

// ceil(bytes / 4)
std::int64_t count_tokens(std::string_view text);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  // Thread-safe; validates the request and the response arity.
  CompletionResponse query(const CompletionRequest& request);
  std::uint64_t calls() const { return calls_.load(); }
  virtual std::string name() const = 0;

 protected:
  virtual CompletionResponse do_query(const CompletionRequest& request) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

struct CostModel {
  rational prompt_per_1k = 0;
  rational response_per_1k = 0;
};

struct LedgerEntry {
  int op = -1;
  std::int64_t prompt_tokens = 0;
  std::int64_t response_tokens = 0;
};

class CostLedger {
 public:
  void add(const LedgerEntry& e);
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::int64_t prompt_tokens() const { return prompt_tokens_; }
  std::int64_t response_tokens() const { return response_tokens_; }

 private:
  std::vector<LedgerEntry> entries_;
  std::int64_t prompt_tokens_ = 0;
  std::int64_t response_tokens_ = 0;
};

rational entry_cost(const LedgerEntry& e, const CostModel& model);
rational total_cost(const CostLedger& ledger, const CostModel& model);

// Exact decimal parsing: "0.0015" -> 3/2000. Throws ConfigError.
rational parse_decimal(std::string_view text);
// "num/den", or "num" when the denominator is 1.
std::string format_rational(const rational& r);
rational parse_rational(std::string_view text);
double to_double(const rational& r);

// Rules match on the prompt digest (hex of FNV-1a) or a substring; the first match wins.
// Each rule cycles through its responses in arrival order.
class ScriptedBackend : public LlmBackend {
 public:
  struct Rule {
    std::string digest;
    std::string contains;
    std::vector<std::string> responses;
  };

  ScriptedBackend(std::vector<Rule> rules, std::vector<std::string> fallback = {});
  // {"rules": [{"digest"|"contains": ..., "responses": [...]}], "default": [...]}
  static std::unique_ptr<ScriptedBackend> from_json(std::string_view text);
  static std::unique_ptr<ScriptedBackend> from_file(const std::string& path);

  std::string name() const override { return "scripted"; }

 protected:
  CompletionResponse do_query(const CompletionRequest& request) override;

 private:
  std::mutex mu_;
  std::vector<Rule> rules_;
  std::vector<std::size_t> cursors_;
  std::vector<std::string> fallback_;
  std::size_t fallback_cursor_ = 0;
};

enum class FaultKind { drop, duplicate, swap, count };

const char* fault_kind_name(FaultKind k);

struct FaultConfig {
  double rate = 0;
  std::vector<FaultKind> kinds{FaultKind::drop, FaultKind::duplicate, FaultKind::swap, FaultKind::count};
};

// "drop,duplicate" -> kinds. Throws ConfigError.
std::vector<FaultKind> parse_fault_kinds(std::string_view text);

// Solves every built-in task from the prompt text. With rate > 0 each response is corrupted
// with that probability by one fault drawn from the kinds applicable to the answer.
class OracleBackend : public LlmBackend {
 public:
  explicit OracleBackend(std::uint64_t seed = 0, FaultConfig faults = {});

  std::string name() const override { return faults_.rate > 0 ? "mock-faulty" : "mock-perfect"; }
  // Number of responses that were corrupted.
  std::uint64_t faults_injected() const { return faults_injected_.load(); }

  // The uncorrupted answer; throws BackendFailure for unrecognised prompts.
  static std::string solve(const std::string& prompt);

 protected:
  CompletionResponse do_query(const CompletionRequest& request) override;

 private:
  std::uint64_t seed_;
  FaultConfig faults_;
  std::atomic<std::uint64_t> faults_injected_{0};
};

struct HttpConfig {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string organization;
  int retry_budget = 3;
  int backoff_base_ms = 1000;
  int timeout_s = 120;
};

// Chat-completion client. Request body: {model, messages, temperature, max_tokens, n, stop?};
// texts come from choices[i].message.content and token counts from usage when present.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(HttpConfig config);
  std::string name() const override { return "http"; }

 protected:
  CompletionResponse do_query(const CompletionRequest& request) override;

 private:
  HttpConfig config_;
  std::string api_key_;
};

}  // namespace got
