#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "got/goo.hpp"
#include "got/llm_backend.hpp"
#include "got/prompting.hpp"
#include "got/thought_graph.hpp"
#include "got/usecases.hpp"

namespace got {

struct OpRecord {
  int op = -1;
  OpKind kind = OpKind::generate;
  std::vector<ThoughtId> inputs;
  std::vector<ThoughtId> outputs;
  std::uint64_t calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t response_tokens = 0;
  double wall_ms = 0;
};

struct ExecutionTrace {
  std::vector<OpRecord> records;

  std::uint64_t total_calls() const;
  // "trace-v1" JSON lines; wall time only when requested so traces stay reproducible.
  std::string to_jsonl(bool timing = false) const;
};

struct EngineOptions {
  // Maximum concurrent backend calls within one operation.
  int window = 1;
  CostModel cost;
  std::optional<rational> max_cost;
  // Cost already spent by earlier runs of the same batch.
  rational spent = 0;
};

struct RunResult {
  ReasoningState state;
  ExecutionTrace trace;
  CostLedger ledger;
  ThoughtId root = 0;
  // Outputs of the sink operation.
  std::vector<ThoughtId> final_thoughts;
};

// Best n by score, ties broken by creation index. Throws UnscoredThought.
std::vector<ThoughtId> keep_best(std::vector<const Thought*> candidates, int n, Polarity polarity);

// Throws InvalidGoo, BackendFailure, BudgetExceeded.
RunResult run(const GraphOfOperations& goo, const ProblemInstance& instance, LlmBackend& backend,
              const PromptRegistry& registry, std::uint64_t seed, const EngineOptions& options = {});

}  // namespace got
