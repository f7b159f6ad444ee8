#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace got {

class PromptRegistry;

enum class OpKind { generate, aggregate, improve, score, validate_and_improve, keep_best_n, ground_truth };
enum class KeepScope { predecessors, cumulative };

const char* op_kind_name(OpKind k);
OpKind parse_op_kind(std::string_view name);

struct OperationSpec {
  int id = -1;
  OpKind kind = OpKind::generate;
  int k = 1;             // generate / improve: samples per input
  int n = 1;             // aggregate: attempts; keep_best_n: retained count
  int samples = 1;       // score
  int max_attempts = 1;  // validate_and_improve
  std::string prompt_id;
  std::string scorer_id;
  std::string validator_id;
  std::string comparator_id;
  KeepScope scope = KeepScope::predecessors;
  // Selects one list or paragraph of a split thought.
  std::optional<int> part;
  std::string variant = "default";
  std::vector<int> predecessors;

  bool operator==(const OperationSpec&) const = default;
};

struct GraphOfOperations {
  std::map<int, OperationSpec> ops;

  // Assigns the next free id when spec.id < 0 and returns it.
  int add(OperationSpec spec);
  std::vector<int> roots() const;
  std::vector<int> sinks() const;
  std::vector<int> successors(int id) const;
  // Kahn order, smallest ready id first. Throws InvalidGoo on cycles.
  std::vector<int> topological_order() const;
  // Transitive predecessors of an op.
  std::vector<int> ancestors(int id) const;

  bool operator==(const GraphOfOperations&) const = default;
};

struct ValidationReport {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
  std::string joined() const;
};

// Ids are checked against the prompt registry and the scorer tables when a registry is given.
ValidationReport validate_goo(const GraphOfOperations& goo, const PromptRegistry* registry = nullptr);

// "goo-v1" JSON document: {"format": "goo-v1", "ops": [{"id", "kind", ..., "predecessors"}]}.
GraphOfOperations parse_goo(std::string_view json_text);
std::string goo_to_json(const GraphOfOperations& goo);

// Builder shorthands.
OperationSpec op_generate(int k, std::string prompt_id, std::vector<int> preds = {}, std::optional<int> part = {});
OperationSpec op_improve(int k, std::string prompt_id, std::vector<int> preds);
OperationSpec op_aggregate(int n, std::string prompt_id, std::vector<int> preds);
OperationSpec op_score(std::string scorer_id, std::vector<int> preds, int samples = 1);
OperationSpec op_keep_best(int n, std::vector<int> preds, KeepScope scope = KeepScope::predecessors);
OperationSpec op_validate_improve(int max_attempts, std::string validator_id, std::string prompt_id,
                                  std::vector<int> preds);
OperationSpec op_ground_truth(std::string comparator_id, std::vector<int> preds);

}  // namespace got
