#include "got/goo.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "got/error.hpp"
#include "got/prompting.hpp"
#include "got/scoring.hpp"

namespace got {

namespace {

constexpr std::pair<OpKind, const char*> kind_names[] = {
    {OpKind::generate, "generate"},
    {OpKind::aggregate, "aggregate"},
    {OpKind::improve, "improve"},
    {OpKind::score, "score"},
    {OpKind::validate_and_improve, "validate_and_improve"},
    {OpKind::keep_best_n, "keep_best_n"},
    {OpKind::ground_truth, "ground_truth"},
};

}  // namespace

const char* op_kind_name(OpKind k) {
  for (const auto& [kind, name] : kind_names) {
    if (kind == k) return name;
  }
  return "?";
}

OpKind parse_op_kind(std::string_view name) {
  for (const auto& [kind, n] : kind_names) {
    if (name == n) return kind;
  }
  throw ConfigError("unknown operation kind '" + std::string(name) + "'");
}

int GraphOfOperations::add(OperationSpec spec) {
  if (spec.id < 0) spec.id = ops.empty() ? 0 : ops.rbegin()->first + 1;
  if (ops.count(spec.id)) throw InvalidGoo("duplicate operation id " + std::to_string(spec.id));
  int id = spec.id;
  ops.emplace(id, std::move(spec));
  return id;
}

std::vector<int> GraphOfOperations::roots() const {
  std::vector<int> out;
  for (const auto& [id, op] : ops) {
    if (op.predecessors.empty()) out.push_back(id);
  }
  return out;
}

std::vector<int> GraphOfOperations::successors(int id) const {
  std::vector<int> out;
  for (const auto& [oid, op] : ops) {
    if (std::find(op.predecessors.begin(), op.predecessors.end(), id) != op.predecessors.end()) out.push_back(oid);
  }
  return out;
}

std::vector<int> GraphOfOperations::sinks() const {
  std::set<int> referenced;
  for (const auto& [id, op] : ops) referenced.insert(op.predecessors.begin(), op.predecessors.end());
  std::vector<int> out;
  for (const auto& [id, op] : ops) {
    if (!referenced.count(id)) out.push_back(id);
  }
  return out;
}

std::vector<int> GraphOfOperations::topological_order() const {
  std::map<int, int> pending;
  for (const auto& [id, op] : ops) {
    std::set<int> preds(op.predecessors.begin(), op.predecessors.end());
    int n = 0;
    for (int p : preds) n += ops.count(p) ? 1 : 0;
    pending[id] = n;
  }
  std::set<int> ready;
  for (const auto& [id, n] : pending) {
    if (n == 0) ready.insert(id);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (int s : successors(id)) {
      if (--pending[s] == 0) ready.insert(s);
    }
  }
  if (order.size() != ops.size()) throw InvalidGoo("cycle detected");
  return order;
}

std::vector<int> GraphOfOperations::ancestors(int id) const {
  std::set<int> seen;
  std::vector<int> stack{id};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    auto it = ops.find(v);
    if (it == ops.end()) continue;
    for (int p : it->second.predecessors) {
      if (seen.insert(p).second) stack.push_back(p);
    }
  }
  seen.erase(id);
  return {seen.begin(), seen.end()};
}

std::string ValidationReport::joined() const {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "; ";
    out += e;
  }
  return out;
}

ValidationReport validate_goo(const GraphOfOperations& goo, const PromptRegistry* registry) {
  ValidationReport r;
  if (goo.ops.empty()) {
    r.errors.push_back("empty plan");
    return r;
  }
  auto err = [&](int id, const std::string& msg) { r.errors.push_back("op " + std::to_string(id) + ": " + msg); };

  for (const auto& [id, op] : goo.ops) {
    if (op.id != id) err(id, "id field does not match its key");
    for (int p : op.predecessors) {
      if (!goo.ops.count(p)) err(id, "missing predecessor " + std::to_string(p));
    }
    if (op.k < 1 || op.n < 1 || op.samples < 1 || op.max_attempts < 1) err(id, "parameters must be at least 1");
    auto need_prompt = [&] {
      if (op.prompt_id.empty()) {
        err(id, "missing prompt id");
      } else if (registry && !registry->has(op.prompt_id)) {
        err(id, "unknown prompt '" + op.prompt_id + "'");
      }
    };
    switch (op.kind) {
      case OpKind::generate:
      case OpKind::improve:
      case OpKind::aggregate:
        need_prompt();
        break;
      case OpKind::score:
        if (!has_scorer(op.scorer_id)) err(id, "unknown scorer '" + op.scorer_id + "'");
        break;
      case OpKind::validate_and_improve:
        need_prompt();
        if (!has_validator(op.validator_id)) err(id, "unknown validator '" + op.validator_id + "'");
        break;
      case OpKind::ground_truth:
        if (!has_comparator(op.comparator_id)) err(id, "unknown comparator '" + op.comparator_id + "'");
        break;
      case OpKind::keep_best_n:
        break;
    }
    if (op.kind == OpKind::improve && op.predecessors.empty()) err(id, "improve needs a predecessor");
    if (op.kind == OpKind::validate_and_improve && op.predecessors.empty()) {
      err(id, "validate_and_improve needs a predecessor");
    }
  }

  try {
    goo.topological_order();
  } catch (const InvalidGoo&) {
    r.errors.push_back("cycle detected");
  }

  std::vector<int> gt;
  for (const auto& [id, op] : goo.ops) {
    if (op.kind == OpKind::ground_truth) gt.push_back(id);
  }
  if (!gt.empty()) {
    auto sinks = goo.sinks();
    if (gt.size() != 1 || sinks.size() != 1 || sinks[0] != gt[0]) {
      for (int id : gt) err(id, "ground truth must be the single sink");
    }
  }
  return r;
}

namespace {

nlohmann::ordered_json op_to_json(const OperationSpec& op) {
  nlohmann::ordered_json j;
  j["id"] = op.id;
  j["kind"] = op_kind_name(op.kind);
  switch (op.kind) {
    case OpKind::generate:
    case OpKind::improve:
      j["k"] = op.k;
      j["prompt"] = op.prompt_id;
      break;
    case OpKind::aggregate:
      j["n"] = op.n;
      j["prompt"] = op.prompt_id;
      break;
    case OpKind::score:
      j["samples"] = op.samples;
      j["scorer"] = op.scorer_id;
      break;
    case OpKind::validate_and_improve:
      j["max_attempts"] = op.max_attempts;
      j["validator"] = op.validator_id;
      j["prompt"] = op.prompt_id;
      break;
    case OpKind::keep_best_n:
      j["n"] = op.n;
      j["scope"] = op.scope == KeepScope::cumulative ? "cumulative" : "predecessors";
      break;
    case OpKind::ground_truth:
      j["comparator"] = op.comparator_id;
      break;
  }
  if (op.part) j["part"] = *op.part;
  if (op.variant != "default") j["variant"] = op.variant;
  j["predecessors"] = op.predecessors;
  return j;
}

}  // namespace

std::string goo_to_json(const GraphOfOperations& goo) {
  nlohmann::ordered_json doc;
  doc["format"] = "goo-v1";
  doc["ops"] = nlohmann::ordered_json::array();
  for (const auto& [id, op] : goo.ops) doc["ops"].push_back(op_to_json(op));
  return doc.dump(2) + "\n";
}

GraphOfOperations parse_goo(std::string_view json_text) {
  auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("plan is not a JSON object");
  if (doc.value("format", "") != "goo-v1") throw ConfigError("plan format must be \"goo-v1\"");
  GraphOfOperations goo;
  try {
    for (const auto& j : doc.at("ops")) {
      OperationSpec op;
      op.id = j.at("id").get<int>();
      op.kind = parse_op_kind(j.at("kind").get<std::string>());
      op.k = j.value("k", 1);
      op.n = j.value("n", 1);
      op.samples = j.value("samples", 1);
      op.max_attempts = j.value("max_attempts", 1);
      op.prompt_id = j.value("prompt", "");
      op.scorer_id = j.value("scorer", "");
      op.validator_id = j.value("validator", "");
      op.comparator_id = j.value("comparator", "");
      auto scope = j.value("scope", "predecessors");
      if (scope == "cumulative") {
        op.scope = KeepScope::cumulative;
      } else if (scope != "predecessors") {
        throw ConfigError("unknown keep scope '" + scope + "'");
      }
      if (j.contains("part")) op.part = j.at("part").get<int>();
      op.variant = j.value("variant", "default");
      op.predecessors = j.value("predecessors", std::vector<int>{});
      if (op.id < 0) throw ConfigError("operation ids must be non-negative");
      if (goo.ops.count(op.id)) throw ConfigError("duplicate operation id " + std::to_string(op.id));
      goo.add(std::move(op));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed plan: ") + e.what());
  }
  return goo;
}

OperationSpec op_generate(int k, std::string prompt_id, std::vector<int> preds, std::optional<int> part) {
  OperationSpec op;
  op.kind = OpKind::generate;
  op.k = k;
  op.prompt_id = std::move(prompt_id);
  op.predecessors = std::move(preds);
  op.part = part;
  return op;
}

OperationSpec op_improve(int k, std::string prompt_id, std::vector<int> preds) {
  OperationSpec op = op_generate(k, std::move(prompt_id), std::move(preds));
  op.kind = OpKind::improve;
  return op;
}

OperationSpec op_aggregate(int n, std::string prompt_id, std::vector<int> preds) {
  OperationSpec op;
  op.kind = OpKind::aggregate;
  op.n = n;
  op.prompt_id = std::move(prompt_id);
  op.predecessors = std::move(preds);
  return op;
}

OperationSpec op_score(std::string scorer_id, std::vector<int> preds, int samples) {
  OperationSpec op;
  op.kind = OpKind::score;
  op.scorer_id = std::move(scorer_id);
  op.samples = samples;
  op.predecessors = std::move(preds);
  return op;
}

OperationSpec op_keep_best(int n, std::vector<int> preds, KeepScope scope) {
  OperationSpec op;
  op.kind = OpKind::keep_best_n;
  op.n = n;
  op.scope = scope;
  op.predecessors = std::move(preds);
  return op;
}

OperationSpec op_validate_improve(int max_attempts, std::string validator_id, std::string prompt_id,
                                  std::vector<int> preds) {
  OperationSpec op;
  op.kind = OpKind::validate_and_improve;
  op.max_attempts = max_attempts;
  op.validator_id = std::move(validator_id);
  op.prompt_id = std::move(prompt_id);
  op.predecessors = std::move(preds);
  return op;
}

OperationSpec op_ground_truth(std::string comparator_id, std::vector<int> preds) {
  OperationSpec op;
  op.kind = OpKind::ground_truth;
  op.comparator_id = std::move(comparator_id);
  op.predecessors = std::move(preds);
  return op;
}

}  // namespace got
