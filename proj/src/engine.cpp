#include "got/engine.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <set>

#include <nlohmann/json.hpp>

#include "got/error.hpp"
#include "got/scoring.hpp"

namespace got {

std::uint64_t ExecutionTrace::total_calls() const {
  std::uint64_t n = 0;
  for (const auto& r : records) n += r.calls;
  return n;
}

std::string ExecutionTrace::to_jsonl(bool timing) const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["format"] = "trace-v1";
    j["op"] = r.op;
    j["kind"] = op_kind_name(r.kind);
    j["inputs"] = r.inputs;
    j["outputs"] = r.outputs;
    j["calls"] = r.calls;
    j["prompt_tokens"] = r.prompt_tokens;
    j["response_tokens"] = r.response_tokens;
    if (timing) j["wall_ms"] = r.wall_ms;
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

class Runner {
 public:
  Runner(const GraphOfOperations& goo, const ProblemInstance& instance, LlmBackend& backend,
         const PromptRegistry& registry, std::uint64_t seed, const EngineOptions& options)
      : goo_(goo),
        instance_(instance),
        backend_(backend),
        adapter_(make_adapter(instance, registry)),
        seed_(seed),
        options_(options) {}

  RunResult run() {
    Thought root;
    root.content = instance_.input;
    root.subproblem = instance_.input;
    root.cls = "input";
    result_.root = commit({root}, {}).front();

    auto order = goo_.topological_order();
    for (int id : order) {
      const auto& op = goo_.ops.at(id);
      OpRecord rec;
      rec.op = id;
      rec.kind = op.kind;
      if (op.predecessors.empty()) {
        rec.inputs.push_back(result_.root);
      } else {
        for (int p : op.predecessors) {
          const auto& o = outputs_.at(p);
          rec.inputs.insert(rec.inputs.end(), o.begin(), o.end());
        }
      }
      auto start = std::chrono::steady_clock::now();
      current_ = &rec;
      rec.outputs = execute(op, rec.inputs);
      current_ = nullptr;
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      outputs_[id] = rec.outputs;
      result_.trace.records.push_back(std::move(rec));
      check_budget();
    }
    auto sinks = goo_.sinks();
    for (int s : sinks) {
      const auto& o = outputs_.at(s);
      result_.final_thoughts.insert(result_.final_thoughts.end(), o.begin(), o.end());
    }
    return std::move(result_);
  }

 private:
  ReasoningState& state() { return result_.state; }

  std::vector<ThoughtId> commit(std::vector<Thought> thoughts, std::vector<Edge> edges) {
    GraphDelta d;
    std::vector<ThoughtId> ids;
    ThoughtId next = state().next_id();
    for (auto& t : thoughts) {
      t.id = next++;
      ids.push_back(t.id);
    }
    d.v_plus = std::move(thoughts);
    d.e_plus = std::move(edges);
    apply_delta_in_place(state(), d);
    return ids;
  }

  // Issues one call per prompt; call indices are fixed before any call is in flight.
  std::vector<std::string> dispatch(int op, const std::vector<std::string>& prompts) {
    std::vector<CompletionRequest> reqs;
    for (const auto& p : prompts) {
      auto r = CompletionRequest::user(p);
      r.call_index = next_call_++;
      r.seed = seed_;
      reqs.push_back(std::move(r));
    }
    std::vector<CompletionResponse> resps(reqs.size());
    std::size_t window = static_cast<std::size_t>(std::max(1, options_.window));
    for (std::size_t b = 0; b < reqs.size(); b += window) {
      std::size_t e = std::min(reqs.size(), b + window);
      if (e - b == 1) {
        resps[b] = backend_.query(reqs[b]);
        continue;
      }
      std::vector<std::future<CompletionResponse>> fs;
      for (std::size_t i = b; i < e; ++i) {
        fs.push_back(std::async(std::launch::async, [this, &reqs, i] { return backend_.query(reqs[i]); }));
      }
      std::exception_ptr first;
      for (std::size_t i = b; i < e; ++i) {
        try {
          resps[i] = fs[i - b].get();
        } catch (...) {
          if (!first) first = std::current_exception();
        }
      }
      if (first) std::rethrow_exception(first);
    }
    std::vector<std::string> texts;
    for (const auto& r : resps) {
      LedgerEntry entry{op, r.prompt_tokens, r.response_tokens};
      result_.ledger.add(entry);
      current_->calls += 1;
      current_->prompt_tokens += r.prompt_tokens;
      current_->response_tokens += r.response_tokens;
      texts.push_back(r.texts.at(0));
    }
    return texts;
  }

  Thought parsed(const Prepared& p, const std::string& response, int op) {
    Thought t;
    t.cls = p.cls;
    t.subproblem = p.subproblem;
    t.origin_op = op;
    try {
      t.content = adapter_->parse(p.prompt_id, response);
    } catch (const ParseFailure&) {
      t.content = std::monostate{};
      t.valid = false;
    }
    return t;
  }

  std::vector<ThoughtId> execute(const OperationSpec& op, const std::vector<ThoughtId>& inputs) {
    switch (op.kind) {
      case OpKind::generate:
      case OpKind::improve:
        return exec_generate(op, inputs);
      case OpKind::aggregate:
        return exec_aggregate(op, inputs);
      case OpKind::score:
        return exec_score(op, inputs);
      case OpKind::keep_best_n:
        return exec_keep_best_n(op, inputs);
      case OpKind::validate_and_improve:
        return exec_validate_and_improve(op, inputs);
      case OpKind::ground_truth:
        return exec_ground_truth(op, inputs);
    }
    return {};
  }

  std::vector<ThoughtId> exec_generate(const OperationSpec& op, const std::vector<ThoughtId>& inputs) {
    if (inputs.empty()) throw TooFewInputs("op " + std::to_string(op.id) + " has no input thoughts");
    std::vector<Prepared> prepared;
    std::vector<std::string> prompts;
    for (ThoughtId in : inputs) {
      prepared.push_back(adapter_->prepare(op, state().at(in)));
      for (int i = 0; i < op.k; ++i) prompts.push_back(prepared.back().prompt);
    }
    auto texts = dispatch(op.id, prompts);
    EdgeKind kind = op.kind == OpKind::improve ? EdgeKind::refine : EdgeKind::generate;
    std::vector<Thought> thoughts;
    std::vector<ThoughtId> parents;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      std::size_t src = i / static_cast<std::size_t>(op.k);
      thoughts.push_back(parsed(prepared[src], texts[i], op.id));
      parents.push_back(inputs[src]);
    }
    ThoughtId first = state().next_id();
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < thoughts.size(); ++i) {
      edges.push_back({parents[i], first + static_cast<ThoughtId>(i), kind});
    }
    return commit(std::move(thoughts), std::move(edges));
  }

  std::vector<ThoughtId> exec_aggregate(const OperationSpec& op, const std::vector<ThoughtId>& inputs) {
    if (inputs.empty()) throw TooFewInputs("op " + std::to_string(op.id) + " has no input thoughts");
    std::vector<const Thought*> in;
    for (ThoughtId id : inputs) in.push_back(&state().at(id));
    Prepared p = adapter_->prepare_aggregate(op, in);
    auto texts = dispatch(op.id, std::vector<std::string>(static_cast<std::size_t>(op.n), p.prompt));
    std::vector<Thought> thoughts;
    for (const auto& text : texts) thoughts.push_back(parsed(p, text, op.id));
    ThoughtId first = state().next_id();
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < thoughts.size(); ++i) {
      for (ThoughtId src : inputs) edges.push_back({src, first + static_cast<ThoughtId>(i), EdgeKind::aggregate});
    }
    return commit(std::move(thoughts), std::move(edges));
  }

  std::vector<ThoughtId> exec_score(const OperationSpec& op, const std::vector<ThoughtId>& inputs) {
    const auto& spec = scorer_spec(op.scorer_id);
    Polarity pol = adapter_->polarity();
    if (!spec.llm) {
      for (ThoughtId id : inputs) {
        auto& t = state().at(id);
        t.score = std::holds_alternative<std::monostate>(t.content) ? worst_score(pol)
                                                                    : adapter_->local_score(op.scorer_id, t);
      }
      return inputs;
    }
    std::vector<std::string> prompts;
    for (ThoughtId id : inputs) {
      std::string p = adapter_->score_prompt(state().at(id));
      for (int i = 0; i < op.samples; ++i) prompts.push_back(p);
    }
    auto texts = dispatch(op.id, prompts);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      auto& t = state().at(inputs[i]);
      auto first = texts.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(op.samples));
      std::vector<std::string> mine(first, first + op.samples);
      if (std::holds_alternative<std::monostate>(t.content)) {
        t.score = worst_score(pol);
        continue;
      }
      try {
        auto s = collect_score_samples(mine);
        t.score = merge_quality(s.redundancy, s.retained);
      } catch (const AllSamplesUnparseable&) {
        t.score = worst_score(pol);
      } catch (const OutOfRangeScore&) {
        t.score = worst_score(pol);
      }
    }
    return inputs;
  }

  std::vector<ThoughtId> exec_keep_best_n(const OperationSpec& op, const std::vector<ThoughtId>& inputs) {
    std::vector<ThoughtId> cands = inputs;
    if (op.scope == KeepScope::cumulative) {
      for (int a : goo_.ancestors(op.id)) {
        if (goo_.ops.at(a).kind != OpKind::keep_best_n) continue;
        const auto& o = outputs_.at(a);
        cands.insert(cands.end(), o.begin(), o.end());
      }
    }
    std::set<ThoughtId> seen;
    std::vector<const Thought*> ts;
    for (ThoughtId id : cands) {
      if (seen.insert(id).second) ts.push_back(&state().at(id));
    }
    return keep_best(ts, op.n, adapter_->polarity());
  }

  // Parents of the aggregate vertex at the root of a refine chain.
  std::vector<const Thought*> merge_parts(ThoughtId id) {
    ThoughtId cur = id;
    while (true) {
      const auto& in = state().in_edges(cur);
      auto it = std::find_if(in.begin(), in.end(), [](const Edge& e) { return e.kind == EdgeKind::refine; });
      if (it == in.end()) break;
      cur = it->from;
    }
    std::vector<const Thought*> parts;
    for (const auto& e : state().in_edges(cur)) {
      if (e.kind == EdgeKind::aggregate) parts.push_back(&state().at(e.from));
    }
    return parts;
  }

  std::vector<ThoughtId> exec_validate_and_improve(const OperationSpec& op, const std::vector<ThoughtId>& inputs) {
    std::vector<ThoughtId> out;
    for (ThoughtId id : inputs) {
      ThoughtId cur = id;
      bool ok = adapter_->validate(op.validator_id, merge_parts(cur), state().at(cur));
      state().at(cur).valid = ok;
      for (int attempt = 0; !ok && attempt < op.max_attempts; ++attempt) {
        Prepared p = adapter_->prepare_validate_improve(op, merge_parts(cur), state().at(cur));
        auto texts = dispatch(op.id, {p.prompt});
        Thought t = parsed(p, texts.at(0), op.id);
        ThoughtId next = state().next_id();
        commit({std::move(t)}, {{cur, next, EdgeKind::refine}});
        cur = next;
        ok = adapter_->validate(op.validator_id, merge_parts(cur), state().at(cur));
        state().at(cur).valid = ok;
      }
      out.push_back(cur);
    }
    return out;
  }

  std::vector<ThoughtId> exec_ground_truth(const OperationSpec& op, const std::vector<ThoughtId>& inputs) {
    if (!instance_.truth) {
      throw MissingGroundTruth(std::string(usecase_name(instance_.usecase)) + " instance has no ground truth");
    }
    for (ThoughtId id : inputs) {
      auto& t = state().at(id);
      t.truth = adapter_->ground_truth(op.comparator_id, t);
    }
    return inputs;
  }

  void check_budget() {
    if (!options_.max_cost) return;
    rational spent = options_.spent + total_cost(result_.ledger, options_.cost);
    if (spent > *options_.max_cost) {
      throw BudgetExceeded("cost " + format_rational(spent) + " exceeds the cap " + format_rational(*options_.max_cost));
    }
  }

  const GraphOfOperations& goo_;
  const ProblemInstance& instance_;
  LlmBackend& backend_;
  std::unique_ptr<TaskAdapter> adapter_;
  std::uint64_t seed_;
  EngineOptions options_;
  RunResult result_;
  std::map<int, std::vector<ThoughtId>> outputs_;
  std::uint64_t next_call_ = 0;
  OpRecord* current_ = nullptr;
};

}  // namespace

std::vector<ThoughtId> keep_best(std::vector<const Thought*> candidates, int n, Polarity polarity) {
  for (const Thought* t : candidates) {
    if (!t->score) throw UnscoredThought("thought " + std::to_string(t->id) + " has no score");
  }
  std::stable_sort(candidates.begin(), candidates.end(), [polarity](const Thought* a, const Thought* b) {
    if (*a->score != *b->score) return better(polarity, *a->score, *b->score);
    return a->creation_index < b->creation_index;
  });
  std::vector<ThoughtId> out;
  for (std::size_t i = 0; i < candidates.size() && i < static_cast<std::size_t>(n); ++i) out.push_back(candidates[i]->id);
  return out;
}

RunResult run(const GraphOfOperations& goo, const ProblemInstance& instance, LlmBackend& backend,
              const PromptRegistry& registry, std::uint64_t seed, const EngineOptions& options) {
  auto report = validate_goo(goo, &registry);
  if (!report.ok()) throw InvalidGoo(report.joined());
  Runner r(goo, instance, backend, registry, seed, options);
  return r.run();
}

}  // namespace got
