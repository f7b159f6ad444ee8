#include <gtest/gtest.h>

#include <algorithm>

#include "got/engine.hpp"
#include "got/error.hpp"
#include "got/rng.hpp"
#include "got/schemes.hpp"

using namespace got;

namespace {

const PromptRegistry& reg() { return default_registry(); }

GraphOfOperations plan(std::vector<OperationSpec> ops) {
  GraphOfOperations g;
  for (auto& op : ops) g.add(std::move(op));
  return g;
}

std::vector<ThoughtId> outputs_of(const RunResult& r, int op) {
  for (const auto& rec : r.trace.records) {
    if (rec.op == op) return rec.outputs;
  }
  return {};
}

std::size_t solution_vertices(const RunResult& r) {
  std::size_t n = 0;
  for (const auto& [id, t] : r.state.vertices()) n += t.cls != "input";
  return n;
}

ProblemInstance small_sorting(IntList input) {
  IntList truth = input;
  std::sort(truth.begin(), truth.end());
  int n = static_cast<int>(input.size());
  return {UseCaseId::sorting, n, 0, input, truth};
}

const char* const count_phrase = "Count the frequency of how many times each country";
const char* const merge_phrase = "Combine the following 2 dictionaries";
const char* const fix_phrase = "were combined into the third dictionary";

// Two single-sentence counts, one merge, then validate-and-improve.
GraphOfOperations vi_plan() {
  return plan({op_generate(1, "count_prompt", {}, 0), op_generate(1, "count_prompt", {}, 1),
               op_aggregate(1, "merge_count_prompt", {0, 1}), op_validate_improve(3, "keyword_merge", "improve_merge_prompt", {2}),
               op_ground_truth("keyword", {3})});
}

ScriptedBackend vi_backend(std::string merged, std::vector<std::string> fixes) {
  std::vector<ScriptedBackend::Rule> rules;
  if (!fixes.empty()) rules.push_back({"", fix_phrase, std::move(fixes)});
  rules.push_back({"", merge_phrase, {std::move(merged)}});
  rules.push_back({"", count_phrase, {"Output: {\"Peru\": 1, \"Brazil\": 1}", "Output: {\"Brazil\": 1}"}});
  return ScriptedBackend(std::move(rules));
}

const std::string vi_passage = "Peru and Brazil are far apart. Brazil is big.";

}  // namespace

TEST(GooValidation, MissingPredecessor) {
  auto g = plan({op_generate(1, "sort_prompt", {99})});
  auto report = validate_goo(g, &reg());
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_NE(report.errors[0].find("missing predecessor"), std::string::npos);
}

TEST(GooValidation, TwoCycle) {
  GraphOfOperations g;
  OperationSpec a = op_generate(1, "sort_prompt", {1});
  a.id = 0;
  OperationSpec b = op_improve(1, "improve_prompt", {0});
  b.id = 1;
  g.ops[0] = a;
  g.ops[1] = b;
  auto report = validate_goo(g, &reg());
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0], "cycle detected");
  EXPECT_THROW(g.topological_order(), InvalidGoo);
}

TEST(GooValidation, UnknownIdsAndRunRefusal) {
  auto g = plan({op_generate(1, "no_such_prompt"), op_score("no_such_scorer", {0})});
  auto report = validate_goo(g, &reg());
  EXPECT_EQ(report.errors.size(), 2u);
  OracleBackend o;
  EXPECT_THROW(run(g, small_sorting({2, 1}), o, reg(), 0), InvalidGoo);
  EXPECT_EQ(o.calls(), 0u);
}

TEST(GooValidation, JsonRoundTrip) {
  for (auto u : {UseCaseId::sorting, UseCaseId::set_intersection, UseCaseId::keyword_counting, UseCaseId::document_merging}) {
    auto g = build_got(u, u == UseCaseId::keyword_counting ? 16 : (u == UseCaseId::document_merging ? 4 : 64)).goo;
    EXPECT_EQ(parse_goo(goo_to_json(g)), g);
  }
  EXPECT_THROW(parse_goo("{\"format\": \"goo-v1\", \"ops\": [{\"id\": 0, \"kind\": \"teleport\"}]}"), ConfigError);
}

TEST(Engine, MinimalGeneratePlan) {
  auto inst = small_sorting({3, 1, 2});
  OracleBackend o;
  auto r = run(plan({op_generate(1, "sort_prompt")}), inst, o, reg(), 0);
  EXPECT_EQ(r.state.vertices().size(), 2u);
  EXPECT_EQ(r.trace.total_calls(), 1u);
  EXPECT_EQ(o.calls(), 1u);
  EXPECT_EQ(r.state.at(r.root).cls, "input");
}

TEST(Engine, GenerateFanOut) {
  auto inst = generate_instance(UseCaseId::sorting, 32, 1);
  for (int k : {5, 10}) {
    OracleBackend o;
    auto r = run(plan({op_generate(k, "sort_prompt")}), inst, o, reg(), 0);
    ASSERT_EQ(r.final_thoughts.size(), static_cast<std::size_t>(k));
    EXPECT_EQ(r.state.out_edges(r.root).size(), static_cast<std::size_t>(k));
  }
  OracleBackend o;
  auto r = run(plan({op_generate(2, "sort_prompt"), op_improve(1, "improve_prompt", {0})}), inst, o, reg(), 0);
  EXPECT_EQ(r.final_thoughts.size(), 2u);
  for (auto id : r.final_thoughts) {
    ASSERT_EQ(r.state.in_edges(id).size(), 1u);
    EXPECT_EQ(r.state.in_edges(id)[0].kind, EdgeKind::refine);
  }
}

TEST(Engine, AggregateOverSortedHalves) {
  auto inst = generate_instance(UseCaseId::sorting, 32, 2);
  auto g = plan({op_generate(1, "split_prompt_32"), op_generate(1, "sort_prompt", {0}, 0),
                 op_generate(1, "sort_prompt", {0}, 1), op_aggregate(10, "merge_prompt", {1, 2})});
  OracleBackend o;
  auto r = run(g, inst, o, reg(), 0);
  ASSERT_EQ(r.final_thoughts.size(), 10u);
  for (auto id : r.final_thoughts) {
    const auto& in = r.state.in_edges(id);
    ASSERT_EQ(in.size(), 2u);
    EXPECT_EQ(in[0].kind, EdgeKind::aggregate);
    EXPECT_EQ(std::get<IntList>(r.state.at(id).content), std::get<IntList>(*inst.truth));
  }
}

TEST(Engine, SmallestMerge) {
  auto inst = small_sorting({2, 1});
  auto g = plan({op_generate(1, "split_prompt_32"), op_generate(1, "sort_prompt", {0}, 0),
                 op_generate(1, "sort_prompt", {0}, 1), op_aggregate(1, "merge_prompt", {1, 2})});
  OracleBackend o;
  auto r = run(g, inst, o, reg(), 0);
  ASSERT_EQ(r.final_thoughts.size(), 1u);
  EXPECT_EQ(std::get<IntList>(r.state.at(r.final_thoughts[0]).content), (IntList{1, 2}));
}

TEST(Engine, SortingAndIntersectionPlansWithPerfectOracle) {
  struct Case {
    UseCaseId u;
    int size;
    std::uint64_t calls;
  };
  for (auto c : {Case{UseCaseId::sorting, 32, 31}, Case{UseCaseId::set_intersection, 32, 21},
                 Case{UseCaseId::set_intersection, 64, 51}}) {
    auto sc = build_got(c.u, c.size);
    auto inst = generate_instance(c.u, c.size, 5);
    OracleBackend o;
    auto r = run(sc.goo, inst, o, reg(), 5);
    ASSERT_EQ(r.final_thoughts.size(), 1u);
    const auto& t = r.state.at(r.final_thoughts[0]);
    ASSERT_TRUE(t.truth);
    EXPECT_TRUE(t.truth->exact);
    EXPECT_EQ(t.truth->error, 0);
    IntList got_set = std::get<IntList>(t.content), want = std::get<IntList>(*inst.truth);
    std::sort(got_set.begin(), got_set.end());
    std::sort(want.begin(), want.end());
    EXPECT_EQ(got_set, want);
    EXPECT_EQ(r.trace.total_calls(), c.calls);
    EXPECT_EQ(o.calls(), c.calls);
  }
}

TEST(Engine, ConservationTopologicalOrderAndCallAccounting) {
  std::vector<SchemeConfig> configs = {build_got(UseCaseId::sorting, 64), build_got(UseCaseId::set_intersection, 32),
                                       build_got(UseCaseId::keyword_counting, 16, "got4"),
                                       build_baseline("tot", UseCaseId::sorting, 32, {10, 3}),
                                       build_baseline("cot_sc", UseCaseId::set_intersection, 32)};
  for (const auto& sc : configs) {
    auto inst = generate_instance(sc.usecase, sc.size, 3);
    OracleBackend o(1, FaultConfig{0.3});
    auto r = run(sc.goo, inst, o, reg(), 3);
    EXPECT_EQ(r.trace.total_calls(), o.calls()) << sc.scheme;
    std::uint64_t ledger_calls = r.ledger.entries().size();
    EXPECT_EQ(ledger_calls, o.calls());
    std::size_t created = 0;
    std::set<int> done;
    for (const auto& rec : r.trace.records) {
      for (int p : sc.goo.ops.at(rec.op).predecessors) EXPECT_TRUE(done.count(p)) << "op " << rec.op;
      done.insert(rec.op);
      auto k = rec.kind;
      if (k == OpKind::generate || k == OpKind::improve || k == OpKind::aggregate) {
        created += rec.outputs.size();
      } else if (k == OpKind::validate_and_improve) {
        created += rec.calls;
      }
    }
    EXPECT_EQ(solution_vertices(r), created) << sc.scheme;
    EXPECT_EQ(r.state.vertices().size(), created + 1);
    EXPECT_TRUE(r.state.transpose_consistent());
    EXPECT_TRUE(r.state.is_dag());
  }
}

TEST(Engine, DeterministicAcrossRunsAndWindows) {
  auto sc = build_got(UseCaseId::keyword_counting, 16, "got4");
  auto inst = generate_instance(sc.usecase, sc.size, 8);
  std::string first_state, first_trace;
  for (int window : {1, 1, 4}) {
    OracleBackend o(9, FaultConfig{0.4});
    EngineOptions opts;
    opts.window = window;
    auto r = run(sc.goo, inst, o, reg(), 8, opts);
    if (first_state.empty()) {
      first_state = export_grs(r.state);
      first_trace = r.trace.to_jsonl();
    } else {
      EXPECT_EQ(export_grs(r.state), first_state) << "window " << window;
      EXPECT_EQ(r.trace.to_jsonl(), first_trace);
    }
  }
}

TEST(Engine, ScriptedRunsAreDeterministic) {
  auto make = [] { return vi_backend("{\"Peru\": 1, \"Brazil\": 2}", {}); };
  auto inst = keyword_instance(vi_passage);
  auto a = make();
  auto b = make();
  auto ra = run(vi_plan(), inst, a, reg(), 0);
  auto rb = run(vi_plan(), inst, b, reg(), 0);
  EXPECT_EQ(export_grs(ra.state), export_grs(rb.state));
  EXPECT_EQ(ra.trace.to_jsonl(), rb.trace.to_jsonl());
}

TEST(KeepBest, Examples) {
  auto thought = [](ThoughtId id, double score) {
    Thought t;
    t.id = id;
    t.creation_index = id;
    t.score = score;
    return t;
  };
  std::vector<Thought> lower = {thought(1, 1), thought(2, 0), thought(3, 1)};
  std::vector<const Thought*> pl;
  for (auto& t : lower) pl.push_back(&t);
  EXPECT_EQ(keep_best(pl, 1, Polarity::lower_better), std::vector<ThoughtId>{2});

  std::vector<Thought> docs = {thought(1, 6.60), thought(2, 6.87), thought(3, 6.60), thought(4, 5.78), thought(5, 6.50)};
  std::vector<const Thought*> pd;
  for (auto& t : docs) pd.push_back(&t);
  EXPECT_EQ(keep_best(pd, 3, Polarity::higher_better), (std::vector<ThoughtId>{2, 1, 3}));

  std::vector<Thought> tie = {thought(1, 2), thought(2, 2)};
  std::vector<const Thought*> pt{&tie[1], &tie[0]};
  EXPECT_EQ(keep_best(pt, 1, Polarity::lower_better), std::vector<ThoughtId>{1});

  Thought unscored;
  unscored.id = 9;
  EXPECT_THROW(keep_best({&unscored}, 1, Polarity::lower_better), UnscoredThought);
}

TEST(KeepBest, ScalingInvariance1000) {
  splitmix64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    std::size_t m = 1 + rng.below(12);
    std::vector<Thought> ts(m), scaled(m);
    double c = 0.01 + rng.unit() * 100;
    for (std::size_t j = 0; j < m; ++j) {
      ts[j].id = static_cast<ThoughtId>(j);
      ts[j].creation_index = static_cast<std::int64_t>(j);
      ts[j].score = static_cast<double>(rng.below(6));
      scaled[j] = ts[j];
      scaled[j].score = *ts[j].score * c;
    }
    std::vector<const Thought*> a, b;
    for (std::size_t j = 0; j < m; ++j) {
      a.push_back(&ts[j]);
      b.push_back(&scaled[j]);
    }
    int n = 1 + static_cast<int>(rng.below(m));
    for (auto p : {Polarity::lower_better, Polarity::higher_better}) {
      ASSERT_EQ(keep_best(a, n, p), keep_best(b, n, p));
    }
  }
}

TEST(Engine, CumulativeKeepIncludesEarlierBest) {
  auto sc = build_got(UseCaseId::document_merging, 4);
  auto inst = generate_instance(UseCaseId::document_merging, 4, 0);
  OracleBackend o;
  auto r = run(sc.goo, inst, o, reg(), 0);
  EXPECT_EQ(r.trace.total_calls(), 80u);
  ASSERT_EQ(r.final_thoughts.size(), 1u);
  EXPECT_TRUE(r.state.at(r.final_thoughts[0]).score.has_value());
}

TEST(ValidateAndImprove, ValidMergePassesThrough) {
  auto b = vi_backend("{\"Peru\": 1, \"Brazil\": 2}", {});
  auto r = run(vi_plan(), keyword_instance(vi_passage), b, reg(), 0);
  const auto* vi = &r.trace.records.at(3);
  EXPECT_EQ(vi->kind, OpKind::validate_and_improve);
  EXPECT_EQ(vi->calls, 0u);
  EXPECT_EQ(vi->outputs, vi->inputs);
  const auto& t = r.state.at(r.final_thoughts.at(0));
  EXPECT_EQ(t.valid, true);
  EXPECT_EQ(t.truth->error, 0);
  EXPECT_EQ(b.calls(), 3u);
}

TEST(ValidateAndImprove, FixedOnFirstAttempt) {
  auto b = vi_backend("{\"Peru\": 1, \"Brazil\": 1}", {"{\"Peru\": 1, \"Brazil\": 2}"});
  auto r = run(vi_plan(), keyword_instance(vi_passage), b, reg(), 0);
  const auto& vi = r.trace.records.at(3);
  EXPECT_EQ(vi.calls, 1u);
  ThoughtId out = vi.outputs.at(0);
  EXPECT_NE(out, vi.inputs.at(0));
  EXPECT_EQ(r.state.at(out).valid, true);
  EXPECT_EQ(r.state.at(vi.inputs.at(0)).valid, false);
  ASSERT_EQ(r.state.in_edges(out).size(), 1u);
  EXPECT_EQ(r.state.in_edges(out)[0].kind, EdgeKind::refine);
  EXPECT_EQ(r.state.at(out).truth->error, 0);
}

TEST(ValidateAndImprove, ExhaustsAttempts) {
  auto b = vi_backend("{\"Peru\": 1, \"Brazil\": 1}", {"{\"Peru\": 3}", "not a dictionary", "{\"Brazil\": 2}"});
  auto r = run(vi_plan(), keyword_instance(vi_passage), b, reg(), 0);
  const auto& vi = r.trace.records.at(3);
  EXPECT_EQ(vi.calls, 3u);
  const auto& last = r.state.at(vi.outputs.at(0));
  EXPECT_EQ(last.valid, false);
  EXPECT_EQ(std::get<CountMap>(last.content), (CountMap{{"Brazil", 2}}));
  EXPECT_EQ(last.truth->error, 1);
}

TEST(GroundTruth, Verdicts) {
  IntList input{8, 7, 1, 1, 1, 1, 3, 3, 0, 9, 4, 1, 0, 2, 5, 1};
  auto io = plan({op_generate(1, "sort_prompt"), op_ground_truth("sorting", {0})});
  ScriptedBackend perfect({}, {"[0, 0, 1, 1, 1, 1, 1, 1, 2, 3, 3, 4, 5, 7, 8, 9]"});
  auto r1 = run(io, small_sorting(input), perfect, reg(), 0);
  EXPECT_TRUE(r1.state.at(r1.final_thoughts[0]).truth->exact);
  EXPECT_EQ(r1.state.at(r1.final_thoughts[0]).truth->error, 0);

  ScriptedBackend missing({}, {"[0, 0, 1, 1, 1, 1, 1, 2, 3, 3, 4, 5, 7, 8, 9]"});
  auto r2 = run(io, small_sorting(input), missing, reg(), 0);
  EXPECT_FALSE(r2.state.at(r2.final_thoughts[0]).truth->exact);
  EXPECT_EQ(r2.state.at(r2.final_thoughts[0]).truth->error, 1);

  IntList a{11, 60, 1, 49, 21, 33, 14, 56, 54, 15, 23, 40, 45, 22, 7, 28,
            20, 46, 51, 6,  34, 37, 3, 50, 17, 8,  25, 0,  35, 47, 18, 19};
  IntList b{31, 11, 4, 63, 38, 58, 59, 24, 61, 14, 32, 39, 27, 46, 48, 19};
  ProblemInstance inter{UseCaseId::set_intersection, 32, 0, IntLists{{a, b}}, IntList{11, 14, 46, 19}};
  ScriptedBackend dup({}, {"[11, 14, 46, 14, 19]"});
  auto r3 = run(plan({op_generate(1, "intersect_prompt"), op_ground_truth("intersection", {0})}), inter, dup, reg(), 0);
  EXPECT_FALSE(r3.state.at(r3.final_thoughts[0]).truth->exact);
  EXPECT_EQ(r3.state.at(r3.final_thoughts[0]).truth->error, 1);
}

TEST(GroundTruth, MissingTruth) {
  auto inst = generate_instance(UseCaseId::document_merging, 4, 0);
  OracleBackend o;
  auto g = plan({op_generate(1, "nda_merge_prompt"), op_ground_truth("keyword", {0})});
  EXPECT_THROW(run(g, inst, o, reg(), 0), MissingGroundTruth);
}

TEST(Engine, ParseFailureBecomesInvalidThought) {
  auto inst = small_sorting({3, 1, 2});
  ScriptedBackend b({}, {"I cannot sort this.", "[1, 2, 3]"});
  auto g = plan({op_generate(2, "sort_prompt"), op_score("sorting_error", {0}), op_keep_best(1, {1}),
                 op_ground_truth("sorting", {2})});
  auto r = run(g, inst, b, reg(), 0);
  auto gen = outputs_of(r, 0);
  ASSERT_EQ(gen.size(), 2u);
  EXPECT_EQ(r.state.at(gen[0]).valid, false);
  EXPECT_EQ(*r.state.at(gen[0]).score, worst_score(Polarity::lower_better));
  EXPECT_EQ(r.final_thoughts, std::vector<ThoughtId>{gen[1]});
  EXPECT_TRUE(r.state.at(gen[1]).truth->exact);
}

TEST(Engine, BudgetCapAborts) {
  auto sc = build_got(UseCaseId::sorting, 32);
  auto inst = generate_instance(UseCaseId::sorting, 32, 0);
  OracleBackend o;
  EngineOptions opts;
  opts.cost = {parse_decimal("0.0015"), parse_decimal("0.002")};
  opts.max_cost = parse_decimal("0.001");
  EXPECT_THROW(run(sc.goo, inst, o, reg(), 0, opts), BudgetExceeded);
  EXPECT_LT(o.calls(), 31u);
}

TEST(Engine, TraceIsJsonLines) {
  OracleBackend o;
  auto r = run(plan({op_generate(3, "sort_prompt"), op_score("sorting_error", {0}), op_keep_best(1, {1})}),
               small_sorting({2, 1}), o, reg(), 0);
  std::string jl = r.trace.to_jsonl();
  EXPECT_EQ(std::count(jl.begin(), jl.end(), '\n'), 3);
  EXPECT_NE(jl.find("trace-v1"), std::string::npos);
  EXPECT_EQ(jl.find("wall_ms"), std::string::npos);
  EXPECT_NE(r.trace.to_jsonl(true).find("wall_ms"), std::string::npos);
}
