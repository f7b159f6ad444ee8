#include "got/schemes.hpp"

#include <algorithm>
#include <map>

#include "got/error.hpp"
#include "got/scoring.hpp"

namespace got {

namespace {

struct task_ids {
  std::string base_prompt;
  std::string improve_prompt;
  std::string scorer;
  int score_samples = 1;
  std::string comparator;
  std::string io_variant;
  std::string cot_variant;
};

task_ids ids_for(UseCaseId u) {
  switch (u) {
    case UseCaseId::sorting:
      return {"sort_prompt", "improve_prompt", "sorting_error", 1, "sorting", "default", "cot"};
    case UseCaseId::set_intersection:
      return {"intersect_prompt", "intersect_improve_prompt", "intersection_error", 1, "intersection", "default", "cot"};
    case UseCaseId::keyword_counting:
      return {"count_prompt", "count_improve_prompt", "keyword_error", 1, "keyword", "io", "default"};
    case UseCaseId::document_merging:
      return {"nda_merge_prompt", "nda_improve_prompt", "nda_quality", 3, "", "default", ""};
  }
  throw ConfigError("unknown use case");
}

// Score and keep the best thought of an op; returns the keep op id.
int score_keep(GraphOfOperations& g, int from, const task_ids& ids, int n = 1,
               KeepScope scope = KeepScope::predecessors) {
  int s = g.add(op_score(ids.scorer, {from}, ids.score_samples));
  return g.add(op_keep_best(n, {s}, scope));
}

void finish(GraphOfOperations& g, int last, const task_ids& ids) {
  if (!ids.comparator.empty()) g.add(op_ground_truth(ids.comparator, {last}));
}

// Pairwise merge tree over the leaves; an odd leaf moves up unchanged.
template <class MergeFn>
int merge_tree(std::vector<int> level, MergeFn merge) {
  while (level.size() > 1) {
    bool final_round = level.size() == 2;
    std::vector<int> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(merge(level[i], level[i + 1], final_round));
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
  return level.front();
}

SchemeConfig sorting_got(int size) {
  auto ids = ids_for(UseCaseId::sorting);
  GraphOfOperations g;
  int split = g.add(op_generate(1, "split_prompt_" + std::to_string(size)));
  std::vector<int> leaves;
  for (int i = 0; i < size / 16; ++i) {
    int gen = g.add(op_generate(5, "sort_prompt", {split}, i));
    leaves.push_back(score_keep(g, gen, ids));
  }
  int last = merge_tree(leaves, [&](int a, int b, bool final_round) {
    int agg = g.add(op_aggregate(10, "merge_prompt", {a, b}));
    int kept = score_keep(g, agg, ids);
    int imp = g.add(op_improve(final_round ? 10 : 5, "improve_prompt", {kept}));
    return score_keep(g, imp, ids);
  });
  finish(g, last, ids);
  return {"got", UseCaseId::sorting, size, 0, 0, std::move(g)};
}

SchemeConfig intersection_got(int size) {
  auto ids = ids_for(UseCaseId::set_intersection);
  GraphOfOperations g;
  int split = g.add(op_generate(1, "intersect_split_prompt_" + std::to_string(size)));
  std::vector<int> leaves;
  for (int i = 0; i < size / 16; ++i) {
    int gen = g.add(op_generate(5, "intersect_prompt", {split}, i));
    leaves.push_back(score_keep(g, gen, ids));
  }
  int attempts = size == 128 ? 5 : 10;
  int last = merge_tree(leaves, [&](int a, int b, bool) {
    int agg = g.add(op_aggregate(attempts, "intersect_merge_prompt", {a, b}));
    return score_keep(g, agg, ids);
  });
  finish(g, last, ids);
  return {"got", UseCaseId::set_intersection, size, 0, 0, std::move(g)};
}

SchemeConfig keyword_got(int size, std::string_view variant) {
  auto ids = ids_for(UseCaseId::keyword_counting);
  GraphOfOperations g;
  std::vector<int> leaves;
  if (variant == "gotx") {
    for (int i = 0; i < size; ++i) {
      int gen = g.add(op_generate(10, "count_prompt", {}, i));
      leaves.push_back(score_keep(g, gen, ids));
    }
  } else {
    int parts = variant == "got8" ? 8 : 4;
    int split = g.add(op_generate(1, "count_split_prompt_" + std::to_string(parts)));
    for (int i = 0; i < parts; ++i) {
      int gen = g.add(op_generate(10, "count_prompt", {split}, i));
      leaves.push_back(score_keep(g, gen, ids));
    }
  }
  int last = merge_tree(leaves, [&](int a, int b, bool) {
    int agg = g.add(op_aggregate(1, "merge_count_prompt", {a, b}));
    int vi = g.add(op_validate_improve(3, "keyword_merge", "improve_merge_prompt", {agg}));
    return score_keep(g, vi, ids);
  });
  finish(g, last, ids);
  std::string name = variant.empty() ? "got4" : std::string(variant);
  return {name, UseCaseId::keyword_counting, size, 0, 0, std::move(g)};
}

SchemeConfig document_got() {
  auto ids = ids_for(UseCaseId::document_merging);
  GraphOfOperations g;
  int merge = g.add(op_generate(5, "nda_merge_prompt"));
  int best3 = score_keep(g, merge, ids, 3);
  int agg = g.add(op_aggregate(5, "nda_aggregate_prompt", {best3}));
  int best = score_keep(g, agg, ids, 1, KeepScope::cumulative);
  int imp = g.add(op_improve(10, "nda_improve_prompt", {best}));
  score_keep(g, imp, ids);
  return {"got", UseCaseId::document_merging, 4, 0, 0, std::move(g)};
}

std::string normalize(std::string_view scheme) {
  std::string s(scheme);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return c == '-' ? '_' : std::tolower(c); });
  return s;
}

}  // namespace

SchemeConfig build_got(UseCaseId u, int size, std::string_view variant) {
  check_size(u, size);
  std::string v = normalize(variant);
  if (u == UseCaseId::keyword_counting) {
    if (v.empty() || v == "got") v = "got4";
    if (v != "got4" && v != "got8" && v != "gotx") throw UnsupportedConfiguration("unknown keyword plan '" + v + "'");
    return keyword_got(size, v);
  }
  if (!v.empty() && v != "got") {
    throw UnsupportedConfiguration("plan '" + v + "' is only defined for keyword counting");
  }
  switch (u) {
    case UseCaseId::sorting:
      return sorting_got(size);
    case UseCaseId::set_intersection:
      return intersection_got(size);
    case UseCaseId::document_merging:
      return document_got();
    default:
      break;
  }
  throw UnsupportedConfiguration("no plan for this use case");
}

SchemeConfig build_baseline(std::string_view scheme, UseCaseId u, int size, SchemeParams params) {
  check_size(u, size);
  std::string s = normalize(scheme);
  auto ids = ids_for(u);
  SchemeConfig c{s, u, size, 0, 0, {}};
  GraphOfOperations& g = c.goo;
  auto base = [&](int k, const std::string& variant) {
    auto op = op_generate(k, ids.base_prompt);
    op.variant = variant;
    return g.add(op);
  };
  auto end = [&](int last) {
    if (ids.comparator.empty()) {
      // No reference solution: the final thought carries its score instead.
      if (g.ops.at(last).kind != OpKind::keep_best_n) g.add(op_score(ids.scorer, {last}, ids.score_samples));
    } else {
      g.add(op_ground_truth(ids.comparator, {last}));
    }
  };
  if (s == "io") {
    end(base(1, ids.io_variant));
  } else if (s == "cot") {
    if (ids.cot_variant.empty()) throw UnsupportedConfiguration("no chain-style prompt for document merging");
    end(base(1, ids.cot_variant));
  } else if (s == "cot_sc") {
    if (ids.cot_variant.empty()) throw UnsupportedConfiguration("no chain-style prompt for document merging");
    c.k = params.k > 0 ? params.k : 10;
    end(score_keep(g, base(c.k, ids.cot_variant), ids));
  } else if (s == "tot" || s == "tot2") {
    c.k = params.k > 0 ? params.k : (s == "tot" ? 20 : 10);
    c.levels = params.levels > 0 ? params.levels : (s == "tot" ? 3 : 6);
    int last = score_keep(g, base(c.k, ids.io_variant), ids);
    for (int l = 1; l < c.levels; ++l) {
      int imp = g.add(op_improve(c.k, ids.improve_prompt, {last}));
      last = score_keep(g, imp, ids);
    }
    end(last);
  } else {
    throw UnsupportedConfiguration("unknown scheme '" + std::string(scheme) + "'");
  }
  return c;
}

SchemeConfig build_scheme(std::string_view scheme, UseCaseId u, int size, SchemeParams params) {
  std::string s = normalize(scheme);
  if (s == "got" || s == "got4" || s == "got8" || s == "gotx") return build_got(u, size, s == "got" ? "" : s);
  return build_baseline(s, u, size, params);
}

CallBounds expected_llm_calls(const GraphOfOperations& goo) {
  std::map<int, std::uint64_t> out;
  CallBounds b;
  for (int id : goo.topological_order()) {
    const auto& op = goo.ops.at(id);
    std::uint64_t in = 0;
    if (op.predecessors.empty()) {
      in = 1;
    } else {
      for (int p : op.predecessors) in += out.at(p);
    }
    auto add = [&](std::uint64_t lo, std::uint64_t hi) {
      b.min += lo;
      b.max += hi;
    };
    switch (op.kind) {
      case OpKind::generate:
      case OpKind::improve:
        out[id] = in * static_cast<std::uint64_t>(op.k);
        add(out[id], out[id]);
        break;
      case OpKind::aggregate:
        out[id] = static_cast<std::uint64_t>(op.n);
        add(out[id], out[id]);
        break;
      case OpKind::score: {
        out[id] = in;
        std::uint64_t calls = scorer_spec(op.scorer_id).llm ? in * static_cast<std::uint64_t>(op.samples) : 0;
        add(calls, calls);
        break;
      }
      case OpKind::keep_best_n: {
        std::uint64_t cand = in;
        if (op.scope == KeepScope::cumulative) {
          for (int a : goo.ancestors(id)) {
            if (goo.ops.at(a).kind == OpKind::keep_best_n) cand += out.at(a);
          }
        }
        out[id] = std::min<std::uint64_t>(cand, static_cast<std::uint64_t>(op.n));
        break;
      }
      case OpKind::validate_and_improve:
        out[id] = in;
        add(0, in * static_cast<std::uint64_t>(op.max_attempts));
        break;
      case OpKind::ground_truth:
        out[id] = in;
        break;
    }
  }
  return b;
}

}  // namespace got
