#include "got/thought_graph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "got/error.hpp"
#include "got/rng.hpp"

namespace got {

const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::generate: return "generate";
    case EdgeKind::aggregate: return "aggregate";
    case EdgeKind::refine: return "refine";
  }
  return "?";
}

namespace {
const std::vector<Edge> no_edges;
}

const Thought& ReasoningState::at(ThoughtId id) const {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) throw UnknownThought("unknown thought " + std::to_string(id));
  return it->second;
}

Thought& ReasoningState::at(ThoughtId id) {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) throw UnknownThought("unknown thought " + std::to_string(id));
  return it->second;
}

const std::vector<Edge>& ReasoningState::out_edges(ThoughtId id) const {
  auto it = forward_.find(id);
  return it == forward_.end() ? no_edges : it->second;
}

const std::vector<Edge>& ReasoningState::in_edges(ThoughtId id) const {
  auto it = reverse_.find(id);
  return it == reverse_.end() ? no_edges : it->second;
}

std::vector<Edge> ReasoningState::edges() const {
  std::vector<Edge> out;
  for (const auto& [id, es] : forward_) out.insert(out.end(), es.begin(), es.end());
  return out;
}

std::size_t ReasoningState::edge_count() const {
  std::size_t n = 0;
  for (const auto& [id, es] : forward_) n += es.size();
  return n;
}

bool ReasoningState::has_edge(const Edge& e) const {
  const auto& es = out_edges(e.from);
  return std::find(es.begin(), es.end(), e) != es.end();
}

bool ReasoningState::transpose_consistent() const {
  std::set<Edge> f, r;
  for (const auto& [id, es] : forward_) {
    for (const auto& e : es) {
      if (e.from != id) return false;
      f.insert(e);
    }
  }
  for (const auto& [id, es] : reverse_) {
    for (const auto& e : es) {
      if (e.to != id) return false;
      r.insert(e);
    }
  }
  return f == r;
}

namespace {

bool acyclic(const std::map<ThoughtId, Thought>& vertices,
             const std::map<ThoughtId, std::vector<Edge>>& forward) {
  std::map<ThoughtId, int> indeg;
  for (const auto& [id, t] : vertices) indeg[id] = 0;
  for (const auto& [id, es] : forward) {
    for (const auto& e : es) {
      if (e.kind != EdgeKind::refine) ++indeg[e.to];
    }
  }
  std::vector<ThoughtId> ready;
  for (const auto& [id, d] : indeg) {
    if (d == 0) ready.push_back(id);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    ThoughtId u = ready.back();
    ready.pop_back();
    ++seen;
    auto it = forward.find(u);
    if (it == forward.end()) continue;
    for (const auto& e : it->second) {
      if (e.kind != EdgeKind::refine && --indeg[e.to] == 0) ready.push_back(e.to);
    }
  }
  return seen == indeg.size();
}

}  // namespace

bool ReasoningState::is_dag() const { return acyclic(vertices_, forward_); }

void apply_delta_in_place(ReasoningState& s, const GraphDelta& d) {
  std::set<ThoughtId> removed;
  for (ThoughtId id : d.v_minus) {
    if (!s.contains(id)) throw InconsistentDelta("removal of absent vertex " + std::to_string(id));
    removed.insert(id);
  }
  for (const auto& e : d.e_minus) {
    if (!s.has_edge(e)) {
      throw InconsistentDelta("removal of absent edge " + std::to_string(e.from) + "->" + std::to_string(e.to));
    }
  }

  std::vector<Thought> added = d.v_plus;
  std::set<ThoughtId> added_ids;
  ThoughtId next = s.next_id_;
  for (auto& t : added) {
    if (t.id < 0) t.id = next;
    if (t.id < s.next_id_ || added_ids.count(t.id)) {
      throw InconsistentDelta("thought id " + std::to_string(t.id) + " already used");
    }
    added_ids.insert(t.id);
    next = std::max(next, t.id + 1);
  }

  auto alive = [&](ThoughtId id) {
    return added_ids.count(id) || (s.contains(id) && !removed.count(id));
  };
  for (const auto& e : d.e_plus) {
    if (!alive(e.from) || !alive(e.to)) {
      throw InconsistentDelta("edge endpoint absent: " + std::to_string(e.from) + "->" + std::to_string(e.to));
    }
  }

  ReasoningState next_state = s;
  for (auto& t : added) {
    t.creation_index = next_state.next_creation_++;
    next_state.vertices_.emplace(t.id, t);
  }
  next_state.next_id_ = next;

  auto drop_edge = [&](const Edge& e) {
    std::erase(next_state.forward_[e.from], e);
    std::erase(next_state.reverse_[e.to], e);
  };
  for (const auto& e : d.e_minus) drop_edge(e);
  for (ThoughtId id : removed) {
    for (const auto& e : std::vector<Edge>(next_state.out_edges(id))) drop_edge(e);
    for (const auto& e : std::vector<Edge>(next_state.in_edges(id))) drop_edge(e);
    next_state.vertices_.erase(id);
    next_state.forward_.erase(id);
    next_state.reverse_.erase(id);
  }
  for (const auto& e : d.e_plus) {
    if (next_state.has_edge(e)) continue;
    next_state.forward_[e.from].push_back(e);
    next_state.reverse_[e.to].push_back(e);
  }
  if (!next_state.is_dag()) throw InconsistentDelta("delta introduces a cycle");
  s = std::move(next_state);
}

ReasoningState apply_delta(const ReasoningState& state, const GraphDelta& delta) {
  ReasoningState out = state;
  apply_delta_in_place(out, delta);
  return out;
}

std::set<ThoughtId> ancestors(const ReasoningState& state, ThoughtId id) {
  state.at(id);
  std::set<ThoughtId> seen;
  std::vector<ThoughtId> stack{id};
  while (!stack.empty()) {
    ThoughtId v = stack.back();
    stack.pop_back();
    for (const auto& e : state.in_edges(v)) {
      if (e.from != id && seen.insert(e.from).second) stack.push_back(e.from);
    }
  }
  return seen;
}

std::size_t volume(const ReasoningState& state, ThoughtId id) { return ancestors(state, id).size(); }

std::size_t latency(const ReasoningState& state, ThoughtId id) {
  state.at(id);
  std::map<ThoughtId, std::size_t> memo;
  std::set<ThoughtId> on_stack;
  std::function<std::size_t(ThoughtId)> longest = [&](ThoughtId v) -> std::size_t {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    on_stack.insert(v);
    std::size_t best = 0;
    for (const auto& e : state.in_edges(v)) {
      if (on_stack.count(e.from)) continue;
      best = std::max(best, longest(e.from) + 1);
    }
    on_stack.erase(v);
    memo[v] = best;
    return best;
  };
  return longest(id);
}

std::string export_grs(const ReasoningState& state) {
  std::ostringstream os;
  os << "grs-v1\n";
  for (const auto& [id, t] : state.vertices()) {
    os << "vertex " << id << " class=" << t.cls << " origin=" << t.origin_op << " score=";
    if (t.score) {
      std::ostringstream sc;
      sc.precision(17);
      sc << *t.score;
      os << sc.str();
    } else {
      os << "-";
    }
    os << " valid=" << (t.valid ? (*t.valid ? "1" : "0") : "-");
    os << " kind=" << content_kind(t.content) << " digest=" << hex64(content_digest(t.content));
    if (t.truth) os << " exact=" << (t.truth->exact ? 1 : 0) << " error=" << t.truth->error;
    os << "\n";
  }
  for (const auto& e : state.edges()) {
    os << "edge " << e.from << " " << e.to << " " << edge_kind_name(e.kind) << "\n";
  }
  return os.str();
}

}  // namespace got
