#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "got/content.hpp"

namespace got {

using ThoughtId = std::int64_t;

enum class EdgeKind { generate, aggregate, refine };

const char* edge_kind_name(EdgeKind k);

struct Verdict {
  bool exact = false;
  std::int64_t error = 0;
};

struct Thought {
  ThoughtId id = -1;  // -1 asks apply_delta to assign the next id
  Content content;
  std::string cls = "solution";
  // Local problem the content answers; scorers compare against it.
  Content subproblem;
  std::optional<double> score;
  std::optional<bool> valid;
  int origin_op = -1;
  std::int64_t creation_index = 0;
  std::optional<Verdict> truth;
};

struct Edge {
  ThoughtId from = 0;
  ThoughtId to = 0;
  EdgeKind kind = EdgeKind::generate;
  auto operator<=>(const Edge&) const = default;
};

struct GraphDelta {
  std::vector<Thought> v_plus;
  std::vector<Edge> e_plus;
  std::vector<ThoughtId> v_minus;
  std::vector<Edge> e_minus;

  bool empty() const { return v_plus.empty() && e_plus.empty() && v_minus.empty() && e_minus.empty(); }
};

class ReasoningState {
 public:
  bool contains(ThoughtId id) const { return vertices_.count(id) != 0; }
  const Thought& at(ThoughtId id) const;
  Thought& at(ThoughtId id);

  const std::map<ThoughtId, Thought>& vertices() const { return vertices_; }
  const std::vector<Edge>& out_edges(ThoughtId id) const;
  const std::vector<Edge>& in_edges(ThoughtId id) const;
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;
  bool has_edge(const Edge& e) const;

  ThoughtId next_id() const { return next_id_; }
  std::int64_t next_creation_index() const { return next_creation_; }

  bool transpose_consistent() const;
  // Acyclic over generate/aggregate edges.
  bool is_dag() const;

  friend void apply_delta_in_place(ReasoningState& state, const GraphDelta& delta);

 private:
  std::map<ThoughtId, Thought> vertices_;
  std::map<ThoughtId, std::vector<Edge>> forward_;
  std::map<ThoughtId, std::vector<Edge>> reverse_;
  ThoughtId next_id_ = 0;
  std::int64_t next_creation_ = 0;
};

// Validates the whole delta before touching the state; throws InconsistentDelta.
void apply_delta_in_place(ReasoningState& state, const GraphDelta& delta);
ReasoningState apply_delta(const ReasoningState& state, const GraphDelta& delta);

std::set<ThoughtId> ancestors(const ReasoningState& state, ThoughtId id);
std::size_t volume(const ReasoningState& state, ThoughtId id);
std::size_t latency(const ReasoningState& state, ThoughtId id);

// "grs-v1" text document.
std::string export_grs(const ReasoningState& state);

}  // namespace got
