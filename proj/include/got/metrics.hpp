#pragma once

#include <string>
#include <vector>

#include "got/thought_graph.hpp"

namespace got {

enum class ShapeKind { chain, multi_chain, kary_tree, hourglass };

struct Shape {
  ShapeKind kind = ShapeKind::chain;
  int k = 1;
  // Chain and MultiChain use n; trees use depth.
  int n = 1;
  int depth = 0;

  static Shape chain(int n) { return {ShapeKind::chain, 1, n, 0}; }
  static Shape multi_chain(int k, int n) { return {ShapeKind::multi_chain, k, n, 0}; }
  static Shape kary_tree(int k, int depth) { return {ShapeKind::kary_tree, k, 1, depth}; }
  static Shape hourglass(int k, int depth) { return {ShapeKind::hourglass, k, 1, depth}; }
};

const char* shape_name(ShapeKind s);
ShapeKind parse_shape(const std::string& name);

struct Topology {
  Shape shape;
  ReasoningState state;
  // Chain end, per-chain ends, deepest leaves, or the hourglass sink.
  std::vector<ThoughtId> finals;
};

struct LatencyVolume {
  std::size_t latency = 0;
  std::size_t volume = 0;
  bool operator==(const LatencyVolume&) const = default;
};

// Throws InvalidParameters.
Topology build_topology(const Shape& shape);
// Maximum over the final thoughts.
LatencyVolume scheme_metrics(const Topology& t);
// Chain (N-1, N-1); MultiChain (N/k, N/k); KaryTree (depth, depth); Hourglass (2 depth, vertices - 1).
LatencyVolume closed_form(const Shape& shape);
std::size_t vertex_count(const Shape& shape);

// "scheme,k,N,latency,volume" rows.
std::string metrics_csv(const std::vector<Shape>& shapes);

}  // namespace got
