#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <set>

#include "got/error.hpp"
#include "got/metrics.hpp"

using namespace got;

namespace {

// Reverse reachability and longest path computed from the raw edge list.
LatencyVolume dfs_oracle(const Topology& t) {
  std::map<ThoughtId, std::vector<ThoughtId>> parents;
  for (const auto& e : t.state.edges()) parents[e.to].push_back(e.from);
  LatencyVolume best;
  for (ThoughtId f : t.finals) {
    std::set<ThoughtId> seen;
    std::vector<ThoughtId> stack{f};
    while (!stack.empty()) {
      ThoughtId v = stack.back();
      stack.pop_back();
      for (ThoughtId p : parents[v]) {
        if (seen.insert(p).second) stack.push_back(p);
      }
    }
    std::map<ThoughtId, std::size_t> depth;
    std::function<std::size_t(ThoughtId)> longest = [&](ThoughtId v) -> std::size_t {
      if (auto it = depth.find(v); it != depth.end()) return it->second;
      std::size_t d = 0;
      for (ThoughtId p : parents[v]) d = std::max(d, longest(p) + 1);
      return depth[v] = d;
    };
    best.latency = std::max(best.latency, longest(f));
    best.volume = std::max(best.volume, seen.size());
  }
  return best;
}

std::vector<Shape> table_shapes() {
  std::vector<Shape> out;
  for (int k : {2, 3}) {
    for (int d : {2, 3, 4}) {
      out.push_back(Shape::chain(d + 1));
      out.push_back(Shape::multi_chain(k, k * d));
      out.push_back(Shape::kary_tree(k, d));
      out.push_back(Shape::hourglass(k, d));
    }
  }
  return out;
}

}  // namespace

TEST(Topology, VertexCounts) {
  auto chain = build_topology(Shape::chain(5));
  EXPECT_EQ(chain.state.vertices().size(), 5u);
  EXPECT_EQ(chain.state.edge_count(), 4u);
  EXPECT_EQ(build_topology(Shape::kary_tree(2, 2)).state.vertices().size(), 7u);
  EXPECT_EQ(build_topology(Shape::hourglass(2, 2)).state.vertices().size(), 10u);
  EXPECT_EQ(vertex_count(Shape::hourglass(2, 2)), 10u);
}

TEST(Topology, Examples) {
  EXPECT_EQ(scheme_metrics(build_topology(Shape::chain(8))), (LatencyVolume{7, 7}));
  EXPECT_EQ(scheme_metrics(build_topology(Shape::kary_tree(2, 3))), (LatencyVolume{3, 3}));
  auto h2 = build_topology(Shape::hourglass(2, 2));
  ASSERT_EQ(h2.finals.size(), 1u);
  EXPECT_EQ(volume(h2.state, h2.finals[0]), 9u);
  auto h3 = build_topology(Shape::hourglass(2, 3));
  EXPECT_EQ(h3.state.vertices().size(), 22u);
  EXPECT_EQ(scheme_metrics(h3), (LatencyVolume{6, 21}));
}

TEST(Topology, ClosedFormsMatchTraversal) {
  for (const auto& s : table_shapes()) {
    auto t = build_topology(s);
    auto traversal = scheme_metrics(t);
    EXPECT_EQ(traversal, dfs_oracle(t)) << shape_name(s.kind) << " k=" << s.k;
    EXPECT_EQ(traversal, closed_form(s)) << shape_name(s.kind) << " k=" << s.k;
    EXPECT_EQ(t.state.vertices().size(), vertex_count(s));
    if (s.kind == ShapeKind::hourglass) {
      EXPECT_EQ(traversal.volume, vertex_count(s) - 1);
      EXPECT_EQ(traversal.latency, static_cast<std::size_t>(2 * s.depth));
    }
  }
}

TEST(Topology, InvalidParameters) {
  EXPECT_THROW(build_topology(Shape::hourglass(1, 2)), InvalidParameters);
  EXPECT_THROW(build_topology(Shape::chain(0)), InvalidParameters);
  EXPECT_THROW(build_topology(Shape::kary_tree(0, 2)), InvalidParameters);
  EXPECT_THROW(parse_shape("torus"), InvalidParameters);
}

TEST(Topology, CsvRows) {
  std::string csv = metrics_csv({Shape::chain(5), Shape::hourglass(2, 2)});
  EXPECT_EQ(csv, "scheme,k,N,latency,volume\nchain,1,5,4,4\nhourglass,2,10,4,9\n");
}
