#include "got/metrics.hpp"

#include <algorithm>

#include "got/error.hpp"

namespace got {

const char* shape_name(ShapeKind s) {
  switch (s) {
    case ShapeKind::chain:
      return "chain";
    case ShapeKind::multi_chain:
      return "multichain";
    case ShapeKind::kary_tree:
      return "tree";
    case ShapeKind::hourglass:
      return "hourglass";
  }
  return "?";
}

ShapeKind parse_shape(const std::string& name) {
  if (name == "chain") return ShapeKind::chain;
  if (name == "multichain" || name == "multi_chain") return ShapeKind::multi_chain;
  if (name == "tree" || name == "kary_tree") return ShapeKind::kary_tree;
  if (name == "hourglass") return ShapeKind::hourglass;
  throw InvalidParameters("unknown shape '" + name + "'");
}

namespace {

void check(const Shape& s) {
  if (s.k < 1) throw InvalidParameters("k must be at least 1");
  switch (s.kind) {
    case ShapeKind::chain:
      if (s.n < 1) throw InvalidParameters("N must be at least 1");
      break;
    case ShapeKind::multi_chain:
      if (s.n < 1 || s.n % s.k != 0) throw InvalidParameters("N must be a positive multiple of k");
      break;
    case ShapeKind::kary_tree:
    case ShapeKind::hourglass:
      if (s.depth < 1) throw InvalidParameters("depth must be at least 1");
      if (s.kind == ShapeKind::hourglass && s.k < 2) throw InvalidParameters("hourglass needs k >= 2");
      break;
  }
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

class builder {
 public:
  ThoughtId vertex() {
    Thought t;
    t.id = next_++;
    delta_.v_plus.push_back(std::move(t));
    return next_ - 1;
  }
  void edge(ThoughtId a, ThoughtId b, EdgeKind k = EdgeKind::generate) { delta_.e_plus.push_back({a, b, k}); }
  ReasoningState finish() { return apply_delta(ReasoningState{}, delta_); }

 private:
  GraphDelta delta_;
  ThoughtId next_ = 0;
};

}  // namespace

std::size_t vertex_count(const Shape& s) {
  check(s);
  auto k = static_cast<std::size_t>(s.k);
  std::size_t tree = 0;
  for (int l = 0; l <= s.depth; ++l) tree += ipow(k, l);
  switch (s.kind) {
    case ShapeKind::chain:
      return static_cast<std::size_t>(s.n);
    case ShapeKind::multi_chain:
      return static_cast<std::size_t>(s.n) + 1;
    case ShapeKind::kary_tree:
      return tree;
    case ShapeKind::hourglass:
      return tree + (tree - ipow(k, s.depth));
  }
  return 0;
}

Topology build_topology(const Shape& s) {
  check(s);
  builder b;
  Topology t;
  t.shape = s;
  switch (s.kind) {
    case ShapeKind::chain: {
      ThoughtId prev = b.vertex();
      for (int i = 1; i < s.n; ++i) {
        ThoughtId v = b.vertex();
        b.edge(prev, v);
        prev = v;
      }
      t.finals = {prev};
      break;
    }
    case ShapeKind::multi_chain: {
      ThoughtId root = b.vertex();
      for (int c = 0; c < s.k; ++c) {
        ThoughtId prev = root;
        for (int i = 0; i < s.n / s.k; ++i) {
          ThoughtId v = b.vertex();
          b.edge(prev, v);
          prev = v;
        }
        t.finals.push_back(prev);
      }
      break;
    }
    case ShapeKind::kary_tree:
    case ShapeKind::hourglass: {
      std::vector<ThoughtId> level{b.vertex()};
      for (int d = 0; d < s.depth; ++d) {
        std::vector<ThoughtId> next;
        for (ThoughtId p : level) {
          for (int c = 0; c < s.k; ++c) {
            ThoughtId v = b.vertex();
            b.edge(p, v);
            next.push_back(v);
          }
        }
        level = std::move(next);
      }
      if (s.kind == ShapeKind::kary_tree) {
        t.finals = level;
        break;
      }
      // Mirrored tree: every k consecutive vertices aggregate into one, down to a single sink.
      while (level.size() > 1) {
        std::vector<ThoughtId> next;
        for (std::size_t i = 0; i < level.size(); i += static_cast<std::size_t>(s.k)) {
          ThoughtId v = b.vertex();
          for (std::size_t j = i; j < i + static_cast<std::size_t>(s.k); ++j) b.edge(level[j], v, EdgeKind::aggregate);
          next.push_back(v);
        }
        level = std::move(next);
      }
      t.finals = level;
      break;
    }
  }
  t.state = b.finish();
  return t;
}

LatencyVolume scheme_metrics(const Topology& t) {
  LatencyVolume lv;
  for (ThoughtId f : t.finals) {
    lv.latency = std::max(lv.latency, latency(t.state, f));
    lv.volume = std::max(lv.volume, volume(t.state, f));
  }
  return lv;
}

LatencyVolume closed_form(const Shape& s) {
  check(s);
  auto n = static_cast<std::size_t>(s.n);
  auto k = static_cast<std::size_t>(s.k);
  auto d = static_cast<std::size_t>(s.depth);
  switch (s.kind) {
    case ShapeKind::chain:
      return {n - 1, n - 1};
    case ShapeKind::multi_chain:
      return {n / k, n / k};
    case ShapeKind::kary_tree:
      return {d, d};
    case ShapeKind::hourglass:
      return {2 * d, vertex_count(s) - 1};
  }
  return {};
}

std::string metrics_csv(const std::vector<Shape>& shapes) {
  std::string out = "scheme,k,N,latency,volume\n";
  for (const auto& s : shapes) {
    auto lv = scheme_metrics(build_topology(s));
    out += std::string(shape_name(s.kind)) + "," + std::to_string(s.k) + "," + std::to_string(vertex_count(s)) + "," +
           std::to_string(lv.latency) + "," + std::to_string(lv.volume) + "\n";
  }
  return out;
}

}  // namespace got
