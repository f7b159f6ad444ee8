#include "got/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "got/error.hpp"
#include "got/prompting.hpp"

namespace got {

namespace {

const std::vector<ScorerSpec>& scorers() {
  static const std::vector<ScorerSpec> s{
      {"sorting_error", Polarity::lower_better, false, 1},
      {"intersection_error", Polarity::lower_better, false, 1},
      {"keyword_error", Polarity::lower_better, false, 1},
      {"nda_quality", Polarity::higher_better, true, 3},
  };
  return s;
}

}  // namespace

const ScorerSpec& scorer_spec(const std::string& id) {
  for (const auto& s : scorers()) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown scorer '" + id + "'");
}

bool has_scorer(const std::string& id) {
  return std::any_of(scorers().begin(), scorers().end(), [&](const ScorerSpec& s) { return s.id == id; });
}

bool has_validator(const std::string& id) { return id == "keyword_merge"; }

bool has_comparator(const std::string& id) {
  return id == "sorting" || id == "intersection" || id == "keyword";
}

double worst_score(Polarity p) {
  return p == Polarity::lower_better ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
}

bool better(Polarity p, double a, double b) { return p == Polarity::lower_better ? a < b : a > b; }

std::int64_t sorting_error_scope(const IntList& input, const IntList& output) {
  std::int64_t x = 0;
  for (std::size_t i = 0; i + 1 < output.size(); ++i) {
    if (output[i] > output[i + 1]) ++x;
  }
  std::array<std::int64_t, 10> in{}, out{};
  for (auto v : input) {
    if (v >= 0 && v <= 9) ++in[static_cast<std::size_t>(v)];
  }
  for (auto v : output) {
    if (v >= 0 && v <= 9) ++out[static_cast<std::size_t>(v)];
  }
  std::int64_t y = 0;
  for (std::size_t d = 0; d < 10; ++d) y += std::llabs(in[d] - out[d]);
  return x + y;
}

ScoreValue clip_error(std::int64_t e, std::int64_t n) { return {std::min(e, n), e > n}; }

std::int64_t positive_score(std::int64_t e, std::int64_t n) { return std::max<std::int64_t>(n - e, 0); }

std::int64_t intersection_error_scope(const IntList& a, const IntList& b, const IntList& c) {
  std::set<std::int64_t> sa(a.begin(), a.end());
  std::set<std::int64_t> truth;
  for (auto v : b) {
    if (sa.count(v)) truth.insert(v);
  }
  std::set<std::int64_t> distinct(c.begin(), c.end());
  std::int64_t x1 = 0, x2 = 0;
  for (auto v : distinct) {
    if (!truth.count(v)) ++x1;
  }
  for (auto v : truth) {
    if (!distinct.count(v)) ++x2;
  }
  auto xd = static_cast<std::int64_t>(c.size() - distinct.size());
  return x1 + x2 + xd;
}

std::int64_t keyword_error(const CountMap& computed, const CountMap& truth) {
  std::set<std::string> keys;
  for (const auto& [k, v] : computed.entries()) keys.insert(k);
  for (const auto& [k, v] : truth.entries()) keys.insert(k);
  std::int64_t sum = 0;
  for (const auto& k : keys) sum += std::llabs(computed.get(k) - truth.get(k));
  return sum;
}

double merge_quality(const std::vector<double>& redundancy, const std::vector<double>& retained) {
  if (redundancy.empty() || retained.empty()) throw EmptyInput("merge_quality needs at least one sample of each value");
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) {
      if (!(x >= 0 && x <= 10)) throw OutOfRangeScore("score " + std::to_string(x) + " outside [0, 10]");
      s += x;
    }
    return s / static_cast<double>(v.size());
  };
  double r = mean(redundancy);
  double t = mean(retained);
  if (r + t == 0) return 0;
  return 2 * r * t / (r + t);
}

ScorePair parse_score_pair(const std::string& response) {
  return {parse_tagged_number(response, "Redundancy"), parse_tagged_number(response, "Retained")};
}

ScoreSamples collect_score_samples(const std::vector<std::string>& responses) {
  ScoreSamples s;
  for (const auto& r : responses) {
    try {
      auto p = parse_score_pair(r);
      s.redundancy.push_back(p.redundancy);
      s.retained.push_back(p.retained);
    } catch (const ParseFailure&) {
    }
  }
  if (s.redundancy.empty()) throw AllSamplesUnparseable("no scoring sample could be parsed");
  return s;
}

ScoreSamples llm_merge_score(LlmBackend& backend, const std::array<std::string, 4>& docs,
                             const std::string& candidate, int samples) {
  if (samples < 1) throw InvalidParameters("samples must be at least 1");
  std::string prompt = default_registry().render(
      "nda_score_prompt", {{"doc1", docs[0]}, {"doc2", docs[1]}, {"doc3", docs[2]}, {"doc4", docs[3]}, {"s", candidate}});
  std::vector<std::string> responses;
  for (int i = 0; i < samples; ++i) {
    auto req = CompletionRequest::user(prompt);
    req.call_index = static_cast<std::uint64_t>(i);
    responses.push_back(backend.query(req).texts.at(0));
  }
  return collect_score_samples(responses);
}

bool keyword_merge_validator(const std::vector<CountMap>& parts, const CountMap& merged) {
  return sum_maps(parts) == merged;
}

}  // namespace got
