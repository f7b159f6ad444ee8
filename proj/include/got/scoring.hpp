#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "got/content.hpp"
#include "got/llm_backend.hpp"

namespace got {

enum class Polarity { lower_better, higher_better };

struct ScorerSpec {
  std::string id;
  Polarity polarity = Polarity::lower_better;
  bool llm = false;
  int samples = 1;
};

// Known ids: sorting_error, intersection_error, keyword_error, nda_quality.
const ScorerSpec& scorer_spec(const std::string& id);
bool has_scorer(const std::string& id);
bool has_validator(const std::string& id);
bool has_comparator(const std::string& id);

// Worst value for the polarity; used for unparseable thoughts.
double worst_score(Polarity p);
// True when a ranks strictly before b.
bool better(Polarity p, double a, double b);

struct ScoreValue {
  std::int64_t value = 0;
  bool clipped = false;
};

std::int64_t sorting_error_scope(const IntList& input, const IntList& output);
ScoreValue clip_error(std::int64_t e, std::int64_t n);
std::int64_t positive_score(std::int64_t e, std::int64_t n);
std::int64_t intersection_error_scope(const IntList& a, const IntList& b, const IntList& c);
std::int64_t keyword_error(const CountMap& computed, const CountMap& truth);
// Harmonic mean of the two sample means. Throws OutOfRangeScore, EmptyInput.
double merge_quality(const std::vector<double>& redundancy, const std::vector<double>& retained);

struct ScoreSamples {
  std::vector<double> redundancy;
  std::vector<double> retained;
};

// Parses one scoring response; throws ParseFailure.
ScorePair parse_score_pair(const std::string& response);
// Drops unparseable samples; throws AllSamplesUnparseable when none survive.
ScoreSamples collect_score_samples(const std::vector<std::string>& responses);
ScoreSamples llm_merge_score(LlmBackend& backend, const std::array<std::string, 4>& docs,
                             const std::string& candidate, int samples);

bool keyword_merge_validator(const std::vector<CountMap>& parts, const CountMap& merged);

}  // namespace got
