#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace got {

using IntList = std::vector<std::int64_t>;

struct IntLists {
  std::vector<IntList> lists;
  bool operator==(const IntLists&) const = default;
};

// Insertion-ordered country -> count map. Absent keys count as zero.
class CountMap {
 public:
  CountMap() = default;
  CountMap(std::initializer_list<std::pair<std::string, std::int64_t>> init);

  void add(const std::string& key, std::int64_t value);
  void set(const std::string& key, std::int64_t value);
  std::int64_t get(const std::string& key) const;
  bool contains(const std::string& key) const;
  void erase(const std::string& key);

  const std::vector<std::pair<std::string, std::int64_t>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Order-insensitive; zero entries are ignored.
  bool operator==(const CountMap& other) const;

 private:
  std::vector<std::pair<std::string, std::int64_t>> entries_;
};

CountMap sum_maps(const std::vector<CountMap>& parts);

struct Text {
  std::string value;
  bool operator==(const Text&) const = default;
};

struct Texts {
  std::vector<std::string> values;
  bool operator==(const Texts&) const = default;
};

struct ScorePair {
  double redundancy = 0;
  double retained = 0;
  bool operator==(const ScorePair&) const = default;
};

using Content = std::variant<std::monostate, IntList, IntLists, CountMap, Text, Texts, ScorePair>;

std::string format_list(const IntList& l);
std::string format_count_map(const CountMap& m);
std::string format_paragraphs(const std::vector<std::string>& paragraphs);

// Stable textual form used for digests and traces.
std::string canonical(const Content& c);
std::uint64_t content_digest(const Content& c);
const char* content_kind(const Content& c);

}  // namespace got
