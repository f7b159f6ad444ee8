#include "got/content.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "got/rng.hpp"

namespace got {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

CountMap::CountMap(std::initializer_list<std::pair<std::string, std::int64_t>> init) {
  for (const auto& [k, v] : init) add(k, v);
}

void CountMap::add(const std::string& key, std::int64_t value) {
  for (auto& e : entries_) {
    if (e.first == key) {
      e.second += value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void CountMap::set(const std::string& key, std::int64_t value) {
  for (auto& e : entries_) {
    if (e.first == key) {
      e.second = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

std::int64_t CountMap::get(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return e.second;
  }
  return 0;
}

bool CountMap::contains(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

void CountMap::erase(const std::string& key) {
  std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
}

bool CountMap::operator==(const CountMap& other) const {
  for (const auto& [k, v] : entries_) {
    if (other.get(k) != v) return false;
  }
  for (const auto& [k, v] : other.entries_) {
    if (get(k) != v) return false;
  }
  return true;
}

CountMap sum_maps(const std::vector<CountMap>& parts) {
  CountMap out;
  for (const auto& p : parts) {
    for (const auto& [k, v] : p.entries()) out.add(k, v);
  }
  return out;
}

std::string format_list(const IntList& l) {
  std::string s = "[";
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(l[i]);
  }
  s += "]";
  return s;
}

std::string format_count_map(const CountMap& m) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : m.entries()) {
    if (!first) s += ", ";
    first = false;
    s += nlohmann::json(k).dump();
    s += ": ";
    s += std::to_string(v);
  }
  s += "}";
  return s;
}

std::string format_paragraphs(const std::vector<std::string>& paragraphs) {
  std::string s = "{\n";
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    s += "    \"Paragraph " + std::to_string(i + 1) + "\": " + nlohmann::json(paragraphs[i]).dump();
    s += i + 1 < paragraphs.size() ? ",\n" : "\n";
  }
  s += "}";
  return s;
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct canonical_visitor {
  std::string operator()(std::monostate) const { return "none"; }
  std::string operator()(const IntList& l) const { return "list:" + format_list(l); }
  std::string operator()(const IntLists& ls) const {
    std::string s = "lists:";
    for (const auto& l : ls.lists) s += format_list(l);
    return s;
  }
  std::string operator()(const CountMap& m) const { return "map:" + format_count_map(m); }
  std::string operator()(const Text& t) const { return "text:" + t.value; }
  std::string operator()(const Texts& ts) const {
    nlohmann::json j = ts.values;
    return "texts:" + j.dump();
  }
  std::string operator()(const ScorePair& p) const {
    return "scores:" + format_double(p.redundancy) + "," + format_double(p.retained);
  }
};

}  // namespace

std::string canonical(const Content& c) { return std::visit(canonical_visitor{}, c); }

std::uint64_t content_digest(const Content& c) { return fnv1a(canonical(c)); }

const char* content_kind(const Content& c) {
  static const char* names[] = {"none", "int_list", "int_lists", "count_map", "text", "texts", "score_pair"};
  return names[c.index()];
}

}  // namespace got
