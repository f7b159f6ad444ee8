#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>

#include "got/error.hpp"
#include "got/llm_backend.hpp"
#include "got/prompting.hpp"
#include "got/rng.hpp"
#include "got/usecases.hpp"

namespace got {

const char* fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::drop:
      return "drop";
    case FaultKind::duplicate:
      return "duplicate";
    case FaultKind::swap:
      return "swap";
    case FaultKind::count:
      return "count";
  }
  return "?";
}

std::vector<FaultKind> parse_fault_kinds(std::string_view text) {
  std::vector<FaultKind> out;
  std::stringstream ss{std::string(text)};
  for (std::string name; std::getline(ss, name, ',');) {
    if (name == "drop") {
      out.push_back(FaultKind::drop);
    } else if (name == "duplicate") {
      out.push_back(FaultKind::duplicate);
    } else if (name == "swap") {
      out.push_back(FaultKind::swap);
    } else if (name == "count") {
      out.push_back(FaultKind::count);
    } else {
      throw ConfigError("unknown fault kind '" + name + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty fault kind list");
  return out;
}

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// Text after the last closing block tag, where the task input starts.
std::string_view tail(std::string_view prompt) {
  std::size_t best = 0;
  for (std::string_view tag : {"</Examples>", "</Example>", "</Approach>", "</Instruction>"}) {
    auto pos = prompt.rfind(tag);
    if (pos != std::string_view::npos) best = std::max(best, pos + tag.size());
  }
  return prompt.substr(best);
}

std::string between(std::string_view text, std::string_view open, std::string_view close) {
  auto a = text.find(open);
  if (a == std::string_view::npos) throw BackendFailure("oracle: missing '" + std::string(open) + "'");
  a += open.size();
  auto b = close.empty() ? text.size() : text.find(close, a);
  if (b == std::string_view::npos) throw BackendFailure("oracle: missing '" + std::string(close) + "'");
  return std::string(text.substr(a, b - a));
}

// Body of the last <tag>...</tag> block; instruction lines also mention the tags inline.
std::string last_block(std::string_view text, const std::string& tag) {
  std::string open = "<" + tag + ">", close = "</" + tag + ">";
  auto b = text.rfind(close);
  if (b == std::string_view::npos) throw BackendFailure("oracle: missing " + close);
  auto a = text.rfind(open, b);
  if (a == std::string_view::npos) throw BackendFailure("oracle: missing " + open);
  return trim(text.substr(a + open.size(), b - a - open.size()));
}

std::vector<std::string> nonempty_lines(std::string_view text) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(text)};
  for (std::string line; std::getline(ss, line);) {
    auto t = trim(line);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

int number_after(std::string_view prompt, const std::regex& re) {
  std::string s(prompt);
  std::smatch m;
  if (!std::regex_search(s, m, re)) throw BackendFailure("oracle: cannot read the split count");
  return std::stoi(m[1].str());
}

std::vector<std::string> doc_lines(std::string_view prompt) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (int i = 1; i <= 4; ++i) {
    for (auto& l : nonempty_lines(last_block(prompt, "Doc" + std::to_string(i)))) {
      if (seen.insert(l).second) out.push_back(l);
    }
  }
  return out;
}

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", std::round(v * 10) / 10);
  std::string s = buf;
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s;
}

// The structured answer, so faults can be applied before formatting.
struct answer {
  enum class form { list, lists, map, paragraphs, lines, verbatim } kind = form::verbatim;
  IntList list;
  std::vector<IntList> lists;
  CountMap map;
  std::string map_prefix;
  std::vector<std::vector<std::string>> paragraphs;
  std::vector<std::string> lines;
  std::string text;
};

std::string render(const answer& a) {
  switch (a.kind) {
    case answer::form::list:
      return format_list(a.list);
    case answer::form::lists: {
      std::string s = "{\n";
      for (std::size_t i = 0; i < a.lists.size(); ++i) {
        s += "    \"List " + std::to_string(i + 1) + "\": " + format_list(a.lists[i]);
        s += i + 1 < a.lists.size() ? ",\n" : "\n";
      }
      return s + "}";
    }
    case answer::form::map:
      return a.map_prefix + format_count_map(a.map);
    case answer::form::paragraphs: {
      std::vector<std::string> ps;
      for (const auto& p : a.paragraphs) {
        std::string s;
        for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + p[i];
        ps.push_back(s);
      }
      return format_paragraphs(ps);
    }
    case answer::form::lines: {
      std::string s = "<Merged>\n";
      for (const auto& l : a.lines) s += l + "\n";
      return s + "</Merged>";
    }
    case answer::form::verbatim:
      return a.text;
  }
  return a.text;
}

answer list_answer(IntList l) {
  answer a;
  a.kind = answer::form::list;
  a.list = std::move(l);
  return a;
}

IntList intersect(const IntList& a, const IntList& b) {
  std::set<std::int64_t> in_b(b.begin(), b.end());
  std::set<std::int64_t> seen;
  IntList out;
  for (auto v : a) {
    if (in_b.count(v) && seen.insert(v).second) out.push_back(v);
  }
  return out;
}

answer solve_structured(const std::string& prompt) {
  static const std::regex lists_re(R"(into (\d+) lists)");
  static const std::regex paragraphs_re(R"(into (\d+) paragraphs)");
  auto has = [&](std::string_view phrase) { return prompt.find(phrase) != std::string::npos; };
  std::string_view t = tail(prompt);

  if (has("Split the following list of")) {
    auto k = static_cast<std::size_t>(number_after(prompt, lists_re));
    IntList in = parse_digit_list(t);
    answer a;
    a.kind = answer::form::lists;
    for (std::size_t i = 0; i < k; ++i) {
      a.lists.emplace_back(in.begin() + static_cast<std::ptrdiff_t>(i * in.size() / k),
                           in.begin() + static_cast<std::ptrdiff_t>((i + 1) * in.size() / k));
    }
    return a;
  }
  if (has("Sort the following list of numbers")) {
    IntList l = parse_digit_list(t);
    std::sort(l.begin(), l.end());
    return list_answer(l);
  }
  if (has("Fix the sorted variant")) {
    IntList l = find_int_lists(t).at(0);
    std::sort(l.begin(), l.end());
    return list_answer(l);
  }
  if (has("Merge the following 2 sorted lists")) {
    auto ls = find_int_lists(t);
    if (ls.size() < 2) throw BackendFailure("oracle: merge prompt without two lists");
    IntList l = ls[0];
    l.insert(l.end(), ls[1].begin(), ls[1].end());
    std::sort(l.begin(), l.end());
    return list_answer(l);
  }
  if (has("Find the intersection of two sets") || has("was meant to be the intersection")) {
    auto ls = find_int_lists(t);
    if (ls.size() < 2) throw BackendFailure("oracle: intersection prompt without two sets");
    return list_answer(intersect(ls[0], ls[1]));
  }
  if (has("by appending the second list")) {
    auto ls = find_int_lists(t);
    if (ls.size() < 2) throw BackendFailure("oracle: append prompt without two lists");
    IntList l = ls[0];
    l.insert(l.end(), ls[1].begin(), ls[1].end());
    return list_answer(l);
  }
  if (has("Split the following input text into")) {
    auto k = static_cast<std::size_t>(number_after(prompt, paragraphs_re));
    auto sentences = split_sentences(trim(between(t, "Input:", "")));
    answer a;
    a.kind = answer::form::paragraphs;
    a.paragraphs.resize(k);
    std::size_t base = sentences.size() / k, extra = sentences.size() % k, pos = 0;
    for (std::size_t g = 0; g < k; ++g) {
      for (std::size_t j = 0; j < base + (g < extra ? 1 : 0); ++j) a.paragraphs[g].push_back(sentences[pos++]);
    }
    return a;
  }
  if (has("Count the frequency of how many times each country")) {
    answer a;
    a.kind = answer::form::map;
    a.map_prefix = "Output: ";
    a.map = count_countries(trim(between(t, "Input:", "")));
    return a;
  }
  if (has("meant to contain the frequency of each country")) {
    answer a;
    a.kind = answer::form::map;
    a.map_prefix = "Output: ";
    a.map = count_countries(trim(between(t, "Input:", "\nIncorrect Frequencies:")));
    return a;
  }
  if (has("Combine the following 2 dictionaries")) {
    std::vector<CountMap> maps;
    for (const auto& line : nonempty_lines(between(t, "into a single dictionary:", "Combined Output:"))) {
      maps.push_back(parse_count_map(line));
    }
    answer a;
    a.kind = answer::form::map;
    a.map = sum_maps(maps);
    return a;
  }
  if (has("were combined into the third dictionary")) {
    answer a;
    a.kind = answer::form::map;
    a.map = sum_maps({parse_count_map(between(t, "Dictionary 1:", "\n")), parse_count_map(between(t, "Dictionary 2:", "\n"))});
    return a;
  }
  if (has("Please score the merged NDA")) {
    auto docs = doc_lines(prompt);
    auto cand = nonempty_lines(last_block(prompt, "S"));
    std::set<std::string> unique(cand.begin(), cand.end());
    std::set<std::string> doc_set(docs.begin(), docs.end());
    std::size_t covered = 0;
    for (const auto& l : unique) covered += doc_set.count(l);
    double redundancy = cand.empty() ? 0 : 10.0 * static_cast<double>(unique.size()) / static_cast<double>(cand.size());
    double retained = docs.empty() ? 0 : 10.0 * static_cast<double>(covered) / static_cast<double>(docs.size());
    answer a;
    a.text = "<Redundancy>" + one_decimal(redundancy) + "</Redundancy>\n<Retained>" + one_decimal(retained) +
             "</Retained>";
    return a;
  }
  if (has("Merge the following 4 NDA documents") || has("Combine the merged NDAs") ||
      has("Please improve the merged NDA")) {
    answer a;
    a.kind = answer::form::lines;
    a.lines = doc_lines(prompt);
    return a;
  }
  throw BackendFailure("oracle: unrecognised prompt");
}

template <class T>
bool has_adjacent_difference(const std::vector<T>& v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i] != v[i + 1]) return true;
  }
  return false;
}

template <class T>
void apply_sequence_fault(std::vector<T>& v, FaultKind k, splitmix64& rng) {
  switch (k) {
    case FaultKind::drop:
      v.erase(v.begin() + static_cast<std::ptrdiff_t>(rng.below(v.size())));
      break;
    case FaultKind::duplicate: {
      auto i = static_cast<std::ptrdiff_t>(rng.below(v.size()));
      v.insert(v.begin() + i, v[static_cast<std::size_t>(i)]);
      break;
    }
    case FaultKind::swap: {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i] != v[i + 1]) idx.push_back(i);
      }
      auto i = idx[rng.below(idx.size())];
      std::swap(v[i], v[i + 1]);
      break;
    }
    case FaultKind::count:
      break;
  }
}

template <class T>
bool sequence_fault_applies(const std::vector<T>& v, FaultKind k) {
  switch (k) {
    case FaultKind::drop:
    case FaultKind::duplicate:
      return !v.empty();
    case FaultKind::swap:
      return has_adjacent_difference(v);
    case FaultKind::count:
      return false;
  }
  return false;
}

// Returns false when no configured kind applies to the answer.
bool inject(answer& a, const std::vector<FaultKind>& kinds, splitmix64& rng) {
  std::vector<FaultKind> ok;
  switch (a.kind) {
    case answer::form::list:
      for (auto k : kinds) {
        if (sequence_fault_applies(a.list, k)) ok.push_back(k);
      }
      if (ok.empty()) return false;
      apply_sequence_fault(a.list, ok[rng.below(ok.size())], rng);
      return true;
    case answer::form::lists: {
      // (kind, list) pairs that can take the fault.
      std::vector<std::pair<FaultKind, std::size_t>> opts;
      for (auto k : kinds) {
        for (std::size_t i = 0; i < a.lists.size(); ++i) {
          if (sequence_fault_applies(a.lists[i], k)) {
            opts.emplace_back(k, i);
          }
        }
      }
      if (opts.empty()) return false;
      std::vector<FaultKind> distinct;
      for (auto& [k, i] : opts) {
        if (std::find(distinct.begin(), distinct.end(), k) == distinct.end()) distinct.push_back(k);
      }
      FaultKind k = distinct[rng.below(distinct.size())];
      std::vector<std::size_t> lists;
      for (auto& [kk, i] : opts) {
        if (kk == k) lists.push_back(i);
      }
      apply_sequence_fault(a.lists[lists[rng.below(lists.size())]], k, rng);
      return true;
    }
    case answer::form::map: {
      if (a.map.empty()) return false;
      for (auto k : kinds) {
        if (k == FaultKind::drop || k == FaultKind::count) ok.push_back(k);
      }
      if (ok.empty()) return false;
      const auto& e = a.map.entries()[rng.below(a.map.size())];
      std::string key = e.first;
      std::int64_t v = e.second;
      if (ok[rng.below(ok.size())] == FaultKind::drop) {
        a.map.erase(key);
      } else {
        bool up = v <= 1 || rng.below(2) == 0;
        a.map.set(key, up ? v + 1 : v - 1);
      }
      return true;
    }
    case answer::form::paragraphs: {
      std::vector<std::size_t> filled;
      for (std::size_t i = 0; i < a.paragraphs.size(); ++i) {
        if (!a.paragraphs[i].empty()) filled.push_back(i);
      }
      for (auto k : kinds) {
        if (!filled.empty() && (k == FaultKind::drop || k == FaultKind::duplicate)) ok.push_back(k);
      }
      if (ok.empty()) return false;
      FaultKind k = ok[rng.below(ok.size())];
      apply_sequence_fault(a.paragraphs[filled[rng.below(filled.size())]], k, rng);
      return true;
    }
    case answer::form::lines:
      for (auto k : kinds) {
        if (sequence_fault_applies(a.lines, k)) ok.push_back(k);
      }
      if (ok.empty()) return false;
      apply_sequence_fault(a.lines, ok[rng.below(ok.size())], rng);
      return true;
    case answer::form::verbatim:
      return false;
  }
  return false;
}

}  // namespace

OracleBackend::OracleBackend(std::uint64_t seed, FaultConfig faults) : seed_(seed), faults_(std::move(faults)) {
  if (faults_.rate < 0 || faults_.rate > 1) throw ConfigError("fault rate must be within [0, 1]");
}

std::string OracleBackend::solve(const std::string& prompt) {
  try {
    return render(solve_structured(prompt));
  } catch (const ParseFailure& e) {
    throw BackendFailure(std::string("oracle: unreadable task input: ") + e.what());
  }
}

CompletionResponse OracleBackend::do_query(const CompletionRequest& request) {
  std::string prompt = request.prompt();
  answer base;
  try {
    base = solve_structured(prompt);
  } catch (const ParseFailure& e) {
    throw BackendFailure(std::string("oracle: unreadable task input: ") + e.what());
  }
  splitmix64 rng(mix_seed(mix_seed(seed_, request.seed), mix_seed(fnv1a(prompt), request.call_index)));
  CompletionResponse resp;
  resp.prompt_tokens = count_tokens(prompt);
  for (int i = 0; i < request.n; ++i) {
    answer a = base;
    if (faults_.rate > 0 && rng.unit() < faults_.rate && inject(a, faults_.kinds, rng)) faults_injected_.fetch_add(1);
    resp.texts.push_back(render(a));
    resp.response_tokens += count_tokens(resp.texts.back());
  }
  return resp;
}

}  // namespace got
