#include "got/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "got/error.hpp"
#include "got/resources.hpp"

namespace got {

namespace {

struct front_matter {
  std::string kind;
  std::map<std::string, std::string> fields;
  std::string rest;
};

front_matter split_front_matter(std::string_view text) {
  front_matter fm;
  std::size_t nl = text.find('\n');
  std::string_view head = text.substr(0, nl);
  if (head.empty() || head[0] != '@') throw MalformedTemplate("missing front-matter line");
  std::istringstream is{std::string(head.substr(1))};
  is >> fm.kind;
  std::string tok;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw MalformedTemplate("bad front-matter field '" + tok + "'");
    fm.fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  if (nl != std::string_view::npos) fm.rest = std::string(text.substr(nl + 1));
  if (!fm.rest.empty() && fm.rest.back() == '\n') fm.rest.pop_back();
  return fm;
}

bool is_name_char(char c) { return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

PromptTemplate parse_template(std::string_view text) {
  auto fm = split_front_matter(text);
  if (fm.kind != "template") throw MalformedTemplate("expected @template");
  PromptTemplate t;
  t.id = fm.fields["id"];
  if (t.id.empty()) throw MalformedTemplate("template without id");
  std::string ph = fm.fields["placeholders"];
  std::stringstream ss(ph);
  for (std::string name; std::getline(ss, name, ',');) {
    if (!name.empty()) t.placeholders.push_back(name);
  }
  t.body = fm.rest;

  std::set<std::string> used;
  std::string lit;
  const std::string& b = t.body;
  for (std::size_t i = 0; i < b.size(); ++i) {
    char c = b[i];
    if (c == '{' && i + 1 < b.size() && b[i + 1] == '{') {
      lit += '{';
      ++i;
    } else if (c == '}' && i + 1 < b.size() && b[i + 1] == '}') {
      lit += '}';
      ++i;
    } else if (c == '{') {
      std::size_t end = b.find('}', i);
      if (end == std::string::npos) throw MalformedTemplate(t.id + ": unterminated placeholder");
      std::string name = b.substr(i + 1, end - i - 1);
      if (name.empty() || !std::all_of(name.begin(), name.end(), is_name_char)) {
        throw MalformedTemplate(t.id + ": bad placeholder '" + name + "'");
      }
      if (!lit.empty()) t.segments.push_back({false, std::move(lit)});
      lit.clear();
      t.segments.push_back({true, name});
      used.insert(name);
      i = end;
    } else if (c == '}') {
      throw MalformedTemplate(t.id + ": stray '}'");
    } else {
      lit += c;
    }
  }
  if (!lit.empty()) t.segments.push_back({false, std::move(lit)});

  t.uses_examples = used.erase("examples") > 0;
  std::set<std::string> declared(t.placeholders.begin(), t.placeholders.end());
  if (used != declared) throw MalformedTemplate(t.id + ": placeholder list does not match body");
  return t;
}

FewShot parse_fewshot(std::string_view text) {
  auto fm = split_front_matter(text);
  if (fm.kind != "fewshot") throw MalformedTemplate("expected @fewshot");
  FewShot f;
  f.id = fm.fields["id"];
  if (f.id.empty()) throw MalformedTemplate("few-shot block without id");
  if (fm.fields.count("variant")) f.variant = fm.fields["variant"];
  f.block = fm.rest;
  return f;
}

void PromptRegistry::add(PromptTemplate t) { templates_[t.id] = std::move(t); }

void PromptRegistry::add(FewShot f) {
  auto key = std::make_pair(f.id, f.variant);
  fewshots_[key] = std::move(f);
}

void PromptRegistry::add_file(std::string_view text) {
  if (text.rfind("@template", 0) == 0) {
    add(parse_template(text));
  } else if (text.rfind("@fewshot", 0) == 0) {
    add(parse_fewshot(text));
  } else {
    throw MalformedTemplate("unknown prompt file kind");
  }
}

PromptRegistry PromptRegistry::builtin() {
  PromptRegistry r;
  for (const auto& e : resources::all()) {
    if (e.path.rfind("prompts/", 0) == 0) r.add_file(e.data);
  }
  return r;
}

PromptRegistry PromptRegistry::load_directory(const std::filesystem::path& dir) {
  PromptRegistry r;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    auto ext = e.path().extension();
    if (ext == ".prompt" || ext == ".fewshot") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    r.add_file(ss.str());
  }
  return r;
}

bool PromptRegistry::has_fewshot(const std::string& id, const std::string& variant) const {
  return fewshots_.count({id, variant}) != 0;
}

const PromptTemplate& PromptRegistry::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw UnknownTemplate("unknown template '" + id + "'");
  return it->second;
}

const FewShot& PromptRegistry::fewshot(const std::string& id, const std::string& variant) const {
  auto it = fewshots_.find({id, variant});
  if (it == fewshots_.end()) throw UnknownTemplate("no few-shot block '" + variant + "' for '" + id + "'");
  return it->second;
}

std::vector<std::string> PromptRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, t] : templates_) out.push_back(id);
  return out;
}

std::string PromptRegistry::render(const std::string& id, const Bindings& bindings,
                                   const std::string& variant) const {
  const auto& t = get(id);
  std::string out;
  for (const auto& seg : t.segments) {
    if (!seg.placeholder) {
      out += seg.text;
    } else if (seg.text == "examples") {
      out += fewshot(id, variant).block;
    } else {
      auto it = bindings.find(seg.text);
      if (it == bindings.end()) throw UnboundPlaceholder(id + ": unbound placeholder '" + seg.text + "'");
      out += it->second;
    }
  }
  for (const auto& name : t.placeholders) {
    if (!bindings.count(name)) throw UnboundPlaceholder(id + ": unbound placeholder '" + name + "'");
  }
  return out;
}

const PromptRegistry& default_registry() {
  static const PromptRegistry r = PromptRegistry::builtin();
  return r;
}

namespace {

void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

bool read_int(std::string_view s, std::size_t& i, std::int64_t& out) {
  std::size_t start = i;
  if (i < s.size() && s[i] == '-') ++i;
  std::size_t digits = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == digits) {
    i = start;
    return false;
  }
  auto [p, ec] = std::from_chars(s.data() + start, s.data() + i, out);
  return ec == std::errc() && p == s.data() + i;
}

// Parses "[a, b, ...]" starting at s[i] == '['.
bool try_list(std::string_view s, std::size_t& i, IntList& out) {
  std::size_t j = i + 1;
  out.clear();
  skip_ws(s, j);
  if (j < s.size() && s[j] == ']') {
    i = j + 1;
    return true;
  }
  while (true) {
    std::int64_t v;
    if (!read_int(s, j, v)) return false;
    out.push_back(v);
    skip_ws(s, j);
    if (j >= s.size()) return false;
    if (s[j] == ']') {
      i = j + 1;
      return true;
    }
    if (s[j] != ',') return false;
    ++j;
    skip_ws(s, j);
  }
}

}  // namespace

std::vector<IntList> find_int_lists(std::string_view text) {
  std::vector<IntList> out;
  std::size_t i = 0;
  while ((i = text.find('[', i)) != std::string_view::npos) {
    IntList l;
    std::size_t j = i;
    if (try_list(text, j, l)) {
      out.push_back(std::move(l));
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

IntList parse_digit_list(std::string_view text) {
  auto lists = find_int_lists(text);
  if (lists.empty()) throw ParseFailure("no list found");
  return lists.back();
}

std::vector<IntList> parse_named_lists(std::string_view text, std::size_t k) {
  auto lists = find_int_lists(text);
  if (lists.size() < k) {
    throw ParseFailure("wrong arity: expected " + std::to_string(k) + " lists, found " + std::to_string(lists.size()));
  }
  return std::vector<IntList>(lists.end() - static_cast<std::ptrdiff_t>(k), lists.end());
}

namespace {

enum class map_result { ok, syntax, non_integer };

bool read_string(std::string_view s, std::size_t& i, std::string& out) {
  if (i >= s.size() || s[i] != '"') return false;
  ++i;
  out.clear();
  while (i < s.size() && s[i] != '"') {
    if (s[i] == '\\' && i + 1 < s.size()) ++i;
    out += s[i++];
  }
  if (i >= s.size()) return false;
  ++i;
  return true;
}

map_result try_map(std::string_view s, CountMap& out) {
  std::size_t i = 1;
  out = CountMap{};
  skip_ws(s, i);
  if (i < s.size() && s[i] == '}') return map_result::ok;
  while (true) {
    std::string key;
    if (!read_string(s, i, key)) return map_result::syntax;
    skip_ws(s, i);
    if (i >= s.size() || s[i] != ':') return map_result::syntax;
    ++i;
    skip_ws(s, i);
    std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != '}') ++i;
    if (i >= s.size()) return map_result::syntax;
    std::string_view token = s.substr(start, i - start);
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) token.remove_suffix(1);
    std::size_t p = 0;
    std::int64_t v;
    if (!read_int(token, p, v) || p != token.size()) return map_result::non_integer;
    out.add(key, v);
    if (s[i] == '}') return map_result::ok;
    ++i;
    skip_ws(s, i);
    if (i < s.size() && s[i] == '}') return map_result::ok;
  }
}

}  // namespace

CountMap parse_count_map(std::string_view text) {
  std::size_t close = text.size();
  bool non_integer = false;
  while (close > 0) {
    close = text.rfind('}', close - 1);
    if (close == std::string_view::npos) break;
    std::size_t open = text.rfind('{', close);
    if (open == std::string_view::npos) break;
    CountMap m;
    auto r = try_map(text.substr(open, close - open + 1), m);
    if (r == map_result::ok) return m;
    if (r == map_result::non_integer) non_integer = true;
    if (close == 0) break;
  }
  if (non_integer) throw NonIntegerFrequency("frequency is not an integer");
  throw ParseFailure("no map found");
}

std::string parse_tagged(std::string_view text, std::string_view tag) {
  std::string open = "<" + std::string(tag) + ">";
  std::string close = "</" + std::string(tag) + ">";
  auto a = text.find(open);
  if (a == std::string_view::npos) throw ParseFailure("missing tag <" + std::string(tag) + ">");
  auto b = text.find(close, a + open.size());
  if (b == std::string_view::npos) throw ParseFailure("missing tag </" + std::string(tag) + ">");
  std::string_view inner = text.substr(a + open.size(), b - a - open.size());
  while (!inner.empty() && std::isspace(static_cast<unsigned char>(inner.front()))) inner.remove_prefix(1);
  while (!inner.empty() && std::isspace(static_cast<unsigned char>(inner.back()))) inner.remove_suffix(1);
  return std::string(inner);
}

double parse_tagged_number(std::string_view text, std::string_view tag) {
  std::string inner = parse_tagged(text, tag);
  double v = 0;
  auto [p, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), v);
  if (inner.empty() || ec != std::errc() || p != inner.data() + inner.size()) {
    throw NonNumericScore("non-numeric score '" + inner + "'");
  }
  return v;
}

std::vector<std::string> parse_paragraphs(std::string_view text, std::size_t k) {
  auto open = text.find('{');
  auto close = text.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw ParseFailure("no paragraph object found");
  }
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(text.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseFailure("paragraph object is not valid JSON");
  std::vector<std::string> out;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) throw ParseFailure("paragraph '" + key + "' is not a string");
    out.push_back(value.get<std::string>());
  }
  if (out.size() < k) {
    throw ParseFailure("wrong arity: expected " + std::to_string(k) + " paragraphs, found " + std::to_string(out.size()));
  }
  out.resize(k);
  return out;
}

}  // namespace got
