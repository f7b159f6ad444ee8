#include "got/usecases.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "got/error.hpp"
#include "got/resources.hpp"
#include "got/rng.hpp"

namespace got {

const char* usecase_name(UseCaseId u) {
  switch (u) {
    case UseCaseId::sorting:
      return "sorting";
    case UseCaseId::set_intersection:
      return "set_intersection";
    case UseCaseId::keyword_counting:
      return "keyword_counting";
    case UseCaseId::document_merging:
      return "document_merging";
  }
  return "?";
}

UseCaseId parse_usecase(std::string_view name) {
  if (name == "sorting" || name == "sort") return UseCaseId::sorting;
  if (name == "set_intersection" || name == "intersection") return UseCaseId::set_intersection;
  if (name == "keyword_counting" || name == "keyword") return UseCaseId::keyword_counting;
  if (name == "document_merging" || name == "docmerge") return UseCaseId::document_merging;
  throw ConfigError("unknown use case '" + std::string(name) + "'");
}

void check_size(UseCaseId u, int size) {
  bool ok = false;
  switch (u) {
    case UseCaseId::sorting:
    case UseCaseId::set_intersection:
      ok = size == 32 || size == 64 || size == 128;
      break;
    case UseCaseId::keyword_counting:
      ok = size >= 1 && size <= 256;
      break;
    case UseCaseId::document_merging:
      ok = size == 4;
      break;
  }
  if (!ok) throw InvalidSize(std::string("size ") + std::to_string(size) + " is not valid for " + usecase_name(u));
}

const std::vector<std::string>& country_pool() {
  static const std::vector<std::string> pool = resources::lines("keyword/countries.txt");
  return pool;
}

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct country_index {
  // First character -> names, longest first.
  std::map<char, std::vector<std::string>> by_first;

  country_index() {
    for (const auto& c : country_pool()) by_first[c[0]].push_back(c);
    for (auto& [ch, names] : by_first) {
      std::stable_sort(names.begin(), names.end(),
                       [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    }
  }
};

const country_index& index() {
  static const country_index idx;
  return idx;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

CountMap count_countries(std::string_view text) {
  const auto& idx = index();
  CountMap out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (i > 0 && word_char(text[i - 1])) {
      ++i;
      continue;
    }
    auto it = idx.by_first.find(text[i]);
    std::size_t matched = 0;
    if (it != idx.by_first.end()) {
      for (const auto& name : it->second) {
        if (text.compare(i, name.size(), name) == 0 &&
            (i + name.size() == text.size() || !word_char(text[i + name.size()]))) {
          out.add(name, 1);
          matched = name.size();
          break;
        }
      }
    }
    i += matched ? matched : 1;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      auto s = trim(text.substr(start, i + 1 - start));
      if (!s.empty()) out.push_back(std::move(s));
      start = i + 1;
    }
  }
  auto rest = trim(text.substr(std::min(start, text.size())));
  if (!rest.empty()) out.push_back(std::move(rest));
  return out;
}

std::vector<std::string> balanced_paragraphs(const std::vector<std::string>& sentences, std::size_t k) {
  std::vector<std::string> out(k);
  if (k == 0) return out;
  std::size_t base = sentences.size() / k, extra = sentences.size() % k, pos = 0;
  for (std::size_t g = 0; g < k; ++g) {
    std::size_t len = base + (g < extra ? 1 : 0);
    for (std::size_t j = 0; j < len; ++j, ++pos) {
      if (j) out[g] += " ";
      out[g] += sentences[pos];
    }
  }
  return out;
}

std::array<std::string, 4> fixture_ndas() {
  std::array<std::string, 4> docs;
  for (std::size_t i = 0; i < 4; ++i) {
    auto data = resources::get("ndas/nda" + std::to_string(i + 1) + ".txt");
    docs[i] = std::string(data);
    while (!docs[i].empty() && docs[i].back() == '\n') docs[i].pop_back();
  }
  return docs;
}

namespace {

const char* const sentence_templates[] = {
    "{0} and {1} signed a new trade agreement last spring.",
    "Travelers often compare the food of {0} with that of {1}.",
    "My cousin spent a year teaching music in {0}.",
    "The documentary followed a river from {0} through {1} to {2}.",
    "Historians still debate how {0} influenced {1}.",
    "A delegation from {0} visited {1} and later returned to {0}.",
    "The festival drew painters from {0}, {1} and {2}.",
    "She mailed postcards from {0} every single week.",
    "Farmers in {0} export coffee beans to {1}.",
    "The football match between {0} and {1} ended in a draw.",
    "Nobody expected the young team from {0} to win the cup.",
    "Scientists from {0} and {1} shared the award.",
};

std::string fill(std::string_view tmpl, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      out += names.at(static_cast<std::size_t>(tmpl[i + 1] - '0'));
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

std::string keyword_passage(int sentences, splitmix64& rng) {
  std::vector<std::string> pool = country_pool();
  rng.shuffle(pool);
  std::size_t distinct = std::max<std::size_t>(4, static_cast<std::size_t>(sentences) / 2);
  pool.resize(std::min(distinct, pool.size()));
  std::string text;
  constexpr std::size_t n_templates = sizeof(sentence_templates) / sizeof(sentence_templates[0]);
  for (int s = 0; s < sentences; ++s) {
    std::vector<std::string> names;
    for (int j = 0; j < 3; ++j) names.push_back(pool[rng.below(pool.size())]);
    if (s) text += " ";
    text += fill(sentence_templates[rng.below(n_templates)], names);
  }
  return text;
}

}  // namespace

ProblemInstance keyword_instance(std::string passage) {
  ProblemInstance p;
  p.usecase = UseCaseId::keyword_counting;
  p.size = static_cast<int>(split_sentences(passage).size());
  p.truth = count_countries(passage);
  p.input = Text{std::move(passage)};
  return p;
}

ProblemInstance generate_instance(UseCaseId u, int size, std::uint64_t seed) {
  check_size(u, size);
  splitmix64 rng(mix_seed(seed, fnv1a(usecase_name(u))));
  ProblemInstance p;
  p.usecase = u;
  p.size = size;
  p.seed = seed;
  switch (u) {
    case UseCaseId::sorting: {
      IntList l;
      for (int i = 0; i < size; ++i) l.push_back(static_cast<std::int64_t>(rng.below(10)));
      IntList sorted = l;
      std::sort(sorted.begin(), sorted.end());
      p.input = l;
      p.truth = sorted;
      break;
    }
    case UseCaseId::set_intersection: {
      IntList universe;
      for (int i = 0; i < 2 * size; ++i) universe.push_back(i);
      rng.shuffle(universe);
      double f = 0.25 + 0.5 * rng.unit();
      auto m = static_cast<std::size_t>(std::llround(f * size));
      IntList a(universe.begin(), universe.begin() + size);
      IntList common = a;
      rng.shuffle(common);
      common.resize(m);
      IntList b = common;
      b.insert(b.end(), universe.begin() + size, universe.begin() + size + (size - static_cast<int>(m)));
      rng.shuffle(b);
      std::set<std::int64_t> in_b(b.begin(), b.end());
      IntList truth;
      for (auto v : a) {
        if (in_b.count(v)) truth.push_back(v);
      }
      p.input = IntLists{{a, b}};
      p.truth = truth;
      break;
    }
    case UseCaseId::keyword_counting: {
      std::string text = keyword_passage(size, rng);
      p.truth = count_countries(text);
      p.input = Text{std::move(text)};
      break;
    }
    case UseCaseId::document_merging: {
      auto docs = fixture_ndas();
      p.input = Texts{{docs.begin(), docs.end()}};
      break;
    }
  }
  return p;
}

// ---- adapters ----

namespace {

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

int suffix_number(const std::string& id) {
  auto pos = id.find_last_of('_');
  return std::stoi(id.substr(pos + 1));
}

IntList list_of(const Content& c) {
  if (auto* l = std::get_if<IntList>(&c)) return *l;
  return {};
}

CountMap map_of(const Content& c) {
  if (auto* m = std::get_if<CountMap>(&c)) return *m;
  return {};
}

std::string text_of(const Content& c) {
  if (auto* t = std::get_if<Text>(&c)) return t->value;
  return {};
}

IntList concat(IntList a, const IntList& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// The part-th list of a split thought, or the thought's own list.
IntList project_list(const Thought& t, std::optional<int> part) {
  if (part) {
    if (auto* ls = std::get_if<IntLists>(&t.content)) {
      if (*part >= 0 && static_cast<std::size_t>(*part) < ls->lists.size()) return ls->lists[*part];
    }
    return {};
  }
  return list_of(t.content);
}

void need_two(const std::vector<const Thought*>& inputs, const std::string& id) {
  if (inputs.size() < 2) throw TooFewInputs(id + " needs two input thoughts, got " + std::to_string(inputs.size()));
  if (inputs.size() > 2) throw UnsupportedConfiguration(id + " combines exactly two thoughts");
}

class SortingAdapter : public TaskAdapter {
 public:
  using TaskAdapter::TaskAdapter;

  Prepared prepare(const OperationSpec& op, const Thought& input) const override {
    const auto& id = op.prompt_id;
    Prepared p{id, {}, {}, "solution"};
    if (starts_with(id, "split_prompt_")) {
      IntList l = list_of(input.content);
      p.prompt = render(id, {{"input_list", format_list(l)}}, op.variant);
      p.subproblem = l;
      p.cls = "split";
    } else if (id == "sort_prompt") {
      IntList l = project_list(input, op.part);
      p.prompt = render(id, {{"input_list", format_list(l)}}, op.variant);
      p.subproblem = l;
    } else if (id == "improve_prompt") {
      IntList sub = list_of(input.subproblem);
      p.prompt = render(id,
                        {{"length", std::to_string(sub.size())},
                         {"input_list", format_list(sub)},
                         {"sorted_list", format_list(list_of(input.content))}},
                        op.variant);
      p.subproblem = sub;
    } else {
      unsupported("prompt " + id);
    }
    return p;
  }

  Prepared prepare_aggregate(const OperationSpec& op, const std::vector<const Thought*>& in) const override {
    if (op.prompt_id != "merge_prompt") unsupported("aggregate prompt " + op.prompt_id);
    need_two(in, op.prompt_id);
    IntList s1 = list_of(in[0]->subproblem), s2 = list_of(in[1]->subproblem);
    Prepared p{op.prompt_id, {}, concat(s1, s2), "solution"};
    p.prompt = render(op.prompt_id,
                      {{"length", std::to_string(s1.size())},
                       {"length_combined", std::to_string(s1.size() + s2.size())},
                       {"input_list1", format_list(list_of(in[0]->content))},
                       {"input_list2", format_list(list_of(in[1]->content))}},
                      op.variant);
    return p;
  }

  Content parse(const std::string& id, const std::string& response) const override {
    if (starts_with(id, "split_prompt_")) {
      return IntLists{parse_named_lists(response, static_cast<std::size_t>(suffix_number(id) / 16))};
    }
    return parse_digit_list(response);
  }

  double local_score(const std::string& scorer_id, const Thought& t) const override {
    if (scorer_id != "sorting_error") return TaskAdapter::local_score(scorer_id, t);
    return static_cast<double>(sorting_error_scope(list_of(t.subproblem), list_of(t.content)));
  }

  Verdict ground_truth(const std::string& comparator_id, const Thought& t) const override {
    if (comparator_id != "sorting") return TaskAdapter::ground_truth(comparator_id, t);
    IntList out = list_of(t.content);
    return {out == list_of(*instance_.truth), sorting_error_scope(list_of(instance_.input), out)};
  }
};

class IntersectionAdapter : public TaskAdapter {
 public:
  using TaskAdapter::TaskAdapter;

  const IntList& set_a() const { return std::get<IntLists>(instance_.input).lists.at(0); }
  const IntList& set_b() const { return std::get<IntLists>(instance_.input).lists.at(1); }

  Prepared prepare(const OperationSpec& op, const Thought& input) const override {
    const auto& id = op.prompt_id;
    Prepared p{id, {}, {}, "solution"};
    if (starts_with(id, "intersect_split_prompt_")) {
      p.prompt = render(id, {{"input", format_list(set_b())}}, op.variant);
      p.subproblem = instance_.input;
      p.cls = "split";
    } else if (id == "intersect_prompt") {
      IntList b = op.part ? project_list(input, op.part) : set_b();
      p.prompt = render(id, {{"set1", format_list(set_a())}, {"set2", format_list(b)}}, op.variant);
      p.subproblem = IntLists{{set_a(), b}};
    } else if (id == "intersect_improve_prompt") {
      auto sub = std::get_if<IntLists>(&input.subproblem);
      IntLists s = sub && sub->lists.size() == 2 ? *sub : IntLists{{set_a(), set_b()}};
      p.prompt = render(id,
                        {{"set1", format_list(s.lists[0])},
                         {"set2", format_list(s.lists[1])},
                         {"result", format_list(list_of(input.content))}},
                        op.variant);
      p.subproblem = s;
    } else {
      unsupported("prompt " + id);
    }
    return p;
  }

  Prepared prepare_aggregate(const OperationSpec& op, const std::vector<const Thought*>& in) const override {
    if (op.prompt_id != "intersect_merge_prompt") unsupported("aggregate prompt " + op.prompt_id);
    need_two(in, op.prompt_id);
    IntList b;
    for (const auto* t : in) {
      if (auto* s = std::get_if<IntLists>(&t->subproblem); s && s->lists.size() == 2) b = concat(b, s->lists[1]);
    }
    Prepared p{op.prompt_id, {}, IntLists{{set_a(), b}}, "solution"};
    p.prompt = render(op.prompt_id,
                      {{"input1", format_list(list_of(in[0]->content))},
                       {"input2", format_list(list_of(in[1]->content))}},
                      op.variant);
    return p;
  }

  Content parse(const std::string& id, const std::string& response) const override {
    if (starts_with(id, "intersect_split_prompt_")) {
      return IntLists{parse_named_lists(response, static_cast<std::size_t>(suffix_number(id) / 16))};
    }
    return parse_digit_list(response);
  }

  double local_score(const std::string& scorer_id, const Thought& t) const override {
    if (scorer_id != "intersection_error") return TaskAdapter::local_score(scorer_id, t);
    auto sub = std::get_if<IntLists>(&t.subproblem);
    if (!sub || sub->lists.size() != 2) return worst_score(polarity());
    return static_cast<double>(intersection_error_scope(sub->lists[0], sub->lists[1], list_of(t.content)));
  }

  Verdict ground_truth(const std::string& comparator_id, const Thought& t) const override {
    if (comparator_id != "intersection") return TaskAdapter::ground_truth(comparator_id, t);
    auto e = intersection_error_scope(set_a(), set_b(), list_of(t.content));
    return {e == 0, e};
  }
};

class KeywordAdapter : public TaskAdapter {
 public:
  using TaskAdapter::TaskAdapter;

  Prepared prepare(const OperationSpec& op, const Thought& input) const override {
    const auto& id = op.prompt_id;
    Prepared p{id, {}, {}, "solution"};
    if (starts_with(id, "count_split_prompt_")) {
      std::string text = text_of(input.content);
      p.prompt = render(id, {{"input_text", text}}, op.variant);
      p.subproblem = Text{text};
      p.cls = "split";
    } else if (id == "count_prompt") {
      std::string text = project_text(input, op.part);
      p.prompt = render(id, {{"input_text", text}}, op.variant);
      p.subproblem = Text{text};
    } else if (id == "count_improve_prompt") {
      std::string text = text_of(input.subproblem);
      p.prompt = render(id, {{"input_text", text}, {"dictionary_incorrect", format_count_map(map_of(input.content))}},
                        op.variant);
      p.subproblem = Text{text};
    } else {
      unsupported("prompt " + id);
    }
    return p;
  }

  Prepared prepare_aggregate(const OperationSpec& op, const std::vector<const Thought*>& in) const override {
    if (op.prompt_id != "merge_count_prompt") unsupported("aggregate prompt " + op.prompt_id);
    need_two(in, op.prompt_id);
    Prepared p{op.prompt_id, {}, Text{join_texts(in)}, "solution"};
    p.prompt = render(op.prompt_id,
                      {{"dictionary_1", format_count_map(map_of(in[0]->content))},
                       {"dictionary_2", format_count_map(map_of(in[1]->content))}},
                      op.variant);
    return p;
  }

  Content parse(const std::string& id, const std::string& response) const override {
    if (starts_with(id, "count_split_prompt_")) {
      return Texts{parse_paragraphs(response, static_cast<std::size_t>(suffix_number(id)))};
    }
    return parse_count_map(response);
  }

  double local_score(const std::string& scorer_id, const Thought& t) const override {
    if (scorer_id != "keyword_error") return TaskAdapter::local_score(scorer_id, t);
    return static_cast<double>(keyword_error(map_of(t.content), count_countries(text_of(t.subproblem))));
  }

  bool validate(const std::string& validator_id, const std::vector<const Thought*>& parts,
                const Thought& t) const override {
    if (validator_id != "keyword_merge") return TaskAdapter::validate(validator_id, parts, t);
    if (!std::holds_alternative<CountMap>(t.content)) return false;
    std::vector<CountMap> maps;
    for (const auto* p : parts) maps.push_back(map_of(p->content));
    return keyword_merge_validator(maps, map_of(t.content));
  }

  Prepared prepare_validate_improve(const OperationSpec& op, const std::vector<const Thought*>& parts,
                                    const Thought& t) const override {
    if (op.prompt_id != "improve_merge_prompt") unsupported("improve prompt " + op.prompt_id);
    need_two(parts, op.prompt_id);
    Prepared p{op.prompt_id, {}, t.subproblem, "solution"};
    p.prompt = render(op.prompt_id,
                      {{"dictionary_1", format_count_map(map_of(parts[0]->content))},
                       {"dictionary_2", format_count_map(map_of(parts[1]->content))},
                       {"dictionary_incorrect", format_count_map(map_of(t.content))}},
                      op.variant);
    return p;
  }

  Verdict ground_truth(const std::string& comparator_id, const Thought& t) const override {
    if (comparator_id != "keyword") return TaskAdapter::ground_truth(comparator_id, t);
    auto e = keyword_error(map_of(t.content), map_of(*instance_.truth));
    return {e == 0, e};
  }

 private:
  static std::string project_text(const Thought& t, std::optional<int> part) {
    if (!part) return text_of(t.content);
    if (auto* ts = std::get_if<Texts>(&t.content)) {
      if (*part >= 0 && static_cast<std::size_t>(*part) < ts->values.size()) return ts->values[*part];
      return {};
    }
    if (auto* tx = std::get_if<Text>(&t.content)) {
      auto sentences = split_sentences(tx->value);
      if (*part >= 0 && static_cast<std::size_t>(*part) < sentences.size()) return sentences[*part];
    }
    return {};
  }

  static std::string join_texts(const std::vector<const Thought*>& in) {
    std::string out;
    for (const auto* t : in) {
      std::string s = text_of(t->subproblem);
      if (s.empty()) continue;
      if (!out.empty()) out += " ";
      out += s;
    }
    return out;
  }
};

class DocumentAdapter : public TaskAdapter {
 public:
  using TaskAdapter::TaskAdapter;

  Polarity polarity() const override { return Polarity::higher_better; }

  Bindings docs() const {
    const auto& ts = std::get<Texts>(instance_.input).values;
    Bindings b;
    for (std::size_t i = 0; i < 4; ++i) b["doc" + std::to_string(i + 1)] = ts.at(i);
    return b;
  }

  Prepared prepare(const OperationSpec& op, const Thought& input) const override {
    const auto& id = op.prompt_id;
    Prepared p{id, {}, instance_.input, "solution"};
    Bindings b = docs();
    if (id == "nda_merge_prompt") {
    } else if (id == "nda_improve_prompt") {
      b["s"] = text_of(input.content);
    } else {
      unsupported("prompt " + id);
    }
    p.prompt = render(id, b, op.variant);
    return p;
  }

  Prepared prepare_aggregate(const OperationSpec& op, const std::vector<const Thought*>& in) const override {
    if (op.prompt_id != "nda_aggregate_prompt") unsupported("aggregate prompt " + op.prompt_id);
    if (in.empty()) throw TooFewInputs("nda_aggregate_prompt needs input thoughts");
    Bindings b = docs();
    std::string summaries;
    for (std::size_t i = 0; i < in.size(); ++i) {
      std::string tag = "S" + std::to_string(i + 1);
      if (i) summaries += "\n";
      summaries += "<" + tag + ">\n" + text_of(in[i]->content) + "\n</" + tag + ">";
    }
    b["num_ndas_summaries"] = std::to_string(in.size());
    b["summaries"] = summaries;
    Prepared p{op.prompt_id, {}, instance_.input, "solution"};
    p.prompt = render(op.prompt_id, b, op.variant);
    return p;
  }

  Content parse(const std::string&, const std::string& response) const override {
    return Text{parse_tagged(response, "Merged")};
  }

  std::string score_prompt(const Thought& t) const override {
    Bindings b = docs();
    b["s"] = text_of(t.content);
    return render("nda_score_prompt", b, "default");
  }
};

}  // namespace

Prepared TaskAdapter::prepare_aggregate(const OperationSpec& op, const std::vector<const Thought*>&) const {
  unsupported("aggregate prompt " + op.prompt_id);
}

double TaskAdapter::local_score(const std::string& scorer_id, const Thought&) const {
  unsupported("scorer " + scorer_id);
}

std::string TaskAdapter::score_prompt(const Thought&) const { unsupported("LLM scoring"); }

bool TaskAdapter::validate(const std::string& validator_id, const std::vector<const Thought*>&, const Thought&) const {
  unsupported("validator " + validator_id);
}

Prepared TaskAdapter::prepare_validate_improve(const OperationSpec& op, const std::vector<const Thought*>&,
                                               const Thought&) const {
  unsupported("improve prompt " + op.prompt_id);
}

Verdict TaskAdapter::ground_truth(const std::string& comparator_id, const Thought&) const {
  if (!instance_.truth) throw MissingGroundTruth(std::string(usecase_name(instance_.usecase)) + " has no ground truth");
  unsupported("comparator " + comparator_id);
}

void TaskAdapter::unsupported(const std::string& what) const {
  throw UnsupportedConfiguration(what + " is not supported for " + usecase_name(instance_.usecase));
}

std::unique_ptr<TaskAdapter> make_adapter(const ProblemInstance& instance, const PromptRegistry& registry) {
  switch (instance.usecase) {
    case UseCaseId::sorting:
      return std::make_unique<SortingAdapter>(instance, registry);
    case UseCaseId::set_intersection:
      return std::make_unique<IntersectionAdapter>(instance, registry);
    case UseCaseId::keyword_counting:
      return std::make_unique<KeywordAdapter>(instance, registry);
    case UseCaseId::document_merging:
      return std::make_unique<DocumentAdapter>(instance, registry);
  }
  throw ConfigError("unknown use case");
}

}  // namespace got
