#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "got/error.hpp"
#include "got/prompting.hpp"
#include "got/rng.hpp"
#include "got/usecases.hpp"

using namespace got;

namespace {

std::string join_list(const IntList& l, const std::string& sep) {
  std::string s = "[";
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(l[i]);
  }
  return s + "]";
}

IntList random_list(splitmix64& rng, std::size_t max_len, std::int64_t max_value) {
  IntList l(rng.below(max_len + 1));
  for (auto& v : l) v = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_value) + 1));
  return l;
}

const char* const separators[] = {", ", ",", " , ", ",\n  "};

}  // namespace

TEST(Template, SubstitutesPlaceholders) {
  const auto& reg = default_registry();
  std::string p = reg.render("sort_prompt", {{"input_list", "[3,1,2]"}});
  ASSERT_GE(p.size(), 14u);
  EXPECT_EQ(p.substr(p.size() - 14), "Input: [3,1,2]");
}

TEST(Template, ImprovePromptMentionsLength) {
  std::string p = default_registry().render(
      "improve_prompt", {{"length", "32"}, {"input_list", "[1]"}, {"sorted_list", "[1]"}});
  EXPECT_NE(p.find("has the same number of elements as the input list (32)"), std::string::npos);
}

TEST(Template, MergePromptMentionsCombinedLength) {
  std::string p = default_registry().render(
      "merge_prompt", {{"length", "16"}, {"length_combined", "32"}, {"input_list1", "[1]"}, {"input_list2", "[2]"}});
  EXPECT_NE(p.find("into one sorted list of length 32"), std::string::npos);
}

TEST(Template, UnknownTemplate) {
  EXPECT_THROW(default_registry().render("no_such_prompt", {}), UnknownTemplate);
}

TEST(Template, UnboundPlaceholder) {
  EXPECT_THROW(default_registry().render("merge_prompt", {{"length", "16"}}), UnboundPlaceholder);
}

TEST(Template, MissingFewShotVariant) {
  EXPECT_THROW(default_registry().render("sort_prompt", {{"input_list", "[1]"}}, "nonexistent"), UnknownTemplate);
}

TEST(Template, BracesAndDeclarations) {
  auto t = parse_template("@template id=t placeholders=a\n{{\"k\": {a}}}\n");
  PromptRegistry reg;
  reg.add(t);
  EXPECT_EQ(reg.render("t", {{"a", "1"}}), "{\"k\": 1}");
  EXPECT_THROW(parse_template("@template id=t placeholders=a\n{a} {b}"), MalformedTemplate);
  EXPECT_THROW(parse_template("@template id=t placeholders=a,b\n{a}"), MalformedTemplate);
  EXPECT_THROW(parse_template("@template id=t placeholders=a\n{a"), MalformedTemplate);
  EXPECT_THROW(parse_template("@template id=t placeholders=a\n{a} }"), MalformedTemplate);
  EXPECT_THROW(parse_template("no front matter"), MalformedTemplate);
}

TEST(Template, ExamplesComeFromFewShotVariant) {
  PromptRegistry reg;
  reg.add_file("@template id=t placeholders=x\n<Examples>{examples}</Examples> {x}");
  reg.add_file("@fewshot id=t variant=default\nplain");
  reg.add_file("@fewshot id=t variant=cot\nwith steps");
  EXPECT_EQ(reg.render("t", {{"x", "1"}}), "<Examples>plain</Examples> 1");
  EXPECT_EQ(reg.render("t", {{"x", "1"}}, "cot"), "<Examples>with steps</Examples> 1");
}

TEST(Template, LoadDirectoryMatchesBuiltin) {
  auto dir = std::filesystem::temp_directory_path() / "got_prompt_dir_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "a.prompt") << "@template id=a placeholders=v\nvalue {v}\n";
  }
  auto reg = PromptRegistry::load_directory(dir);
  EXPECT_EQ(reg.render("a", {{"v", "x"}}), "value x");
  std::filesystem::remove_all(dir);
}

TEST(Template, EveryBuiltinTemplateRenders) {
  const auto& reg = default_registry();
  ASSERT_FALSE(reg.ids().empty());
  for (const auto& id : reg.ids()) {
    Bindings b;
    for (const auto& p : reg.get(id).placeholders) b[p] = "<" + p + ">";
    std::string out = reg.render(id, b);
    for (const auto& p : reg.get(id).placeholders) EXPECT_NE(out.find("<" + p + ">"), std::string::npos) << id;
  }
}

TEST(DigitListParser, Examples) {
  EXPECT_EQ(parse_digit_list("[0, 1, 2, 2]"), (IntList{0, 1, 2, 2}));
  EXPECT_EQ(parse_digit_list("Reason: two are missing.\nOutput: [0, 1, 2]"), (IntList{0, 1, 2}));
  EXPECT_EQ(parse_digit_list("[]"), IntList{});
  EXPECT_THROW(parse_digit_list("no numbers here"), ParseFailure);
  EXPECT_THROW(parse_digit_list("[1, 2"), ParseFailure);
}

TEST(DigitListParser, IgnoresEllipsisExamples) {
  EXPECT_EQ(parse_digit_list("format [1, 2, ...]; Output: [4, 5]"), (IntList{4, 5}));
}

TEST(DigitListParser, RoundTrip1000) {
  splitmix64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    IntList l = random_list(rng, 40, 9);
    std::string sep = separators[rng.below(4)];
    std::string text = join_list(l, sep);
    switch (rng.below(3)) {
      case 0:
        break;
      case 1:
        text = "Output: " + text;
        break;
      default:
        text = "Reason: the earlier list " + join_list(random_list(rng, 5, 9), ", ") + " was wrong.\nOutput: " + text +
               "\nNote: done.";
        break;
    }
    ASSERT_EQ(parse_digit_list(text), l) << text;
    ASSERT_EQ(parse_digit_list(format_list(l)), l);
  }
}

TEST(NamedListParser, DuplicateLabelsArePositional) {
  IntList a{31, 11, 4, 63, 38, 58, 59, 24, 61, 14, 32, 39, 27, 46, 48, 19};
  IntList b{52, 57, 50, 56, 3, 2, 53, 29, 5, 37, 62, 41, 36, 12, 49, 16};
  std::string text = "{\n  \"List 1\": " + join_list(a, ", ") + ",\n  \"List 1\": " + join_list(b, ", ") + "\n}";
  auto lists = parse_named_lists(text, 2);
  ASSERT_EQ(lists.size(), 2u);
  EXPECT_EQ(lists[0], a);
  EXPECT_EQ(lists[1], b);
}

TEST(NamedListParser, Examples) {
  auto lists = parse_named_lists("{\"List 1\": [1], \"List 2\": [2]}", 2);
  EXPECT_EQ(lists, (std::vector<IntList>{{1}, {2}}));
  EXPECT_THROW(parse_named_lists("{\"List 1\": [1]}", 2), ParseFailure);
}

TEST(NamedListParser, RoundTrip1000) {
  splitmix64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    std::size_t k = 1 + rng.below(8);
    std::vector<IntList> lists;
    std::string text = rng.below(2) ? "{" : "Here you go:\n{{\n";
    for (std::size_t j = 0; j < k; ++j) {
      lists.push_back(random_list(rng, 16, 99));
      std::size_t label = rng.below(3) == 0 ? 1 : j + 1;
      if (j) text += ",";
      text += "\n  \"List " + std::to_string(label) + "\": " + join_list(lists.back(), separators[rng.below(4)]);
    }
    text += "\n}";
    ASSERT_EQ(parse_named_lists(text, k), lists) << text;
  }
}

TEST(CountMapParser, Examples) {
  CountMap m = parse_count_map("{\"Peru\": 1, \"Argentina\": 2, \"Brazil\": 2}");
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.get("Argentina"), 2);
  EXPECT_TRUE(parse_count_map("{}").empty());
  CountMap dup = parse_count_map("{\"Chile\": 2, \"Chile\": 3}");
  EXPECT_EQ(dup.size(), 1u);
  EXPECT_EQ(dup.get("Chile"), 5);
  EXPECT_THROW(parse_count_map("{\"Chile\": 2.5}"), NonIntegerFrequency);
  EXPECT_THROW(parse_count_map("nothing"), ParseFailure);
}

TEST(CountMapParser, RoundTrip1000) {
  splitmix64 rng(3);
  const auto& pool = country_pool();
  for (int i = 0; i < 1000; ++i) {
    std::size_t keys = rng.below(9);
    CountMap expected;
    std::vector<std::pair<std::string, std::int64_t>> written;
    for (std::size_t j = 0; j < keys; ++j) {
      std::string c = pool[rng.below(pool.size())];
      std::int64_t v = 1 + static_cast<std::int64_t>(rng.below(5));
      expected.add(c, v);
      written.emplace_back(c, v);
      if (rng.below(4) == 0) {
        std::int64_t extra = 1 + static_cast<std::int64_t>(rng.below(3));
        expected.add(c, extra);
        written.emplace_back(c, extra);
      }
    }
    std::string text = "{";
    for (std::size_t j = 0; j < written.size(); ++j) {
      if (j) text += rng.below(2) ? ", " : ",\n";
      text += "\"" + written[j].first + "\":" + (rng.below(2) ? " " : "") + std::to_string(written[j].second);
    }
    text += "}";
    if (rng.below(2)) text = "Reason: counted each sentence.\nOutput: " + text;
    CountMap parsed = parse_count_map(text);
    ASSERT_EQ(parsed, expected) << text;
    for (const auto& [k, v] : expected.entries()) ASSERT_EQ(parsed.get(k), v);
    ASSERT_EQ(parse_count_map(format_count_map(expected)), expected);
  }
}

TEST(TaggedParser, Examples) {
  EXPECT_DOUBLE_EQ(parse_tagged_number("<Redundancy>5</Redundancy>", "Redundancy"), 5.0);
  EXPECT_EQ(parse_tagged("<Merged>NDA text</Merged>", "Merged"), "NDA text");
  EXPECT_THROW(parse_tagged("plain text", "Merged"), ParseFailure);
  EXPECT_THROW(parse_tagged_number("<Retained>high</Retained>", "Retained"), NonNumericScore);
}

TEST(TaggedParser, RoundTrip1000) {
  splitmix64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    double value = static_cast<double>(rng.below(1001)) / 100.0;
    std::ostringstream num;
    num.precision(17);
    num << value;
    std::string pad = rng.below(2) ? " " : "";
    std::string text = "Reasoning about overlap.\n<Redundancy>" + pad + num.str() + pad + "</Redundancy>\n";
    text += "<Retained>" + std::to_string(i) + "</Retained>";
    ASSERT_DOUBLE_EQ(parse_tagged_number(text, "Redundancy"), value) << text;
    ASSERT_DOUBLE_EQ(parse_tagged_number(text, "Retained"), static_cast<double>(i));
    std::string body = "line " + std::to_string(rng.next()) + "\nsecond line";
    ASSERT_EQ(parse_tagged("<Merged>\n" + body + "\n</Merged>", "Merged"), body);
  }
}

TEST(ParagraphParser, FirstKStringValues) {
  std::string text = "{\n\"Paragraph 1\": \"One. Two.\",\n\"Paragraph 2\": \"Three.\"\n}";
  EXPECT_EQ(parse_paragraphs(text, 2), (std::vector<std::string>{"One. Two.", "Three."}));
  EXPECT_THROW(parse_paragraphs(text, 3), ParseFailure);
  EXPECT_THROW(parse_paragraphs("not json", 1), ParseFailure);
  EXPECT_EQ(parse_paragraphs(format_paragraphs({"A.", "B."}), 2), (std::vector<std::string>{"A.", "B."}));
}
