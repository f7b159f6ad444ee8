#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "got/content.hpp"

namespace got {

using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
  struct Segment {
    bool placeholder = false;
    std::string text;  // literal text or placeholder name
  };

  std::string id;
  std::vector<std::string> placeholders;
  std::string body;
  std::vector<Segment> segments;
  bool uses_examples = false;
};

struct FewShot {
  std::string id;
  std::string variant = "default";
  std::string block;
};

// Template file: "@template id=<id> placeholders=a,b" then the body.
// Few-shot file: "@fewshot id=<id> variant=<name>" then the block.
// "{{" and "}}" render as literal braces; "{examples}" is filled from the few-shot block.
PromptTemplate parse_template(std::string_view text);
FewShot parse_fewshot(std::string_view text);

class PromptRegistry {
 public:
  static PromptRegistry builtin();
  static PromptRegistry load_directory(const std::filesystem::path& dir);

  void add(PromptTemplate t);
  void add(FewShot f);
  // Dispatches on the front-matter line.
  void add_file(std::string_view text);

  bool has(const std::string& id) const { return templates_.count(id) != 0; }
  bool has_fewshot(const std::string& id, const std::string& variant) const;
  const PromptTemplate& get(const std::string& id) const;
  const FewShot& fewshot(const std::string& id, const std::string& variant) const;
  std::vector<std::string> ids() const;

  std::string render(const std::string& id, const Bindings& bindings,
                     const std::string& variant = "default") const;

 private:
  std::map<std::string, PromptTemplate> templates_;
  std::map<std::pair<std::string, std::string>, FewShot> fewshots_;
};

const PromptRegistry& default_registry();

// Every well-formed bracketed integer list, in order of appearance.
std::vector<IntList> find_int_lists(std::string_view text);
IntList parse_digit_list(std::string_view text);
std::vector<IntList> parse_named_lists(std::string_view text, std::size_t k);
CountMap parse_count_map(std::string_view text);
std::string parse_tagged(std::string_view text, std::string_view tag);
double parse_tagged_number(std::string_view text, std::string_view tag);
std::vector<std::string> parse_paragraphs(std::string_view text, std::size_t k);

}  // namespace got
