#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "got/content.hpp"
#include "got/goo.hpp"
#include "got/prompting.hpp"
#include "got/scoring.hpp"
#include "got/thought_graph.hpp"

namespace got {

enum class UseCaseId { sorting, set_intersection, keyword_counting, document_merging };

const char* usecase_name(UseCaseId u);
// Accepts the full names and the short forms sort, intersection, keyword, docmerge.
UseCaseId parse_usecase(std::string_view name);

struct ProblemInstance {
  UseCaseId usecase = UseCaseId::sorting;
  int size = 0;
  std::uint64_t seed = 0;
  // sorting: IntList; intersection: IntLists{A, B}; keyword: Text; documents: Texts (4).
  Content input;
  // sorting: sorted IntList; intersection: IntList (A order); keyword: CountMap; documents: none.
  std::optional<Content> truth;
};

// Throws InvalidSize.
void check_size(UseCaseId u, int size);
ProblemInstance generate_instance(UseCaseId u, int size, std::uint64_t seed);
// Keyword instance for a given passage; size is its sentence count.
ProblemInstance keyword_instance(std::string passage);

std::array<std::string, 4> fixture_ndas();

const std::vector<std::string>& country_pool();
// Whole-word, longest-match count of the country pool.
CountMap count_countries(std::string_view text);
// Sentences end at '.', '!' or '?' followed by whitespace or the end of the text.
std::vector<std::string> split_sentences(std::string_view text);
// Contiguous groups with sizes differing by at most one; earlier groups take the extra sentence.
std::vector<std::string> balanced_paragraphs(const std::vector<std::string>& sentences, std::size_t k);

struct Prepared {
  std::string prompt_id;
  std::string prompt;
  Content subproblem;
  std::string cls = "solution";
};

class TaskAdapter {
 public:
  TaskAdapter(ProblemInstance instance, const PromptRegistry& registry)
      : instance_(std::move(instance)), registry_(registry) {}
  virtual ~TaskAdapter() = default;

  const ProblemInstance& instance() const { return instance_; }
  virtual Polarity polarity() const { return Polarity::lower_better; }

  // Generate and improve: one prompt per input thought.
  virtual Prepared prepare(const OperationSpec& op, const Thought& input) const = 0;
  virtual Prepared prepare_aggregate(const OperationSpec& op, const std::vector<const Thought*>& inputs) const;
  // Throws ParseFailure.
  virtual Content parse(const std::string& prompt_id, const std::string& response) const = 0;

  virtual double local_score(const std::string& scorer_id, const Thought& t) const;
  virtual std::string score_prompt(const Thought& t) const;

  virtual bool validate(const std::string& validator_id, const std::vector<const Thought*>& parts,
                        const Thought& t) const;
  virtual Prepared prepare_validate_improve(const OperationSpec& op, const std::vector<const Thought*>& parts,
                                            const Thought& t) const;

  // Throws MissingGroundTruth.
  virtual Verdict ground_truth(const std::string& comparator_id, const Thought& t) const;

 protected:
  std::string render(const std::string& id, const Bindings& b, const std::string& variant) const {
    return registry_.render(id, b, variant);
  }
  [[noreturn]] void unsupported(const std::string& what) const;

  ProblemInstance instance_;
  const PromptRegistry& registry_;
};

std::unique_ptr<TaskAdapter> make_adapter(const ProblemInstance& instance, const PromptRegistry& registry);

}  // namespace got
