#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "got/goo.hpp"
#include "got/usecases.hpp"

namespace got {

struct SchemeParams {
  // 0 selects the scheme default.
  int k = 0;
  int levels = 0;
};

struct SchemeConfig {
  // io, cot, cot_sc, tot, tot2, got, got4, got8, gotx
  std::string scheme;
  UseCaseId usecase = UseCaseId::sorting;
  int size = 0;
  int k = 0;
  int levels = 0;
  GraphOfOperations goo;
};

// variant: empty for the default plan; got4, got8 or gotx for keyword counting.
// Throws UnsupportedConfiguration, InvalidSize.
SchemeConfig build_got(UseCaseId u, int size, std::string_view variant = {});
// scheme: io, cot, cot_sc, tot, tot2.
SchemeConfig build_baseline(std::string_view scheme, UseCaseId u, int size, SchemeParams params = {});
// Any scheme name, including the GoT ones; "cot-sc" is accepted for cot_sc.
SchemeConfig build_scheme(std::string_view scheme, UseCaseId u, int size, SchemeParams params = {});

struct CallBounds {
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  bool operator==(const CallBounds&) const = default;
};

// Static bounds; the minimum assumes every validation passes, the maximum that every attempt is used.
CallBounds expected_llm_calls(const GraphOfOperations& goo);
inline CallBounds expected_llm_calls(const SchemeConfig& c) { return expected_llm_calls(c.goo); }

}  // namespace got
