#pragma once

#include <stdexcept>
#include <string>

namespace got {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GOT_DEFINE_ERROR(name, base)  \
  class name : public base {          \
   public:                            \
    using base::base;                 \
  };

GOT_DEFINE_ERROR(InconsistentDelta, error)
GOT_DEFINE_ERROR(UnknownThought, error)
GOT_DEFINE_ERROR(ParseFailure, error)
GOT_DEFINE_ERROR(NonIntegerFrequency, ParseFailure)
GOT_DEFINE_ERROR(NonNumericScore, ParseFailure)
GOT_DEFINE_ERROR(UnknownTemplate, error)
GOT_DEFINE_ERROR(UnboundPlaceholder, error)
GOT_DEFINE_ERROR(MalformedTemplate, error)
GOT_DEFINE_ERROR(BackendFailure, error)
GOT_DEFINE_ERROR(ContractViolation, error)
GOT_DEFINE_ERROR(ConfigError, error)
GOT_DEFINE_ERROR(InvalidGoo, error)
GOT_DEFINE_ERROR(UnscoredThought, error)
GOT_DEFINE_ERROR(TooFewInputs, error)
GOT_DEFINE_ERROR(MissingGroundTruth, error)
GOT_DEFINE_ERROR(UnsupportedConfiguration, error)
GOT_DEFINE_ERROR(InvalidSize, error)
GOT_DEFINE_ERROR(InvalidParameters, error)
GOT_DEFINE_ERROR(EmptyInput, error)
GOT_DEFINE_ERROR(MismatchedExperiments, error)
GOT_DEFINE_ERROR(AllSamplesUnparseable, error)
GOT_DEFINE_ERROR(OutOfRangeScore, error)
GOT_DEFINE_ERROR(BudgetExceeded, error)

#undef GOT_DEFINE_ERROR

}  // namespace got
