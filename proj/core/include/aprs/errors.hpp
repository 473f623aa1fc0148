#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aprs {

// Every failure the library reports carries one of these codes. The textual
// name of the code is the first token of Error::what(), so command-line
// callers can surface it verbatim.
enum class ErrorCode {
  // genotype_core
  EmptyIntersection,
  AlleleMismatch,
  AllMissingVariant,
  DuplicateVariant,
  DuplicateSample,
  InvalidDosage,
  // ingestion
  MalformedRow,
  ParseAbort,
  NonNumericWeight,
  EmptyPanel,
  UnknownSexToken,
  NegativeBmi,
  ModelFormat,
  Io,
  // pca_engine
  NoVariantsRetained,
  ConvergenceFailure,
  DimensionError,
  MissingModelVariants,
  UnfilledMatrix,
  // prs_engine / ancestry_adjust
  NoUsableVariants,
  RankDeficient,
  ModelMismatch,
  SampleMismatch,
  // evaluation
  EmptyInput,
  DegenerateLabels,
  // synthgen / cli
  ConfigInvalid,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace aprs
