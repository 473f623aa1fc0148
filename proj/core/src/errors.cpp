#include "aprs/errors.hpp"

namespace aprs {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::AlleleMismatch: return "AlleleMismatch";
    case ErrorCode::AllMissingVariant: return "AllMissingVariant";
    case ErrorCode::DuplicateVariant: return "DuplicateVariant";
    case ErrorCode::DuplicateSample: return "DuplicateSample";
    case ErrorCode::InvalidDosage: return "InvalidDosage";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::ParseAbort: return "ParseAbort";
    case ErrorCode::NonNumericWeight: return "NonNumericWeight";
    case ErrorCode::EmptyPanel: return "EmptyPanel";
    case ErrorCode::UnknownSexToken: return "UnknownSexToken";
    case ErrorCode::NegativeBmi: return "NegativeBmi";
    case ErrorCode::ModelFormat: return "ModelFormat";
    case ErrorCode::Io: return "Io";
    case ErrorCode::NoVariantsRetained: return "NoVariantsRetained";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::MissingModelVariants: return "MissingModelVariants";
    case ErrorCode::UnfilledMatrix: return "UnfilledMatrix";
    case ErrorCode::NoUsableVariants: return "NoUsableVariants";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::SampleMismatch: return "SampleMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace aprs
