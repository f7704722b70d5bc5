#include "editfactory/error.hpp"

namespace editfactory {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInvalidTransition: return "InvalidTransition";
    case ErrorCode::kUndecodableImage: return "UndecodableImage";
    case ErrorCode::kIllegalTaxonomy: return "IllegalTaxonomy";
    case ErrorCode::kIdenticalImages: return "IdenticalImages";
    case ErrorCode::kInsufficientPairs: return "InsufficientPairs";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kAuthMissing: return "AuthMissing";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kMissingScore: return "MissingScore";
    case ErrorCode::kEmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::kUnparseable: return "Unparseable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kInputOutOfRange: return "InputOutOfRange";
    case ErrorCode::kIllegalSeverityForCategory: return "IllegalSeverityForCategory";
    case ErrorCode::kTaskClosed: return "TaskClosed";
    case ErrorCode::kDuplicateAnnotation: return "DuplicateAnnotation";
    case ErrorCode::kHierarchyViolation: return "HierarchyViolation";
    case ErrorCode::kIncompleteDataset: return "IncompleteDataset";
    case ErrorCode::kIdenticalTexts: return "IdenticalTexts";
    case ErrorCode::kUnknownDraft: return "UnknownDraft";
    case ErrorCode::kEmptyModes: return "EmptyModes";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kNonPositiveBeta: return "NonPositiveBeta";
    case ErrorCode::kInvalidLogProb: return "InvalidLogProb";
    case ErrorCode::kUnrefinedRecord: return "UnrefinedRecord";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kUnauthorized: return "Unauthorized";
    case ErrorCode::kLeaseExpired: return "LeaseExpired";
    case ErrorCode::kNotClaimant: return "NotClaimant";
  }
  return "Unknown";
}

std::optional<ErrorCode> parse_error_code(std::string_view name) {
  for (int v = 0; v <= 82; ++v) {
    const auto code = static_cast<ErrorCode>(v);
    const std::string_view n = error_code_name(code);
    if (n != "Unknown" && n == name) return code;
  }
  return std::nullopt;
}

}  // namespace editfactory
