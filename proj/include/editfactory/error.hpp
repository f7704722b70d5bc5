#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace editfactory {

// Stable numeric values: these are mirrored by ef_status in editfactory.h.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kNotFound = 2,
  kIo = 3,
  kInvalidTransition = 4,

  kUndecodableImage = 10,
  kIllegalTaxonomy = 11,
  kIdenticalImages = 12,
  kInsufficientPairs = 13,

  kTimeout = 20,
  kRateLimited = 21,
  kAuthMissing = 22,
  kProviderError = 23,

  kMissingScore = 30,

  kEmptyGroundTruth = 40,
  kUnparseable = 41,
  kDimensionMismatch = 42,
  kScoreOutOfRange = 43,
  kInputOutOfRange = 44,

  kIllegalSeverityForCategory = 50,
  kTaskClosed = 51,
  kDuplicateAnnotation = 52,
  kHierarchyViolation = 53,
  kIncompleteDataset = 54,

  kIdenticalTexts = 60,
  kUnknownDraft = 61,
  kEmptyModes = 62,
  kEmptySequence = 63,
  kNonPositiveBeta = 64,
  kInvalidLogProb = 65,
  kUnrefinedRecord = 66,

  kEmptyDataset = 70,

  kUnauthorized = 80,
  kLeaseExpired = 81,
  kNotClaimant = 82,
};

std::string_view error_code_name(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace editfactory
