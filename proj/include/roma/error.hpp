#pragma once

#include <stdexcept>
#include <string>

namespace roma {

enum class ErrorCode {
  kInvalidArgument,
  kFormatError,
  kChecksumMismatch,
  // psychometrics
  kMissingItem,
  kDuplicateItem,
  kUnknownItem,
  kOutOfScaleValue,
  kZeroVariance,
  // clustering
  kTooFewProfiles,
  kInvalidK,
  kEmptyModel,
  // pairing
  kUnclassifiedMember,
  kInfeasibleMatching,
  // monitoring
  kInsufficientSamples,
  kNoBaseline,
  // statistics
  kDegenerateVariance,
  kAllTied,
  kZeroExpectedCell,
  kZeroPooledSd,
  // ledger
  kSerializationFailure,
  kStorageFailure,
  kUnverifiedRange,
  // artifacts
  kIncompleteAssessments,
  kNoData,
  kProjectOpen,
  kAnonymityThreshold,
  kUnknownAnchor,
  // service
  kNoConsent,
  kConsentRevoked,
  kUnknownInstrument,
  kValidationFailure,
  kForbiddenPairIntroduced,
  kStaleProposal,
  kNotFound,
  kConflict,
  kUnauthorized,
  kConfigError,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace roma
