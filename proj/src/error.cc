#include "epipolar/error.h"

namespace epipolar {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroTranslation: return "ZeroTranslation";
    case ErrorCode::kSingularIntrinsics: return "SingularIntrinsics";
    case ErrorCode::kInvalidRotation: return "InvalidRotation";
    case ErrorCode::kDegenerateLine: return "DegenerateLine";
    case ErrorCode::kZeroMatrix: return "ZeroMatrix";
    case ErrorCode::kNotRankTwo: return "NotRankTwo";
    case ErrorCode::kDependentColumns: return "DependentColumns";
    case ErrorCode::kInsufficientVisiblePoints:
      return "InsufficientVisiblePoints";
    case ErrorCode::kMissingFlags: return "MissingFlags";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kDegenerateConfiguration:
      return "DegenerateConfiguration";
    case ErrorCode::kInsufficientWeightMass: return "InsufficientWeightMass";
    case ErrorCode::kNoValidSample: return "NoValidSample";
    case ErrorCode::kDivergedToDegenerate: return "DivergedToDegenerate";
    case ErrorCode::kNoInliers: return "NoInliers";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kAllAngleOutliers: return "AllAngleOutliers";
    case ErrorCode::kNonCanonicalInput: return "NonCanonicalInput";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(ErrorName(code)) + ": " + message),
      code_(code),
      index_(index) {}

}  // namespace epipolar
