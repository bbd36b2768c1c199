#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace epipolar {

enum class ErrorCode {
  kZeroTranslation,
  kSingularIntrinsics,
  kInvalidRotation,
  kDegenerateLine,
  kZeroMatrix,
  kNotRankTwo,
  kDependentColumns,
  kInsufficientVisiblePoints,
  kMissingFlags,
  kInvalidArgument,
  kTooFewPoints,
  kDegenerateConfiguration,
  kInsufficientWeightMass,
  kNoValidSample,
  kDivergedToDegenerate,
  kNoInliers,
  kEmptySet,
  kAllAngleOutliers,
  kNonCanonicalInput,
  kParseError,
  kIoError,
};

// Stable name used on diagnostic streams, e.g. "DegenerateLine".
std::string_view ErrorName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const { return code_; }
  // Offending correspondence index, for errors raised inside per-pair loops.
  std::optional<std::size_t> index() const { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace epipolar
