#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mono3d {

enum class ErrorKind {
  NonPositiveDepth,
  DegenerateHeight,
  MissingHeight2D,
  InvalidIntrinsics,
  DegenerateSixD,
  NotARotation,
  GimbalLockRegion,
  NotYawOnly,
  InvalidBox,
  ShapeMismatch,
  EmptyValidMask,
  MalformedSequence,
  EmptyDataset,
  InvalidRanges,
  UnmatchedPrediction,
  DuplicatePrediction,
  ParseError,
  SchemaError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure the library reports carries a kind so callers (and the CLI's
// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mono3d
