#include "mono3d/error.hpp"

namespace mono3d {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::DegenerateHeight: return "DegenerateHeight";
    case ErrorKind::MissingHeight2D: return "MissingHeight2D";
    case ErrorKind::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorKind::DegenerateSixD: return "DegenerateSixD";
    case ErrorKind::NotARotation: return "NotARotation";
    case ErrorKind::GimbalLockRegion: return "GimbalLockRegion";
    case ErrorKind::NotYawOnly: return "NotYawOnly";
    case ErrorKind::InvalidBox: return "InvalidBox";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyValidMask: return "EmptyValidMask";
    case ErrorKind::MalformedSequence: return "MalformedSequence";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::InvalidRanges: return "InvalidRanges";
    case ErrorKind::UnmatchedPrediction: return "UnmatchedPrediction";
    case ErrorKind::DuplicatePrediction: return "DuplicatePrediction";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mono3d
