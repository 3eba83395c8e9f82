#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wf3d {

enum class ErrorKind {
  kDimension,
  kMagicMismatch,
  kDimMismatch,
  kTruncatedFile,
  kShapeMismatch,
  kNonPositiveDepth,
  kDegenerateLine,
  kDegenerateVPs,
  kNegativeFocalSquared,
  kInfeasible,
  kNonConvergence,
  kEmptyView,
  kEmptyMatch,
  kInvalidArgument,
  kGenerationFailed,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "DimensionError";
    case ErrorKind::kMagicMismatch: return "MagicMismatch";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kTruncatedFile: return "TruncatedFile";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::kDegenerateLine: return "DegenerateLine";
    case ErrorKind::kDegenerateVPs: return "DegenerateVPs";
    case ErrorKind::kNegativeFocalSquared: return "NegativeFocalSquared";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kNonConvergence: return "NonConvergence";
    case ErrorKind::kEmptyView: return "EmptyView";
    case ErrorKind::kEmptyMatch: return "EmptyMatch";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kGenerationFailed: return "GenerationFailed";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

/// Every error raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace wf3d
