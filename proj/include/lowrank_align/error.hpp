#pragma once

#include <stdexcept>
#include <string>

namespace lowrank_align {

enum class ErrorKind {
  kInvalidArgument,
  kShapeMismatch,
  kSvdFailure,
  kUnknownKind,
  kEmptySubject,
  kSizeMismatch,
  kDecodeError,
  kIoError,
  kDegenerateTransform,
  kDivergedTransform,
  kMaxIterations,
  kSetSizeMismatch,
  kInputTooSmall,
  kNonFiniteLoss,
  kZeroMatrix,
  kModelMismatch,
  kCheckpointMissing,
  kConfigError,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind so the CLI can map failures to
/// exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lowrank_align
