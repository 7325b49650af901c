#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bentrank {

enum class ErrorKind {
  InvalidArgument,
  LengthMismatch,
  NonFinite,
  DegenerateThreshold,
  DimensionMismatch,
  RankDeficient,
  NotConverged,
  Unidentified,
  NumericalDegeneracy,
  FoldTooSmall,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind);

/// Error raised by every bentrank operation. The kind is stable and is what
/// the CLI reports in its machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bentrank
