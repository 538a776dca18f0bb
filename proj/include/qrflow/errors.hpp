#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qrflow {

enum class ErrorKind {
  ZeroColumn,
  DimensionMismatch,
  RankDeficient,
  DegenerateReflector,
  DegenerateProbe,
  DivisionHazard,
  NonFinite,
  StepsizeUnderflow,
  TooManySteps,
  BadConfig,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a classified failure and, when known, the time and
/// (0-based) column at which it was raised.
class Error : public std::runtime_error {
 public:
  static constexpr std::ptrdiff_t kNoColumn = -1;

  Error(ErrorKind kind, const std::string& message,
        double t = std::numeric_limits<double>::quiet_NaN(),
        std::ptrdiff_t column = kNoColumn);

  ErrorKind kind() const noexcept { return kind_; }
  double time() const noexcept { return time_; }
  std::ptrdiff_t column() const noexcept { return column_; }

  /// Copy of this error with time/column filled in where still unknown.
  Error with_context(double t, std::ptrdiff_t column) const;

 private:
  ErrorKind kind_;
  double time_;
  std::ptrdiff_t column_;
};

}  // namespace qrflow
