#include "qrflow/errors.hpp"

#include <cmath>

namespace qrflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroColumn: return "ZeroColumn";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DegenerateReflector: return "DegenerateReflector";
    case ErrorKind::DegenerateProbe: return "DegenerateProbe";
    case ErrorKind::DivisionHazard: return "DivisionHazard";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::StepsizeUnderflow: return "StepsizeUnderflow";
    case ErrorKind::TooManySteps: return "TooManySteps";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, double t,
             std::ptrdiff_t column)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      time_(t),
      column_(column) {}

Error Error::with_context(double t, std::ptrdiff_t column) const {
  Error copy = *this;
  if (std::isnan(copy.time_)) copy.time_ = t;
  if (copy.column_ == kNoColumn) copy.column_ = column;
  return copy;
}

}  // namespace qrflow
