#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rmlab {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  UnsupportedResolution,
  EscapedSpace,
  ZeroDerivative,
  SingularProduct,
  NotInvariant,
  ShapeMismatch,
  NoConvergence,
  SubadditivityViolated,
  NotInvariantMeasure,
  DegenerateVariance,
  InsufficientTailMass,
  NotInvertibleAt,
  NotDiffeomorphismAt,
  ConfigInvalid,
  ReportUnreadable,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnsupportedResolution: return "UnsupportedResolution";
    case ErrorKind::EscapedSpace: return "EscapedSpace";
    case ErrorKind::ZeroDerivative: return "ZeroDerivative";
    case ErrorKind::SingularProduct: return "SingularProduct";
    case ErrorKind::NotInvariant: return "NotInvariant";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SubadditivityViolated: return "SubadditivityViolated";
    case ErrorKind::NotInvariantMeasure: return "NotInvariantMeasure";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::InsufficientTailMass: return "InsufficientTailMass";
    case ErrorKind::NotInvertibleAt: return "NotInvertibleAt";
    case ErrorKind::NotDiffeomorphismAt: return "NotDiffeomorphismAt";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::ReportUnreadable: return "ReportUnreadable";
  }
  return "Unknown";
}

// Every failure raised by the library carries a kind so callers (and the CLI)
// can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace rmlab
