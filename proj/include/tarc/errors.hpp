#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tarc {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  SingularMatrix,
  NotPositiveDefinite,
  NotHermitian,
  NoConvergence,
  GeometryOverlap,
  ElectricallyTooThick,
  PolarizationNotTransverse,
  DirectionNotStored,
  ZeroExcitation,
  ZeroRadiatedPower,
  ZeroIncidentPower,
  PassivityViolation,
  IllConditionedCircuit,
  AllInfeasible,
  DegenerateRadiationOperator,
  InvalidPermutation,
  IoError,
  ChecksumMismatch,
  MissingMatrix,
  ShapeMismatch,
  NotSymmetric,
  UnsupportedVersion,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tarc
