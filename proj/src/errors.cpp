#include "tarc/errors.hpp"

namespace tarc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::GeometryOverlap: return "GeometryOverlap";
    case ErrorKind::ElectricallyTooThick: return "ElectricallyTooThick";
    case ErrorKind::PolarizationNotTransverse: return "PolarizationNotTransverse";
    case ErrorKind::DirectionNotStored: return "DirectionNotStored";
    case ErrorKind::ZeroExcitation: return "ZeroExcitation";
    case ErrorKind::ZeroRadiatedPower: return "ZeroRadiatedPower";
    case ErrorKind::ZeroIncidentPower: return "ZeroIncidentPower";
    case ErrorKind::PassivityViolation: return "PassivityViolation";
    case ErrorKind::IllConditionedCircuit: return "IllConditionedCircuit";
    case ErrorKind::AllInfeasible: return "AllInfeasible";
    case ErrorKind::DegenerateRadiationOperator: return "DegenerateRadiationOperator";
    case ErrorKind::InvalidPermutation: return "InvalidPermutation";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::MissingMatrix: return "MissingMatrix";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace tarc
