#include "tarc/full_wave_system.hpp"

#include <cmath>

#include "tarc/errors.hpp"

namespace tarc {

Vec3 spherical_direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Vec3 theta_hat(double theta, double phi) {
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
}

Vec3 phi_hat(double /*theta*/, double phi) { return {-std::sin(phi), std::cos(phi), 0.0}; }

Direction make_direction(std::string label, double theta, double phi, bool theta_polarized) {
  return {std::move(label), theta_polarized ? theta_hat(theta, phi) : phi_hat(theta, phi),
          spherical_direction(theta, phi)};
}

ComplexMatrix FullWaveSystem::impedance() const {
  ComplexMatrix z(r_rad.rows(), r_rad.cols());
  z.real() = r_rad + r_loss;
  z.imag() = x;
  return z;
}

ComplexRow farfield_row(const FullWaveSystem& system, const Vec3& e_hat, const Vec3& r_hat) {
  constexpr double tol = 1e-9;
  if (std::abs(e_hat.norm() - 1.0) > tol || std::abs(r_hat.norm() - 1.0) > tol) {
    throw Error(ErrorKind::PolarizationNotTransverse, "polarization and direction must be unit vectors");
  }
  if (std::abs(e_hat.dot(r_hat)) > tol) {
    throw Error(ErrorKind::PolarizationNotTransverse, "polarization is not perpendicular to direction");
  }
  if (system.farfield) return system.farfield(e_hat, r_hat);
  for (const auto& stored : system.stored_farfield) {
    if ((stored.direction.e_hat - e_hat).norm() < 1e-9 &&
        (stored.direction.r_hat - r_hat).norm() < 1e-9) {
      return stored.row;
    }
  }
  throw Error(ErrorKind::DirectionNotStored, "no far-field row stored for the requested direction");
}

std::vector<ComplexRow> farfield_rows(const FullWaveSystem& system,
                                      const std::vector<Direction>& directions) {
  std::vector<ComplexRow> rows;
  rows.reserve(directions.size());
  for (const auto& d : directions) {
    if (!system.farfield) {
      // bundle systems: prefer the stored label when present
      bool found = false;
      for (const auto& stored : system.stored_farfield) {
        if (!d.label.empty() && stored.direction.label == d.label) {
          rows.push_back(stored.row);
          found = true;
          break;
        }
      }
      if (found) continue;
    }
    rows.push_back(farfield_row(system, d.e_hat, d.r_hat));
  }
  return rows;
}

void validate_system_shapes(const FullWaveSystem& system) {
  const Index n = system.r_rad.rows();
  auto check = [n](const RealMatrix& m, const char* name) {
    if (m.rows() != n || m.cols() != n) {
      throw Error(ErrorKind::ShapeMismatch, std::string(name) + " is not " + std::to_string(n) +
                                                "x" + std::to_string(n));
    }
    if (!m.allFinite()) throw Error(ErrorKind::InvalidArgument, std::string(name) + " is not finite");
  };
  check(system.r_rad, "R_rad");
  check(system.r_loss, "R_loss");
  check(system.x, "X");
  if (system.xi.size() != n) throw Error(ErrorKind::ShapeMismatch, "xi length differs from N");
  if ((system.xi.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidArgument, "xi entries must be positive");
  }
}

}  // namespace tarc
