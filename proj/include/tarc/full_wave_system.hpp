#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tarc/linalg.hpp"

namespace tarc {

using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kMu0 = 1.25663706212e-6;
inline constexpr double kEps0 = 1.0 / (kMu0 * kSpeedOfLight * kSpeedOfLight);
inline constexpr double kFreeSpaceImpedance = kMu0 * kSpeedOfLight;
inline constexpr double kPi = 3.14159265358979323846;

/// A (polarization, direction) pair for far-field sampling.
struct Direction {
  std::string label;
  Vec3 e_hat;
  Vec3 r_hat;
};

/// Unit direction for spherical angles (radians).
Vec3 spherical_direction(double theta, double phi);
Vec3 theta_hat(double theta, double phi);
Vec3 phi_hat(double theta, double phi);

/// Direction in the θ̂ or φ̂ polarization at (θ, φ), angles in radians.
Direction make_direction(std::string label, double theta, double phi, bool theta_polarized = true);

/// Far-field row generator: returns the 1×N row F(ê, r̂).
using FarFieldFn = std::function<ComplexRow(const Vec3& e_hat, const Vec3& r_hat)>;

/// Stored far-field row for one labeled direction (used by bundle-loaded
/// systems, which cannot evaluate arbitrary directions).
struct StoredFarField {
  Direction direction;
  ComplexRow row;
};

/// N-dimensional operator data of one antenna at one frequency.
///
/// Z = R_rad + R_loss + jX, with every matrix real symmetric and the
/// excitation normalization D = diag(xi).
struct FullWaveSystem {
  RealMatrix r_rad;
  RealMatrix r_loss;
  RealMatrix x;
  RealVector xi;
  double frequency = 0.0;
  double k = 0.0;
  double z0 = kFreeSpaceImpedance;
  /// Basis-function centre positions (N×3), may be empty.
  RealMatrix positions;
  /// Owning dipole / wire per basis function, may be empty.
  std::vector<int> wire_of;
  FarFieldFn farfield;
  std::vector<StoredFarField> stored_farfield;

  Index size() const { return r_rad.rows(); }
  ComplexMatrix impedance() const;
};

/// F(ê, r̂) for the system. Throws PolarizationNotTransverse if ê is not
/// perpendicular to r̂ or either is not unit length.
ComplexRow farfield_row(const FullWaveSystem& system, const Vec3& e_hat, const Vec3& r_hat);

/// Far-field rows for a list of directions.
std::vector<ComplexRow> farfield_rows(const FullWaveSystem& system,
                                      const std::vector<Direction>& directions);

/// Throws unless the matrices are square, equally sized, finite and
/// symmetric within rel_tol.
void validate_system_shapes(const FullWaveSystem& system);

}  // namespace tarc
