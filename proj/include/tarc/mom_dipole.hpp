#pragma once

// Thin-wire Galerkin method of moments for arrays of straight dipoles.
//
// Each dipole is cut into `segments + 1` equal pieces of length Δ. The
// `segments` interior nodes carry triangular (rooftop) basis functions with
// peak value Δ, so xi_n = Δ and a delta-gap of voltage v at node n impresses
// V_n = Δ·v. With an odd segment count the middle node sits at the dipole
// centre.

#include <functional>
#include <limits>
#include <vector>

#include "tarc/full_wave_system.hpp"

namespace tarc::mom {

struct Dipole {
  double length = 0.0;  // m
  double radius = 0.0;  // m, wire-equivalent
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
};

struct DipoleArraySpec {
  std::vector<Dipole> dipoles;
  int segments = 21;
  double frequency = 1e9;  // Hz
  double conductivity = std::numeric_limits<double>::infinity();  // S/m
};

/// Largest k·a accepted by the thin-wire kernel.
inline constexpr double kMaxElectricalRadius = 0.05;

/// Wire radius equivalent to a thin strip of the given width.
inline double strip_equivalent_radius(double width) { return width / 4.0; }

/// R_s = sqrt(π f μ₀ / σ); zero for σ = ∞.
double surface_resistance(double sigma, double frequency);

/// Throws InvalidArgument / GeometryOverlap / ElectricallyTooThick.
void validate(const DipoleArraySpec& spec);

FullWaveSystem build_dipole_array(const DipoleArraySpec& spec);

/// Global basis index of the centre node of dipole `d`.
Index center_basis(const DipoleArraySpec& spec, int d);

/// Global basis index of the node `offset` steps from the centre of dipole `d`.
Index basis_index(const DipoleArraySpec& spec, int d, int offset);

/// Parallel z-directed dipoles on the x axis, centred on the origin,
/// separated by the given gaps.
DipoleArraySpec line_array(const std::vector<double>& spacings, double length, double radius,
                           int segments, double frequency, double conductivity);

/// Input admittance of a single centre-fed dipole.
Complex input_admittance(const Dipole& dipole, int segments, double frequency,
                         double conductivity);

struct Resonance {
  double length;      // m
  Complex admittance;  // S, at the resonant length
};

/// First resonance of a centre-fed dipole: bisection on Im(Y_in) = 0 over
/// lengths in [lo, hi]·λ. The radius may depend on the length (strip width
/// scaling with length, for instance).
Resonance find_first_resonance(double frequency, int segments, double conductivity,
                               const std::function<double(double)>& radius_of_length,
                               double lo_wavelengths = 0.40, double hi_wavelengths = 0.50,
                               double tol_wavelengths = 1e-6);

}  // namespace tarc::mom
