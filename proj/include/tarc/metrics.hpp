#pragma once

#include <vector>

#include "tarc/port_reduction.hpp"

namespace tarc {

/// Radicands of 1 − P_rad/P_tot below this are reported as a passivity
/// violation rather than clamped.
inline constexpr double kPassivityTolerance = 1e-8;

struct ExcitationSolution {
  ComplexVector v;
  ComplexVector a;
  ComplexVector b;
  double p_rad = 0.0;
  double p_lost = 0.0;
  double p_tot = 0.0;
  double tarc = 0.0;
  double eta_rad = 0.0;
  double eta_match = 0.0;
  double eta_tot = 0.0;
  // one entry per stored direction of the operators; NaN when P_rad = 0
  std::vector<double> directivity;
  std::vector<double> realized_gain;
};

ExcitationSolution evaluate(const PortOperators& ops, const ComplexVector& v);

/// (4π/Z0)·|f v|² / (vᴴ g v)
double directivity(const PortOperators& ops, const ComplexVector& v, std::size_t direction);

/// (4π/Z0)·|f v|² / |K v|²
double realized_gain(const PortOperators& ops, const ComplexVector& v, std::size_t direction);

/// Uniform unit excitation.
ComplexVector uniform_excitation(Index ports);

struct PortScan {
  Index best_position = -1;  // basis index
  std::size_t best_slot = 0;  // index into the candidate list
  std::vector<double> ratio;  // g_nn / |k_nn|²
  std::vector<double> tarc;   // sqrt(1 − ratio)
};

/// Single-port placement scan over the diagonals of ĝ and k̂. Ties go to the
/// first candidate.
PortScan scan_single_port(const ComplexMatrix& g_hat, const ComplexMatrix& k_hat,
                          const std::vector<Index>& candidate_slots,
                          const std::vector<Index>& candidate_positions);

PortScan scan_single_port(const BigOperators& big, const std::vector<Index>& candidates);

/// Γ from a total efficiency: sqrt(max(0, 1 − η)).
double tarc_from_efficiency(double eta_tot);

}  // namespace tarc
