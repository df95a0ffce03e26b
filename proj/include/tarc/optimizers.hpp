#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tarc/metrics.hpp"
#include "tarc/port_reduction.hpp"

namespace tarc {

struct ExcitationOptimum {
  double eta1 = 0.0;
  double tarc = 1.0;  // sqrt(1 − η₁)
  ComplexVector v1;
  ComplexVector a1;
  std::vector<EigenPair> spectrum;  // descending, KᴴK-orthonormal vectors
};

/// Dominant pair of g v = η KᴴK v. Throws IllConditionedCircuit when KᴴK is
/// not positive definite.
ExcitationOptimum optimal_excitation(const ComplexMatrix& g, const ComplexMatrix& k);
ExcitationOptimum optimal_excitation(const PortOperators& ops);

struct MatchSolution {
  double r0 = 0.0;
  double bl = 0.0;
  ComplexVector v;
  Complex eigenvalue;
  bool feasible = false;
};

/// Eigenvalues whose real part is at or below this fraction of ‖y‖_F give
/// no physical line.
inline constexpr double kFeasibleConductance = 1e-12;

/// All P eigen-solutions of y v = (1/R0 − jBL) v, infeasible ones flagged.
/// Throws AllInfeasible when none has a positive real part.
std::vector<MatchSolution> perfect_match(const ComplexMatrix& y);

struct ClosedMatch {
  MatchSolution match;
  ExcitationSolution result;
};

/// Feasible perfect-match solutions closed through metrics on the shared
/// circuit they imply, best (highest η_tot) first.
std::vector<ClosedMatch> ranked_perfect_match(const PortOperators& ops);

struct GainOptimum {
  double gamma1 = 0.0;
  ComplexVector v1;  // unit norm, largest entry real positive
};

/// Closed-form optimum of the realized gain for one far-field row:
/// γ₁ = (4π/Z0)‖f K⁻¹‖², v₁ ∝ (KᴴK)⁻¹ fᴴ.
GainOptimum max_realized_gain(const ComplexRow& f, const ComplexMatrix& k, double z0);

struct BoundResult {
  double delta = 0.0;
  double eta_ub = 1.0;
  ComplexVector v;
};

/// Smallest dissipation factor P_lost/P_rad over all excitations.
/// Components in the numerical null space of g (cutoff 1e-12·λ_max) are
/// eliminated through the Schur complement of l. Throws
/// DegenerateRadiationOperator when g vanishes.
BoundResult efficiency_bound(const ComplexMatrix& g, const ComplexMatrix& l);

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_scale = 0.1;
  double initial_offset = 1e-3;
  double x_tolerance = 1e-6;  // relative simplex diameter
  double f_tolerance = 1e-10;  // objective spread
  int max_iterations = 2000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;  // false when the iteration cap was hit
};

/// Maximizes `objective`. Non-finite objective values count as −∞.
NelderMeadResult nelder_mead_maximize(const std::function<double(const std::vector<double>&)>& objective,
                                      std::vector<double> x0, const NelderMeadOptions& options = {});

/// Score of a shared circuit (R0, BL); higher is better.
using CircuitObjective = std::function<double(double r0, double bl)>;

struct RefinedCircuit {
  double r0 = 0.0;
  double bl = 0.0;
  double score = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Simplex search over (log R0, BL·R0_init) from the given start.
RefinedCircuit refine_circuit(const CircuitObjective& objective, double r0_init, double bl_init,
                              const NelderMeadOptions& options = {});

/// η₁ of ops re-wired to a shared circuit; −∞ if the circuit is singular.
double eta1_for_circuit(const PortOperators& ops, double r0, double bl);
/// γ₁ for one stored direction; −∞ if the circuit is singular.
double gain_for_circuit(const PortOperators& ops, std::size_t direction, double r0, double bl);

}  // namespace tarc
