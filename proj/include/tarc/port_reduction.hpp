#pragma once

// Reduction of N-dimensional operators to P-dimensional port operators.
// A port occupies exactly one basis function; D = diag(xi).

#include <optional>
#include <vector>

#include "tarc/full_wave_system.hpp"
#include "tarc/linalg.hpp"

namespace tarc {

struct PortConfig {
  std::vector<Index> positions;
  std::vector<double> r0;  // Ω, one per port
  std::vector<double> bl;  // S, one per port

  /// Every port on the same line impedance and tuning susceptance.
  static PortConfig shared(std::vector<Index> positions, double r0, double bl = 0.0);
  Index size() const { return static_cast<Index>(positions.size()); }
};

/// Throws InvalidArgument unless positions are distinct and inside [0, n),
/// r0 > 0 and the circuit vectors match the port count.
void validate(const PortConfig& config, Index n);

struct WaveMatrices {
  ComplexMatrix k;  // a = K v
  ComplexMatrix l;  // b = L v
};

struct PortOperators {
  ComplexMatrix y;  // port admittance (S)
  ComplexMatrix g;  // radiated-power form (S)
  ComplexMatrix l;  // lost-power form (S)
  ComplexMatrix k;  // incident waves
  ComplexMatrix lw;  // reflected waves
  std::vector<ComplexRow> f;  // far-field rows, one per stored direction
  std::vector<double> r0;
  std::vector<double> bl;
  double z0 = kFreeSpaceImpedance;

  Index size() const { return y.rows(); }
};

struct AdmittanceReduction {
  ComplexMatrix y;  // P×P
  ComplexMatrix w;  // N×P port-mode matrix Y D C
};

/// y = Cᴴ D Y D C obtained from P factorized solves Z W = D C.
AdmittanceReduction reduce_admittance(const FullWaveSystem& system,
                                      const std::vector<Index>& positions);
/// Same, reusing an existing factorization of Z.
AdmittanceReduction reduce_admittance(const FullWaveSystem& system, const linalg::LuSolver& z_lu,
                                      const std::vector<Index>& positions);

/// n = Wᴴ M W.
ComplexMatrix reduce_quadratic(const RealMatrix& m, const ComplexMatrix& w);
ComplexMatrix reduce_quadratic(const ComplexMatrix& m, const ComplexMatrix& w);

/// f = F W.
ComplexRow reduce_farfield(const ComplexRow& farfield, const ComplexMatrix& w);
ComplexRow reduce_farfield(const FullWaveSystem& system, const ComplexMatrix& w,
                           const Direction& direction);

/// K = ½(1 + Λ(y + jB)Λ)Λ⁻¹ and L = ½(1 − Λ(y + jB)Λ)Λ⁻¹, Λ = diag(√R0).
WaveMatrices build_wave_matrices(const ComplexMatrix& y, const std::vector<double>& r0,
                                 const std::vector<double>& bl);

/// i = (y + j diag(BL)) v.
ComplexVector port_currents(const ComplexMatrix& y, const std::vector<double>& bl,
                            const ComplexVector& v);

/// Assembles all port operators from already reduced y, g, l, f.
PortOperators assemble_port_operators(ComplexMatrix y, ComplexMatrix g, ComplexMatrix l,
                                      std::vector<ComplexRow> f, std::vector<double> r0,
                                      std::vector<double> bl, double z0);

/// Full direct reduction for one configuration.
PortOperators reduce_ports(const FullWaveSystem& system, const PortConfig& config,
                           const std::vector<Direction>& directions = {});

/// Same circuitry, new (shared or per-port) line impedances and susceptances.
PortOperators with_circuit(const PortOperators& ops, std::vector<double> r0, std::vector<double> bl);

/// Precomputed operators for combinatorial sweeps, restricted to a candidate
/// set of basis indices (all N by default).
///
/// y_hat = Dᴴ Y D, g_hat = Dᴴ Yᴴ R_rad Y D, l_hat = Dᴴ Yᴴ R_loss Y D,
/// k_hat = (1 + R0·y_hat) / (2√R0) and f_hat = F Y D, all indexed by
/// candidate slot.
struct BigOperators {
  std::vector<Index> candidates;
  double r0 = 50.0;
  ComplexMatrix y_hat;
  ComplexMatrix g_hat;
  ComplexMatrix l_hat;
  ComplexMatrix k_hat;
  std::vector<ComplexRow> f_hat;
  double z0 = kFreeSpaceImpedance;

  /// Slot of a basis index inside `candidates`, or throws InvalidArgument.
  Index slot(Index basis) const;
  std::vector<Index> slots(const std::vector<Index>& positions) const;

  /// Cᴴ M C for the given basis positions.
  ComplexMatrix index(const ComplexMatrix& m, const std::vector<Index>& positions) const;
  /// Port operators by indexing; K from k_hat when the circuit is the shared
  /// R0 with BL = 0, otherwise rebuilt from the indexed y.
  PortOperators port_operators(const PortConfig& config) const;
};

/// Largest N for which the dense precompute is attempted.
inline constexpr Index kMaxDensePrecompute = 8192;

BigOperators precompute_big(const FullWaveSystem& system, double r0_shared,
                            std::optional<std::vector<Index>> candidates = std::nullopt,
                            const std::vector<Direction>& directions = {});

/// Per-port implied line admittance for a given excitation: ((y + jB)v)_p / v_p.
/// Equal to 1/R0_p when the port is perfectly matched; entries with a
/// non-positive real part correspond to non-physical lines.
std::vector<Complex> implied_line_admittance(const ComplexMatrix& y, const std::vector<double>& bl,
                                             const ComplexVector& v);

}  // namespace tarc
