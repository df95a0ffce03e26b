#include "tarc/port_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "tarc/errors.hpp"

namespace tarc {

PortConfig PortConfig::shared(std::vector<Index> positions, double r0, double bl) {
  PortConfig c;
  const auto p = positions.size();
  c.positions = std::move(positions);
  c.r0.assign(p, r0);
  c.bl.assign(p, bl);
  return c;
}

void validate(const PortConfig& config, Index n) {
  const auto p = config.positions.size();
  if (p == 0) throw Error(ErrorKind::InvalidArgument, "port configuration has no ports");
  if (config.r0.size() != p || config.bl.size() != p) {
    throw Error(ErrorKind::DimensionMismatch, "circuit vectors do not match the port count");
  }
  std::set<Index> seen;
  for (Index pos : config.positions) {
    if (pos < 0 || pos >= n) {
      throw Error(ErrorKind::InvalidArgument, "port position " + std::to_string(pos) +
                                                  " outside [0, " + std::to_string(n) + ")");
    }
    if (!seen.insert(pos).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate port position " + std::to_string(pos));
    }
  }
  for (double r : config.r0) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw Error(ErrorKind::InvalidArgument, "characteristic resistance must be positive");
    }
  }
}

namespace {

void check_positions(const std::vector<Index>& positions, Index n) {
  validate(PortConfig::shared(positions, 1.0), n);
}

ComplexMatrix excitation_columns(const FullWaveSystem& system, const std::vector<Index>& positions) {
  ComplexMatrix dc = ComplexMatrix::Zero(system.size(), static_cast<Index>(positions.size()));
  for (std::size_t p = 0; p < positions.size(); ++p) {
    dc(positions[p], static_cast<Index>(p)) = system.xi[positions[p]];
  }
  return dc;
}

}  // namespace

AdmittanceReduction reduce_admittance(const FullWaveSystem& system, const linalg::LuSolver& z_lu,
                                      const std::vector<Index>& positions) {
  check_positions(positions, system.size());
  AdmittanceReduction out;
  out.w = z_lu.solve(excitation_columns(system, positions));
  const Index p = static_cast<Index>(positions.size());
  out.y.resize(p, p);
  for (Index r = 0; r < p; ++r) {
    const Index pos = positions[static_cast<std::size_t>(r)];
    out.y.row(r) = system.xi[pos] * out.w.row(pos);
  }
  return out;
}

AdmittanceReduction reduce_admittance(const FullWaveSystem& system,
                                      const std::vector<Index>& positions) {
  validate_system_shapes(system);
  return reduce_admittance(system, linalg::LuSolver(system.impedance()), positions);
}

ComplexMatrix reduce_quadratic(const ComplexMatrix& m, const ComplexMatrix& w) {
  if (m.rows() != m.cols() || m.cols() != w.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "operator and port-mode matrix sizes differ");
  }
  return w.adjoint() * (m * w);
}

ComplexMatrix reduce_quadratic(const RealMatrix& m, const ComplexMatrix& w) {
  if (m.rows() != m.cols() || m.cols() != w.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "operator and port-mode matrix sizes differ");
  }
  // real operator: multiply real and imaginary parts separately
  ComplexMatrix mw(w.rows(), w.cols());
  mw.real() = m * w.real();
  mw.imag() = m * w.imag();
  return w.adjoint() * mw;
}

ComplexRow reduce_farfield(const ComplexRow& farfield, const ComplexMatrix& w) {
  if (farfield.size() != w.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "far-field row length differs from N");
  }
  return farfield * w;
}

ComplexRow reduce_farfield(const FullWaveSystem& system, const ComplexMatrix& w,
                           const Direction& direction) {
  return reduce_farfield(farfield_row(system, direction.e_hat, direction.r_hat), w);
}

WaveMatrices build_wave_matrices(const ComplexMatrix& y, const std::vector<double>& r0,
                                 const std::vector<double>& bl) {
  const Index p = y.rows();
  if (y.cols() != p || static_cast<Index>(r0.size()) != p || static_cast<Index>(bl.size()) != p) {
    throw Error(ErrorKind::DimensionMismatch, "admittance and circuit sizes differ");
  }
  RealVector lambda(p);
  for (Index i = 0; i < p; ++i) {
    const double r = r0[static_cast<std::size_t>(i)];
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "characteristic resistance must be positive");
    lambda[i] = std::sqrt(r);
  }
  ComplexMatrix loaded = y;
  for (Index i = 0; i < p; ++i) loaded(i, i) += Complex(0.0, bl[static_cast<std::size_t>(i)]);
  // Λ A Λ Λ⁻¹ = Λ A
  const ComplexMatrix lam_a = lambda.asDiagonal() * loaded;
  const ComplexMatrix inv_lambda = lambda.cwiseInverse().asDiagonal().toDenseMatrix().cast<Complex>();
  WaveMatrices out;
  out.k = 0.5 * (inv_lambda + lam_a);
  out.l = 0.5 * (inv_lambda - lam_a);
  return out;
}

ComplexVector port_currents(const ComplexMatrix& y, const std::vector<double>& bl,
                            const ComplexVector& v) {
  if (y.cols() != v.size() || static_cast<Index>(bl.size()) != y.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "admittance, susceptance and voltage sizes differ");
  }
  ComplexVector i = y * v;
  for (Index p = 0; p < i.size(); ++p) i[p] += Complex(0.0, bl[static_cast<std::size_t>(p)]) * v[p];
  return i;
}

PortOperators assemble_port_operators(ComplexMatrix y, ComplexMatrix g, ComplexMatrix l,
                                      std::vector<ComplexRow> f, std::vector<double> r0,
                                      std::vector<double> bl, double z0) {
  PortOperators ops;
  auto waves = build_wave_matrices(y, r0, bl);
  ops.y = std::move(y);
  ops.g = linalg::hermitian_part(g);
  ops.l = linalg::hermitian_part(l);
  ops.k = std::move(waves.k);
  ops.lw = std::move(waves.l);
  ops.f = std::move(f);
  ops.r0 = std::move(r0);
  ops.bl = std::move(bl);
  ops.z0 = z0;
  return ops;
}

PortOperators with_circuit(const PortOperators& ops, std::vector<double> r0, std::vector<double> bl) {
  PortOperators out = ops;
  auto waves = build_wave_matrices(ops.y, r0, bl);
  out.k = std::move(waves.k);
  out.lw = std::move(waves.l);
  out.r0 = std::move(r0);
  out.bl = std::move(bl);
  return out;
}

PortOperators reduce_ports(const FullWaveSystem& system, const PortConfig& config,
                           const std::vector<Direction>& directions) {
  validate_system_shapes(system);
  validate(config, system.size());
  auto red = reduce_admittance(system, config.positions);
  ComplexMatrix g = reduce_quadratic(system.r_rad, red.w);
  ComplexMatrix l = reduce_quadratic(system.r_loss, red.w);
  std::vector<ComplexRow> f;
  f.reserve(directions.size());
  for (const auto& row : farfield_rows(system, directions)) f.push_back(reduce_farfield(row, red.w));
  return assemble_port_operators(std::move(red.y), std::move(g), std::move(l), std::move(f),
                                 config.r0, config.bl, system.z0);
}

Index BigOperators::slot(Index basis) const {
  auto it = std::lower_bound(candidates.begin(), candidates.end(), basis);
  if (it == candidates.end() || *it != basis) {
    throw Error(ErrorKind::InvalidArgument,
                "basis index " + std::to_string(basis) + " is not a precomputed candidate");
  }
  return static_cast<Index>(it - candidates.begin());
}

std::vector<Index> BigOperators::slots(const std::vector<Index>& positions) const {
  std::vector<Index> out;
  out.reserve(positions.size());
  for (Index p : positions) out.push_back(slot(p));
  return out;
}

ComplexMatrix BigOperators::index(const ComplexMatrix& m, const std::vector<Index>& positions) const {
  const auto s = slots(positions);
  const Index p = static_cast<Index>(s.size());
  ComplexMatrix out(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) out(i, j) = m(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
  }
  return out;
}

PortOperators BigOperators::port_operators(const PortConfig& config) const {
  const auto s = slots(config.positions);
  std::vector<ComplexRow> f;
  f.reserve(f_hat.size());
  for (const auto& row : f_hat) {
    ComplexRow fr(static_cast<Index>(s.size()));
    for (std::size_t p = 0; p < s.size(); ++p) fr[static_cast<Index>(p)] = row[s[p]];
    f.push_back(std::move(fr));
  }
  PortOperators ops = assemble_port_operators(index(y_hat, config.positions),
                                              index(g_hat, config.positions),
                                              index(l_hat, config.positions), std::move(f),
                                              config.r0, config.bl, z0);
  const bool shared_plain =
      std::all_of(config.r0.begin(), config.r0.end(), [this](double r) { return r == r0; }) &&
      std::all_of(config.bl.begin(), config.bl.end(), [](double b) { return b == 0.0; });
  if (shared_plain) {
    ops.k = index(k_hat, config.positions);
    // shared R0, BL = 0: L = 1/√R0 − K
    ops.lw = -ops.k;
    ops.lw.diagonal().array() += Complex(1.0 / std::sqrt(r0), 0.0);
  }
  return ops;
}

BigOperators precompute_big(const FullWaveSystem& system, double r0_shared,
                            std::optional<std::vector<Index>> candidates,
                            const std::vector<Direction>& directions) {
  validate_system_shapes(system);
  if (!(r0_shared > 0.0)) throw Error(ErrorKind::InvalidArgument, "shared R0 must be positive");
  const Index n = system.size();
  BigOperators big;
  if (candidates) {
    big.candidates = *candidates;
    std::sort(big.candidates.begin(), big.candidates.end());
    big.candidates.erase(std::unique(big.candidates.begin(), big.candidates.end()),
                         big.candidates.end());
  } else {
    if (n > kMaxDensePrecompute) {
      throw Error(ErrorKind::InvalidArgument,
                  "N = " + std::to_string(n) + " exceeds the dense precompute limit");
    }
    big.candidates.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) big.candidates[static_cast<std::size_t>(i)] = i;
  }
  if (big.candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidate positions");
  big.r0 = r0_shared;
  big.z0 = system.z0;

  auto red = reduce_admittance(system, big.candidates);
  big.y_hat = std::move(red.y);
  big.g_hat = linalg::hermitian_part(reduce_quadratic(system.r_rad, red.w));
  big.l_hat = linalg::hermitian_part(reduce_quadratic(system.r_loss, red.w));
  const Index c = static_cast<Index>(big.candidates.size());
  big.k_hat = (ComplexMatrix::Identity(c, c) + r0_shared * big.y_hat) / (2.0 * std::sqrt(r0_shared));
  for (const auto& row : farfield_rows(system, directions)) {
    big.f_hat.push_back(reduce_farfield(row, red.w));
  }
  return big;
}

std::vector<Complex> implied_line_admittance(const ComplexMatrix& y, const std::vector<double>& bl,
                                             const ComplexVector& v) {
  const ComplexVector i = port_currents(y, bl, v);
  std::vector<Complex> out(static_cast<std::size_t>(v.size()));
  for (Index p = 0; p < v.size(); ++p) {
    if (std::abs(v[p]) == 0.0) {
      throw Error(ErrorKind::ZeroExcitation, "port " + std::to_string(p) + " carries no voltage");
    }
    out[static_cast<std::size_t>(p)] = i[p] / v[p];
  }
  return out;
}

}  // namespace tarc
