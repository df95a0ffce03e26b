#include "tarc/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tarc/errors.hpp"

namespace tarc {

namespace {

double quadratic(const ComplexMatrix& m, const ComplexVector& v) {
  return v.dot(m * v).real();  // Eigen's dot conjugates the left operand
}

void check_direction(const PortOperators& ops, std::size_t direction) {
  if (direction >= ops.f.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "direction " + std::to_string(direction) + " not stored in port operators");
  }
}

}  // namespace

double tarc_from_efficiency(double eta_tot) {
  const double radicand = 1.0 - eta_tot;
  return std::sqrt(radicand > 0.0 ? radicand : 0.0);
}

ComplexVector uniform_excitation(Index ports) { return ComplexVector::Ones(ports); }

ExcitationSolution evaluate(const PortOperators& ops, const ComplexVector& v) {
  if (v.size() != ops.size()) {
    throw Error(ErrorKind::DimensionMismatch, "excitation length differs from port count");
  }
  if (v.squaredNorm() == 0.0) throw Error(ErrorKind::ZeroExcitation, "excitation vector is zero");

  ExcitationSolution s;
  s.v = v;
  s.a = ops.k * v;
  s.b = ops.lw * v;
  s.p_tot = 0.5 * s.a.squaredNorm();
  s.p_rad = 0.5 * quadratic(ops.g, v);
  s.p_lost = 0.5 * quadratic(ops.l, v);
  if (!(s.p_tot > 0.0)) throw Error(ErrorKind::ZeroIncidentPower, "incident power vanishes");

  s.eta_tot = s.p_rad / s.p_tot;
  const double radicand = 1.0 - s.eta_tot;
  if (radicand < -kPassivityTolerance) {
    throw Error(ErrorKind::PassivityViolation,
                "radiated power exceeds incident power by " + std::to_string(-radicand));
  }
  s.tarc = std::sqrt(radicand > 0.0 ? radicand : 0.0);
  const double accepted = s.p_rad + s.p_lost;
  s.eta_rad = accepted > 0.0 ? s.p_rad / accepted : 0.0;
  s.eta_match = accepted / s.p_tot;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double scale = 4.0 * kPi / ops.z0;
  for (const auto& f : ops.f) {
    const double field = std::norm((f * v)(0));
    s.directivity.push_back(s.p_rad > 0.0 ? scale * field / (2.0 * s.p_rad) : nan);
    s.realized_gain.push_back(scale * field / (2.0 * s.p_tot));
  }
  return s;
}

double directivity(const PortOperators& ops, const ComplexVector& v, std::size_t direction) {
  check_direction(ops, direction);
  const double denom = quadratic(ops.g, v);
  if (!(denom > 0.0)) throw Error(ErrorKind::ZeroRadiatedPower, "vᴴ g v is not positive");
  const Complex fv = (ops.f[direction] * v)(0);
  return 4.0 * kPi / ops.z0 * std::norm(fv) / denom;
}

double realized_gain(const PortOperators& ops, const ComplexVector& v, std::size_t direction) {
  check_direction(ops, direction);
  const double denom = (ops.k * v).squaredNorm();
  if (!(denom > 0.0)) throw Error(ErrorKind::ZeroIncidentPower, "incident waves vanish");
  const Complex fv = (ops.f[direction] * v)(0);
  return 4.0 * kPi / ops.z0 * std::norm(fv) / denom;
}

PortScan scan_single_port(const ComplexMatrix& g_hat, const ComplexMatrix& k_hat,
                          const std::vector<Index>& candidate_slots,
                          const std::vector<Index>& candidate_positions) {
  if (candidate_slots.empty()) throw Error(ErrorKind::InvalidArgument, "no candidates to scan");
  if (candidate_slots.size() != candidate_positions.size()) {
    throw Error(ErrorKind::DimensionMismatch, "slot and position lists differ in length");
  }
  PortScan scan;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidate_slots.size(); ++i) {
    const Index s = candidate_slots[i];
    const double ratio = g_hat(s, s).real() / std::norm(k_hat(s, s));
    scan.ratio.push_back(ratio);
    scan.tarc.push_back(tarc_from_efficiency(ratio));
    if (ratio > best) {
      best = ratio;
      scan.best_slot = i;
      scan.best_position = candidate_positions[i];
    }
  }
  return scan;
}

PortScan scan_single_port(const BigOperators& big, const std::vector<Index>& candidates) {
  return scan_single_port(big.g_hat, big.k_hat, big.slots(candidates), candidates);
}

}  // namespace tarc
