#include "tarc/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tarc/errors.hpp"

namespace tarc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> shared(Index p, double value) {
  return std::vector<double>(static_cast<std::size_t>(p), value);
}

}  // namespace

ExcitationOptimum optimal_excitation(const ComplexMatrix& g, const ComplexMatrix& k) {
  if (g.rows() != k.rows() || g.cols() != k.cols() || g.rows() != g.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "g and K must be square and equally sized");
  }
  const ComplexMatrix khk = k.adjoint() * k;
  ExcitationOptimum out;
  try {
    out.spectrum = linalg::eig_hpd_pencil(g, khk);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    throw Error(ErrorKind::IllConditionedCircuit, "KᴴK is not positive definite");
  }
  out.eta1 = out.spectrum.front().value.real();
  out.tarc = tarc_from_efficiency(out.eta1);
  out.v1 = out.spectrum.front().vector;
  out.a1 = k * out.v1;
  return out;
}

ExcitationOptimum optimal_excitation(const PortOperators& ops) {
  return optimal_excitation(ops.g, ops.k);
}

std::vector<MatchSolution> perfect_match(const ComplexMatrix& y) {
  const auto pairs = linalg::eig_general(y);
  const double floor = kFeasibleConductance * y.norm();
  std::vector<MatchSolution> out;
  out.reserve(pairs.size());
  bool any = false;
  for (const auto& pair : pairs) {
    MatchSolution s;
    s.eigenvalue = pair.value;
    s.v = pair.vector;
    linalg::fix_phase(s.v);
    s.feasible = pair.value.real() > floor;
    if (s.feasible) {
      s.r0 = 1.0 / pair.value.real();
      s.bl = -pair.value.imag();
      any = true;
    }
    out.push_back(std::move(s));
  }
  if (!any) throw Error(ErrorKind::AllInfeasible, "no eigenvalue of y has a positive real part");
  return out;
}

std::vector<ClosedMatch> ranked_perfect_match(const PortOperators& ops) {
  std::vector<ClosedMatch> out;
  for (auto& m : perfect_match(ops.y)) {
    if (!m.feasible) continue;
    const auto wired = with_circuit(ops, shared(ops.size(), m.r0), shared(ops.size(), m.bl));
    ExcitationSolution result = evaluate(wired, m.v);
    out.push_back({std::move(m), std::move(result)});
  }
  std::stable_sort(out.begin(), out.end(), [](const ClosedMatch& a, const ClosedMatch& b) {
    return a.result.eta_tot > b.result.eta_tot;
  });
  return out;
}

GainOptimum max_realized_gain(const ComplexRow& f, const ComplexMatrix& k, double z0) {
  if (f.size() != k.rows() || k.rows() != k.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "far-field row and K sizes differ");
  }
  const linalg::LuSolver lu(k);
  // h = f K⁻¹ as a column: Kᵀ h = fᵀ
  const ComplexVector h = lu.solve_transposed(f.transpose());
  GainOptimum out;
  out.gamma1 = 4.0 * kPi / z0 * h.squaredNorm();
  // v = K⁻¹ hᴴ-column = (KᴴK)⁻¹ fᴴ
  ComplexVector v = lu.solve(h.conjugate());
  const double n = v.norm();
  if (n > 0.0) {
    v /= n;
    linalg::fix_phase(v);
  }
  out.v1 = std::move(v);
  return out;
}

BoundResult efficiency_bound(const ComplexMatrix& g, const ComplexMatrix& l) {
  if (g.rows() != g.cols() || l.rows() != g.rows() || l.cols() != g.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "g and l must be square and equally sized");
  }
  const Index p = g.rows();
  const auto gpairs = linalg::eig_hermitian(linalg::hermitian_part(g));
  const double lmax = gpairs.front().value.real();
  if (!(lmax > 0.0)) throw Error(ErrorKind::DegenerateRadiationOperator, "g has no positive eigenvalue");
  const double cutoff = 1e-12 * lmax;
  Index rank = 0;
  while (rank < p && gpairs[static_cast<std::size_t>(rank)].value.real() > cutoff) ++rank;

  ComplexMatrix ur(p, rank);
  ComplexMatrix un(p, p - rank);
  RealVector gr(rank);
  for (Index i = 0; i < p; ++i) {
    const auto& pair = gpairs[static_cast<std::size_t>(i)];
    if (i < rank) {
      ur.col(i) = pair.vector;
      gr[i] = pair.value.real();
    } else {
      un.col(i - rank) = pair.vector;
    }
  }
  const ComplexMatrix lh = linalg::hermitian_part(l);
  ComplexMatrix s = ur.adjoint() * lh * ur;
  // eliminate null(g) components: x_n = −l_nn⁺ l_nr x_r
  ComplexMatrix elim = ComplexMatrix::Zero(p - rank, rank);
  if (rank < p) {
    const ComplexMatrix lnn = un.adjoint() * lh * un;
    const ComplexMatrix lnr = un.adjoint() * lh * ur;
    const auto lpairs = linalg::eig_hermitian(lnn);
    const double lcut = 1e-12 * std::max(lh.norm(), std::numeric_limits<double>::min());
    ComplexMatrix pinv = ComplexMatrix::Zero(p - rank, p - rank);
    for (const auto& pair : lpairs) {
      if (pair.value.real() > lcut) pinv += pair.vector * pair.vector.adjoint() / pair.value.real();
    }
    elim = -pinv * lnr;
    s += lnr.adjoint() * elim;
  }
  s = linalg::hermitian_part(s);
  const auto pairs = linalg::eig_hpd_pencil(s, gr.cast<Complex>().asDiagonal().toDenseMatrix());
  const auto& best = pairs.back();

  BoundResult out;
  out.delta = std::max(0.0, best.value.real());
  out.eta_ub = 1.0 / (1.0 + out.delta);
  ComplexVector v = ur * best.vector;
  if (rank < p) v += un * (elim * best.vector);
  v.normalize();
  linalg::fix_phase(v);
  out.v = std::move(v);
  return out;
}

NelderMeadResult nelder_mead_maximize(const std::function<double(const std::vector<double>&)>& objective,
                                      std::vector<double> x0, const NelderMeadOptions& o) {
  const std::size_t n = x0.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "Nelder-Mead needs at least one variable");
  using Point = std::vector<double>;
  auto eval = [&](const Point& x) {
    const double v = objective(x);
    return std::isfinite(v) ? v : kNegInf;
  };

  std::vector<Point> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += o.initial_scale * std::abs(x0[i]) + o.initial_offset;
  }
  std::vector<double> val(n + 1);
  for (std::size_t i = 0; i <= n; ++i) val[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    std::vector<Point> p2;
    std::vector<double> v2;
    for (auto i : order) {
      p2.push_back(pts[i]);
      v2.push_back(val[i]);
    }
    pts = std::move(p2);
    val = std::move(v2);
  };
  auto affine = [&](const Point& c, const Point& w, double t) {
    Point r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = c[i] + t * (w[i] - c[i]);
    return r;
  };

  NelderMeadResult res;
  sort_simplex();
  for (res.iterations = 0; res.iterations < o.max_iterations; ++res.iterations) {
    double diameter = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += pts[0][i] * pts[0][i];
    for (std::size_t k = 1; k <= n; ++k) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += (pts[k][i] - pts[0][i]) * (pts[k][i] - pts[0][i]);
      diameter = std::max(diameter, std::sqrt(d));
    }
    const double spread = val[0] - val[n];
    if (diameter < o.x_tolerance * (1.0 + std::sqrt(scale)) && spread < o.f_tolerance) {
      res.converged = true;
      break;
    }

    Point centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
    }
    const Point xr = affine(centroid, pts[n], -o.reflection);
    const double fr = eval(xr);
    if (fr > val[0]) {
      const Point xe = affine(centroid, pts[n], -o.reflection * o.expansion);
      const double fe = eval(xe);
      if (fe > fr) {
        pts[n] = xe;
        val[n] = fe;
      } else {
        pts[n] = xr;
        val[n] = fr;
      }
    } else if (fr > val[n - 1]) {
      pts[n] = xr;
      val[n] = fr;
    } else {
      const bool outside = fr > val[n];
      const Point xc = outside ? affine(centroid, xr, o.contraction) : affine(centroid, pts[n], o.contraction);
      const double fc = eval(xc);
      if (fc > (outside ? fr : val[n])) {
        pts[n] = xc;
        val[n] = fc;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          pts[k] = affine(pts[0], pts[k], o.shrink);
          val[k] = eval(pts[k]);
        }
      }
    }
    sort_simplex();
  }
  res.x = pts[0];
  res.value = val[0];
  return res;
}

RefinedCircuit refine_circuit(const CircuitObjective& objective, double r0_init, double bl_init,
                              const NelderMeadOptions& options) {
  if (!(r0_init > 0.0)) throw Error(ErrorKind::InvalidArgument, "initial R0 must be positive");
  // BL·R0_init keeps both coordinates dimensionless and of order one
  auto unpack = [r0_init](const std::vector<double>& x) {
    return std::pair<double, double>{std::exp(x[0]), x[1] / r0_init};
  };
  auto f = [&](const std::vector<double>& x) {
    const auto [r0, bl] = unpack(x);
    return objective(r0, bl);
  };
  const std::vector<double> x0{std::log(r0_init), bl_init * r0_init};
  const double start = f(x0);
  const auto nm = nelder_mead_maximize(f, x0, options);

  RefinedCircuit out;
  out.iterations = nm.iterations;
  out.converged = nm.converged;
  if (std::isfinite(start) && !(nm.value >= start)) {
    out.r0 = r0_init;
    out.bl = bl_init;
    out.score = start;
  } else {
    std::tie(out.r0, out.bl) = unpack(nm.x);
    out.score = nm.value;
  }
  return out;
}

double eta1_for_circuit(const PortOperators& ops, double r0, double bl) {
  try {
    const auto wired = with_circuit(ops, shared(ops.size(), r0), shared(ops.size(), bl));
    return optimal_excitation(wired).eta1;
  } catch (const Error&) {
    return kNegInf;
  }
}

double gain_for_circuit(const PortOperators& ops, std::size_t direction, double r0, double bl) {
  if (direction >= ops.f.size()) {
    throw Error(ErrorKind::InvalidArgument, "direction not stored in port operators");
  }
  try {
    const auto wired = with_circuit(ops, shared(ops.size(), r0), shared(ops.size(), bl));
    return max_realized_gain(wired.f[direction], wired.k, wired.z0).gamma1;
  } catch (const Error&) {
    return kNegInf;
  }
}

}  // namespace tarc
