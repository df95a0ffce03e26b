#include "tarc/mom_dipole.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "tarc/errors.hpp"
#include "tarc/quadrature.hpp"

namespace tarc::mom {

namespace {

constexpr int kSmoothOrder = 8;
constexpr int kSelfOuterOrder = 20;
constexpr int kFarFieldOrder = 8;

struct Segment {
  Vec3 start;
  Vec3 dir;
  double len = 0.0;
  double radius = 0.0;
  int wire = 0;
  double offset = 0.0;  // distance of `start` from the wire start, along dir
  // basis functions touching the segment: [0] falls from the left node,
  // [1] rises towards the right node; -1 when the node is a wire end
  std::array<Index, 2> basis{-1, -1};
};

struct Mesh {
  std::vector<Segment> segments;
  RealVector xi;
  RealMatrix positions;
  std::vector<int> wire_of;
  double k = 0.0;
  double z0 = kFreeSpaceImpedance;
};

// ∫∫ over the unit-parameter square of {1, t, t', t t'}·kernel, scaled by
// the physical segment lengths.
struct Moments {
  double m00 = 0.0, m10 = 0.0, m01 = 0.0, m11 = 0.0;

  // shape p on the observation segment, q on the source segment;
  // shape 0 = 1 - t (falling), shape 1 = t (rising)
  double shaped(int p, int q) const {
    if (p == 0 && q == 0) return m00 - m10 - m01 + m11;
    if (p == 1 && q == 0) return m10 - m11;
    if (p == 0 && q == 1) return m01 - m11;
    return m11;
  }
};

double sin_kernel(double k, double r) {
  const double x = k * r;
  if (x < 1e-4) return k * (1.0 - x * x / 6.0) / (4.0 * kPi);
  return std::sin(x) / (4.0 * kPi * r);
}

double cos_smooth_kernel(double k, double r) {
  if (r <= 0.0) return 0.0;
  const double s = std::sin(0.5 * k * r);
  return -2.0 * s * s / (4.0 * kPi * r);
}

template <typename Kernel>
Moments numeric_moments(const Segment& a, const Segment& b, int order, double radius_sq,
                        Kernel&& kernel) {
  const auto& rule = gauss_legendre_unit(order);
  Moments m;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const Vec3 r = a.start + (t * a.len) * a.dir;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double tp = rule.nodes[j];
      const Vec3 rp = b.start + (tp * b.len) * b.dir;
      const double dist = std::sqrt((r - rp).squaredNorm() + radius_sq);
      const double w = rule.weights[i] * rule.weights[j] * kernel(dist);
      m.m00 += w;
      m.m10 += w * t;
      m.m01 += w * tp;
      m.m11 += w * t * tp;
    }
  }
  const double scale = a.len * b.len;
  m.m00 *= scale;
  m.m10 *= scale;
  m.m01 *= scale;
  m.m11 *= scale;
  return m;
}

// Static part 1/(4πR), R = sqrt((z-z')² + a²), for two segments on the same
// straight wire. The inner integral is done in closed form; the outer one
// uses Gauss–Legendre after the substitution t = 3τ² − 2τ³, which flattens
// the logarithmic end behaviour of the inner result.
Moments collinear_static_moments(const Segment& a, const Segment& b) {
  const auto& rule = gauss_legendre_unit(kSelfOuterOrder);
  const double rad = a.radius;
  const double z1 = b.offset;
  const double z2 = b.offset + b.len;
  Moments m;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double tau = rule.nodes[i];
    const double t = tau * tau * (3.0 - 2.0 * tau);
    const double jac = 6.0 * tau * (1.0 - tau);
    const double w = rule.weights[i] * jac;
    const double z = a.offset + t * a.len;
    const double j0 = std::asinh((z2 - z) / rad) - std::asinh((z1 - z) / rad);
    const double jw = std::hypot(z2 - z, rad) - std::hypot(z1 - z, rad);
    const double jt = (jw + (z - z1) * j0) / b.len;  // ∫ (u'/Δ') / R du'
    m.m00 += w * j0;
    m.m10 += w * t * j0;
    m.m01 += w * jt;
    m.m11 += w * t * jt;
  }
  const double scale = a.len / (4.0 * kPi);
  m.m00 *= scale;
  m.m10 *= scale;
  m.m01 *= scale;
  m.m11 *= scale;
  return m;
}

double segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  // closest points of two segments
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a <= 1e-300 && e <= 1e-300) return r.norm();
  if (a <= 1e-300) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-300) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-14 * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

int cross_wire_order(const Segment& a, const Segment& b) {
  const double dist = segment_distance(a.start, a.start + a.len * a.dir, b.start,
                                       b.start + b.len * b.dir);
  const double span = std::max(a.len, b.len);
  if (dist >= span) return kSmoothOrder;
  const double ratio = span / std::max(dist, 1e-12);
  return std::min(48, kSmoothOrder * static_cast<int>(std::ceil(ratio)));
}

Mesh build_mesh(const DipoleArraySpec& spec) {
  Mesh mesh;
  const int s = spec.segments;
  const Index n = static_cast<Index>(spec.dipoles.size()) * s;
  mesh.xi.resize(n);
  mesh.positions.resize(n, 3);
  mesh.wire_of.resize(static_cast<std::size_t>(n));
  mesh.k = 2.0 * kPi * spec.frequency / kSpeedOfLight;
  for (std::size_t w = 0; w < spec.dipoles.size(); ++w) {
    const Dipole& d = spec.dipoles[w];
    const Vec3 u = d.axis.normalized();
    const double delta = d.length / (s + 1);
    const Vec3 origin = d.center - 0.5 * d.length * u;
    const Index base = static_cast<Index>(w) * s;
    for (int node = 1; node <= s; ++node) {
      const Index idx = base + node - 1;
      mesh.xi[idx] = delta;
      mesh.positions.row(idx) = (origin + node * delta * u).transpose();
      mesh.wire_of[static_cast<std::size_t>(idx)] = static_cast<int>(w);
    }
    for (int seg = 0; seg <= s; ++seg) {
      Segment sg;
      sg.start = origin + seg * delta * u;
      sg.dir = u;
      sg.len = delta;
      sg.radius = d.radius;
      sg.wire = static_cast<int>(w);
      sg.offset = seg * delta;
      if (seg >= 1) sg.basis[0] = base + seg - 1;
      if (seg + 1 <= s) sg.basis[1] = base + seg;
      mesh.segments.push_back(sg);
    }
  }
  return mesh;
}

ComplexRow mesh_farfield(const Mesh& mesh, const Vec3& e_hat, const Vec3& r_hat) {
  const auto& rule = gauss_legendre_unit(kFarFieldOrder);
  const Index n = mesh.xi.size();
  ComplexRow row = ComplexRow::Zero(n);
  const Complex prefactor(0.0, -mesh.k * mesh.z0 / (4.0 * kPi));
  for (const auto& sg : mesh.segments) {
    const double proj = e_hat.dot(sg.dir);
    if (proj == 0.0) continue;
    Complex falling(0.0, 0.0);
    Complex rising(0.0, 0.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = rule.nodes[i];
      const Vec3 r = sg.start + (t * sg.len) * sg.dir;
      const Complex phase = std::polar(1.0, mesh.k * r_hat.dot(r));
      falling += rule.weights[i] * (1.0 - t) * phase;
      rising += rule.weights[i] * t * phase;
    }
    if (sg.basis[0] >= 0) row[sg.basis[0]] += proj * sg.len * falling;
    if (sg.basis[1] >= 0) row[sg.basis[1]] += proj * sg.len * rising;
  }
  for (Index i = 0; i < n; ++i) row[i] *= prefactor * mesh.xi[i];
  return row;
}

}  // namespace

double surface_resistance(double sigma, double frequency) {
  if (!(frequency > 0.0) || !(sigma > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "surface resistance needs sigma > 0 and f > 0");
  }
  if (std::isinf(sigma)) return 0.0;
  return std::sqrt(kPi * frequency * kMu0 / sigma);
}

void validate(const DipoleArraySpec& spec) {
  if (spec.dipoles.empty()) throw Error(ErrorKind::InvalidArgument, "no dipoles");
  if (spec.segments < 3 || spec.segments % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "segments per dipole must be odd and >= 3");
  }
  if (!(spec.frequency > 0.0)) throw Error(ErrorKind::InvalidArgument, "frequency must be positive");
  if (!(spec.conductivity > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "conductivity must be positive (inf for lossless)");
  }
  const double k = 2.0 * kPi * spec.frequency / kSpeedOfLight;
  for (std::size_t i = 0; i < spec.dipoles.size(); ++i) {
    const auto& d = spec.dipoles[i];
    const std::string tag = "dipole " + std::to_string(i);
    if (!(d.length > 0.0) || !(d.radius > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, tag + ": length and radius must be positive");
    }
    if (d.axis.norm() < 1e-12) throw Error(ErrorKind::InvalidArgument, tag + ": zero axis");
    if (d.radius >= d.length / 50.0) {
      throw Error(ErrorKind::InvalidArgument, tag + ": radius must stay below length/50");
    }
    if (k * d.radius > kMaxElectricalRadius) {
      throw Error(ErrorKind::ElectricallyTooThick,
                  tag + ": k*a = " + std::to_string(k * d.radius) + " exceeds " +
                      std::to_string(kMaxElectricalRadius));
    }
  }
  for (std::size_t i = 0; i < spec.dipoles.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.dipoles.size(); ++j) {
      const auto& a = spec.dipoles[i];
      const auto& b = spec.dipoles[j];
      const Vec3 ua = a.axis.normalized();
      const Vec3 ub = b.axis.normalized();
      const double dist =
          segment_distance(a.center - 0.5 * a.length * ua, a.center + 0.5 * a.length * ua,
                           b.center - 0.5 * b.length * ub, b.center + 0.5 * b.length * ub);
      if (dist <= a.radius + b.radius) {
        throw Error(ErrorKind::GeometryOverlap,
                    "dipoles " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
  }
}

FullWaveSystem build_dipole_array(const DipoleArraySpec& spec) {
  validate(spec);
  auto mesh = std::make_shared<Mesh>(build_mesh(spec));
  const Index n = mesh->xi.size();
  const double k = mesh->k;
  const double omega = 2.0 * kPi * spec.frequency;
  const double omega_mu = omega * kMu0;
  const double omega_eps = omega * kEps0;

  RealMatrix re = RealMatrix::Zero(n, n);
  RealMatrix im = RealMatrix::Zero(n, n);
  RealMatrix loss = RealMatrix::Zero(n, n);

  const auto& segs = mesh->segments;
  for (std::size_t si = 0; si < segs.size(); ++si) {
    const Segment& a = segs[si];
    for (std::size_t sj = si; sj < segs.size(); ++sj) {
      const Segment& b = segs[sj];
      const bool same_wire = a.wire == b.wire;

      // radiation part: exact sin(kR)/R kernel between axes, no radius
      const Moments ms =
          numeric_moments(a, b, kSmoothOrder, 0.0, [k](double r) { return sin_kernel(k, r); });

      // reactive part: reduced kernel on the same wire, axis distance otherwise
      Moments mc;
      if (same_wire) {
        const double a2 = a.radius * a.radius;
        mc = numeric_moments(a, b, kSmoothOrder, a2,
                             [k](double r) { return cos_smooth_kernel(k, r); });
        const Moments st = collinear_static_moments(a, b);
        mc.m00 += st.m00;
        mc.m10 += st.m10;
        mc.m01 += st.m01;
        mc.m11 += st.m11;
      } else {
        mc = numeric_moments(a, b, cross_wire_order(a, b), 0.0, [k](double r) {
          return std::cos(k * r) / (4.0 * kPi * r);
        });
      }

      const double dot = a.dir.dot(b.dir);
      for (int p = 0; p < 2; ++p) {
        const Index m = a.basis[static_cast<std::size_t>(p)];
        if (m < 0) continue;
        const double dp = (p == 0 ? -1.0 : 1.0) / a.len;
        for (int q = 0; q < 2; ++q) {
          const Index nn = b.basis[static_cast<std::size_t>(q)];
          if (nn < 0) continue;
          const double dq = (q == 0 ? -1.0 : 1.0) / b.len;
          const double scale = mesh->xi[m] * mesh->xi[nn];
          const double r_part =
              scale * (omega_mu * dot * ms.shaped(p, q) - dp * dq * ms.m00 / omega_eps);
          const double x_part =
              scale * (omega_mu * dot * mc.shaped(p, q) - dp * dq * mc.m00 / omega_eps);
          re(m, nn) += r_part;
          im(m, nn) += x_part;
          if (sj != si) {
            re(nn, m) += r_part;
            im(nn, m) += x_part;
          }
        }
      }
    }
  }

  const double rs = surface_resistance(spec.conductivity, spec.frequency);
  if (rs > 0.0) {
    for (const auto& sg : segs) {
      const double factor = rs / (2.0 * kPi * sg.radius) * sg.len;
      const double gram[2][2] = {{1.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 3.0}};
      for (int p = 0; p < 2; ++p) {
        const Index m = sg.basis[static_cast<std::size_t>(p)];
        if (m < 0) continue;
        for (int q = 0; q < 2; ++q) {
          const Index nn = sg.basis[static_cast<std::size_t>(q)];
          if (nn < 0) continue;
          loss(m, nn) += factor * gram[p][q] * mesh->xi[m] * mesh->xi[nn];
        }
      }
    }
  }

  FullWaveSystem sys;
  sys.r_rad = 0.5 * (re + re.transpose());
  sys.x = 0.5 * (im + im.transpose());
  sys.r_loss = 0.5 * (loss + loss.transpose());
  sys.xi = mesh->xi;
  sys.frequency = spec.frequency;
  sys.k = k;
  sys.z0 = kFreeSpaceImpedance;
  sys.positions = mesh->positions;
  sys.wire_of = mesh->wire_of;
  sys.farfield = [mesh](const Vec3& e_hat, const Vec3& r_hat) {
    return mesh_farfield(*mesh, e_hat, r_hat);
  };
  return sys;
}

Index basis_index(const DipoleArraySpec& spec, int d, int offset) {
  if (d < 0 || d >= static_cast<int>(spec.dipoles.size())) {
    throw Error(ErrorKind::InvalidArgument, "dipole index out of range");
  }
  const int half = spec.segments / 2;
  if (offset < -half || offset > half) {
    throw Error(ErrorKind::InvalidArgument, "node offset outside the dipole");
  }
  return static_cast<Index>(d) * spec.segments + half + offset;
}

Index center_basis(const DipoleArraySpec& spec, int d) { return basis_index(spec, d, 0); }

DipoleArraySpec line_array(const std::vector<double>& spacings, double length, double radius,
                           int segments, double frequency, double conductivity) {
  DipoleArraySpec spec;
  spec.segments = segments;
  spec.frequency = frequency;
  spec.conductivity = conductivity;
  std::vector<double> xs{0.0};
  for (double s : spacings) xs.push_back(xs.back() + s);
  const double mid = 0.5 * (xs.front() + xs.back());
  for (double x : xs) {
    Dipole d;
    d.length = length;
    d.radius = radius;
    d.center = Vec3(x - mid, 0.0, 0.0);
    d.axis = Vec3::UnitZ();
    spec.dipoles.push_back(d);
  }
  return spec;
}

Complex input_admittance(const Dipole& dipole, int segments, double frequency,
                         double conductivity) {
  DipoleArraySpec spec;
  spec.dipoles = {dipole};
  spec.segments = segments;
  spec.frequency = frequency;
  spec.conductivity = conductivity;
  const FullWaveSystem sys = build_dipole_array(spec);
  const Index c = center_basis(spec, 0);
  ComplexMatrix rhs = ComplexMatrix::Zero(sys.size(), 1);
  rhs(c, 0) = sys.xi[c];
  const ComplexMatrix w = linalg::solve_linear(sys.impedance(), rhs);
  return sys.xi[c] * w(c, 0);
}

Resonance find_first_resonance(double frequency, int segments, double conductivity,
                               const std::function<double(double)>& radius_of_length,
                               double lo_wavelengths, double hi_wavelengths,
                               double tol_wavelengths) {
  const double lambda = kSpeedOfLight / frequency;
  auto admittance_at = [&](double length) {
    Dipole d;
    d.length = length;
    d.radius = radius_of_length(length);
    return input_admittance(d, segments, frequency, conductivity);
  };
  double lo = lo_wavelengths * lambda;
  double hi = hi_wavelengths * lambda;
  Complex y_lo = admittance_at(lo);
  const Complex y_hi = admittance_at(hi);
  // below resonance the dipole is capacitive, Im(Y) > 0
  if (!(y_lo.imag() > 0.0 && y_hi.imag() < 0.0)) {
    throw Error(ErrorKind::NoConvergence, "first resonance not bracketed by the length interval");
  }
  Complex y_mid = y_lo;
  while (hi - lo > tol_wavelengths * lambda) {
    const double mid = 0.5 * (lo + hi);
    y_mid = admittance_at(mid);
    if (y_mid.imag() > 0.0) {
      lo = mid;
      y_lo = y_mid;
    } else {
      hi = mid;
    }
  }
  const double length = 0.5 * (lo + hi);
  return {length, admittance_at(length)};
}

}  // namespace tarc::mom
