#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "tarc/errors.hpp"

namespace tarc::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where + ": missing key '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + ": expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) fail(where + ": expected a number or an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(number(e, where));
  return out;
}

std::vector<Index> indices(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + ": expected an array of indices");
  std::vector<Index> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) fail(where + ": indices must be integers");
    out.push_back(e.get<Index>());
  }
  return out;
}

Vec3 vec3(const json& j, const std::string& where) {
  const auto v = numbers(j, where);
  if (v.size() != 3) fail(where + ": expected three components");
  return {v[0], v[1], v[2]};
}

double conductivity(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    fail("dipole_array.conductivity: expected a number or \"inf\"");
  }
  const double s = number(j, "dipole_array.conductivity");
  if (!(s > 0.0)) fail("dipole_array.conductivity must be positive");
  return s;
}

std::string format_degrees(double deg) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, deg, std::chars_format::general, 10);
  return std::string(buf, r.ptr);
}

Direction parse_direction(const json& j, const std::string& where) {
  const double theta = number(need(j, "theta_deg", where), where + ".theta_deg") * kPi / 180.0;
  const double phi = number(need(j, "phi_deg", where), where + ".phi_deg") * kPi / 180.0;
  const std::string pol = j.value("polarization", std::string("theta"));
  if (pol != "theta" && pol != "phi") fail(where + ".polarization: expected \"theta\" or \"phi\"");
  const std::string label = j.value("label", "theta" + format_degrees(theta * 180.0 / kPi) + "_phi" +
                                                  format_degrees(phi * 180.0 / kPi) +
                                                  (pol == "phi" ? "_ephi" : ""));
  return make_direction(label, theta, phi, pol == "theta");
}

mom::DipoleArraySpec parse_dipoles(const json& j) {
  const std::string where = "dipole_array";
  mom::DipoleArraySpec spec;
  spec.frequency = number(need(j, "frequency", where), where + ".frequency");
  if (!(spec.frequency > 0.0)) fail(where + ".frequency must be positive");
  spec.segments = j.value("segments", 21);
  spec.conductivity = j.contains("conductivity") ? conductivity(j["conductivity"])
                                                 : std::numeric_limits<double>::infinity();
  const double lambda = kSpeedOfLight / spec.frequency;

  auto radius_for = [&](const json& d, double length, const std::string& at) {
    if (d.contains("radius")) return number(d["radius"], at + ".radius");
    if (d.contains("width")) return mom::strip_equivalent_radius(number(d["width"], at + ".width"));
    if (d.contains("width_over_length")) {
      return mom::strip_equivalent_radius(length * number(d["width_over_length"], at + ".width_over_length"));
    }
    fail(at + ": one of radius, width or width_over_length is required");
  };

  if (j.contains("dipoles")) {
    int i = 0;
    for (const auto& d : j["dipoles"]) {
      const std::string at = where + ".dipoles[" + std::to_string(i++) + "]";
      mom::Dipole dip;
      dip.length = number(need(d, "length", at), at + ".length");
      dip.radius = radius_for(d, dip.length, at);
      if (d.contains("center")) dip.center = vec3(d["center"], at + ".center");
      if (d.contains("axis")) dip.axis = vec3(d["axis"], at + ".axis").normalized();
      spec.dipoles.push_back(dip);
    }
    return spec;
  }

  double length = 0.0;
  const json& len = need(j, "length", where);
  if (len.is_string() && len.get<std::string>() == "resonant") {
    // first resonance of an isolated dipole with the same width rule
    auto radius_of = [&](double l) { return radius_for(j, l, where); };
    length = mom::find_first_resonance(spec.frequency, spec.segments, spec.conductivity, radius_of).length;
  } else {
    length = number(len, where + ".length");
    if (j.contains("length_unit") && j["length_unit"] == "wavelength") length *= lambda;
  }

  std::vector<double> spacings;
  if (j.contains("spacings")) spacings = numbers(j["spacings"], where + ".spacings");
  if (j.contains("spacing_unit") && j["spacing_unit"] == "wavelength") {
    for (auto& s : spacings) s *= lambda;
  }
  auto out = mom::line_array(spacings, length, radius_for(j, length, where), spec.segments,
                             spec.frequency, spec.conductivity);
  return out;
}

RegionSpec parse_regions(const json& j, const std::optional<mom::DipoleArraySpec>& dipoles) {
  RegionSpec spec;
  int i = 0;
  for (const auto& r : j) {
    const std::string at = "ports.regions[" + std::to_string(i++) + "]";
    if (r.is_array()) {
      spec.regions.push_back(indices(r, at));
    } else if (r.is_object()) {
      if (!dipoles) fail(at + ": dipole-relative regions need a dipole_array");
      const int d = need(r, "dipole", at).get<int>();
      std::vector<Index> region;
      for (Index off : indices(need(r, "offsets", at), at + ".offsets")) {
        region.push_back(mom::basis_index(*dipoles, d, static_cast<int>(off)));
      }
      spec.regions.push_back(std::move(region));
    } else {
      fail(at + ": expected an index array or {dipole, offsets}");
    }
  }
  return spec;
}

}  // namespace

std::vector<double> Sweep::frequencies() const {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
  }
  return out;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config root must be an object");

  RunConfig c;
  c.base_dir = base_dir;
  try {
    const bool has_bundle = j.contains("bundle");
    const bool has_array = j.contains("dipole_array");
    if (has_bundle == has_array) fail("exactly one of 'bundle' and 'dipole_array' is required");
    if (has_bundle) c.bundle = base_dir / j["bundle"].get<std::string>();
    if (has_array) {
      try {
        c.dipole_array = parse_dipoles(j["dipole_array"]);
        mom::validate(*c.dipole_array);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        fail(std::string("dipole_array: ") + e.what());
      }
    }

    if (j.contains("sweep")) {
      if (has_bundle) fail("sweep: bundles are single-frequency");
      const auto& s = j["sweep"];
      Sweep sw;
      sw.start = number(need(s, "start", "sweep"), "sweep.start");
      sw.stop = s.contains("stop") ? number(s["stop"], "sweep.stop") : sw.start;
      sw.count = s.value("count", 1);
      if (sw.count < 1) fail("sweep.count must be at least 1");
      if (!(sw.start > 0.0) || !(sw.stop > 0.0)) fail("sweep frequencies must be positive");
      c.sweep = sw;
    }

    if (j.contains("ports")) {
      const auto& p = j["ports"];
      if (p.contains("positions")) c.ports.positions = indices(p["positions"], "ports.positions");
      if (p.contains("dipoles")) {
        if (!c.dipole_array) fail("ports.dipoles needs a dipole_array");
        for (Index d : indices(p["dipoles"], "ports.dipoles")) {
          if (d < 0 || d >= static_cast<Index>(c.dipole_array->dipoles.size())) {
            fail("ports.dipoles: no dipole " + std::to_string(d));
          }
          c.ports.positions.push_back(mom::center_basis(*c.dipole_array, static_cast<int>(d)));
        }
      }
      if (p.contains("regions")) c.ports.regions = parse_regions(p["regions"], c.dipole_array);
    }

    if (j.contains("circuit")) {
      const auto& ci = j["circuit"];
      if (ci.contains("r0")) c.r0 = numbers(ci["r0"], "circuit.r0");
      if (ci.contains("bl")) c.bl = numbers(ci["bl"], "circuit.bl");
      for (double r : c.r0) {
        if (!(r > 0.0)) fail("circuit.r0 must be positive");
      }
    }

    if (j.contains("excitation")) {
      const auto& e = j["excitation"];
      if (!(e.is_string() && e.get<std::string>() == "uniform")) {
        std::vector<Complex> v;
        for (const auto& x : e) {
          if (x.is_number()) {
            v.emplace_back(x.get<double>(), 0.0);
          } else if (x.is_array() && x.size() == 2) {
            v.emplace_back(number(x[0], "excitation"), number(x[1], "excitation"));
          } else {
            fail("excitation: entries are numbers or [re, im] pairs");
          }
        }
        c.excitation = std::move(v);
      }
    }

    if (j.contains("strategy")) c.strategy = parse_strategy(j["strategy"].get<std::string>());
    if (j.contains("objective")) {
      const auto o = j["objective"].get<std::string>();
      if (o == "tarc") {
        c.objective = Objective::Tarc;
      } else if (o == "gain") {
        c.objective = Objective::Gain;
      } else {
        fail("objective: expected \"tarc\" or \"gain\"");
      }
    }

    if (j.contains("directions")) {
      int i = 0;
      for (const auto& d : j["directions"]) {
        c.directions.push_back(parse_direction(d, "directions[" + std::to_string(i++) + "]"));
      }
    }
    if (j.contains("direction_sweep")) {
      const auto& s = j["direction_sweep"];
      const double theta = number(need(s, "theta_deg", "direction_sweep"), "direction_sweep.theta_deg");
      const double p0 = number(need(s, "phi_start_deg", "direction_sweep"), "direction_sweep.phi_start_deg");
      const double p1 = number(need(s, "phi_stop_deg", "direction_sweep"), "direction_sweep.phi_stop_deg");
      const int n = s.value("count", 2);
      if (n < 1) fail("direction_sweep.count must be at least 1");
      const std::string pol = s.value("polarization", std::string("theta"));
      for (int i = 0; i < n; ++i) {
        const double phi = n == 1 ? p0 : p0 + (p1 - p0) * i / (n - 1);
        json d = {{"theta_deg", theta}, {"phi_deg", phi}, {"polarization", pol}};
        c.directions.push_back(parse_direction(d, "direction_sweep"));
      }
    }
    if (j.contains("objective_direction")) {
      const auto& od = j["objective_direction"];
      if (od.is_number_integer()) {
        c.objective_direction = od.get<std::size_t>();
      } else {
        const auto label = od.get<std::string>();
        std::size_t k = 0;
        while (k < c.directions.size() && c.directions[k].label != label) ++k;
        if (k == c.directions.size()) fail("objective_direction: unknown label '" + label + "'");
        c.objective_direction = k;
      }
    }
    if (c.objective == Objective::Gain && c.objective_direction >= c.directions.size()) {
      fail("objective \"gain\" needs a direction (objective_direction)");
    }

    if (j.contains("symmetry")) {
      const auto& s = j["symmetry"];
      const auto& perms = s.is_object() ? need(s, "permutations", "symmetry") : s;
      int i = 0;
      for (const auto& p : perms) c.symmetry.push_back(indices(p, "symmetry[" + std::to_string(i++) + "]"));
    }

    if (j.contains("output")) {
      const auto& o = j["output"];
      if (o.contains("csv")) c.csv_path = base_dir / o["csv"].get<std::string>();
      if (o.contains("json")) c.json_path = base_dir / o["json"].get<std::string>();
      if (o.contains("bundle")) c.bundle_out = base_dir / o["bundle"].get<std::string>();
    }
    c.strict = j.value("strict", true);
    c.threads = j.value("threads", 1u);
    if (j.contains("simplex")) {
      const auto& s = j["simplex"];
      c.simplex.max_iterations = s.value("max_iterations", c.simplex.max_iterations);
      c.simplex.x_tolerance = s.value("x_tolerance", c.simplex.x_tolerance);
      c.simplex.f_tolerance = s.value("f_tolerance", c.simplex.f_tolerance);
    }
  } catch (const json::exception& e) {
    fail(std::string("config has a value of the wrong type: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::vector<double> run_frequencies(const RunConfig& c) {
  if (c.bundle) return {read_manifest(*c.bundle).frequency};
  if (c.sweep) return c.sweep->frequencies();
  return {c.dipole_array->frequency};
}

FullWaveSystem build_system(const RunConfig& c, double frequency) {
  if (c.bundle) {
    BundleReadOptions o;
    o.strict = c.strict;
    return read_bundle(*c.bundle, o).system;
  }
  auto spec = *c.dipole_array;
  spec.frequency = frequency;
  return mom::build_dipole_array(spec);
}

PortConfig port_config(const RunConfig& c, const std::vector<Index>& positions) {
  const auto p = positions.size();
  auto expand = [p](const std::vector<double>& v, const char* key) {
    if (v.size() == 1) return std::vector<double>(p, v[0]);
    if (v.size() != p) fail(std::string("circuit.") + key + ": expected one value or one per port");
    return v;
  };
  PortConfig config;
  config.positions = positions;
  config.r0 = expand(c.r0, "r0");
  config.bl = expand(c.bl, "bl");
  return config;
}

}  // namespace tarc::cli
