#include "commands.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "tarc/errors.hpp"
#include "tarc/metrics.hpp"
#include "tarc/optimizers.hpp"

namespace tarc::cli {

using nlohmann::json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

namespace {

std::string format_vector(const ComplexVector& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += format_number(v[i].real()) + ':' + format_number(v[i].imag());
  }
  return s;
}

std::string format_positions(const std::vector<Index>& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(p[i]);
  }
  return s;
}

using Row = std::vector<std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

struct Options {
  std::string config;
  std::string csv;
  std::string json_out;
  unsigned threads = 0;
  bool verbose = false;
  bool uniform = false;
  bool count_only = false;
};

struct Context {
  RunConfig config;
  Options options;
  std::ostream& err;
  json summary = json::object();

  unsigned threads() const { return options.threads > 0 ? options.threads : std::max(1u, config.threads); }
  void log(const std::string& msg) const {
    if (options.verbose) err << "tarc-cli: " << msg << '\n';
  }
};

/// Runs fn(i) for i in [0, n) on `threads` workers; results land by index.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // first failure in index order, so diagnostics do not depend on scheduling
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Rows for every frequency point, concatenated in sweep order.
Table sweep_table(Context& ctx, std::vector<std::string> header,
                  const std::function<std::vector<Row>(double, const FullWaveSystem&)>& fn) {
  const auto freqs = run_frequencies(ctx.config);
  auto blocks = parallel_map<std::vector<Row>>(freqs.size(), ctx.threads(), [&](std::size_t i) {
    const auto system = build_system(ctx.config, freqs[i]);
    ctx.log("frequency " + format_number(freqs[i]) + " Hz, N = " + std::to_string(system.size()));
    return fn(freqs[i], system);
  });
  Table t{std::move(header), {}};
  for (auto& b : blocks) {
    for (auto& r : b) t.rows.push_back(std::move(r));
  }
  ctx.summary["frequencies"] = freqs;
  return t;
}

const std::vector<Index>& fixed_ports(const Context& ctx) {
  if (ctx.config.ports.positions.empty()) throw Error(ErrorKind::ConfigError, "ports.positions is required");
  return ctx.config.ports.positions;
}

PortOperators operators(const Context& ctx, const FullWaveSystem& system) {
  auto pc = port_config(ctx.config, fixed_ports(ctx));
  validate(pc, system.size());
  return reduce_ports(system, pc, ctx.config.directions);
}

ComplexVector excitation(const Context& ctx, Index ports) {
  if (ctx.options.uniform || !ctx.config.excitation) return uniform_excitation(ports);
  const auto& e = *ctx.config.excitation;
  if (static_cast<Index>(e.size()) != ports) {
    throw Error(ErrorKind::ConfigError, "excitation length differs from the port count");
  }
  ComplexVector v(ports);
  for (Index i = 0; i < ports; ++i) v[i] = e[static_cast<std::size_t>(i)];
  return v;
}

std::pair<double, double> angles(const Direction& d) {
  const double theta = std::acos(std::clamp(d.r_hat.z(), -1.0, 1.0)) * 180.0 / kPi;
  const double phi = std::atan2(d.r_hat.y(), d.r_hat.x()) * 180.0 / kPi;
  return {theta, phi};
}

SynthesisOptions synthesis_options(const Context& ctx) {
  SynthesisOptions o;
  o.strategy = ctx.config.strategy;
  o.objective = ctx.config.objective;
  o.direction = ctx.config.objective_direction;
  if (ctx.config.r0.size() != 1 || ctx.config.bl.size() != 1) {
    throw Error(ErrorKind::ConfigError, "this command needs a shared circuit (single r0 and bl)");
  }
  o.r0 = ctx.config.r0[0];
  o.bl = ctx.config.bl[0];
  o.threads = ctx.threads();
  o.simplex = ctx.config.simplex;
  return o;
}

Table cmd_generate(Context& ctx) {
  if (!ctx.config.dipole_array) throw Error(ErrorKind::ConfigError, "generate needs a dipole_array");
  if (!ctx.config.bundle_out) throw Error(ErrorKind::ConfigError, "generate needs output.bundle");
  const auto freqs = run_frequencies(ctx.config);
  BundleMetadata meta;
  meta.candidate_ports = ctx.config.ports.positions;
  if (ctx.config.ports.regions) {
    const auto flat = flatten(*ctx.config.ports.regions);
    meta.candidate_ports.insert(meta.candidate_ports.end(), flat.begin(), flat.end());
  }
  meta.labels["source"] = "thin-wire dipole array";
  meta.labels["dipoles"] = std::to_string(ctx.config.dipole_array->dipoles.size());
  meta.labels["segments"] = std::to_string(ctx.config.dipole_array->segments);
  return sweep_table(ctx, {"frequency_hz", "n", "path"}, [&](double f, const FullWaveSystem& system) {
    std::filesystem::path dir = *ctx.config.bundle_out;
    if (freqs.size() > 1) {
      const auto idx = static_cast<std::size_t>(std::find(freqs.begin(), freqs.end(), f) - freqs.begin());
      dir /= "f" + std::to_string(idx);
    }
    write_bundle(system, dir, ctx.config.directions, meta);
    return std::vector<Row>{{format_number(f), std::to_string(system.size()), dir.string()}};
  });
}

Table cmd_tarc(Context& ctx) {
  return sweep_table(ctx,
                     {"frequency_hz", "tarc", "eta_tot", "eta_rad", "eta_match", "p_rad_w", "p_lost_w", "p_tot_w"},
                     [&](double f, const FullWaveSystem& system) {
                       const auto ops = operators(ctx, system);
                       const auto s = evaluate(ops, excitation(ctx, ops.size()));
                       return std::vector<Row>{{format_number(f), format_number(s.tarc), format_number(s.eta_tot),
                                                format_number(s.eta_rad), format_number(s.eta_match),
                                                format_number(s.p_rad), format_number(s.p_lost),
                                                format_number(s.p_tot)}};
                     });
}

Table cmd_optimize_excitation(Context& ctx) {
  return sweep_table(
      ctx, {"frequency_hz", "eta1", "tarc", "eta_rad", "eta_match", "uniform_tarc", "v"},
      [&](double f, const FullWaveSystem& system) {
        const auto ops = operators(ctx, system);
        const auto opt = optimal_excitation(ops);
        const auto s = evaluate(ops, opt.v1);
        const auto u = evaluate(ops, uniform_excitation(ops.size()));
        return std::vector<Row>{{format_number(f), format_number(opt.eta1), format_number(opt.tarc),
                                 format_number(s.eta_rad), format_number(s.eta_match), format_number(u.tarc),
                                 format_vector(opt.v1)}};
      });
}

Table cmd_match(Context& ctx) {
  return sweep_table(ctx,
                     {"frequency_hz", "solution", "feasible", "r0_ohm", "bl_s", "lambda_re", "lambda_im", "tarc",
                      "eta_tot", "eta_rad", "v"},
                     [&](double f, const FullWaveSystem& system) {
                       const auto ops = operators(ctx, system);
                       std::vector<Row> rows;
                       int k = 0;
                       for (const auto& c : ranked_perfect_match(ops)) {
                         rows.push_back({format_number(f), std::to_string(k++), "1", format_number(c.match.r0),
                                         format_number(c.match.bl), format_number(c.match.eigenvalue.real()),
                                         format_number(c.match.eigenvalue.imag()), format_number(c.result.tarc),
                                         format_number(c.result.eta_tot), format_number(c.result.eta_rad),
                                         format_vector(c.match.v)});
                       }
                       for (const auto& m : perfect_match(ops.y)) {
                         if (m.feasible) continue;
                         const double nan = std::nan("");
                         rows.push_back({format_number(f), std::to_string(k++), "0", format_number(nan),
                                         format_number(nan), format_number(m.eigenvalue.real()),
                                         format_number(m.eigenvalue.imag()), format_number(nan), format_number(nan),
                                         format_number(nan), format_vector(m.v)});
                       }
                       return rows;
                     });
}

Table cmd_refine(Context& ctx) {
  const auto& c = ctx.config;
  return sweep_table(
      ctx,
      {"frequency_hz", "seed", "objective", "r0_init_ohm", "bl_init_s", "score_init", "r0_ohm", "bl_s", "score",
       "tarc", "converged", "iterations"},
      [&](double f, const FullWaveSystem& system) {
        const auto ops = operators(ctx, system);
        const bool gain = c.objective == Objective::Gain;
        CircuitObjective objective = [&](double r0, double bl) {
          return gain ? gain_for_circuit(ops, c.objective_direction, r0, bl) : eta1_for_circuit(ops, r0, bl);
        };
        std::vector<Row> rows;
        int k = 0;
        for (const auto& seed : ranked_perfect_match(ops)) {
          const double start = objective(seed.match.r0, seed.match.bl);
          const auto r = refine_circuit(objective, seed.match.r0, seed.match.bl, c.simplex);
          const auto p = static_cast<std::size_t>(ops.size());
          const auto wired = with_circuit(ops, std::vector<double>(p, r.r0), std::vector<double>(p, r.bl));
          const ComplexVector v = gain ? max_realized_gain(wired.f[c.objective_direction], wired.k, wired.z0).v1
                                       : optimal_excitation(wired).v1;
          rows.push_back({format_number(f), std::to_string(k++), gain ? "gain" : "tarc",
                          format_number(seed.match.r0), format_number(seed.match.bl), format_number(start),
                          format_number(r.r0), format_number(r.bl), format_number(r.score),
                          format_number(evaluate(wired, v).tarc), r.converged ? "1" : "0",
                          std::to_string(r.iterations)});
        }
        return rows;
      });
}

Table cmd_gain(Context& ctx) {
  if (ctx.config.directions.empty()) throw Error(ErrorKind::ConfigError, "gain needs directions");
  auto options = synthesis_options(ctx);
  options.objective = Objective::Gain;
  options.compute_bound = false;
  options.threads = 1;
  return sweep_table(
      ctx,
      {"frequency_hz", "direction", "theta_deg", "phi_deg", "uniform_gain", "optimal_gain", "strategy",
       "strategy_gain", "r0_ohm", "bl_s", "v"},
      [&](double f, const FullWaveSystem& system) {
        const auto ops = operators(ctx, system);
        std::vector<Row> rows;
        const auto u = uniform_excitation(ops.size());
        for (std::size_t d = 0; d < ops.f.size(); ++d) {
          const auto [theta, phi] = angles(ctx.config.directions[d]);
          const auto opt = max_realized_gain(ops.f[d], ops.k, ops.z0);
          auto od = options;
          od.direction = d;
          const auto s = score_config(ops, fixed_ports(ctx), od);
          rows.push_back({format_number(f), ctx.config.directions[d].label, format_number(theta), format_number(phi),
                          format_number(realized_gain(ops, u, d)), format_number(opt.gamma1),
                          to_string(options.strategy), format_number(s.score), format_number(s.r0),
                          format_number(s.bl), format_vector(s.v)});
        }
        return rows;
      });
}

Table cmd_bound(Context& ctx) {
  return sweep_table(ctx, {"frequency_hz", "delta", "eta_ub", "tarc_floor", "v"},
                     [&](double f, const FullWaveSystem& system) {
                       const auto ops = operators(ctx, system);
                       const auto b = efficiency_bound(ops.g, ops.l);
                       return std::vector<Row>{{format_number(f), format_number(b.delta), format_number(b.eta_ub),
                                                format_number(tarc_from_efficiency(b.eta_ub)), format_vector(b.v)}};
                     });
}

std::optional<SymmetryGroup> symmetry_group(const Context& ctx) {
  if (ctx.config.symmetry.empty()) return std::nullopt;
  return make_symmetry_group(flatten(*ctx.config.ports.regions), ctx.config.symmetry);
}

Table cmd_synthesize(Context& ctx) {
  if (!ctx.config.ports.regions) throw Error(ErrorKind::ConfigError, "synthesize needs ports.regions");
  const auto& spec = *ctx.config.ports.regions;
  validate(spec);
  const auto group = symmetry_group(ctx);

  if (ctx.options.count_only) {
    const auto configs = enumerate_configs(spec);
    const std::size_t dedup = group ? dedup_symmetry(configs, *group).configs.size() : configs.size();
    const BigInt raw = BigInt(1) << flatten(spec).size();
    ctx.summary["counts"] = {{"raw", raw.str()}, {"constrained", configs.size()}, {"deduplicated", dedup}};
    return {{"raw_count", "constrained_count", "deduplicated_count"},
            {{raw.str(), std::to_string(configs.size()), std::to_string(dedup)}}};
  }

  const auto options = synthesis_options(ctx);
  Table t{{"frequency_hz", "rank", "positions", "ports", "ok", "score", "tarc", "eta_tot", "eta_rad", "eta_match",
           "realized_gain", "r0_ohm", "bl_s", "eta_ub", "converged", "v", "error"},
          {}};
  json counts = json::array();
  for (double f : run_frequencies(ctx.config)) {
    const auto system = build_system(ctx.config, f);
    const auto report = synthesize(system, spec, options, ctx.config.directions, group ? &*group : nullptr);
    ctx.log("synthesized " + std::to_string(report.results.size()) + " configurations at " + format_number(f) + " Hz");
    counts.push_back({{"frequency_hz", f},
                      {"raw", report.raw_count.str()},
                      {"constrained", report.constrained_count},
                      {"deduplicated", report.deduplicated_count}});
    std::size_t rank_no = 0;
    for (const auto& r : report.results) {
      t.rows.push_back({format_number(f), std::to_string(rank_no++), format_positions(r.positions),
                        std::to_string(r.positions.size()), r.ok ? "1" : "0", format_number(r.score),
                        format_number(r.tarc), format_number(r.eta_tot), format_number(r.eta_rad),
                        format_number(r.eta_match), format_number(r.realized_gain), format_number(r.r0),
                        format_number(r.bl), format_number(r.eta_ub), r.converged ? "1" : "0", format_vector(r.v),
                        r.error});
    }
  }
  ctx.summary["counts"] = counts;
  ctx.summary["strategy"] = to_string(options.strategy);
  return t;
}

Table cmd_scan_port(Context& ctx) {
  return sweep_table(ctx, {"frequency_hz", "position", "ratio", "tarc", "best"},
                     [&](double f, const FullWaveSystem& system) {
                       std::vector<Index> candidates = ctx.config.ports.positions;
                       if (ctx.config.ports.regions) candidates = flatten(*ctx.config.ports.regions);
                       if (candidates.empty()) {
                         for (Index i = 0; i < system.size(); ++i) candidates.push_back(i);
                       }
                       if (ctx.config.r0.size() != 1) throw Error(ErrorKind::ConfigError, "scan-port needs one r0");
                       const auto big = precompute_big(system, ctx.config.r0[0], candidates);
                       const auto scan = scan_single_port(big, candidates);
                       std::vector<Row> rows;
                       for (std::size_t i = 0; i < candidates.size(); ++i) {
                         rows.push_back({format_number(f), std::to_string(candidates[i]), format_number(scan.ratio[i]),
                                         format_number(scan.tarc[i]), i == scan.best_slot ? "1" : "0"});
                       }
                       return rows;
                     });
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::GeometryOverlap:
    case ErrorKind::ElectricallyTooThick:
    case ErrorKind::PolarizationNotTransverse:
    case ErrorKind::DirectionNotStored:
    case ErrorKind::InvalidPermutation:
    case ErrorKind::IoError:
    case ErrorKind::ChecksumMismatch:
    case ErrorKind::MissingMatrix:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::NotSymmetric:
    case ErrorKind::UnsupportedVersion:
      return kExitConfig;
    case ErrorKind::AllInfeasible:
      return kExitInfeasible;
    default:
      return kExitNumerical;
  }
}

void write_csv(std::ostream& os, const Table& t) {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        os << cells[i];
        continue;
      }
      os << '"';
      for (char ch : cells[i]) os << (ch == '"' ? "\"\"" : std::string(1, ch));
      os << '"';
    }
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

json records(const Table& t) {
  json out = json::array();
  for (const auto& r : t.rows) {
    json rec = json::object();
    for (std::size_t i = 0; i < t.header.size() && i < r.size(); ++i) {
      double v = 0.0;
      const auto* b = r[i].data();
      const auto res = std::from_chars(b, b + r[i].size(), v);
      if (res.ec == std::errc() && res.ptr == b + r[i].size() && std::isfinite(v)) {
        rec[t.header[i]] = v;
      } else {
        rec[t.header[i]] = r[i];
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Port-mode TARC, efficiency and realized-gain tools", "tarc-cli"};
  app.require_subcommand(1);
  Options opt;

  using Handler = Table (*)(Context&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"generate", "write a dipole-array operator bundle", cmd_generate},
      {"tarc", "TARC and efficiencies for a given excitation", cmd_tarc},
      {"optimize-excitation", "excitation maximizing total efficiency", cmd_optimize_excitation},
      {"match", "perfect-matching circuits and their closed-loop TARC", cmd_match},
      {"refine", "perfect-match seeds refined by simplex", cmd_refine},
      {"gain", "realized gain over the direction table", cmd_gain},
      {"bound", "radiation-efficiency upper bound", cmd_bound},
      {"synthesize", "exhaustive port-placement synthesis", cmd_synthesize},
      {"scan-port", "single-port placement scan", cmd_scan_port},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, help, handler] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", opt.config, "run configuration (JSON)")->required();
    sub->add_option("--csv", opt.csv, "CSV output path (default: stdout)");
    sub->add_option("--json", opt.json_out, "JSON summary path");
    sub->add_option("-j,--threads", opt.threads, "worker threads (overrides the config)");
    sub->add_flag("-v,--verbose", opt.verbose, "progress on stderr");
    if (name == "tarc") sub->add_flag("--uniform", opt.uniform, "unit voltage at every port");
    if (name == "synthesize") sub->add_flag("--count-only", opt.count_only, "only print configuration counts");
    handlers[sub] = handler;
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    Context ctx{load_run_config(opt.config), opt, err};
    if (!opt.csv.empty()) ctx.config.csv_path = opt.csv;
    if (!opt.json_out.empty()) ctx.config.json_path = opt.json_out;
    const auto t0 = std::chrono::steady_clock::now();
    const Table table = handlers.at(chosen)(ctx);
    ctx.log("done in " + format_number(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) +
            " s");

    if (ctx.config.csv_path) {
      std::ofstream f(*ctx.config.csv_path, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorKind::IoError, "cannot write " + ctx.config.csv_path->string());
      write_csv(f, table);
    } else {
      write_csv(out, table);
    }
    if (ctx.config.json_path) {
      json s = ctx.summary;
      s["command"] = chosen->get_name();
      s["header"] = table.header;
      s["row_count"] = table.rows.size();
      s["records"] = records(table);
      std::ofstream f(*ctx.config.json_path, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorKind::IoError, "cannot write " + ctx.config.json_path->string());
      f << s.dump(2) << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "tarc-cli: error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "tarc-cli: error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace tarc::cli
