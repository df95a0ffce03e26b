#include "tarc/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "tarc/errors.hpp"
#include "tarc/metrics.hpp"

namespace tarc {

BigInt count_combinations(unsigned long n, unsigned long p) {
  if (p > n) return 0;
  p = std::min(p, n - p);
  BigInt c = 1;
  // exact at every step: c·(n−i)/(i+1) = C(n, i+1)
  for (unsigned long i = 0; i < p; ++i) c = c * (n - i) / (i + 1);
  return c;
}

void validate(const RegionSpec& spec, Index n) {
  if (spec.regions.empty()) throw Error(ErrorKind::InvalidArgument, "region spec has no regions");
  std::set<Index> seen;
  for (const auto& region : spec.regions) {
    if (region.empty()) throw Error(ErrorKind::InvalidArgument, "region has no candidates");
    for (Index i : region) {
      if (i < 0 || (n > 0 && i >= n)) {
        throw Error(ErrorKind::InvalidArgument, "candidate " + std::to_string(i) + " out of range");
      }
      if (!seen.insert(i).second) {
        throw Error(ErrorKind::InvalidArgument,
                    "candidate " + std::to_string(i) + " appears more than once");
      }
    }
  }
}

BigInt count_region_configs(const RegionSpec& spec) {
  BigInt total = 1;
  for (const auto& region : spec.regions) total *= region.size() + 1;
  return total - 1;
}

std::vector<Index> flatten(const RegionSpec& spec) {
  std::vector<Index> out;
  for (const auto& region : spec.regions) out.insert(out.end(), region.begin(), region.end());
  return out;
}

std::vector<Positions> enumerate_configs(const RegionSpec& spec) {
  validate(spec);
  const std::size_t r = spec.regions.size();
  // odometer over choices; 0 means the region stays empty
  std::vector<std::size_t> choice(r, 0);
  std::vector<Positions> out;
  while (true) {
    std::size_t d = 0;
    while (d < r && ++choice[d] > spec.regions[d].size()) choice[d++] = 0;
    if (d == r) break;
    Positions config;
    for (std::size_t i = 0; i < r; ++i) {
      if (choice[i] > 0) config.push_back(spec.regions[i][choice[i] - 1]);
    }
    std::sort(config.begin(), config.end());
    out.push_back(std::move(config));
  }
  std::sort(out.begin(), out.end(), [](const Positions& a, const Positions& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

SymmetryGroup make_symmetry_group(std::vector<Index> domain, std::vector<std::vector<Index>> elements) {
  const std::set<Index> dset(domain.begin(), domain.end());
  if (dset.size() != domain.size()) {
    throw Error(ErrorKind::InvalidPermutation, "symmetry domain has repeated indices");
  }
  for (const auto& e : elements) {
    if (e.size() != domain.size() || std::set<Index>(e.begin(), e.end()) != dset) {
      throw Error(ErrorKind::InvalidPermutation, "group element is not a bijection of the domain");
    }
  }
  std::set<std::vector<Index>> members(elements.begin(), elements.end());
  if (!members.count(domain)) {
    members.insert(domain);
    elements.insert(elements.begin(), domain);
  }
  std::map<Index, std::size_t> where;
  for (std::size_t i = 0; i < domain.size(); ++i) where[domain[i]] = i;
  for (const auto& a : elements) {
    for (const auto& b : elements) {
      std::vector<Index> ab(domain.size());
      for (std::size_t i = 0; i < domain.size(); ++i) ab[i] = a[where[b[i]]];
      if (!members.count(ab)) {
        throw Error(ErrorKind::InvalidPermutation, "symmetry set is not closed under composition");
      }
    }
  }
  return {std::move(domain), std::move(elements)};
}

Positions apply(const SymmetryGroup& group, std::size_t element, const Positions& config) {
  const auto& e = group.elements.at(element);
  Positions out;
  out.reserve(config.size());
  for (Index p : config) {
    const auto it = std::find(group.domain.begin(), group.domain.end(), p);
    if (it == group.domain.end()) {
      throw Error(ErrorKind::InvalidPermutation,
                  "position " + std::to_string(p) + " outside the symmetry domain");
    }
    out.push_back(e[static_cast<std::size_t>(it - group.domain.begin())]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

DedupResult dedup_symmetry(const std::vector<Positions>& configs, const SymmetryGroup& group) {
  DedupResult out;
  std::map<Positions, std::size_t> slot;
  for (const auto& c : configs) {
    Positions sorted = c;
    std::sort(sorted.begin(), sorted.end());
    Positions best = sorted;
    for (std::size_t g = 0; g < group.elements.size(); ++g) best = std::min(best, apply(group, g, sorted));
    auto [it, fresh] = slot.emplace(best, out.configs.size());
    if (fresh) {
      out.configs.push_back(best);
      out.orbit_hits.push_back(0);
    }
    ++out.orbit_hits[it->second];
  }
  return out;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Uniform: return "a";
    case Strategy::OptimalExcitation: return "b";
    case Strategy::PerfectMatch: return "c";
    case Strategy::Refined: return "d";
  }
  return "?";
}

Strategy parse_strategy(const std::string& text) {
  if (text == "a" || text == "uniform") return Strategy::Uniform;
  if (text == "b" || text == "optimal-excitation") return Strategy::OptimalExcitation;
  if (text == "c" || text == "match") return Strategy::PerfectMatch;
  if (text == "d" || text == "refine") return Strategy::Refined;
  throw Error(ErrorKind::ConfigError, "unknown strategy '" + text + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Candidate {
  double r0;
  double bl;
  ComplexVector v;
  ExcitationSolution result;
};

PortOperators wire(const PortOperators& ops, double r0, double bl) {
  const auto p = static_cast<std::size_t>(ops.size());
  // keep the operators' own K (possibly indexed from k_hat) for their circuit
  const bool same = std::all_of(ops.r0.begin(), ops.r0.end(), [r0](double x) { return x == r0; }) &&
                    std::all_of(ops.bl.begin(), ops.bl.end(), [bl](double x) { return x == bl; });
  if (same) return ops;
  return with_circuit(ops, std::vector<double>(p, r0), std::vector<double>(p, bl));
}

Candidate make_candidate(const PortOperators& ops, double r0, double bl, ComplexVector v) {
  const auto wired = wire(ops, r0, bl);
  ExcitationSolution result = evaluate(wired, v);
  return {r0, bl, std::move(v), std::move(result)};
}

double gain_of(const ExcitationSolution& s, std::size_t direction) {
  return direction < s.realized_gain.size() ? s.realized_gain[direction] : kNaN;
}

double score_of(const Candidate& c, const SynthesisOptions& o) {
  return o.objective == Objective::Tarc ? c.result.tarc : gain_of(c.result, o.direction);
}

// true if a beats b
bool better(double a, double b, Objective objective) {
  return objective == Objective::Tarc ? a < b : a > b;
}

const Candidate& pick(const std::vector<Candidate>& cands, const SynthesisOptions& o) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i) {
    if (better(score_of(cands[i], o), score_of(cands[best], o), o.objective)) best = i;
  }
  return cands[best];
}

}  // namespace

ConfigResult score_config(const PortOperators& ops, const Positions& positions,
                          const SynthesisOptions& o) {
  if (o.objective == Objective::Gain && o.direction >= ops.f.size()) {
    throw Error(ErrorKind::InvalidArgument, "gain objective needs a stored direction");
  }
  ConfigResult r;
  r.positions = positions;
  const Index p = ops.size();
  std::vector<Candidate> cands;
  bool converged = true;

  switch (o.strategy) {
    case Strategy::Uniform:
      cands.push_back(make_candidate(ops, o.r0, o.bl, uniform_excitation(p)));
      break;
    case Strategy::OptimalExcitation: {
      // uniform feeding is itself admissible, so it stays in the pool
      cands.push_back(make_candidate(ops, o.r0, o.bl, uniform_excitation(p)));
      const auto wired = wire(ops, o.r0, o.bl);
      ComplexVector v = o.objective == Objective::Tarc
                            ? optimal_excitation(wired).v1
                            : max_realized_gain(wired.f[o.direction], wired.k, wired.z0).v1;
      cands.push_back(make_candidate(ops, o.r0, o.bl, std::move(v)));
      break;
    }
    case Strategy::PerfectMatch:
    case Strategy::Refined: {
      const auto seeds = ranked_perfect_match(ops);
      for (const auto& s : seeds) cands.push_back({s.match.r0, s.match.bl, s.match.v, s.result});
      if (o.strategy == Strategy::PerfectMatch) break;
      const std::size_t nseeds = cands.size();
      for (std::size_t i = 0; i < nseeds; ++i) {
        CircuitObjective objective;
        if (o.objective == Objective::Tarc) {
          objective = [&ops](double r0, double bl) { return eta1_for_circuit(ops, r0, bl); };
        } else {
          objective = [&ops, &o](double r0, double bl) { return gain_for_circuit(ops, o.direction, r0, bl); };
        }
        const auto refined = refine_circuit(objective, cands[i].r0, cands[i].bl, o.simplex);
        converged = converged && refined.converged;
        const auto wired = wire(ops, refined.r0, refined.bl);
        ComplexVector v = o.objective == Objective::Tarc
                              ? optimal_excitation(wired).v1
                              : max_realized_gain(wired.f[o.direction], wired.k, wired.z0).v1;
        cands.push_back(make_candidate(ops, refined.r0, refined.bl, std::move(v)));
      }
      break;
    }
  }

  const Candidate& best = pick(cands, o);
  r.ok = true;
  r.score = score_of(best, o);
  r.tarc = best.result.tarc;
  r.eta_tot = best.result.eta_tot;
  r.eta_rad = best.result.eta_rad;
  r.eta_match = best.result.eta_match;
  r.realized_gain = gain_of(best.result, o.direction);
  r.r0 = best.r0;
  r.bl = best.bl;
  r.v = best.v;
  r.converged = converged;
  r.eta_ub = kNaN;
  if (o.compute_bound) {
    try {
      r.eta_ub = efficiency_bound(ops.g, ops.l).eta_ub;
    } catch (const Error&) {
      r.eta_ub = kNaN;
    }
  }
  return r;
}

void rank(std::vector<ConfigResult>& results, Objective objective) {
  std::stable_sort(results.begin(), results.end(), [objective](const ConfigResult& a, const ConfigResult& b) {
    if (a.ok != b.ok) return a.ok;
    if (a.ok && a.score != b.score) {
      // NaN scores sink
      if (std::isnan(a.score) != std::isnan(b.score)) return std::isnan(b.score);
      if (!std::isnan(a.score)) return better(a.score, b.score, objective);
    }
    if (a.positions.size() != b.positions.size()) return a.positions.size() < b.positions.size();
    return a.positions < b.positions;
  });
}

SynthesisReport synthesize(const FullWaveSystem& system, const RegionSpec& spec,
                           const SynthesisOptions& o, const std::vector<Direction>& directions,
                           const SymmetryGroup* symmetry) {
  validate_system_shapes(system);
  validate(spec, system.size());
  if (!(o.r0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "circuit R0 must be positive");

  SynthesisReport report;
  report.strategy = o.strategy;
  report.objective = o.objective;
  const auto candidates = flatten(spec);
  report.raw_count = BigInt(1) << candidates.size();
  auto configs = enumerate_configs(spec);
  report.constrained_count = configs.size();
  if (symmetry) configs = dedup_symmetry(configs, *symmetry).configs;
  report.deduplicated_count = configs.size();

  std::optional<BigOperators> big;
  std::optional<linalg::LuSolver> lu;
  std::vector<ComplexRow> rows;
  if (o.indexed) {
    big = precompute_big(system, o.r0, candidates, directions);
  } else {
    lu.emplace(system.impedance());
    rows = farfield_rows(system, directions);
  }

  auto operators_for = [&](const Positions& pos) {
    const auto circuit = PortConfig::shared(pos, o.r0, 0.0);
    if (big) return big->port_operators(circuit);
    auto red = reduce_admittance(system, *lu, pos);
    std::vector<ComplexRow> f;
    for (const auto& row : rows) f.push_back(reduce_farfield(row, red.w));
    ComplexMatrix g = reduce_quadratic(system.r_rad, red.w);
    ComplexMatrix l = reduce_quadratic(system.r_loss, red.w);
    return assemble_port_operators(std::move(red.y), std::move(g), std::move(l), std::move(f),
                                   circuit.r0, circuit.bl, system.z0);
  };

  report.results.resize(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        report.results[i] = score_config(operators_for(configs[i]), configs[i], o);
      } catch (const std::exception& e) {
        ConfigResult failed;
        failed.positions = configs[i];
        failed.error = e.what();
        failed.score = kNaN;
        failed.tarc = kNaN;
        failed.eta_ub = kNaN;
        report.results[i] = std::move(failed);
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(o.threads, static_cast<unsigned>(configs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  rank(report.results, o.objective);
  return report;
}

}  // namespace tarc
