#pragma once

// Combinatorial port placement: enumeration over regions, symmetry
// deduplication and ranked scoring under one of four strategies.

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tarc/full_wave_system.hpp"
#include "tarc/optimizers.hpp"
#include "tarc/port_reduction.hpp"

namespace tarc {

using BigInt = boost::multiprecision::cpp_int;
using Positions = std::vector<Index>;

/// Binomial coefficient C(n, p), exact. Zero when p > n.
BigInt count_combinations(unsigned long n, unsigned long p);

/// Disjoint candidate lists; a configuration takes at most one index from
/// each region and at least one overall.
struct RegionSpec {
  std::vector<std::vector<Index>> regions;
};

/// Throws InvalidArgument on empty regions, out-of-range (when n > 0) or
/// repeated indices.
void validate(const RegionSpec& spec, Index n = 0);

/// ∏(|region| + 1) − 1
BigInt count_region_configs(const RegionSpec& spec);

/// All candidates in region order.
std::vector<Index> flatten(const RegionSpec& spec);

/// Every admissible configuration, each sorted ascending, ordered by port
/// count and then lexicographically.
std::vector<Positions> enumerate_configs(const RegionSpec& spec);

/// A permutation group acting on a candidate set. Each element maps
/// domain[i] to image[i].
struct SymmetryGroup {
  std::vector<Index> domain;
  std::vector<std::vector<Index>> elements;
};

/// Adds the identity if missing and checks that every element is a
/// bijection of the domain and that the set is closed under composition.
/// Throws InvalidPermutation otherwise.
SymmetryGroup make_symmetry_group(std::vector<Index> domain, std::vector<std::vector<Index>> elements);

/// Image of a configuration, sorted.
Positions apply(const SymmetryGroup& group, std::size_t element, const Positions& config);

struct DedupResult {
  std::vector<Positions> configs;  // canonical representatives
  std::vector<std::size_t> orbit_hits;  // input configs mapped to each representative
};

/// One representative per orbit, the lexicographically smallest image, in
/// order of first appearance.
DedupResult dedup_symmetry(const std::vector<Positions>& configs, const SymmetryGroup& group);

enum class Strategy { Uniform, OptimalExcitation, PerfectMatch, Refined };
enum class Objective { Tarc, Gain };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& text);  // "a".."d" or the names

struct SynthesisOptions {
  Strategy strategy = Strategy::OptimalExcitation;
  Objective objective = Objective::Tarc;
  std::size_t direction = 0;  // gain objective only
  double r0 = 50.0;  // fixed circuit for strategies a and b
  double bl = 0.0;
  unsigned threads = 1;
  bool indexed = true;  // precompute-and-index instead of per-config solves
  bool compute_bound = true;
  NelderMeadOptions simplex;
};

struct ConfigResult {
  Positions positions;
  bool ok = false;
  std::string error;
  double score = 0.0;  // Γ (tarc) or realized gain (gain)
  double tarc = 1.0;
  double eta_tot = 0.0;
  double eta_rad = 0.0;
  double eta_match = 0.0;
  double realized_gain = 0.0;  // NaN without directions
  double r0 = 0.0;
  double bl = 0.0;
  ComplexVector v;
  double eta_ub = 1.0;  // NaN if not computed
  bool converged = true;  // simplex convergence (strategy d)
};

struct SynthesisReport {
  Strategy strategy = Strategy::OptimalExcitation;
  Objective objective = Objective::Tarc;
  BigInt raw_count = 0;  // all subsets of the candidates
  std::size_t constrained_count = 0;
  std::size_t deduplicated_count = 0;
  std::vector<ConfigResult> results;  // ranked
};

/// Scores a single configuration from its port operators. The operators'
/// own circuit is ignored; the strategy decides the circuit.
ConfigResult score_config(const PortOperators& ops, const Positions& positions,
                          const SynthesisOptions& options);

/// Ranking order: successes before failures, then score, then fewer ports,
/// then lexicographic positions.
void rank(std::vector<ConfigResult>& results, Objective objective);

SynthesisReport synthesize(const FullWaveSystem& system, const RegionSpec& spec,
                           const SynthesisOptions& options,
                           const std::vector<Direction>& directions = {},
                           const SymmetryGroup* symmetry = nullptr);

}  // namespace tarc
