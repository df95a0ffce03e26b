#include <gtest/gtest.h>

#include <chrono>
#include <map>
#include <set>

#include "tarc/errors.hpp"
#include "tarc/metrics.hpp"
#include "tarc/mom_dipole.hpp"
#include "tarc/synthesis.hpp"
#include "test_support.hpp"

using namespace tarc;
using tarc::fixtures::kCopper;
using tarc::fixtures::Rng;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no tarc::Error thrown";
  return ErrorKind::ConfigError;
}

BigInt pascal(unsigned n, unsigned k) {
  std::vector<BigInt> row{1};
  for (unsigned i = 1; i <= n; ++i) {
    std::vector<BigInt> next(i + 1);
    next[0] = next[i] = 1;
    for (unsigned j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  return k <= n ? row[k] : BigInt(0);
}

RegionSpec grid_regions(int regions, int per_region, Index first = 0) {
  RegionSpec spec;
  Index next = first;
  for (int r = 0; r < regions; ++r) {
    spec.regions.emplace_back();
    for (int i = 0; i < per_region; ++i) spec.regions.back().push_back(next++);
  }
  return spec;
}

// Group generated by the given permutations of `domain`, by brute-force closure.
std::vector<std::vector<Index>> generate_group(const std::vector<Index>& domain,
                                               const std::vector<std::vector<Index>>& gens) {
  std::map<Index, std::size_t> at;
  for (std::size_t i = 0; i < domain.size(); ++i) at[domain[i]] = i;
  std::set<std::vector<Index>> seen{domain};
  std::vector<std::vector<Index>> queue{domain};
  for (std::size_t q = 0; q < queue.size(); ++q) {
    for (const auto& g : gens) {
      std::vector<Index> composed(domain.size());
      for (std::size_t i = 0; i < domain.size(); ++i) composed[i] = g[at[queue[q][i]]];
      if (seen.insert(composed).second) queue.push_back(composed);
    }
  }
  return queue;
}

Positions image(const std::vector<Index>& domain, const std::vector<Index>& perm, const Positions& c) {
  Positions out;
  for (Index x : c) {
    const auto it = std::find(domain.begin(), domain.end(), x);
    out.push_back(perm[static_cast<std::size_t>(it - domain.begin())]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ArrayFixture {
  mom::DipoleArraySpec spec;
  FullWaveSystem system;
};

ArrayFixture lossy_array(const std::vector<double>& spacings, int segments = 11, double sigma = kCopper) {
  ArrayFixture a;
  a.spec = fixtures::strip_array(spacings, sigma, segments);
  a.system = mom::build_dipole_array(a.spec);
  return a;
}

// One region per dipole: the centre node and its neighbours up to `reach`.
RegionSpec dipole_regions(const mom::DipoleArraySpec& spec, int reach) {
  RegionSpec r;
  for (int d = 0; d < static_cast<int>(spec.dipoles.size()); ++d) {
    r.regions.emplace_back();
    for (int o = -reach; o <= reach; ++o) r.regions.back().push_back(mom::basis_index(spec, d, o));
  }
  return r;
}

void expect_identical(const SynthesisReport& a, const SynthesisReport& b) {
  ASSERT_EQ(a.results.size(), b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    const auto& x = a.results[i];
    const auto& y = b.results[i];
    EXPECT_EQ(x.positions, y.positions);
    EXPECT_EQ(x.ok, y.ok);
    EXPECT_EQ(std::memcmp(&x.score, &y.score, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&x.tarc, &y.tarc, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&x.r0, &y.r0, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&x.bl, &y.bl, sizeof(double)), 0);
    EXPECT_TRUE(x.v == y.v);
  }
}

}  // namespace

TEST(CountCombinations, SmallValues) {
  EXPECT_EQ(count_combinations(4, 2), 6);
  EXPECT_EQ(count_combinations(7, 0), 1);
  EXPECT_EQ(count_combinations(7, 7), 1);
  EXPECT_EQ(count_combinations(3, 5), 0);
}

TEST(CountCombinations, ExactAgainstPascalTriangle) {
  for (unsigned n : {10u, 44u, 90u, 200u}) {
    BigInt total = 0;
    for (unsigned k = 0; k <= n; ++k) {
      EXPECT_EQ(count_combinations(n, k), pascal(n, k)) << n << " choose " << k;
      total += count_combinations(n, k);
    }
    EXPECT_EQ(total, BigInt(1) << n);
  }
}

TEST(RegionConfigs, FourRegionsOfEleven) {
  const auto spec = grid_regions(4, 11);
  EXPECT_EQ(count_region_configs(spec), 20735);
  const auto start = std::chrono::steady_clock::now();
  const auto configs = enumerate_configs(spec);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(configs.size(), 20735u);
  EXPECT_LT(seconds, 1.0);
  std::set<Positions> unique(configs.begin(), configs.end());
  EXPECT_EQ(unique.size(), configs.size());
  for (const auto& c : configs) {
    ASSERT_FALSE(c.empty());
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
    std::set<Index> regions;
    for (Index x : c) regions.insert(x / 11);
    EXPECT_EQ(regions.size(), c.size());
  }
}

TEST(RegionConfigs, SmallCasesAndOrder) {
  RegionSpec two{{{4}, {9}}};
  EXPECT_EQ(enumerate_configs(two), (std::vector<Positions>{{4}, {9}, {4, 9}}));
  RegionSpec one{{{3, 1, 2}}};
  EXPECT_EQ(enumerate_configs(one).size(), 3u);
  const auto configs = enumerate_configs(grid_regions(3, 2));
  for (std::size_t i = 1; i < configs.size(); ++i) {
    const auto& a = configs[i - 1];
    const auto& b = configs[i];
    EXPECT_TRUE(a.size() < b.size() || (a.size() == b.size() && a < b));
  }
  EXPECT_EQ(flatten(grid_regions(2, 2, 5)), (std::vector<Index>{5, 6, 7, 8}));
}

TEST(RegionConfigs, Validation) {
  EXPECT_EQ(kind_of([] { validate(RegionSpec{{{1, 2}, {2}}}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { validate(RegionSpec{{{1}, {}}}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { validate(RegionSpec{{{1, 7}}}, 5); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { validate(RegionSpec{}); }), ErrorKind::InvalidArgument);
}

TEST(Symmetry, IdentityKeepsEverything) {
  const auto spec = grid_regions(2, 3);
  const auto configs = enumerate_configs(spec);
  const auto group = make_symmetry_group(flatten(spec), {});
  const auto out = dedup_symmetry(configs, group);
  EXPECT_EQ(out.configs, configs);
}

TEST(Symmetry, MirrorSwapCollapsesPairs) {
  const auto group = make_symmetry_group({1, 2, 3, 4}, {{2, 1, 4, 3}});
  const auto out = dedup_symmetry({{1}, {2}, {3}, {1, 3}, {2, 4}, {1, 4}}, group);
  EXPECT_EQ(out.configs, (std::vector<Positions>{{1}, {3}, {1, 3}, {1, 4}}));
  EXPECT_EQ(out.orbit_hits, (std::vector<std::size_t>{2, 1, 2, 1}));
}

TEST(Symmetry, BurnsideCountOnRandomGroups) {
  Rng rng(81);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = grid_regions(3, 3);
    const auto domain = flatten(spec);
    // random region permutation combined with a random in-region relabeling
    std::vector<Index> regions{0, 1, 2};
    std::shuffle(regions.begin(), regions.end(), rng.engine());
    std::vector<Index> slot{0, 1, 2};
    std::shuffle(slot.begin(), slot.end(), rng.engine());
    std::vector<Index> gen(domain.size());
    for (Index r = 0; r < 3; ++r) {
      for (Index s = 0; s < 3; ++s) gen[static_cast<std::size_t>(3 * r + s)] = 3 * regions[r] + slot[s];
    }
    const auto elements = generate_group(domain, {gen});
    const auto group = make_symmetry_group(domain, elements);
    const auto configs = enumerate_configs(spec);
    const auto out = dedup_symmetry(configs, group);

    std::size_t fixed = 0;
    for (const auto& g : elements) {
      for (const auto& c : configs) fixed += image(domain, g, c) == c;
    }
    EXPECT_EQ(fixed % elements.size(), 0u);
    EXPECT_EQ(out.configs.size(), fixed / elements.size());

    std::size_t hits = 0;
    for (std::size_t h : out.orbit_hits) hits += h;
    EXPECT_EQ(hits, configs.size());

    for (const auto& rep : out.configs) {
      for (const auto& g : elements) EXPECT_LE(rep, image(domain, g, rep));
    }
  }
}

TEST(Symmetry, InvalidGroups) {
  EXPECT_EQ(kind_of([] { make_symmetry_group({1, 2, 3}, {{1, 1, 3}}); }), ErrorKind::InvalidPermutation);
  EXPECT_EQ(kind_of([] { make_symmetry_group({1, 2, 3}, {{1, 2}}); }), ErrorKind::InvalidPermutation);
  EXPECT_EQ(kind_of([] { make_symmetry_group({1, 2, 3}, {{1, 2, 9}}); }), ErrorKind::InvalidPermutation);
  // a 3-cycle alone is not closed
  EXPECT_EQ(kind_of([] { make_symmetry_group({1, 2, 3}, {{2, 3, 1}}); }), ErrorKind::InvalidPermutation);
  EXPECT_NO_THROW(make_symmetry_group({1, 2, 3}, {{2, 3, 1}, {3, 1, 2}}));
}

TEST(Strategy, Names) {
  for (auto s : {Strategy::Uniform, Strategy::OptimalExcitation, Strategy::PerfectMatch, Strategy::Refined}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_EQ(parse_strategy("a"), Strategy::Uniform);
  EXPECT_EQ(parse_strategy("d"), Strategy::Refined);
  EXPECT_EQ(kind_of([] { parse_strategy("e"); }), ErrorKind::ConfigError);
}

TEST(Rank, TieBreaksAndFailures) {
  std::vector<ConfigResult> r(5);
  r[0].positions = {3, 5};
  r[0].ok = true;
  r[0].score = 0.2;
  r[1].positions = {4};
  r[1].ok = true;
  r[1].score = 0.2;
  r[2].positions = {1};
  r[2].ok = false;
  r[3].positions = {2};
  r[3].ok = true;
  r[3].score = 0.2;
  r[4].positions = {9};
  r[4].ok = true;
  r[4].score = 0.1;
  rank(r, Objective::Tarc);
  std::vector<Positions> order;
  for (const auto& x : r) order.push_back(x.positions);
  EXPECT_EQ(order, (std::vector<Positions>{{9}, {2}, {4}, {3, 5}, {1}}));
  rank(r, Objective::Gain);
  EXPECT_EQ(r.front().positions, (Positions{2}));
}

TEST(Synthesize, SymmetricPairScoresIdentically) {
  const auto a = lossy_array({0.3});
  const RegionSpec spec{{{mom::center_basis(a.spec, 0)}, {mom::center_basis(a.spec, 1)}}};
  SynthesisOptions o;
  o.strategy = Strategy::Uniform;
  const auto report = synthesize(a.system, spec, o);
  ASSERT_EQ(report.results.size(), 3u);
  std::vector<double> singles;
  for (const auto& r : report.results) {
    if (r.positions.size() == 1) singles.push_back(r.score);
  }
  ASSERT_EQ(singles.size(), 2u);
  EXPECT_NEAR(singles[0], singles[1], 1e-12);
}

TEST(Synthesize, CountsAndRanking) {
  const auto a = lossy_array({0.3, 0.3});
  const auto spec = dipole_regions(a.spec, 1);
  SynthesisOptions o;
  // mirror through the array centre: dipole d ↦ 2 − d, offset o ↦ −o
  std::vector<Index> images;
  for (Index x : flatten(spec)) {
    images.push_back(mom::basis_index(a.spec, 2 - static_cast<int>(x / 11), 5 - static_cast<int>(x % 11)));
  }
  const auto mirror = make_symmetry_group(flatten(spec), {images});
  const auto report = synthesize(a.system, spec, o, {}, &mirror);
  EXPECT_EQ(report.raw_count, BigInt(1) << 9);
  EXPECT_EQ(report.constrained_count, 63u);
  EXPECT_LT(report.deduplicated_count, 63u);
  EXPECT_EQ(report.results.size(), report.deduplicated_count);
  for (std::size_t i = 1; i < report.results.size(); ++i) {
    EXPECT_LE(report.results[i - 1].score, report.results[i].score);
  }
}

TEST(Synthesize, MirrorImagesScoreEqually) {
  const auto a = lossy_array({0.3, 0.3});
  const auto spec = dipole_regions(a.spec, 1);
  SynthesisOptions o;
  o.strategy = Strategy::OptimalExcitation;
  const auto report = synthesize(a.system, spec, o);
  std::map<Positions, double> by_config;
  for (const auto& r : report.results) by_config[r.positions] = r.score;
  // mirror through the array centre: dipole d ↦ 2 − d, offset o ↦ −o
  for (const auto& [pos, score] : by_config) {
    Positions m;
    for (Index x : pos) {
      const int d = static_cast<int>(x / 11);
      const int off = static_cast<int>(x % 11) - 5;
      m.push_back(mom::basis_index(a.spec, 2 - d, -off));
    }
    std::sort(m.begin(), m.end());
    EXPECT_NEAR(by_config.at(m), score, 1e-9) << "config of " << pos.size() << " ports";
  }
}

TEST(Synthesize, StrategyOrderingPerConfig) {
  const auto a = lossy_array({0.3, 0.3});
  const auto spec = dipole_regions(a.spec, 1);
  std::map<Strategy, std::map<Positions, double>> score;
  for (auto s : {Strategy::Uniform, Strategy::OptimalExcitation, Strategy::PerfectMatch, Strategy::Refined}) {
    SynthesisOptions o;
    o.strategy = s;
    for (const auto& r : synthesize(a.system, spec, o).results) {
      ASSERT_TRUE(r.ok) << r.error;
      score[s][r.positions] = r.score;
      EXPECT_GE(r.tarc, std::sqrt(std::max(0.0, 1.0 - r.eta_ub)) - 1e-9);
    }
  }
  for (const auto& [pos, ga] : score[Strategy::Uniform]) {
    EXPECT_LE(score[Strategy::OptimalExcitation][pos], ga + 1e-12);
    EXPECT_LE(score[Strategy::Refined][pos], score[Strategy::PerfectMatch][pos] + 1e-12);
  }
}

TEST(Synthesize, IndexedEqualsDirect) {
  const auto a = lossy_array({0.3, 0.4});
  const RegionSpec spec{{{mom::center_basis(a.spec, 0)},
                         {mom::center_basis(a.spec, 1)},
                         {mom::basis_index(a.spec, 2, 2)}}};
  const std::vector<Direction> dirs{make_direction("x", kPi / 2, 0.0)};
  for (auto s : {Strategy::Uniform, Strategy::OptimalExcitation, Strategy::PerfectMatch, Strategy::Refined}) {
    for (auto obj : {Objective::Tarc, Objective::Gain}) {
      SynthesisOptions o;
      o.strategy = s;
      o.objective = obj;
      const auto indexed = synthesize(a.system, spec, o, dirs);
      o.indexed = false;
      const auto direct = synthesize(a.system, spec, o, dirs);
      ASSERT_EQ(indexed.results.size(), direct.results.size());
      for (std::size_t i = 0; i < indexed.results.size(); ++i) {
        const auto& x = indexed.results[i];
        const auto& y = direct.results[i];
        EXPECT_EQ(x.positions, y.positions);
        EXPECT_NEAR(x.score, y.score, 1e-10 * std::abs(y.score));
        EXPECT_NEAR(x.eta_tot, y.eta_tot, 1e-10);
        EXPECT_NEAR(x.r0, y.r0, 1e-8 * y.r0);
      }
    }
  }
}

TEST(Synthesize, ParallelMatchesSerialBitForBit) {
  const auto a = lossy_array({0.3, 0.3});
  const auto spec = dipole_regions(a.spec, 1);
  for (auto s : {Strategy::OptimalExcitation, Strategy::Refined}) {
    SynthesisOptions o;
    o.strategy = s;
    const auto serial = synthesize(a.system, spec, o);
    o.threads = 4;
    const auto parallel = synthesize(a.system, spec, o);
    expect_identical(serial, parallel);
  }
}

TEST(Synthesize, AddingCandidatesNeverHurtsTheBest) {
  const auto a = lossy_array({0.3, 0.3});
  SynthesisOptions o;
  double previous = 1.0;
  for (int reach = 0; reach <= 3; ++reach) {
    const auto report = synthesize(a.system, dipole_regions(a.spec, reach), o);
    EXPECT_LE(report.results.front().score, previous + 1e-15);
    previous = report.results.front().score;
  }
}

TEST(Synthesize, FailuresAreRecorded) {
  Rng rng(82);
  // no radiation and no loss: y is purely reactive, so no perfect match exists
  const auto s = fixtures::random_passive_system(rng, 6, 0, 0.0);
  SynthesisOptions o;
  o.strategy = Strategy::PerfectMatch;
  o.compute_bound = false;
  const auto report = synthesize(s, RegionSpec{{{0}, {3}}}, o);
  ASSERT_EQ(report.results.size(), 3u);
  for (const auto& r : report.results) {
    EXPECT_FALSE(r.ok);
    EXPECT_NE(r.error.find("AllInfeasible"), std::string::npos) << r.error;
  }
}

TEST(Synthesize, GainObjectiveNeedsDirection) {
  const auto a = lossy_array({0.3});
  SynthesisOptions o;
  o.objective = Objective::Gain;
  const auto report = synthesize(a.system, RegionSpec{{{mom::center_basis(a.spec, 0)}}}, o);
  EXPECT_FALSE(report.results.front().ok);
}
