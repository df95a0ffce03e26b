#pragma once

// Run-configuration file for tarc-cli. One JSON document carries all physics
// inputs; command-line flags only pick outputs, verbosity and threading.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tarc/bundle_io.hpp"
#include "tarc/mom_dipole.hpp"
#include "tarc/synthesis.hpp"

namespace tarc::cli {

struct Sweep {
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
  std::vector<double> frequencies() const;
};

struct PortSelection {
  std::vector<Index> positions;  // fixed placement
  std::optional<RegionSpec> regions;  // synthesis placement
};

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::optional<std::filesystem::path> bundle;
  std::optional<mom::DipoleArraySpec> dipole_array;
  std::optional<Sweep> sweep;
  PortSelection ports;
  std::vector<double> r0{50.0};  // one value (shared) or one per port
  std::vector<double> bl{0.0};
  std::optional<std::vector<Complex>> excitation;  // empty: uniform
  Strategy strategy = Strategy::OptimalExcitation;
  Objective objective = Objective::Tarc;
  std::size_t objective_direction = 0;
  std::vector<Direction> directions;
  std::vector<std::vector<Index>> symmetry;  // images of the flattened candidates
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> json_path;
  std::optional<std::filesystem::path> bundle_out;
  bool strict = true;
  unsigned threads = 1;
  NelderMeadOptions simplex;
};

/// Throws Error(ConfigError) with a message naming the offending key.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Frequencies the command iterates over: the sweep for generated systems,
/// the bundle frequency otherwise.
std::vector<double> run_frequencies(const RunConfig& config);

/// The system at one frequency (ignored for bundles).
FullWaveSystem build_system(const RunConfig& config, double frequency);

/// Per-port circuit vectors expanded to `ports` entries.
PortConfig port_config(const RunConfig& config, const std::vector<Index>& positions);

}  // namespace tarc::cli
