#pragma once

// On-disk operator bundle: a directory holding manifest.json and data.bin.
// Every matrix is a contiguous little-endian row-major blob inside data.bin;
// real matrices are plain doubles, complex ones interleaved (re, im) pairs.
// Each blob carries its own CRC-32 in the manifest.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tarc/full_wave_system.hpp"

namespace tarc {

inline constexpr const char* kBundleFormatVersion = "1.0";
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kDataName = "data.bin";

struct MatrixRecord {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  std::string dtype;  // "f64" or "c128"
  std::string file;
  std::uint64_t byte_offset = 0;
  std::uint64_t byte_length = 0;
  std::uint32_t crc32 = 0;
};

struct BundleMetadata {
  std::map<std::string, std::string> labels;
  std::vector<Index> candidate_ports;
};

struct BundleManifest {
  std::string format_version;
  Index n = 0;
  double frequency = 0.0;
  double k = 0.0;
  double z0 = 0.0;
  std::vector<MatrixRecord> matrices;
  std::vector<Direction> directions;
  std::vector<int> wire_of;
  BundleMetadata metadata;
};

struct Bundle {
  FullWaveSystem system;
  BundleManifest manifest;
  std::vector<std::string> warnings;
};

struct BundleReadOptions {
  bool strict = true;
  double symmetry_tolerance = 1e-12;  // relative, Frobenius
  double psd_tolerance = 1e-10;  // relative to the largest eigenvalue
};

/// Writes R_rad, R_loss, X, xi, positions (if present), the system's stored
/// far-field rows and rows for `directions` evaluated from its far-field
/// callable. Throws IoError.
void write_bundle(const FullWaveSystem& system, const std::filesystem::path& dir,
                  const std::vector<Direction>& directions = {}, const BundleMetadata& metadata = {});

/// Parses and validates manifest.json only.
BundleManifest read_manifest(const std::filesystem::path& dir);

/// Throws IoError, UnsupportedVersion, ChecksumMismatch, MissingMatrix,
/// ShapeMismatch and, in strict mode, NotSymmetric / NotPositiveDefinite.
/// In lenient mode the last two become warnings.
Bundle read_bundle(const std::filesystem::path& dir, const BundleReadOptions& options = {});

/// CRC-32 (IEEE) of a byte range.
std::uint32_t crc32(const void* data, std::size_t size);

}  // namespace tarc
