#include "tarc/bundle_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "json.hpp"
#include "tarc/errors.hpp"
#include "tarc/linalg.hpp"

namespace tarc {

using nlohmann::json;

std::uint32_t crc32(const void* data, std::size_t size) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  const auto* bytes = static_cast<const Bytef*>(data);
  // zlib takes uInt lengths
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    c = ::crc32(c, bytes, chunk);
    bytes += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

namespace {

constexpr std::string_view kFarfieldPrefix = "farfield/";

void append_double(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.append(buf, 8);
}

double read_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

class BlobWriter {
 public:
  void real(const std::string& name, const RealMatrix& m) {
    std::string bytes;
    bytes.reserve(static_cast<std::size_t>(m.size()) * 8);
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) append_double(bytes, m(r, c));
    }
    push(name, m.rows(), m.cols(), "f64", bytes);
  }

  void complex(const std::string& name, const ComplexMatrix& m) {
    std::string bytes;
    bytes.reserve(static_cast<std::size_t>(m.size()) * 16);
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) {
        append_double(bytes, m(r, c).real());
        append_double(bytes, m(r, c).imag());
      }
    }
    push(name, m.rows(), m.cols(), "c128", bytes);
  }

  const std::string& data() const { return data_; }
  const std::vector<MatrixRecord>& records() const { return records_; }

 private:
  void push(const std::string& name, Index rows, Index cols, const char* dtype, const std::string& bytes) {
    MatrixRecord rec;
    rec.name = name;
    rec.rows = rows;
    rec.cols = cols;
    rec.dtype = dtype;
    rec.file = kDataName;
    rec.byte_offset = data_.size();
    rec.byte_length = bytes.size();
    rec.crc32 = crc32(bytes.data(), bytes.size());
    data_ += bytes;
    records_.push_back(std::move(rec));
  }

  std::string data_;
  std::vector<MatrixRecord> records_;
};

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::IoError, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::size_t element_size(const std::string& dtype) {
  if (dtype == "f64") return 8;
  if (dtype == "c128") return 16;
  throw Error(ErrorKind::IoError, "unknown dtype '" + dtype + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

const MatrixRecord* find(const BundleManifest& m, const std::string& name) {
  for (const auto& r : m.matrices) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

struct Blob {
  const MatrixRecord* record;
  const unsigned char* bytes;
};

Blob locate(const BundleManifest& manifest, const std::map<std::string, std::string>& files,
            const std::string& name) {
  const MatrixRecord* rec = find(manifest, name);
  if (!rec) throw Error(ErrorKind::MissingMatrix, "bundle has no matrix '" + name + "'");
  const auto it = files.find(rec->file);
  const std::string& data = it->second;
  if (rec->byte_offset + rec->byte_length > data.size()) {
    throw Error(ErrorKind::ShapeMismatch, "blob '" + name + "' extends past the end of " + rec->file);
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data()) + rec->byte_offset;
  if (crc32(bytes, rec->byte_length) != rec->crc32) {
    throw Error(ErrorKind::ChecksumMismatch, "checksum mismatch in blob '" + name + "'");
  }
  return {rec, bytes};
}

void expect_shape(const MatrixRecord& rec, Index rows, Index cols, const char* dtype) {
  if (rec.rows != rows || rec.cols != cols || rec.dtype != dtype) {
    throw Error(ErrorKind::ShapeMismatch,
                "matrix '" + rec.name + "' is " + std::to_string(rec.rows) + "x" +
                    std::to_string(rec.cols) + " " + rec.dtype + ", expected " + std::to_string(rows) +
                    "x" + std::to_string(cols) + " " + dtype);
  }
}

RealMatrix decode_real(const Blob& b) {
  RealMatrix m(b.record->rows, b.record->cols);
  const unsigned char* p = b.bytes;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c, p += 8) m(r, c) = read_double(p);
  }
  return m;
}

ComplexMatrix decode_complex(const Blob& b) {
  ComplexMatrix m(b.record->rows, b.record->cols);
  const unsigned char* p = b.bytes;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c, p += 16) m(r, c) = Complex(read_double(p), read_double(p + 8));
  }
  return m;
}

void check_operator(const std::string& name, const RealMatrix& m, bool psd,
                    const BundleReadOptions& o, std::vector<std::string>& warnings) {
  const double norm = m.norm();
  if (norm == 0.0) return;
  auto report = [&](ErrorKind kind, const std::string& msg) {
    if (o.strict) throw Error(kind, msg);
    warnings.push_back(msg);
  };
  const double asym = (m - m.transpose()).norm();
  if (asym > o.symmetry_tolerance * norm) {
    report(ErrorKind::NotSymmetric, name + " is not symmetric (relative asymmetry " +
                                        std::to_string(asym / norm) + ")");
  }
  if (psd) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lo < -o.psd_tolerance * hi) {
      report(ErrorKind::NotPositiveDefinite,
             name + " has a negative eigenvalue " + std::to_string(lo));
    }
  }
}

}  // namespace

void write_bundle(const FullWaveSystem& system, const std::filesystem::path& dir,
                  const std::vector<Direction>& directions, const BundleMetadata& metadata) {
  validate_system_shapes(system);
  BlobWriter w;
  w.real("R_rad", system.r_rad);
  w.real("R_loss", system.r_loss);
  w.real("X", system.x);
  w.real("xi", system.xi);
  if (system.positions.rows() == system.size() && system.positions.cols() == 3) {
    w.real("positions", system.positions);
  }

  json dirs = json::array();
  auto add_direction = [&](const Direction& d, const ComplexRow& row) {
    for (const auto& existing : dirs) {
      if (existing["label"] == d.label) {
        throw Error(ErrorKind::InvalidArgument, "duplicate far-field label '" + d.label + "'");
      }
    }
    w.complex(std::string(kFarfieldPrefix) + d.label, row);
    dirs.push_back({{"label", d.label}, {"e_hat", vec3_json(d.e_hat)}, {"r_hat", vec3_json(d.r_hat)}});
  };
  for (const auto& s : system.stored_farfield) add_direction(s.direction, s.row);
  for (const auto& d : directions) add_direction(d, farfield_row(system, d.e_hat, d.r_hat));

  json mats = json::array();
  for (const auto& r : w.records()) {
    mats.push_back({{"name", r.name},
                    {"rows", r.rows},
                    {"cols", r.cols},
                    {"dtype", r.dtype},
                    {"file", r.file},
                    {"byte_offset", r.byte_offset},
                    {"byte_length", r.byte_length},
                    {"crc32", r.crc32}});
  }
  json manifest = {{"format_version", kBundleFormatVersion},
                   {"byte_order", "little"},
                   {"storage_order", "row-major"},
                   {"N", system.size()},
                   {"frequency", system.frequency},
                   {"k", system.k},
                   {"z0", system.z0},
                   {"matrices", mats},
                   {"metadata",
                    {{"labels", metadata.labels},
                     {"candidate_ports", metadata.candidate_ports},
                     {"directions", dirs}}}};
  if (!system.wire_of.empty()) manifest["metadata"]["wire_of"] = system.wire_of;

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / kDataName, w.data());
  write_file(dir / kManifestName, manifest.dump(2) + "\n");
}

BundleManifest read_manifest(const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(read_file(dir / kManifestName));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError, std::string("malformed manifest: ") + e.what());
  }
  BundleManifest m;
  try {
    m.format_version = j.at("format_version").get<std::string>();
    const auto dot = m.format_version.find('.');
    if (m.format_version.substr(0, dot) != "1") {
      throw Error(ErrorKind::UnsupportedVersion, "unsupported bundle version " + m.format_version);
    }
    m.n = j.at("N").get<Index>();
    m.frequency = j.at("frequency").get<double>();
    m.k = j.value("k", 2.0 * kPi * m.frequency / kSpeedOfLight);
    m.z0 = j.value("z0", kFreeSpaceImpedance);
    for (const auto& r : j.at("matrices")) {
      MatrixRecord rec;
      rec.name = r.at("name").get<std::string>();
      rec.rows = r.at("rows").get<Index>();
      rec.cols = r.at("cols").get<Index>();
      rec.dtype = r.at("dtype").get<std::string>();
      rec.file = r.value("file", std::string(kDataName));
      rec.byte_offset = r.at("byte_offset").get<std::uint64_t>();
      rec.byte_length = r.at("byte_length").get<std::uint64_t>();
      rec.crc32 = r.at("crc32").get<std::uint32_t>();
      if (rec.rows < 0 || rec.cols < 0 ||
          rec.byte_length != static_cast<std::uint64_t>(rec.rows * rec.cols) * element_size(rec.dtype)) {
        throw Error(ErrorKind::ShapeMismatch, "byte length of '" + rec.name + "' does not match its shape");
      }
      if (rec.file.find('/') != std::string::npos || rec.file.find('\\') != std::string::npos) {
        throw Error(ErrorKind::IoError, "blob file names must be local: " + rec.file);
      }
      m.matrices.push_back(std::move(rec));
    }
    if (j.contains("metadata")) {
      const auto& meta = j["metadata"];
      if (meta.contains("labels")) m.metadata.labels = meta["labels"].get<std::map<std::string, std::string>>();
      if (meta.contains("candidate_ports")) {
        m.metadata.candidate_ports = meta["candidate_ports"].get<std::vector<Index>>();
      }
      if (meta.contains("wire_of")) m.wire_of = meta["wire_of"].get<std::vector<int>>();
      if (meta.contains("directions")) {
        for (const auto& d : meta["directions"]) {
          m.directions.push_back(
              {d.at("label").get<std::string>(), vec3_from(d.at("e_hat")), vec3_from(d.at("r_hat"))});
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError, std::string("malformed manifest: ") + e.what());
  }

  // blobs sharing a file must not overlap
  std::vector<const MatrixRecord*> sorted;
  for (const auto& r : m.matrices) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
    return std::tie(a->file, a->byte_offset) < std::tie(b->file, b->byte_offset);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->file == sorted[i - 1]->file &&
        sorted[i - 1]->byte_offset + sorted[i - 1]->byte_length > sorted[i]->byte_offset) {
      throw Error(ErrorKind::ShapeMismatch,
                  "blobs '" + sorted[i - 1]->name + "' and '" + sorted[i]->name + "' overlap");
    }
  }
  return m;
}

Bundle read_bundle(const std::filesystem::path& dir, const BundleReadOptions& o) {
  Bundle b;
  b.manifest = read_manifest(dir);
  const auto& m = b.manifest;
  std::map<std::string, std::string> files;
  for (const auto& r : m.matrices) {
    if (!files.count(r.file)) files[r.file] = read_file(dir / r.file);
  }

  const Index n = m.n;
  FullWaveSystem& s = b.system;
  auto real = [&](const char* name, Index rows, Index cols) {
    const Blob blob = locate(m, files, name);
    expect_shape(*blob.record, rows, cols, "f64");
    return decode_real(blob);
  };
  s.r_rad = real("R_rad", n, n);
  s.r_loss = real("R_loss", n, n);
  s.x = real("X", n, n);
  s.xi = real("xi", n, 1);
  if (find(m, "positions")) s.positions = real("positions", n, 3);
  s.frequency = m.frequency;
  s.k = m.k;
  s.z0 = m.z0;

  for (const auto& d : m.directions) {
    const Blob blob = locate(m, files, std::string(kFarfieldPrefix) + d.label);
    expect_shape(*blob.record, 1, n, "c128");
    s.stored_farfield.push_back({d, decode_complex(blob)});
  }
  s.wire_of = m.wire_of;

  for (Index i = 0; i < n; ++i) {
    if (!(s.xi[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "xi must be positive");
  }
  check_operator("R_rad", s.r_rad, true, o, b.warnings);
  check_operator("R_loss", s.r_loss, true, o, b.warnings);
  check_operator("X", s.x, false, o, b.warnings);
  if (!o.strict) {
    // downstream code expects exact symmetry
    s.r_rad = 0.5 * (s.r_rad + s.r_rad.transpose()).eval();
    s.r_loss = 0.5 * (s.r_loss + s.r_loss.transpose()).eval();
    s.x = 0.5 * (s.x + s.x.transpose()).eval();
  }
  return b;
}

}  // namespace tarc
