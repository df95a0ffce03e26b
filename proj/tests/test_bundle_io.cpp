#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "tarc/bundle_io.hpp"
#include "tarc/errors.hpp"
#include "tarc/mom_dipole.hpp"
#include "tarc/port_reduction.hpp"
#include "test_support.hpp"

using namespace tarc;
using tarc::fixtures::kCopper;
using tarc::fixtures::Rng;
namespace fs = std::filesystem;
using json = nlohmann::json;

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

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

template <typename M>
bool same_bytes(const M& a, const M& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(typename M::Scalar) * static_cast<std::size_t>(a.size())) == 0;
}

class BundleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tarc_bundle_") + info->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  json manifest() const {
    std::ifstream in(dir_ / kManifestName);
    return json::parse(in);
  }
  void set_manifest(const json& j) const { std::ofstream(dir_ / kManifestName) << j.dump(2); }

  fs::path dir_;
};

FullWaveSystem small_dipoles() {
  return mom::build_dipole_array(fixtures::strip_array({0.3}, kCopper, 5));
}

}  // namespace

TEST(Crc32, StandardCheckValue) {
  const char text[] = "123456789";
  EXPECT_EQ(crc32(text, 9), 0xCBF43926u);
  EXPECT_EQ(crc32(text, 0), 0u);
}

TEST_F(BundleTest, RoundTripIsByteIdentical) {
  const auto sys = small_dipoles();
  const std::vector<Direction> dirs{make_direction("broadside", kPi / 2, kPi / 2),
                                    make_direction("oblique", 1.0, 0.3, false)};
  BundleMetadata meta;
  meta.labels["geometry"] = "pair";
  meta.candidate_ports = {2, 7};
  write_bundle(sys, dir_, dirs, meta);
  const auto b = read_bundle(dir_);
  EXPECT_TRUE(b.warnings.empty());
  EXPECT_TRUE(same_bytes(b.system.r_rad, sys.r_rad));
  EXPECT_TRUE(same_bytes(b.system.r_loss, sys.r_loss));
  EXPECT_TRUE(same_bytes(b.system.x, sys.x));
  EXPECT_TRUE(same_bytes(b.system.xi, sys.xi));
  EXPECT_TRUE(same_bytes(b.system.positions, sys.positions));
  EXPECT_EQ(b.system.frequency, sys.frequency);
  EXPECT_EQ(b.system.k, sys.k);
  EXPECT_EQ(b.system.z0, sys.z0);
  EXPECT_EQ(b.system.wire_of, sys.wire_of);
  EXPECT_EQ(b.manifest.metadata.labels.at("geometry"), "pair");
  EXPECT_EQ(b.manifest.metadata.candidate_ports, (std::vector<Index>{2, 7}));
  ASSERT_EQ(b.system.stored_farfield.size(), 2u);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const ComplexRow expected = farfield_row(sys, dirs[i].e_hat, dirs[i].r_hat);
    EXPECT_TRUE(same_bytes(b.system.stored_farfield[i].row, expected));
    EXPECT_EQ(b.system.stored_farfield[i].direction.label, dirs[i].label);
  }
  // the loaded system reduces to the same port operators
  const std::vector<Index> ports{2, 7};
  const auto a = reduce_ports(sys, PortConfig::shared(ports, 50.0), dirs);
  const auto c = reduce_ports(b.system, PortConfig::shared(ports, 50.0), dirs);
  EXPECT_TRUE(same_bytes(a.y, c.y));
  EXPECT_TRUE(same_bytes(a.f[1], c.f[1]));
  EXPECT_EQ(kind_of([&] { farfield_row(b.system, theta_hat(0.2, 0.2), spherical_direction(0.2, 0.2)); }),
            ErrorKind::DirectionNotStored);
}

TEST_F(BundleTest, ManifestLayout) {
  Rng rng(91);
  const auto sys = fixtures::random_passive_system(rng, 3);
  write_bundle(sys, dir_);
  const auto m = read_manifest(dir_);
  EXPECT_EQ(m.format_version, kBundleFormatVersion);
  EXPECT_EQ(m.n, 3);
  const MatrixRecord* rrad = nullptr;
  for (const auto& r : m.matrices) {
    if (r.name == "R_rad") rrad = &r;
  }
  ASSERT_NE(rrad, nullptr);
  EXPECT_EQ(rrad->rows, 3);
  EXPECT_EQ(rrad->cols, 3);
  EXPECT_EQ(rrad->dtype, "f64");
  // nine little-endian doubles
  EXPECT_EQ(rrad->byte_length, 72u);
  const json j = manifest();
  EXPECT_EQ(j.at("byte_order"), "little");
  EXPECT_EQ(j.at("storage_order"), "row-major");

  // the blob holds row-major little-endian doubles with the stated checksum
  std::ifstream in(dir_ / kDataName, std::ios::binary);
  const std::string data((std::istreambuf_iterator<char>(in)), {});
  const char* blob = data.data() + rrad->byte_offset;
  EXPECT_EQ(crc32(blob, rrad->byte_length), rrad->crc32);
  double v01 = 0.0;
  std::memcpy(&v01, blob + sizeof(double), sizeof(double));
  EXPECT_EQ(v01, sys.r_rad(0, 1));
  double v10 = 0.0;
  std::memcpy(&v10, blob + 3 * sizeof(double), sizeof(double));
  EXPECT_EQ(v10, sys.r_rad(1, 0));
}

TEST_F(BundleTest, CorruptByteNamesTheBlob) {
  Rng rng(92);
  write_bundle(fixtures::random_passive_system(rng, 4), dir_);
  const auto m = read_manifest(dir_);
  const MatrixRecord* x = nullptr;
  for (const auto& r : m.matrices) {
    if (r.name == "X") x = &r;
  }
  ASSERT_NE(x, nullptr);
  {
    std::fstream f(dir_ / kDataName, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(static_cast<std::streamoff>(x->byte_offset + 5));
    char c = 0;
    f.read(&c, 1);
    c = static_cast<char>(c ^ 0x40);
    f.seekp(static_cast<std::streamoff>(x->byte_offset + 5));
    f.write(&c, 1);
  }
  EXPECT_EQ(kind_of([&] { read_bundle(dir_); }), ErrorKind::ChecksumMismatch);
  EXPECT_NE(error_text([&] { read_bundle(dir_); }).find("'X'"), std::string::npos);
}

TEST_F(BundleTest, MissingMatrix) {
  Rng rng(93);
  write_bundle(fixtures::random_passive_system(rng, 3), dir_);
  json j = manifest();
  auto& mats = j["matrices"];
  mats.erase(std::remove_if(mats.begin(), mats.end(), [](const json& r) { return r["name"] == "R_loss"; }),
             mats.end());
  set_manifest(j);
  EXPECT_EQ(kind_of([&] { read_bundle(dir_); }), ErrorKind::MissingMatrix);
}

TEST_F(BundleTest, ShapeMismatch) {
  Rng rng(94);
  write_bundle(fixtures::random_passive_system(rng, 4), dir_);
  json j = manifest();
  for (auto& r : j["matrices"]) {
    if (r["name"] == "xi") {
      r["rows"] = 2;
      r["cols"] = 2;
    }
  }
  set_manifest(j);
  EXPECT_EQ(kind_of([&] { read_bundle(dir_); }), ErrorKind::ShapeMismatch);

  // byte length disagreeing with the declared shape
  for (auto& r : j["matrices"]) {
    if (r["name"] == "xi") r["rows"] = 5;
  }
  set_manifest(j);
  EXPECT_EQ(kind_of([&] { read_manifest(dir_); }), ErrorKind::ShapeMismatch);
}

TEST_F(BundleTest, OverlappingBlobsAreRejected) {
  Rng rng(95);
  write_bundle(fixtures::random_passive_system(rng, 3), dir_);
  json j = manifest();
  j["matrices"][1]["byte_offset"] = j["matrices"][0]["byte_offset"].get<std::uint64_t>() + 8;
  set_manifest(j);
  EXPECT_EQ(kind_of([&] { read_manifest(dir_); }), ErrorKind::ShapeMismatch);
}

TEST_F(BundleTest, VersionGate) {
  Rng rng(96);
  write_bundle(fixtures::random_passive_system(rng, 3), dir_);
  json j = manifest();
  j["format_version"] = "1.7";
  set_manifest(j);
  EXPECT_NO_THROW(read_bundle(dir_));
  j["format_version"] = "2.0";
  set_manifest(j);
  EXPECT_EQ(kind_of([&] { read_bundle(dir_); }), ErrorKind::UnsupportedVersion);
}

TEST_F(BundleTest, MissingDirectoryAndMalformedManifest) {
  EXPECT_EQ(kind_of([&] { read_bundle(dir_); }), ErrorKind::IoError);
  fs::create_directories(dir_);
  std::ofstream(dir_ / kManifestName) << "{ not json";
  EXPECT_EQ(kind_of([&] { read_bundle(dir_); }), ErrorKind::IoError);
}

TEST_F(BundleTest, StrictAndLenientValidation) {
  Rng rng(97);
  auto sys = fixtures::random_passive_system(rng, 4);
  sys.x(0, 1) += 1e-3 * sys.x.norm();
  write_bundle(sys, dir_);
  EXPECT_EQ(kind_of([&] { read_bundle(dir_); }), ErrorKind::NotSymmetric);
  BundleReadOptions lenient;
  lenient.strict = false;
  const auto b = read_bundle(dir_, lenient);
  ASSERT_FALSE(b.warnings.empty());
  EXPECT_EQ((b.system.x - b.system.x.transpose()).norm(), 0.0);

  auto indefinite = fixtures::random_passive_system(rng, 4);
  indefinite.r_loss = -RealMatrix::Identity(4, 4);
  fs::remove_all(dir_);
  write_bundle(indefinite, dir_);
  EXPECT_EQ(kind_of([&] { read_bundle(dir_); }), ErrorKind::NotPositiveDefinite);
  EXPECT_FALSE(read_bundle(dir_, lenient).warnings.empty());
}
