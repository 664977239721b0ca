#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "vsc/io/config.hpp"
#include "vsc/io/fsio.hpp"
#include "vsc/io/ply.hpp"
#include "vsc/io/png_io.hpp"
#include "vsc/pipeline/synth.hpp"

using namespace vsc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("vsc_io_test_" + std::to_string(std::uintptr_t(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

geom::PointCloud sample_cloud(std::size_t n, std::uint64_t seed, bool colors,
                              bool labels) {
  Rng rng(seed);
  geom::PointCloud pc;
  pc.points.resize(n);
  for (auto& p : pc.points)
    p = {rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
  if (colors) {
    pc.colors.resize(n);
    for (auto& c : pc.colors)
      c = {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())};
  }
  if (labels) {
    pc.labels.resize(n);
    for (auto& l : pc.labels) l = int(rng.uniform_index(6));
  }
  return pc;
}

}  // namespace

TEST_CASE("ply binary round trip is bit-equal for points, colors, labels") {
  TempDir dir;
  const auto pc = sample_cloud(137, 1, true, true);
  const std::string path = dir.file("cloud.ply");
  io::write_ply(path, pc, true);
  const auto back = io::read_ply_cloud(path);
  CHECK(back.points == pc.points);
  CHECK(back.colors == pc.colors);
  CHECK(back.labels == pc.labels);

  // writing the reread cloud reproduces the identical file
  const std::string path2 = dir.file("cloud2.ply");
  io::write_ply(path2, back, true);
  CHECK(io::read_file(path) == io::read_file(path2));
}

TEST_CASE("ply ascii round trip restores exact doubles") {
  TempDir dir;
  const auto pc = sample_cloud(41, 2, false, true);
  const std::string path = dir.file("cloud.ply");
  io::write_ply(path, pc, false);
  const auto back = io::read_ply_cloud(path);
  CHECK(back.points == pc.points);
  CHECK(back.labels == pc.labels);
}

TEST_CASE("ply mesh round trip keeps faces and level comment") {
  TempDir dir;
  const auto mesh = pipe::make_ellipsoid_mesh({1, 2, 3}, {10, 8, 6}, 1, 4);
  for (bool binary : {true, false}) {
    const std::string path = dir.file(binary ? "m.ply" : "m_ascii.ply");
    io::write_ply(path, mesh, binary);
    const auto back = io::read_ply_mesh(path);
    CHECK(back.vertices == mesh.vertices);
    CHECK(back.triangles == mesh.triangles);
    CHECK(back.level == 4);
  }
}

TEST_CASE("ply truncated payload reports the error with a byte offset") {
  TempDir dir;
  const std::string path = dir.file("trunc.ply");
  io::atomic_write_file(path,
                        "ply\nformat ascii 1.0\nelement vertex 2\n"
                        "property double x\nproperty double y\nproperty double z\n"
                        "end_header\n1 2 3\n");
  try {
    io::read_ply_cloud(path);
    FAIL("expected truncation error");
  } catch (const Error& e) {
    CHECK(e.category == ErrorCategory::Truncated);
    CHECK(e.offset.has_value());
  }
}

TEST_CASE("ply big-endian payload is rejected as unsupported") {
  TempDir dir;
  const std::string path = dir.file("be.ply");
  io::atomic_write_file(path,
                        "ply\nformat binary_big_endian 1.0\nelement vertex 0\n"
                        "property float x\nproperty float y\nproperty float z\n"
                        "end_header\n");
  try {
    io::read_ply_cloud(path);
    FAIL("expected unsupported error");
  } catch (const Error& e) {
    CHECK(e.category == ErrorCategory::Unsupported);
  }
}

TEST_CASE("ply malformed header errors") {
  TempDir dir;
  const std::string bad_magic = dir.file("bad1.ply");
  io::atomic_write_file(bad_magic, "plz\nformat ascii 1.0\nend_header\n");
  CHECK_THROWS_AS(io::read_ply_cloud(bad_magic), Error);

  const std::string no_end = dir.file("bad2.ply");
  io::atomic_write_file(no_end, "ply\nformat ascii 1.0\nelement vertex 1\n");
  CHECK_THROWS_AS(io::read_ply_cloud(no_end), Error);

  const std::string bad_type = dir.file("bad3.ply");
  io::atomic_write_file(
      bad_type, "ply\nformat ascii 1.0\nelement vertex 1\nproperty quaternion x\n"
                "end_header\n0\n");
  CHECK_THROWS_AS(io::read_ply_cloud(bad_type), Error);
}

TEST_CASE("ply reader accepts float coords and uchar colors") {
  TempDir dir;
  const std::string path = dir.file("legacy.ply");
  io::atomic_write_file(path,
                        "ply\nformat ascii 1.0\nelement vertex 2\n"
                        "property float x\nproperty float y\nproperty float z\n"
                        "property uchar red\nproperty uchar green\nproperty uchar "
                        "blue\nend_header\n"
                        "0 0 0 255 0 0\n1 2 3 0 255 0\n");
  const auto pc = io::read_ply_cloud(path);
  REQUIRE(pc.size() == 2);
  CHECK(pc.points[1] == Vec3{1, 2, 3});
  REQUIRE(pc.has_colors());
  CHECK(pc.colors[0][0] == doctest::Approx(1.0f));
  CHECK(pc.colors[1][1] == doctest::Approx(1.0f));
}

TEST_CASE("ply codec fuzz: truncations and bit flips never crash") {
  TempDir dir;
  const auto pc = sample_cloud(50, 3, true, true);
  const std::string path = dir.file("fuzz.ply");
  io::write_ply(path, pc, true);
  const auto valid = io::read_file(path);

  Rng rng(4);
  int categorized = 0;
  for (int i = 0; i < 200; ++i) {
    auto corrupted = valid;
    if (i % 2 == 0) {
      corrupted.resize(std::size_t(rng.uniform_index(valid.size())));
    } else {
      const std::size_t pos = std::size_t(rng.uniform_index(valid.size()));
      corrupted[pos] ^= std::uint8_t(1 + rng.uniform_index(255));
    }
    const std::string cpath = dir.file("corrupt.ply");
    io::atomic_write_file(cpath, corrupted.data(), corrupted.size());
    try {
      const auto cloud = io::read_ply_cloud(cpath);
      (void)cloud;  // some flips only perturb coordinate payloads
    } catch (const Error&) {
      ++categorized;
    } catch (...) {
      FAIL("non-categorized exception escaped the ply codec");
    }
  }
  CHECK(categorized > 0);
}

TEST_CASE("png depth round trip is exact for integer millimeters") {
  TempDir dir;
  auto depth = geom::DepthImage::zeros(33, 17);
  Rng rng(5);
  for (auto& v : depth.mm) v = float(rng.uniform_index(65536));
  const std::string path = dir.file("depth.png");
  io::write_depth_png(path, depth);
  const auto back = io::read_depth_png(path);
  CHECK(back.width == depth.width);
  CHECK(back.height == depth.height);
  CHECK(back.mm == depth.mm);
}

TEST_CASE("png color round trip is exact at 8-bit resolution") {
  TempDir dir;
  auto color = geom::ColorImage::fill(21, 13, {0, 0, 0});
  Rng rng(6);
  for (auto& c : color.rgb)
    c = {float(rng.uniform_index(256)) / 255.f, float(rng.uniform_index(256)) / 255.f,
         float(rng.uniform_index(256)) / 255.f};
  const std::string path = dir.file("color.png");
  io::write_color_png(path, color);
  const auto back = io::read_color_png(path);
  CHECK(back.rgb == color.rgb);
}

TEST_CASE("png format gates: wrong bit depth or channels are format errors") {
  TempDir dir;
  auto mask = geom::MaskImage::zeros(8, 8);
  mask.at(2, 2) = 3;
  const std::string mask_path = dir.file("mask.png");
  io::write_mask_png(mask_path, mask);
  CHECK(io::read_mask_png(mask_path).labels == mask.labels);

  // 8-bit grayscale passed as 16-bit depth
  try {
    io::read_depth_png(mask_path);
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.category == ErrorCategory::Format);
    CHECK(std::string(e.what()).find("16-bit") != std::string::npos);
  }

  // 16-bit gray passed as color
  auto depth = geom::DepthImage::zeros(8, 8);
  const std::string depth_path = dir.file("depth.png");
  io::write_depth_png(depth_path, depth);
  CHECK_THROWS_AS(io::read_color_png(depth_path), Error);

  // corrupt magic
  const std::string junk = dir.file("junk.png");
  io::atomic_write_file(junk, "not a png at all");
  try {
    io::read_depth_png(junk);
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.category == ErrorCategory::Format);
  }
}

TEST_CASE("png codec fuzz never crashes") {
  TempDir dir;
  auto depth = geom::DepthImage::zeros(16, 16);
  for (std::size_t i = 0; i < depth.mm.size(); ++i) depth.mm[i] = float(i * 7 % 901);
  const std::string path = dir.file("depth.png");
  io::write_depth_png(path, depth);
  const auto valid = io::read_file(path);
  Rng rng(7);
  for (int i = 0; i < 150; ++i) {
    auto corrupted = valid;
    if (i % 2 == 0)
      corrupted.resize(std::size_t(rng.uniform_index(valid.size())));
    else
      corrupted[std::size_t(rng.uniform_index(valid.size()))] ^=
          std::uint8_t(1 + rng.uniform_index(255));
    const std::string cpath = dir.file("corrupt.png");
    io::atomic_write_file(cpath, corrupted.data(), corrupted.size());
    try {
      (void)io::read_depth_png(cpath);
    } catch (const Error&) {
    } catch (...) {
      FAIL("non-categorized exception escaped the png codec");
    }
  }
}

TEST_CASE("intrinsics and pose json round trip; bad documents rejected") {
  geom::CameraIntrinsics intr;
  intr.fx = 500.5;
  intr.fy = 501.25;
  intr.cx = 320.125;
  intr.cy = 239.5;
  intr.width = 640;
  intr.height = 480;
  const auto j = io::intrinsics_to_json(intr);
  const auto back = io::intrinsics_from_json(j);
  CHECK(back.fx == intr.fx);
  CHECK(back.cy == intr.cy);
  CHECK(back.width == intr.width);

  nlohmann::json missing = j;
  missing.erase("fx");
  CHECK_THROWS_AS(io::intrinsics_from_json(missing), Error);

  geom::RigidTransform t{Mat3::rotation_z(0.3), {1, 2, 3}};
  const auto tj = io::pose_to_json(t);
  const auto tback = io::pose_from_json(tj);
  CHECK(tback.translation == t.translation);
  for (int i = 0; i < 9; ++i) CHECK(tback.rotation.m[i] == t.rotation.m[i]);

  nlohmann::json bad_pose = tj;
  bad_pose["matrix"][15] = 2.0;
  CHECK_THROWS_AS(io::pose_from_json(bad_pose), Error);
}

TEST_CASE("config overrides follow dotted paths and reject unknown keys") {
  nlohmann::json j = {{"train", {{"epochs", 1}, {"lr", 1e-4}}}, {"seed", 7}};
  io::apply_override(j, "train.epochs=25");
  CHECK(j["train"]["epochs"] == 25);
  io::apply_override(j, "train.lr=0.01");
  CHECK(j["train"]["lr"] == doctest::Approx(0.01));
  io::apply_override(j, "seed=99");
  CHECK(j["seed"] == 99);
  CHECK_THROWS_AS(io::apply_override(j, "train.optimizer=sgd"), Error);
  CHECK_THROWS_AS(io::apply_override(j, "no_equals_sign"), Error);
}

TEST_CASE("atomic write leaves no temp file behind") {
  TempDir dir;
  const std::string path = dir.file("out.txt");
  io::atomic_write_file(path, "payload");
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(path + ".tmp"));
  const auto data = io::read_file(path);
  CHECK(std::string(data.begin(), data.end()) == "payload");
}
