#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "vsc/spatial/kdtree.hpp"
#include "vsc/spatial/sampling.hpp"

using namespace vsc;
using geom::PointCloud;
using spatial::KdTree;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed, double lo = -10,
                        double hi = 10) {
  Rng rng(seed);
  PointCloud pc;
  pc.points.resize(n);
  for (auto& p : pc.points)
    p = {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return pc;
}

}  // namespace

TEST_CASE("knn on an indexed point returns it at distance zero") {
  const auto pc = random_cloud(50, 1);
  const KdTree tree(pc);
  const auto nn = tree.knn(pc.points[17], 1);
  CHECK(nn[0].index == 17);
  CHECK(nn[0].sq_dist == 0.0);
}

TEST_CASE("knn small hand case") {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
  const KdTree tree(pc);
  const auto nn = tree.knn({0.4, 0, 0}, 2);
  CHECK(nn[0].index == 0);
  CHECK(nn[1].index == 1);
  CHECK(nn[0].sq_dist == doctest::Approx(0.16));
  CHECK(nn[1].sq_dist == doctest::Approx(0.36));
}

TEST_CASE("knn equals the linear-scan oracle on random clouds") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 50 + (seed * 131) % 950;
    const auto pc = random_cloud(n, seed + 100);
    const KdTree tree(pc);
    Rng rng(seed + 999);
    for (int q = 0; q < 20; ++q) {
      const Vec3 query{rng.uniform(-12, 12), rng.uniform(-12, 12),
                       rng.uniform(-12, 12)};
      const int k = 1 + int(rng.uniform_index(std::min<std::size_t>(n, 16)));
      const auto got = tree.knn(query, k);
      const auto want = spatial::knn_linear(pc.points, query, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        REQUIRE(got[i].index == want[i].index);
        REQUIRE(got[i].sq_dist == want[i].sq_dist);
      }
    }
  }
}

TEST_CASE("knn tie-breaks by lower index, including duplicates") {
  PointCloud pc;
  pc.points = {{1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {0, 0, 0}, {1, 0, 0}};
  const KdTree tree(pc);
  const auto nn = tree.knn({1, 0, 0}, 3);
  CHECK(nn[0].index == 0);
  CHECK(nn[0].sq_dist == 0.0);
  CHECK(nn[1].index == 2);
  CHECK(nn[1].sq_dist == 0.0);
  CHECK(nn[2].index == 4);
}

TEST_CASE("knn rejects k beyond the cloud size") {
  const auto pc = random_cloud(5, 3);
  const KdTree tree(pc);
  CHECK_THROWS_AS(tree.knn({0, 0, 0}, 6), Error);
}

TEST_CASE("nn_sq_dists parallel equals serial bitwise") {
  const auto a = random_cloud(777, 4);
  const auto b = random_cloud(555, 5);
  const KdTree tree(b);
  CHECK(spatial::nn_sq_dists(a, tree) == spatial::nn_sq_dists_serial(a, tree));
}

TEST_CASE("fps with n equal to the cloud size is a permutation") {
  const auto pc = random_cloud(40, 6);
  const auto out = spatial::fps(pc, 40, 9);
  auto lt = [](const Vec3& a, const Vec3& b) {
    return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
  };
  auto sorted_in = pc.points;
  auto sorted_out = out.points;
  std::sort(sorted_in.begin(), sorted_in.end(), lt);
  std::sort(sorted_out.begin(), sorted_out.end(), lt);
  CHECK(sorted_in == sorted_out);
}

TEST_CASE("fps picks the farthest point: colinear 0,1,10") {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {1, 0, 0}, {10, 0, 0}};
  bool found_start_at_zero = false;
  for (std::uint64_t seed = 0; seed < 64 && !found_start_at_zero; ++seed) {
    const auto out = spatial::fps(pc, 2, seed);
    if (out.points[0] == Vec3{0, 0, 0}) {
      found_start_at_zero = true;
      CHECK(out.points[1] == Vec3{10, 0, 0});
    }
  }
  REQUIRE(found_start_at_zero);
}

TEST_CASE("fps greedy radius shrinks monotonically") {
  const auto pc = random_cloud(300, 7);
  const auto idx = spatial::fps_indices(pc.points, 50, 3);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= idx.size(); ++k) {
    double min_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        min_d = std::min(min_d, (pc.points[idx[i]] - pc.points[idx[j]]).norm());
    CHECK(min_d <= prev + 1e-12);
    prev = min_d;
  }
}

TEST_CASE("fps carries attributes, is seed-deterministic, serial matches") {
  auto pc = random_cloud(64, 8);
  pc.labels.resize(64);
  for (int i = 0; i < 64; ++i) pc.labels[i] = i % 5;
  const auto a = spatial::fps(pc, 16, 5);
  const auto b = spatial::fps(pc, 16, 5);
  CHECK(a.points == b.points);
  CHECK(a.labels == b.labels);
  CHECK(spatial::fps(pc, 16, 5).points == spatial::fps_serial(pc, 16, 5).points);
  CHECK_THROWS_AS(spatial::fps(pc, 65, 1), Error);
}

TEST_CASE("voxel_downsample merges points to the voxel centroid") {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {1, 0, 0}};
  const auto out = spatial::voxel_downsample(pc, 10.0);
  REQUIRE(out.size() == 1);
  CHECK(out.points[0] == Vec3{0.5, 0, 0});
}

TEST_CASE("voxel_downsample keeps well-separated points") {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {10, 0, 0}, {0, 10, 0}, {0, 0, 10}};
  const auto out = spatial::voxel_downsample(pc, 2.0);
  CHECK(out.size() == pc.size());
}

TEST_CASE("voxel_downsample majority label with tie toward lower id") {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {0.1, 0, 0}, {0.2, 0, 0}};
  pc.labels = {1, 1, 5};
  const auto out = spatial::voxel_downsample(pc, 10.0);
  REQUIRE(out.size() == 1);
  CHECK(out.labels[0] == 1);

  PointCloud tie;
  tie.points = {{0, 0, 0}, {0.1, 0, 0}};
  tie.labels = {4, 2};
  CHECK(spatial::voxel_downsample(tie, 10.0).labels[0] == 2);
}

TEST_CASE("voxel_downsample outputs stay inside occupied source voxels") {
  const auto pc = random_cloud(500, 9, -25, 25);
  const double voxel = 3.0;
  const auto out = spatial::voxel_downsample(pc, voxel);
  CHECK(out.size() <= pc.size());
  spatial::VoxelGrid grid{Vec3{0, 0, 0}, voxel, {}};
  const auto occ = spatial::occupancy(pc, {0, 0, 0}, voxel);
  for (const Vec3& p : out.points) CHECK(occ.occupied.count(grid.cell_of(p)) == 1);
}

TEST_CASE("random_downsample permutation and padding") {
  const auto pc = random_cloud(20, 10);
  const auto perm = spatial::random_downsample(pc, 20, 3);
  auto lt = [](const Vec3& a, const Vec3& b) {
    return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
  };
  auto si = pc.points, so = perm.points;
  std::sort(si.begin(), si.end(), lt);
  std::sort(so.begin(), so.end(), lt);
  CHECK(si == so);

  PointCloud two;
  two.points = {{0, 0, 0}, {1, 1, 1}};
  const auto padded = spatial::random_downsample(two, 4, 5);
  REQUIRE(padded.size() == 4);
  for (const Vec3& p : padded.points)
    CHECK((p == two.points[0] || p == two.points[1]));

  CHECK_THROWS_AS(spatial::random_downsample(PointCloud{}, 1, 0), Error);
}

TEST_CASE("random_downsample with-replacement draws are uniform (chi-squared)") {
  PointCloud pc = random_cloud(10, 11);
  const std::size_t draws = 100000;
  const auto out = spatial::random_downsample(pc, draws, 12345);
  std::map<int, std::size_t> counts;
  for (const Vec3& p : out.points)
    for (int i = 0; i < 10; ++i)
      if (p == pc.points[i]) {
        ++counts[i];
        break;
      }
  const double expected = double(draws) / 10.0;
  double chi2 = 0;
  for (int i = 0; i < 10; ++i) {
    const double d = double(counts[i]) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 21.67);  // 1% critical value at 9 dof
  for (int i = 0; i < 10; ++i)
    CHECK(std::abs(double(counts[i]) / double(draws) - 0.1) < 0.01);
}

TEST_CASE("occupancy basics and order invariance") {
  PointCloud pc;
  pc.points = {{0.1, 0, 0}, {9.9, 0, 0}};
  const auto grid = spatial::occupancy(pc, {0, 0, 0}, 5.0);
  CHECK(grid.occupied.size() == 2);
  CHECK(grid.occupied.count({0, 0, 0}) == 1);
  CHECK(grid.occupied.count({1, 0, 0}) == 1);

  PointCloud single;
  single.points = {{0, 0, 0}};
  CHECK(spatial::occupancy(single, {0, 0, 0}, 1.0).occupied.count({0, 0, 0}) == 1);

  CHECK(spatial::occupancy(PointCloud{}, {0, 0, 0}, 1.0).occupied.empty());

  auto shuffled = random_cloud(200, 12);
  auto reversed = shuffled;
  std::reverse(reversed.points.begin(), reversed.points.end());
  CHECK(spatial::occupancy(shuffled, {0, 0, 0}, 2.0).occupied ==
        spatial::occupancy(reversed, {0, 0, 0}, 2.0).occupied);
}

TEST_CASE("median_nn_spacing of a unit-spaced line is 1") {
  PointCloud pc;
  for (int i = 0; i < 11; ++i) pc.points.push_back({double(i), 0, 0});
  CHECK(spatial::median_nn_spacing(pc) == doctest::Approx(1.0));
}
