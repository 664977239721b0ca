#include "vsc/spatial/sampling.hpp"

#include <algorithm>
#include <unordered_map>

namespace vsc::spatial {

namespace {

geom::PointCloud select_points(const geom::PointCloud& pc,
                               const std::vector<std::size_t>& idx) {
  geom::PointCloud out;
  out.points.reserve(idx.size());
  for (std::size_t i : idx) out.points.push_back(pc.points[i]);
  if (pc.has_colors()) {
    out.colors.reserve(idx.size());
    for (std::size_t i : idx) out.colors.push_back(pc.colors[i]);
  }
  if (pc.has_labels()) {
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) out.labels.push_back(pc.labels[i]);
  }
  return out;
}

std::vector<std::size_t> fps_impl(std::span<const Vec3> points, std::size_t n,
                                  std::uint64_t seed, bool parallel) {
  if (n < 1 || n > points.size())
    fail(ErrorCategory::InvalidArgument, "fps: n must be in [1, cloud size]");

  const std::size_t total = points.size();
  std::vector<double> min_d(total, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> chosen;
  chosen.reserve(n);

  Rng rng(seed);
  std::size_t cur = std::size_t(rng.uniform_index(total));
  chosen.push_back(cur);

  for (std::size_t step = 1; step < n; ++step) {
    const Vec3 p = points[cur];
    const std::int64_t m = std::int64_t(total);
    // Distance update is a pure per-element map; the serial argmax below keeps
    // selection identical at any thread count.
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < m; ++i)
      min_d[i] = std::min(min_d[i], sq_dist(points[i], p));
    min_d[cur] = -1.0;  // never re-selected

    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < total; ++i)
      if (min_d[i] > best_d) {
        best_d = min_d[i];
        best = i;
      }
    cur = best;
    chosen.push_back(cur);
  }
  return chosen;
}

}  // namespace

std::vector<std::size_t> fps_indices(std::span<const Vec3> points, std::size_t n,
                                     std::uint64_t seed) {
  return fps_impl(points, n, seed, true);
}

geom::PointCloud fps(const geom::PointCloud& pc, std::size_t n, std::uint64_t seed) {
  pc.validate();
  return select_points(pc, fps_impl(pc.points, n, seed, true));
}

geom::PointCloud fps_serial(const geom::PointCloud& pc, std::size_t n,
                            std::uint64_t seed) {
  pc.validate();
  return select_points(pc, fps_impl(pc.points, n, seed, false));
}

geom::PointCloud voxel_downsample(const geom::PointCloud& pc, double voxel_size) {
  if (voxel_size <= 0)
    fail(ErrorCategory::InvalidArgument, "voxel_downsample: voxel_size must be > 0");
  pc.validate();

  struct Acc {
    Vec3 sum;
    double color[3] = {0, 0, 0};
    int label_count[256] = {};
    std::size_t n = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
  std::vector<Acc> accs;

  VoxelGrid grid{Vec3{0, 0, 0}, voxel_size, {}};
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const VoxelKey key = grid.cell_of(pc.points[i]);
    auto [it, inserted] = slot.try_emplace(key, accs.size());
    if (inserted) accs.emplace_back();
    Acc& a = accs[it->second];
    a.sum += pc.points[i];
    if (pc.has_colors())
      for (int c = 0; c < 3; ++c) a.color[c] += pc.colors[i][c];
    if (pc.has_labels()) {
      const int l = pc.labels[i];
      if (l >= 0 && l < 256) ++a.label_count[l];
    }
    ++a.n;
  }

  geom::PointCloud out;
  out.points.reserve(accs.size());
  for (const Acc& a : accs) {
    out.points.push_back(a.sum / double(a.n));
    if (pc.has_colors())
      out.colors.push_back({float(a.color[0] / a.n), float(a.color[1] / a.n),
                            float(a.color[2] / a.n)});
    if (pc.has_labels()) {
      int best = 0, best_count = -1;
      for (int l = 0; l < 256; ++l)
        if (a.label_count[l] > best_count) {  // tie keeps the lower id
          best_count = a.label_count[l];
          best = l;
        }
      out.labels.push_back(best);
    }
  }
  return out;
}

geom::PointCloud random_downsample(const geom::PointCloud& pc, std::size_t n,
                                   std::uint64_t seed) {
  if (pc.empty()) fail(ErrorCategory::EmptyInput, "random_downsample: empty cloud");
  if (n < 1) fail(ErrorCategory::InvalidArgument, "random_downsample: n must be >= 1");
  pc.validate();

  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  if (n <= pc.size()) {
    // Partial Fisher-Yates over the index range.
    std::vector<std::size_t> pool(pc.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + std::size_t(rng.uniform_index(pool.size() - i));
      std::swap(pool[i], pool[j]);
      idx[i] = pool[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      idx[i] = std::size_t(rng.uniform_index(pc.size()));
  }
  return select_points(pc, idx);
}

VoxelGrid occupancy(const geom::PointCloud& pc, const Vec3& origin, double voxel_size) {
  if (voxel_size <= 0)
    fail(ErrorCategory::InvalidArgument, "occupancy: voxel_size must be > 0");
  VoxelGrid grid{origin, voxel_size, {}};
  for (const Vec3& p : pc.points) grid.occupied.insert(grid.cell_of(p));
  return grid;
}

}  // namespace vsc::spatial
