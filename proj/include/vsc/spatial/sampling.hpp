#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>

#include "vsc/geometry/types.hpp"

namespace vsc::spatial {

// Farthest-point sampling: the first point is a seeded uniform pick, each next
// point maximizes the min distance to the chosen set (ties toward lower
// index). Colors and labels carry through. Deterministic given seed.
geom::PointCloud fps(const geom::PointCloud& pc, std::size_t n, std::uint64_t seed);
geom::PointCloud fps_serial(const geom::PointCloud& pc, std::size_t n,
                            std::uint64_t seed);
std::vector<std::size_t> fps_indices(std::span<const Vec3> points, std::size_t n,
                                     std::uint64_t seed);

// One point per occupied voxel: centroid of members, color averaged, label by
// majority vote (ties toward the lower label id). Output follows the order of
// first voxel occurrence.
geom::PointCloud voxel_downsample(const geom::PointCloud& pc, double voxel_size);

// Uniform sample of n points, deterministic by seed. n <= size draws without
// replacement; n > size draws with replacement so small partial clouds can
// still feed the network.
geom::PointCloud random_downsample(const geom::PointCloud& pc, std::size_t n,
                                   std::uint64_t seed);

struct VoxelKey {
  std::int64_t i = 0, j = 0, k = 0;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& v) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::int64_t c : {v.i, v.j, v.k}) {
      h ^= std::uint64_t(c);
      h *= 0x100000001b3ull;
    }
    return std::size_t(h);
  }
};

struct VoxelGrid {
  Vec3 origin;
  double voxel_size = 1.0;
  std::unordered_set<VoxelKey, VoxelKeyHash> occupied;

  VoxelKey cell_of(const Vec3& p) const {
    return {std::int64_t(std::floor((p.x - origin.x) / voxel_size)),
            std::int64_t(std::floor((p.y - origin.y) / voxel_size)),
            std::int64_t(std::floor((p.z - origin.z) / voxel_size))};
  }
};

// Occupied set = cells containing at least one point.
VoxelGrid occupancy(const geom::PointCloud& pc, const Vec3& origin, double voxel_size);

}  // namespace vsc::spatial
