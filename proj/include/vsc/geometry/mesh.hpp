#pragma once

#include "vsc/geometry/types.hpp"

namespace vsc::geom {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

// Min squared distance from p to the mesh surface (exact, all triangles).
double mesh_sq_distance(const Vec3& p, const TriangleMesh& mesh);

// n points drawn area-proportionally over triangles, barycentric-uniform
// within each; labels set to the mesh level. Deterministic given seed.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n,
                               std::uint64_t seed);

}  // namespace vsc::geom
