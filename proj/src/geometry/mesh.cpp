#include "vsc/geometry/mesh.hpp"

#include <algorithm>

namespace vsc::geom {

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double mesh_sq_distance(const Vec3& p, const TriangleMesh& mesh) {
  if (mesh.triangles.empty())
    fail(ErrorCategory::EmptyInput, "mesh_sq_distance: mesh has no triangles");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    const Vec3 q = closest_point_on_triangle(p, mesh.vertices[t[0]],
                                             mesh.vertices[t[1]], mesh.vertices[t[2]]);
    best = std::min(best, sq_dist(p, q));
  }
  return best;
}

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n,
                               std::uint64_t seed) {
  if (n < 1) fail(ErrorCategory::InvalidArgument, "sample_mesh_surface: n must be >= 1");
  if (mesh.triangles.empty())
    fail(ErrorCategory::EmptyInput, "sample_mesh_surface: mesh has no triangles");
  mesh.validate();

  std::vector<double> cum(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    const Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    total += 0.5 * e1.cross(e2).norm();
    cum[i] = total;
  }
  if (total <= 0.0)
    fail(ErrorCategory::InvalidArgument, "sample_mesh_surface: zero-area mesh");

  Rng rng(seed);
  PointCloud out;
  out.points.resize(n);
  out.labels.assign(n, mesh.level);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.uniform() * total;
    const std::size_t ti =
        std::size_t(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
    const auto& t = mesh.triangles[std::min(ti, cum.size() - 1)];
    // sqrt trick: uniform over the triangle
    const double s = std::sqrt(rng.uniform());
    const double u = 1.0 - s;
    const double v = rng.uniform() * s;
    const double w = s - v;
    out.points[i] = mesh.vertices[t[0]] * u + mesh.vertices[t[1]] * v +
                    mesh.vertices[t[2]] * w;
  }
  return out;
}

}  // namespace vsc::geom
