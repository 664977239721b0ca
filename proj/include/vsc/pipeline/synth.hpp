#pragma once

#include "vsc/pipeline/manifest.hpp"

namespace vsc::pipe {

// Superquadric surface |x/a|^p + |y/b|^p + |z/c|^p = 1 sampled by casting
// uniform sphere directions through the radial form. p = 2 gives ellipsoids.
geom::PointCloud superquadric_surface(const Vec3& radii, double exponent,
                                      std::size_t n, std::uint64_t seed);

struct OccludedPair {
  geom::PointCloud partial;   // n_partial points of the kept side
  geom::PointCloud complete;  // n_complete points of the full surface
  double removed_fraction = 0;
};

// One benchmark shape: a random sphere/superquadric with a random half-space
// occlusion removing a uniform fraction in [min_remove, max_remove] of the
// surface. Millimeter scale.
OccludedPair synth_occluded_shape(std::uint64_t seed, std::size_t n_partial,
                                  std::size_t n_complete, double min_remove = 0.4,
                                  double max_remove = 0.75);

// Icosphere-based ellipsoid mesh; subdivisions >= 0 (0 -> 20 triangles).
geom::TriangleMesh make_ellipsoid_mesh(const Vec3& center, const Vec3& radii,
                                       int subdivisions, int level);

// Writes a complete two-specimen synthetic dataset (meshes, rendered depth
// and color frames, poses, intrinsics, manifest) under dir. Returns the
// manifest path.
std::string write_synthetic_fixture(const std::string& dir, std::uint64_t seed,
                                    int frames_per_specimen = 3);

}  // namespace vsc::pipe
