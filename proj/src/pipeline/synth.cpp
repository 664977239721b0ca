#include "vsc/pipeline/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "vsc/geometry/camera.hpp"
#include "vsc/geometry/raster.hpp"
#include "vsc/io/config.hpp"
#include "vsc/io/ply.hpp"
#include "vsc/io/png_io.hpp"
#include "vsc/spatial/sampling.hpp"

namespace vsc::pipe {

geom::PointCloud superquadric_surface(const Vec3& radii, double exponent,
                                      std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorCategory::InvalidArgument, "superquadric_surface: n >= 1");
  if (exponent <= 0 || radii.x <= 0 || radii.y <= 0 || radii.z <= 0)
    fail(ErrorCategory::InvalidArgument, "superquadric_surface: bad shape params");
  Rng rng(seed);
  geom::PointCloud out;
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = rng.unit_vector();
    const double q = std::pow(std::abs(d.x / radii.x), exponent) +
                     std::pow(std::abs(d.y / radii.y), exponent) +
                     std::pow(std::abs(d.z / radii.z), exponent);
    const double r = std::pow(q, -1.0 / exponent);
    out.points[i] = d * r;
  }
  return out;
}

OccludedPair synth_occluded_shape(std::uint64_t seed, std::size_t n_partial,
                                  std::size_t n_complete, double min_remove,
                                  double max_remove) {
  Rng rng(seed);
  const double base = rng.uniform(20.0, 50.0);  // mm
  const Vec3 radii{base * rng.uniform(0.7, 1.3), base * rng.uniform(0.7, 1.3),
                   base * rng.uniform(0.7, 1.3)};
  // p = 2 is an ellipsoid; higher exponents grow boxy.
  const double exponent = rng.uniform() < 0.5 ? 2.0 : rng.uniform(1.5, 4.0);
  const Vec3 center{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0),
                    rng.uniform(180.0, 260.0)};

  // Oversample so the kept side still has more than n_partial distinct points
  // at the strongest occlusion.
  const std::size_t oversample = std::max(
      n_complete, std::size_t(std::ceil(double(n_partial) / (1.0 - max_remove))) * 2);
  geom::PointCloud surface =
      superquadric_surface(radii, exponent, oversample, rng.next_u64());
  for (Vec3& p : surface.points) p += center;

  OccludedPair pair;
  pair.removed_fraction = rng.uniform(min_remove, max_remove);

  const Vec3 dir = rng.unit_vector();
  std::vector<double> proj(surface.size());
  for (std::size_t i = 0; i < surface.size(); ++i) proj[i] = dir.dot(surface.points[i]);
  std::vector<double> sorted = proj;
  const std::size_t keep =
      std::max<std::size_t>(1, std::size_t(std::round((1.0 - pair.removed_fraction) *
                                                      double(surface.size()))));
  std::nth_element(sorted.begin(), sorted.begin() + keep - 1, sorted.end());
  const double threshold = sorted[keep - 1];

  geom::PointCloud kept;
  for (std::size_t i = 0; i < surface.size(); ++i)
    if (proj[i] <= threshold) kept.points.push_back(surface.points[i]);

  pair.partial = spatial::random_downsample(kept, n_partial, rng.next_u64());
  pair.complete = spatial::random_downsample(surface, n_complete, rng.next_u64());
  return pair;
}

geom::TriangleMesh make_ellipsoid_mesh(const Vec3& center, const Vec3& radii,
                                       int subdivisions, int level) {
  // Icosahedron base.
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : verts) v = v / v.norm();
  std::vector<std::array<std::uint32_t, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
  auto mid = [&](std::uint32_t a, std::uint32_t b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec3 m = (verts[a] + verts[b]) * 0.5;
    m = m / m.norm();
    verts.push_back(m);
    const auto idx = std::uint32_t(verts.size() - 1);
    midpoint.emplace(key, idx);
    return idx;
  };

  for (int s = 0; s < subdivisions; ++s) {
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const std::uint32_t a = mid(f[0], f[1]);
      const std::uint32_t b = mid(f[1], f[2]);
      const std::uint32_t c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }

  geom::TriangleMesh mesh;
  mesh.level = level;
  mesh.triangles = std::move(faces);
  mesh.vertices.reserve(verts.size());
  for (const Vec3& v : verts)
    mesh.vertices.push_back(
        {center.x + v.x * radii.x, center.y + v.y * radii.y, center.z + v.z * radii.z});
  return mesh;
}

std::string write_synthetic_fixture(const std::string& dir, std::uint64_t seed,
                                    int frames_per_specimen) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  geom::CameraIntrinsics intr;
  intr.fx = intr.fy = 80.0;
  intr.cx = 48.0;
  intr.cy = 36.0;
  intr.width = 96;
  intr.height = 72;
  io::save_json((fs::path(dir) / "intrinsics.json").string(),
                io::intrinsics_to_json(intr));

  DatasetManifest manifest;
  Rng rng(seed);

  for (int si = 0; si < 2; ++si) {
    SpecimenRecord spec;
    spec.id = si == 0 ? "synth_a" : "synth_b";
    const fs::path spec_dir = fs::path(dir) / spec.id;
    fs::create_directories(spec_dir);

    // Two "vertebrae" in CT space, separated along y.
    std::vector<geom::TriangleMesh> meshes;
    for (int level = 1; level <= 2; ++level) {
      const double wobble = rng.uniform(0.85, 1.15);
      const geom::TriangleMesh mesh = make_ellipsoid_mesh(
          Vec3{0.0, (level - 1.5) * 44.0, 0.0},
          Vec3{16.0 * wobble, 13.0 * wobble, 11.0 * wobble}, 2, level);
      const std::string mesh_path =
          (spec_dir / ("mesh_l" + std::to_string(level) + ".ply")).string();
      io::write_ply(mesh_path, mesh, true);
      meshes.push_back(mesh);
      spec.meshes.push_back({level, mesh_path});
    }

    for (int fi = 0; fi < frames_per_specimen; ++fi) {
      // CT -> camera: a slightly different viewpoint per frame.
      const geom::RigidTransform pose{
          Mat3::rotation_y(0.15 * fi + 0.1 * si) * Mat3::rotation_x(0.1 * fi),
          Vec3{0.0, 0.0, 220.0}};

      const auto render = geom::render_mask_depth(meshes, pose, intr);
      geom::ColorImage color = geom::ColorImage::fill(intr.width, intr.height,
                                                      {0.2f, 0.2f, 0.2f});
      for (int v = 0; v < intr.height; ++v)
        for (int u = 0; u < intr.width; ++u)
          if (render.mask.at(u, v) != 0)
            color.at(u, v) = {0.9f, 0.8f - 0.2f * render.mask.at(u, v), 0.4f};

      const std::string stem = "frame" + std::to_string(fi);
      FrameRecord frame;
      frame.recording = fi;
      frame.view = 0;
      frame.depth_path = (spec_dir / (stem + "_depth.png")).string();
      frame.color_path = (spec_dir / (stem + "_color.png")).string();
      frame.pose_path = (spec_dir / (stem + "_pose.json")).string();
      frame.intrinsics_path = (fs::path(dir) / "intrinsics.json").string();
      io::write_depth_png(frame.depth_path, render.depth);
      io::write_color_png(frame.color_path, color);
      io::save_json(frame.pose_path, io::pose_to_json(pose));
      spec.frames.push_back(std::move(frame));
    }
    manifest.specimens.push_back(std::move(spec));
  }

  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  manifest.save(manifest_path);
  return manifest_path;
}

}  // namespace vsc::pipe
