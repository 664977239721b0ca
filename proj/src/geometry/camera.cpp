#include "vsc/geometry/camera.hpp"

namespace vsc::geom {

PointCloud apply_transform_serial(const RigidTransform& t, const PointCloud& pc) {
  PointCloud out;
  out.points.resize(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) out.points[i] = t.apply(pc.points[i]);
  out.colors = pc.colors;
  out.labels = pc.labels;
  return out;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& pc) {
  PointCloud out;
  out.points.resize(pc.size());
  const std::int64_t n = std::int64_t(pc.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out.points[i] = t.apply(pc.points[i]);
  out.colors = pc.colors;
  out.labels = pc.labels;
  return out;
}

TriangleMesh apply_transform(const RigidTransform& t, const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  const std::int64_t n = std::int64_t(mesh.vertices.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out.vertices[i] = t.apply(mesh.vertices[i]);
  return out;
}

namespace {

void check_unproject_inputs(const DepthImage& depth, const CameraIntrinsics& intr,
                            const MaskImage* mask, const ColorImage* color) {
  intr.validate();
  depth.validate();
  if (depth.width != intr.width || depth.height != intr.height)
    fail(ErrorCategory::DimensionMismatch, "depth image size does not match intrinsics");
  if (mask && (mask->width != depth.width || mask->height != depth.height))
    fail(ErrorCategory::DimensionMismatch, "mask size does not match depth image");
  if (color && (color->width != depth.width || color->height != depth.height))
    fail(ErrorCategory::DimensionMismatch, "color image size does not match depth image");
}

// One image row; pixels emitted left to right.
void unproject_row(const DepthImage& depth, const CameraIntrinsics& intr,
                   const MaskImage* mask, const ColorImage* color, int v,
                   PointCloud& out) {
  const bool multiclass = mask != nullptr;
  for (int u = 0; u < depth.width; ++u) {
    const float d = depth.at(u, v);
    if (d <= 0.f) continue;  // 0 = invalid
    std::uint8_t label = 1;
    if (mask) {
      label = mask->at(u, v);
      if (label == 0) continue;
    }
    const double dz = double(d);
    out.points.push_back({(u - intr.cx) * dz / intr.fx, (v - intr.cy) * dz / intr.fy, dz});
    if (color) out.colors.push_back(color->at(u, v));
    if (multiclass) out.labels.push_back(int(label));
  }
}

}  // namespace

PointCloud unproject_serial(const DepthImage& depth, const CameraIntrinsics& intr,
                            const MaskImage* mask, const ColorImage* color) {
  check_unproject_inputs(depth, intr, mask, color);
  PointCloud out;
  for (int v = 0; v < depth.height; ++v) unproject_row(depth, intr, mask, color, v, out);
  return out;
}

PointCloud unproject(const DepthImage& depth, const CameraIntrinsics& intr,
                     const MaskImage* mask, const ColorImage* color) {
  check_unproject_inputs(depth, intr, mask, color);
  // Per-row buffers concatenated in row order keep the output identical to the
  // serial pass at any thread count.
  std::vector<PointCloud> rows(depth.height);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < depth.height; ++v)
    unproject_row(depth, intr, mask, color, v, rows[v]);

  PointCloud out;
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  out.points.reserve(total);
  for (auto& r : rows) {
    out.points.insert(out.points.end(), r.points.begin(), r.points.end());
    out.colors.insert(out.colors.end(), r.colors.begin(), r.colors.end());
    out.labels.insert(out.labels.end(), r.labels.begin(), r.labels.end());
  }
  return out;
}

std::vector<PixelProjection> project(const PointCloud& pc, const CameraIntrinsics& intr) {
  intr.validate();
  std::vector<PixelProjection> out(pc.size());
  const std::int64_t n = std::int64_t(pc.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec3& p = pc.points[i];
    PixelProjection& pr = out[i];
    if (p.z <= 0.0) continue;  // flagged unprojectable, in_front stays false
    pr.in_front = true;
    pr.u = intr.fx * p.x / p.z + intr.cx;
    pr.v = intr.fy * p.y / p.z + intr.cy;
    pr.depth = p.z;
    pr.in_frame = pr.u >= 0 && pr.u < intr.width && pr.v >= 0 && pr.v < intr.height;
  }
  return out;
}

}  // namespace vsc::geom
