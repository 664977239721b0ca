#include "vsc/geometry/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vsc::geom {

namespace {

constexpr double kZNear = 1e-6;

struct ScreenVertex {
  double u, v, w;  // w = 1/z
};

// Projected triangle with edge setup. Sample point for pixel (u,v) is the
// integer coordinate itself.
struct SetupTri {
  ScreenVertex a, b, c;
  double area2;  // positive after orientation fix
  std::uint8_t label;
  int u0, u1, v0, v1;  // inclusive pixel bounds, clamped to the image
};

double edge_fn(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Top-left fill rule for the positive-orientation edge convention
// (screen-clockwise with y down): top edges run +x, left edges run -y.
bool top_left(double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

void setup_triangle(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                    const CameraIntrinsics& intr, std::uint8_t label,
                    std::vector<SetupTri>& out) {
  const Vec3* cam[3] = {&p0, &p1, &p2};
  ScreenVertex sv[3];
  for (int i = 0; i < 3; ++i) {
    const Vec3& p = *cam[i];
    sv[i] = {intr.fx * p.x / p.z + intr.cx, intr.fy * p.y / p.z + intr.cy, 1.0 / p.z};
  }
  SetupTri t{sv[0], sv[1], sv[2], 0.0, label, 0, 0, 0, 0};
  t.area2 = edge_fn(t.a.u, t.a.v, t.b.u, t.b.v, t.c.u, t.c.v);
  if (t.area2 < 0.0) {
    std::swap(t.b, t.c);
    t.area2 = -t.area2;
  }
  if (t.area2 == 0.0) return;  // degenerate in screen space

  const double umin = std::min({t.a.u, t.b.u, t.c.u});
  const double umax = std::max({t.a.u, t.b.u, t.c.u});
  const double vmin = std::min({t.a.v, t.b.v, t.c.v});
  const double vmax = std::max({t.a.v, t.b.v, t.c.v});
  t.u0 = std::max(0, int(std::ceil(umin)));
  t.u1 = std::min(intr.width - 1, int(std::floor(umax)));
  t.v0 = std::max(0, int(std::ceil(vmin)));
  t.v1 = std::min(intr.height - 1, int(std::floor(vmax)));
  if (t.u0 > t.u1 || t.v0 > t.v1) return;
  out.push_back(t);
}

// Sutherland-Hodgman clip of one triangle against z >= kZNear, then fan
// triangulation of the surviving polygon.
void clip_and_setup(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                    const CameraIntrinsics& intr, std::uint8_t label,
                    std::vector<SetupTri>& out) {
  const Vec3 in[3] = {p0, p1, p2};
  Vec3 poly[4];
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& cur = in[i];
    const Vec3& prev = in[(i + 2) % 3];
    const bool cur_in = cur.z >= kZNear;
    const bool prev_in = prev.z >= kZNear;
    if (cur_in != prev_in) {
      const double s = (kZNear - prev.z) / (cur.z - prev.z);
      poly[n++] = prev + (cur - prev) * s;
    }
    if (cur_in) poly[n++] = cur;
  }
  for (int i = 2; i < n; ++i) setup_triangle(poly[0], poly[i - 1], poly[i], intr, label, out);
}

void raster_row(const SetupTri& t, int v, float* zrow, std::uint8_t* lrow) {
  const double e_ab_dx = t.b.u - t.a.u, e_ab_dy = t.b.v - t.a.v;
  const double e_bc_dx = t.c.u - t.b.u, e_bc_dy = t.c.v - t.b.v;
  const double e_ca_dx = t.a.u - t.c.u, e_ca_dy = t.a.v - t.c.v;
  const bool tl_ab = top_left(t.a.u, t.a.v, t.b.u, t.b.v);
  const bool tl_bc = top_left(t.b.u, t.b.v, t.c.u, t.c.v);
  const bool tl_ca = top_left(t.c.u, t.c.v, t.a.u, t.a.v);
  const double py = double(v);
  for (int u = t.u0; u <= t.u1; ++u) {
    const double px = double(u);
    const double e0 = e_ab_dx * (py - t.a.v) - e_ab_dy * (px - t.a.u);  // vs edge a->b
    const double e1 = e_bc_dx * (py - t.b.v) - e_bc_dy * (px - t.b.u);
    const double e2 = e_ca_dx * (py - t.c.v) - e_ca_dy * (px - t.c.u);
    const bool cover = (e0 > 0.0 || (e0 == 0.0 && tl_ab)) &&
                       (e1 > 0.0 || (e1 == 0.0 && tl_bc)) &&
                       (e2 > 0.0 || (e2 == 0.0 && tl_ca));
    if (!cover) continue;
    // Barycentric weights; 1/z interpolates linearly in screen space.
    const double l_a = e1 / t.area2, l_b = e2 / t.area2, l_c = e0 / t.area2;
    const double w = l_a * t.a.w + l_b * t.b.w + l_c * t.c.w;
    if (w <= 0.0) continue;
    const float z = float(1.0 / w);
    if (z < zrow[u]) {
      zrow[u] = z;
      lrow[u] = t.label;
    }
  }
}

RenderResult render_impl(const std::vector<TriangleMesh>& meshes,
                         const RigidTransform& t, const CameraIntrinsics& intr,
                         bool parallel) {
  if (meshes.empty()) fail(ErrorCategory::EmptyInput, "render_mask: no meshes");
  intr.validate();
  t.validate();

  std::vector<SetupTri> tris;
  for (const TriangleMesh& mesh : meshes) {
    mesh.validate();
    if (mesh.level < 1 || mesh.level > 255)
      fail(ErrorCategory::InvalidArgument, "render_mask: mesh level must be in 1..255");
    for (const auto& tri : mesh.triangles) {
      const Vec3 p0 = t.apply(mesh.vertices[tri[0]]);
      const Vec3 p1 = t.apply(mesh.vertices[tri[1]]);
      const Vec3 p2 = t.apply(mesh.vertices[tri[2]]);
      if (p0.z < kZNear && p1.z < kZNear && p2.z < kZNear) continue;
      clip_and_setup(p0, p1, p2, intr, std::uint8_t(mesh.level), tris);
    }
  }

  RenderResult res;
  res.mask = MaskImage::zeros(intr.width, intr.height);
  res.depth = DepthImage::zeros(intr.width, intr.height);
  std::vector<float> zbuf(std::size_t(intr.width) * intr.height,
                          std::numeric_limits<float>::infinity());

  // Rows are owned by exactly one thread, and every thread walks triangles in
  // the same order, so the result matches the serial pass bit for bit.
  const int h = intr.height;
#pragma omp parallel for schedule(static) if (parallel)
  for (int v = 0; v < h; ++v) {
    float* zrow = zbuf.data() + std::size_t(v) * intr.width;
    std::uint8_t* lrow = res.mask.labels.data() + std::size_t(v) * intr.width;
    for (const SetupTri& tri : tris) {
      if (v < tri.v0 || v > tri.v1) continue;
      raster_row(tri, v, zrow, lrow);
    }
  }

  for (std::size_t i = 0; i < zbuf.size(); ++i)
    res.depth.mm[i] = std::isinf(zbuf[i]) ? 0.f : zbuf[i];
  return res;
}

}  // namespace

RenderResult render_mask_depth(const std::vector<TriangleMesh>& meshes,
                               const RigidTransform& t, const CameraIntrinsics& intr) {
  return render_impl(meshes, t, intr, true);
}

RenderResult render_mask_depth_serial(const std::vector<TriangleMesh>& meshes,
                                      const RigidTransform& t,
                                      const CameraIntrinsics& intr) {
  return render_impl(meshes, t, intr, false);
}

BoundingBox2D mask_bbox(const MaskImage& mask) {
  mask.validate();
  BoundingBox2D box{mask.width, mask.height, -1, -1};
  for (int v = 0; v < mask.height; ++v)
    for (int u = 0; u < mask.width; ++u)
      if (mask.at(u, v) != 0) {
        box.u_min = std::min(box.u_min, u);
        box.u_max = std::max(box.u_max, u);
        box.v_min = std::min(box.v_min, v);
        box.v_max = std::max(box.v_max, v);
      }
  if (box.u_max < 0) fail(ErrorCategory::EmptyInput, "mask_bbox: empty mask");
  return box;
}

}  // namespace vsc::geom
