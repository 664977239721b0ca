#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vsc/core.hpp"

namespace vsc::geom {

// Universal currency of the pipeline: N points in millimeters with optional
// per-point color in [0,1] and integer label (0 = background, 1..5 = L1..L5).
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::array<float, 3>> colors;  // empty or points.size()
  std::vector<int> labels;                   // empty or points.size()

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_labels() const { return !labels.empty(); }

  // colors/labels, when present, match the point count; coordinates finite.
  void validate() const;

  Vec3 centroid() const;
  void bbox(Vec3& lo, Vec3& hi) const;  // fails on empty cloud
  double bbox_diagonal() const;
  double bbox_longest_side() const;
};

struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transposed();
    return {rt, (rt * translation) * -1.0};
  }
  RigidTransform compose(const RigidTransform& inner) const {
    // (*this) after inner: x -> R_outer (R_inner x + t_inner) + t_outer
    return {rotation * inner.rotation, rotation * inner.translation + translation};
  }

  // Orthonormal with det +1 within tol.
  bool is_valid(double tol = 1e-6) const;
  void validate(double tol = 1e-6) const;

  static RigidTransform identity() { return {Mat3::identity(), Vec3{}}; }
};

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const;
};

// Depth in millimeters, 0 = invalid; 16-bit in files, float in memory.
struct DepthImage {
  int width = 0, height = 0;
  std::vector<float> mm;

  float at(int u, int v) const { return mm[std::size_t(v) * width + u]; }
  float& at(int u, int v) { return mm[std::size_t(v) * width + u]; }
  void validate() const;

  static DepthImage zeros(int w, int h) {
    return {w, h, std::vector<float>(std::size_t(w) * h, 0.f)};
  }
};

struct ColorImage {
  int width = 0, height = 0;
  std::vector<std::array<float, 3>> rgb;  // [0,1]

  const std::array<float, 3>& at(int u, int v) const {
    return rgb[std::size_t(v) * width + u];
  }
  std::array<float, 3>& at(int u, int v) { return rgb[std::size_t(v) * width + u]; }
  void validate() const;

  static ColorImage fill(int w, int h, std::array<float, 3> c) {
    return {w, h, std::vector<std::array<float, 3>>(std::size_t(w) * h, c)};
  }
};

// Per-pixel integer label; 0 = background. A plain binary mask is the 0/1 case.
struct MaskImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> labels;

  std::uint8_t at(int u, int v) const { return labels[std::size_t(v) * width + u]; }
  std::uint8_t& at(int u, int v) { return labels[std::size_t(v) * width + u]; }
  bool any() const;
  void validate() const;

  static MaskImage zeros(int w, int h) {
    return {w, h, std::vector<std::uint8_t>(std::size_t(w) * h, 0)};
  }
  static MaskImage filled(int w, int h, std::uint8_t v) {
    return {w, h, std::vector<std::uint8_t>(std::size_t(w) * h, v)};
  }
};

struct BoundingBox2D {
  int u_min = 0, v_min = 0, u_max = 0, v_max = 0;

  bool contains(int u, int v) const {
    return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
  }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  int level = 0;  // vertebra id, 0 if unset

  // Indices in range, no degenerate repeated-index triangles.
  void validate() const;
  double area() const;
  void bbox(Vec3& lo, Vec3& hi) const;
};

}  // namespace vsc::geom
