#include "vsc/geometry/types.hpp"

#include <algorithm>

namespace vsc::geom {

void PointCloud::validate() const {
  if (!colors.empty() && colors.size() != points.size())
    fail(ErrorCategory::DimensionMismatch, "point cloud colors/points length mismatch");
  if (!labels.empty() && labels.size() != points.size())
    fail(ErrorCategory::DimensionMismatch, "point cloud labels/points length mismatch");
  for (const Vec3& p : points)
    if (!p.finite())
      fail(ErrorCategory::InvalidArgument, "point cloud contains non-finite coordinate");
}

Vec3 PointCloud::centroid() const {
  if (points.empty()) fail(ErrorCategory::EmptyInput, "centroid of empty cloud");
  Vec3 c;
  for (const Vec3& p : points) c += p;
  return c / double(points.size());
}

void PointCloud::bbox(Vec3& lo, Vec3& hi) const {
  if (points.empty()) fail(ErrorCategory::EmptyInput, "bbox of empty cloud");
  lo = hi = points[0];
  for (const Vec3& p : points) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
  }
}

double PointCloud::bbox_diagonal() const {
  Vec3 lo, hi;
  bbox(lo, hi);
  return (hi - lo).norm();
}

double PointCloud::bbox_longest_side() const {
  Vec3 lo, hi;
  bbox(lo, hi);
  const Vec3 d = hi - lo;
  return std::max({d.x, d.y, d.z});
}

bool RigidTransform::is_valid(double tol) const {
  const Mat3 should_be_identity = rotation * rotation.transposed();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(should_be_identity.at(i, j) - want) > tol) return false;
    }
  return std::abs(rotation.det() - 1.0) <= tol;
}

void RigidTransform::validate(double tol) const {
  if (!is_valid(tol))
    fail(ErrorCategory::InvalidArgument,
         "rigid transform rotation is not orthonormal with det +1");
}

void CameraIntrinsics::validate() const {
  if (fx <= 0 || fy <= 0)
    fail(ErrorCategory::InvalidArgument, "camera intrinsics: fx, fy must be > 0");
  if (width <= 0 || height <= 0)
    fail(ErrorCategory::InvalidArgument, "camera intrinsics: empty image size");
  if (cx < 0 || cx >= width || cy < 0 || cy >= height)
    fail(ErrorCategory::InvalidArgument, "camera intrinsics: principal point out of bounds");
}

void DepthImage::validate() const {
  if (mm.size() != std::size_t(width) * height)
    fail(ErrorCategory::DimensionMismatch, "depth image buffer does not match declared size");
  for (float d : mm)
    if (!(d >= 0.f))
      fail(ErrorCategory::InvalidArgument, "depth image contains negative or NaN value");
}

void ColorImage::validate() const {
  if (rgb.size() != std::size_t(width) * height)
    fail(ErrorCategory::DimensionMismatch, "color image buffer does not match declared size");
  for (const auto& c : rgb)
    for (float v : c)
      if (!(v >= 0.f && v <= 1.f))
        fail(ErrorCategory::InvalidArgument, "color image channel outside [0,1]");
}

bool MaskImage::any() const {
  return std::any_of(labels.begin(), labels.end(), [](std::uint8_t v) { return v != 0; });
}

void MaskImage::validate() const {
  if (labels.size() != std::size_t(width) * height)
    fail(ErrorCategory::DimensionMismatch, "mask buffer does not match declared size");
}

void TriangleMesh::validate() const {
  const std::uint32_t n = std::uint32_t(vertices.size());
  for (const auto& t : triangles) {
    if (t[0] >= n || t[1] >= n || t[2] >= n)
      fail(ErrorCategory::InvalidArgument, "triangle index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      fail(ErrorCategory::InvalidArgument, "degenerate triangle with repeated indices");
  }
  for (const Vec3& v : vertices)
    if (!v.finite()) fail(ErrorCategory::InvalidArgument, "mesh vertex not finite");
}

double TriangleMesh::area() const {
  double a = 0;
  for (const auto& t : triangles) {
    const Vec3 e1 = vertices[t[1]] - vertices[t[0]];
    const Vec3 e2 = vertices[t[2]] - vertices[t[0]];
    a += 0.5 * e1.cross(e2).norm();
  }
  return a;
}

void TriangleMesh::bbox(Vec3& lo, Vec3& hi) const {
  if (vertices.empty()) fail(ErrorCategory::EmptyInput, "bbox of empty mesh");
  lo = hi = vertices[0];
  for (const Vec3& p : vertices) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
  }
}

}  // namespace vsc::geom
