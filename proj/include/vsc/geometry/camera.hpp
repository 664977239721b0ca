#pragma once

#include "vsc/geometry/types.hpp"

namespace vsc::geom {

// Parallel kernels carry a *_serial twin used as the reference in tests and
// the benchmark; both produce bit-identical results at any thread count.

PointCloud apply_transform(const RigidTransform& t, const PointCloud& pc);
PointCloud apply_transform_serial(const RigidTransform& t, const PointCloud& pc);

TriangleMesh apply_transform(const RigidTransform& t, const TriangleMesh& mesh);

// Pinhole unprojection: pixel (u,v) with depth d>0 (and mask label != 0 when a
// mask is given) emits ((u-cx)d/fx, (v-cy)d/fy, d) in row-major pixel order.
// Pixel color attached when a color image is given; mask labels carried as
// point labels when the mask is multi-class.
PointCloud unproject(const DepthImage& depth, const CameraIntrinsics& intr,
                     const MaskImage* mask = nullptr,
                     const ColorImage* color = nullptr);
PointCloud unproject_serial(const DepthImage& depth, const CameraIntrinsics& intr,
                            const MaskImage* mask = nullptr,
                            const ColorImage* color = nullptr);

struct PixelProjection {
  double u = 0, v = 0, depth = 0;
  bool in_front = false;  // z > 0; points behind the camera are unprojectable
  bool in_frame = false;  // inside [0,width)x[0,height)
};

// u = fx*x/z + cx, v = fy*y/z + cy. Inverse of unproject for in-frame points.
std::vector<PixelProjection> project(const PointCloud& pc, const CameraIntrinsics& intr);

}  // namespace vsc::geom
