#pragma once

#include "vsc/geometry/types.hpp"

namespace vsc::geom {

struct RenderResult {
  MaskImage mask;    // per-pixel level of the nearest triangle, 0 = none
  DepthImage depth;  // camera-space depth of the nearest triangle, 0 = none
};

// Z-buffer rasterization of posed meshes. Pixel centers sit at integer (u,v),
// matching the unprojection convention; coverage uses the top-left tie rule;
// back-facing triangles are rasterized too (masks, not shading). A mesh
// entirely behind the camera contributes nothing. Triangles crossing the
// near plane are clipped.
RenderResult render_mask_depth(const std::vector<TriangleMesh>& meshes,
                               const RigidTransform& t, const CameraIntrinsics& intr);
RenderResult render_mask_depth_serial(const std::vector<TriangleMesh>& meshes,
                                      const RigidTransform& t,
                                      const CameraIntrinsics& intr);

inline MaskImage render_mask(const std::vector<TriangleMesh>& meshes,
                             const RigidTransform& t, const CameraIntrinsics& intr) {
  return render_mask_depth(meshes, t, intr).mask;
}

// Tight box over non-zero pixels; empty mask is an error.
BoundingBox2D mask_bbox(const MaskImage& mask);

}  // namespace vsc::geom
