#pragma once

#include "vsc/geometry/types.hpp"

namespace vsc::pipe {

// Labels each point with the level of the nearest mesh surface when within
// tau_bg, else background 0; exact distance ties keep the lower level id.
// Meshes must already be in the cloud's (camera) frame. The geometric
// labeler is the pipeline's canonical oracle.
geom::PointCloud generate_gt_labels(const geom::PointCloud& spine_cloud,
                                    const std::vector<geom::TriangleMesh>& meshes,
                                    double tau_bg);

// Mask-reprojection labeling for parity testing: each point projects into the
// rendered vertebra-level mask and takes that pixel's label (0 when it lands
// out of frame or behind the camera).
geom::PointCloud label_by_mask(const geom::PointCloud& cloud,
                               const geom::MaskImage& vert_mask,
                               const geom::CameraIntrinsics& intr);

// Subset with the given label, colors preserved. An absent level yields an
// empty cloud for the caller to skip and count.
geom::PointCloud extract_vertebra(const geom::PointCloud& labeled, int level);

}  // namespace vsc::pipe
