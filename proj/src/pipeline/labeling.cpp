#include "vsc/pipeline/labeling.hpp"

#include <algorithm>

#include "vsc/geometry/camera.hpp"
#include "vsc/geometry/mesh.hpp"

namespace vsc::pipe {

geom::PointCloud generate_gt_labels(const geom::PointCloud& spine_cloud,
                                    const std::vector<geom::TriangleMesh>& meshes,
                                    double tau_bg) {
  if (meshes.empty()) fail(ErrorCategory::EmptyInput, "generate_gt_labels: no meshes");
  if (tau_bg <= 0)
    fail(ErrorCategory::InvalidArgument, "generate_gt_labels: tau_bg must be > 0");
  spine_cloud.validate();

  // Level-ascending order makes the strict < comparison keep the lower level
  // on exact distance ties.
  std::vector<const geom::TriangleMesh*> ordered;
  ordered.reserve(meshes.size());
  for (const auto& m : meshes) ordered.push_back(&m);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->level < b->level; });

  geom::PointCloud out = spine_cloud;
  out.labels.assign(out.size(), 0);
  const double tau_sq = tau_bg * tau_bg;
  const std::int64_t n = std::int64_t(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double best = tau_sq;
    int label = 0;
    for (const auto* mesh : ordered) {
      const double d = geom::mesh_sq_distance(out.points[i], *mesh);
      if (d < best || (label == 0 && d == best)) {
        best = d;
        label = mesh->level;
      }
    }
    out.labels[i] = label;
  }
  return out;
}

geom::PointCloud label_by_mask(const geom::PointCloud& cloud,
                               const geom::MaskImage& vert_mask,
                               const geom::CameraIntrinsics& intr) {
  if (vert_mask.width != intr.width || vert_mask.height != intr.height)
    fail(ErrorCategory::DimensionMismatch, "label_by_mask: mask/intrinsics size");
  geom::PointCloud out = cloud;
  out.labels.assign(out.size(), 0);
  const auto projections = geom::project(cloud, intr);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& pr = projections[i];
    if (!pr.in_front) continue;
    const int u = int(std::lround(pr.u));
    const int v = int(std::lround(pr.v));
    if (u < 0 || u >= vert_mask.width || v < 0 || v >= vert_mask.height) continue;
    out.labels[i] = vert_mask.at(u, v);
  }
  return out;
}

geom::PointCloud extract_vertebra(const geom::PointCloud& labeled, int level) {
  if (!labeled.has_labels())
    fail(ErrorCategory::InvalidArgument, "extract_vertebra: cloud has no labels");
  geom::PointCloud out;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (labeled.labels[i] != level) continue;
    out.points.push_back(labeled.points[i]);
    if (labeled.has_colors()) out.colors.push_back(labeled.colors[i]);
    out.labels.push_back(level);
  }
  return out;
}

}  // namespace vsc::pipe
