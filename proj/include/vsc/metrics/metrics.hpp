#pragma once

#include <map>
#include <span>
#include <optional>
#include <vector>

#include "vsc/geometry/types.hpp"

namespace vsc::metrics {

using geom::PointCloud;

// ---------------------------------------------------------------------------
// Chamfer family
// ---------------------------------------------------------------------------

struct ChamferResult {
  double cd = 0;             // cd_pred_to_gt + cd_gt_to_pred, squared mm
  double cd_pred_to_gt = 0;  // mean over pred of squared NN distance to gt
  double cd_gt_to_pred = 0;
};

ChamferResult chamfer(const PointCloud& pred, const PointCloud& gt);
ChamferResult chamfer_serial(const PointCloud& pred, const PointCloud& gt);

struct SplitChamferResult {
  // nullopt = partition-empty flag: that CD is undefined.
  std::optional<double> cd_top;
  std::optional<double> cd_bottom;
  double visible_fraction = 0;  // |GT_Top| / |GT|
  // Directed mean squared NN distance from each GT partition to the *full*
  // prediction. Defined whenever the GT partition is non-empty; reports fall
  // back to it when the pred-side partition is empty (e.g. a copy-input
  // prediction has no points away from the visible surface).
  std::optional<double> gt_top_to_pred;
  std::optional<double> gt_bottom_to_pred;
};

// Splits gt and pred into visible/invisible parts by NN distance to the input
// partial cloud (<= tau_vis is visible) and evaluates the Chamfer distance per
// part.
SplitChamferResult chamfer_split(const PointCloud& pred, const PointCloud& gt,
                                 const PointCloud& input_partial, double tau_vis);

// Harmonic mean of precision (pred within threshold of gt) and recall (gt
// within threshold of pred); 0 when both are 0.
double fscore(const PointCloud& pred, const PointCloud& gt, double threshold);

// The 1%-of-extent threshold: 0.01 x longest side of the gt bounding box.
double fscore_default_threshold(const PointCloud& gt);

// ---------------------------------------------------------------------------
// Earth mover's distance
// ---------------------------------------------------------------------------

struct EmdResult {
  double emd = 0;               // mean per-point transport cost
  std::vector<int> assignment;  // permutation: pred i -> gt assignment[i]
};

inline constexpr std::size_t kEmdExactCap = 1024;

// Optimal bijection via the Hungarian algorithm on the Euclidean cost matrix.
// Requires equal cardinalities and size <= cap.
EmdResult emd_exact(const PointCloud& pred, const PointCloud& gt,
                    std::size_t cap = kEmdExactCap);

// epsilon-scaling auction; the mean cost is within epsilon of optimal and the
// assignment is still a permutation.
EmdResult emd_approx(const PointCloud& pred, const PointCloud& gt, double epsilon);

// Report-path normalization: both clouds rescaled by 1 / (gt bbox diagonal),
// then exact when size <= cap, auction otherwise.
double emd_normalized(const PointCloud& pred, const PointCloud& gt,
                      std::size_t cap = kEmdExactCap, double epsilon = 1e-3);

// ---------------------------------------------------------------------------
// Signal-to-noise ratio
// ---------------------------------------------------------------------------

enum class SnrPairing {
  NearestNeighbor,  // noise term pairs each gt point with its nearest pred point
  IndexMatched,     // noise term pairs by index; requires equal sizes
};

struct SnrResult {
  double p_signal = 0;  // mean squared distance of gt points to their centroid
  double p_noise = 0;
  double snr_db = 0;  // +infinity when p_noise == 0
};

SnrResult snr(const PointCloud& pred, const PointCloud& gt,
              SnrPairing pairing = SnrPairing::NearestNeighbor);

// ---------------------------------------------------------------------------
// Occupancy IoU and segmentation metrics
// ---------------------------------------------------------------------------

// Voxel-occupancy intersection over union on a grid anchored at the min corner
// of the joint bounding box.
double voxel_iou(const PointCloud& a, const PointCloud& b, double voxel_size);

struct SegResult {
  double accuracy = 0;
  std::map<int, double> per_class_iou;  // classes present in gt or predicted
  double mean_iou = 0;                  // mean over classes present in gt
};

// Point-wise label comparison; clouds must have equal count and ordering.
SegResult seg_metrics(const PointCloud& pred_labels, const PointCloud& gt_labels);

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

// Sample Pearson correlation; zero variance in either input is an error.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace vsc::metrics
