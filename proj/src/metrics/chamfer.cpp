#include <algorithm>
#include <cmath>

#include "vsc/metrics/metrics.hpp"
#include "vsc/spatial/kdtree.hpp"

namespace vsc::metrics {

namespace {

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

}  // namespace

ChamferResult chamfer(const PointCloud& pred, const PointCloud& gt) {
  if (pred.empty() || gt.empty())
    fail(ErrorCategory::EmptyInput, "chamfer: empty cloud");
  const spatial::KdTree pred_tree(pred), gt_tree(gt);
  ChamferResult r;
  r.cd_pred_to_gt = mean(spatial::nn_sq_dists(pred, gt_tree));
  r.cd_gt_to_pred = mean(spatial::nn_sq_dists(gt, pred_tree));
  r.cd = r.cd_pred_to_gt + r.cd_gt_to_pred;
  return r;
}

ChamferResult chamfer_serial(const PointCloud& pred, const PointCloud& gt) {
  if (pred.empty() || gt.empty())
    fail(ErrorCategory::EmptyInput, "chamfer: empty cloud");
  const spatial::KdTree pred_tree(pred), gt_tree(gt);
  ChamferResult r;
  r.cd_pred_to_gt = mean(spatial::nn_sq_dists_serial(pred, gt_tree));
  r.cd_gt_to_pred = mean(spatial::nn_sq_dists_serial(gt, pred_tree));
  r.cd = r.cd_pred_to_gt + r.cd_gt_to_pred;
  return r;
}

SplitChamferResult chamfer_split(const PointCloud& pred, const PointCloud& gt,
                                 const PointCloud& input_partial, double tau_vis) {
  if (pred.empty() || gt.empty())
    fail(ErrorCategory::EmptyInput, "chamfer_split: empty cloud");
  if (input_partial.empty())
    fail(ErrorCategory::EmptyInput, "chamfer_split: empty input partial");
  if (tau_vis <= 0)
    fail(ErrorCategory::InvalidArgument, "chamfer_split: tau_vis must be > 0");

  const spatial::KdTree input_tree(input_partial);
  const double tau_sq = tau_vis * tau_vis;

  auto partition = [&](const PointCloud& cloud, PointCloud& vis, PointCloud& invis) {
    const auto d = spatial::nn_sq_dists(cloud, input_tree);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      (d[i] <= tau_sq ? vis : invis).points.push_back(cloud.points[i]);
  };

  PointCloud gt_top, gt_bottom, pred_top, pred_bottom;
  partition(gt, gt_top, gt_bottom);
  partition(pred, pred_top, pred_bottom);

  SplitChamferResult r;
  r.visible_fraction = double(gt_top.size()) / double(gt.size());
  if (!gt_top.empty() && !pred_top.empty())
    r.cd_top = chamfer(pred_top, gt_top).cd;
  if (!gt_bottom.empty() && !pred_bottom.empty())
    r.cd_bottom = chamfer(pred_bottom, gt_bottom).cd;

  const spatial::KdTree pred_tree(pred);
  if (!gt_top.empty()) {
    const auto d = spatial::nn_sq_dists(gt_top, pred_tree);
    double s = 0;
    for (double x : d) s += x;
    r.gt_top_to_pred = s / double(d.size());
  }
  if (!gt_bottom.empty()) {
    const auto d = spatial::nn_sq_dists(gt_bottom, pred_tree);
    double s = 0;
    for (double x : d) s += x;
    r.gt_bottom_to_pred = s / double(d.size());
  }
  return r;
}

double fscore(const PointCloud& pred, const PointCloud& gt, double threshold) {
  if (pred.empty() || gt.empty()) fail(ErrorCategory::EmptyInput, "fscore: empty cloud");
  if (threshold <= 0)
    fail(ErrorCategory::InvalidArgument, "fscore: threshold must be > 0");
  const double t_sq = threshold * threshold;
  const spatial::KdTree pred_tree(pred), gt_tree(gt);

  const auto d_pred = spatial::nn_sq_dists(pred, gt_tree);
  const auto d_gt = spatial::nn_sq_dists(gt, pred_tree);
  const double precision =
      double(std::count_if(d_pred.begin(), d_pred.end(),
                           [&](double d) { return d <= t_sq; })) /
      double(d_pred.size());
  const double recall = double(std::count_if(d_gt.begin(), d_gt.end(),
                                             [&](double d) { return d <= t_sq; })) /
                        double(d_gt.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double fscore_default_threshold(const PointCloud& gt) {
  return 0.01 * gt.bbox_longest_side();
}

SnrResult snr(const PointCloud& pred, const PointCloud& gt, SnrPairing pairing) {
  if (pred.empty() || gt.empty()) fail(ErrorCategory::EmptyInput, "snr: empty cloud");
  SnrResult r;

  const Vec3 mu = gt.centroid();
  double ps = 0;
  for (const Vec3& g : gt.points) ps += sq_dist(g, mu);
  r.p_signal = ps / double(gt.size());

  double pn = 0;
  if (pairing == SnrPairing::NearestNeighbor) {
    const spatial::KdTree pred_tree(pred);
    const auto d = spatial::nn_sq_dists(gt, pred_tree);
    for (double x : d) pn += x;
  } else {
    if (pred.size() != gt.size())
      fail(ErrorCategory::DimensionMismatch,
           "snr: index-matched pairing needs equal cloud sizes");
    for (std::size_t i = 0; i < gt.size(); ++i)
      pn += sq_dist(gt.points[i], pred.points[i]);
  }
  r.p_noise = pn / double(gt.size());
  r.snr_db = r.p_noise == 0.0 ? std::numeric_limits<double>::infinity()
                              : 10.0 * std::log10(r.p_signal / r.p_noise);
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    fail(ErrorCategory::DimensionMismatch, "pearson: length mismatch");
  if (x.size() < 2)
    fail(ErrorCategory::InvalidArgument, "pearson: need at least 2 samples");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    fail(ErrorCategory::InvalidArgument, "pearson: undefined correlation (zero variance)");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace vsc::metrics
