#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "vsc/metrics/metrics.hpp"
#include "vsc/spatial/sampling.hpp"

namespace vsc::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> cost_matrix(const PointCloud& pred, const PointCloud& gt) {
  const std::size_t n = pred.size();
  std::vector<double> cost(n * n);
  const std::int64_t m = std::int64_t(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[std::size_t(i) * n + j] = (pred.points[i] - gt.points[j]).norm();
  return cost;
}

void check_sizes(const PointCloud& pred, const PointCloud& gt) {
  if (pred.empty() || gt.empty()) fail(ErrorCategory::EmptyInput, "emd: empty cloud");
  if (pred.size() != gt.size())
    fail(ErrorCategory::DimensionMismatch,
         "emd: cardinality mismatch; resample the clouds to equal size first");
}

// Jonker-Volgenant style shortest augmenting path assignment, O(n^3).
std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[std::size_t(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j]) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

EmdResult emd_exact(const PointCloud& pred, const PointCloud& gt, std::size_t cap) {
  check_sizes(pred, gt);
  if (pred.size() > cap)
    fail(ErrorCategory::InvalidArgument,
         "emd_exact: cloud larger than exact-solver cap; use emd_approx");
  const int n = int(pred.size());
  const auto cost = cost_matrix(pred, gt);
  EmdResult r;
  r.assignment = solve_assignment(cost, n);
  double total = 0;
  for (int i = 0; i < n; ++i) total += cost[std::size_t(i) * n + r.assignment[i]];
  r.emd = total / double(n);
  return r;
}

// Forward auction with epsilon scaling. With bidding increment eps the final
// assignment satisfies eps-complementary slackness, so its total cost is
// within n*eps of optimal, i.e. the mean is within eps.
EmdResult emd_approx(const PointCloud& pred, const PointCloud& gt, double epsilon) {
  check_sizes(pred, gt);
  if (epsilon <= 0)
    fail(ErrorCategory::InvalidArgument, "emd_approx: epsilon must be > 0");
  const int n = int(pred.size());
  const auto cost = cost_matrix(pred, gt);

  double max_cost = 0;
  for (double c : cost) max_cost = std::max(max_cost, c);

  std::vector<double> price(n, 0.0);
  std::vector<int> owner(n, -1);     // gt j -> pred i
  std::vector<int> assigned(n, -1);  // pred i -> gt j

  double eps = std::max(epsilon, max_cost / 4.0);
  for (;;) {
    std::fill(owner.begin(), owner.end(), -1);
    std::fill(assigned.begin(), assigned.end(), -1);
    std::deque<int> queue;
    for (int i = 0; i < n; ++i) queue.push_back(i);

    while (!queue.empty()) {
      const int i = queue.front();
      queue.pop_front();
      // Best and second-best net value for bidder i (value = -cost - price).
      double best = -kInf, second = -kInf;
      int best_j = -1;
      const double* row = cost.data() + std::size_t(i) * n;
      for (int j = 0; j < n; ++j) {
        const double val = -row[j] - price[j];
        if (val > best) {
          second = best;
          best = val;
          best_j = j;
        } else if (val > second) {
          second = val;
        }
      }
      const double increment = (second == -kInf ? 0.0 : best - second) + eps;
      price[best_j] += increment;
      if (owner[best_j] >= 0) {
        assigned[owner[best_j]] = -1;
        queue.push_back(owner[best_j]);
      }
      owner[best_j] = i;
      assigned[i] = best_j;
    }

    if (eps <= epsilon) break;
    eps = std::max(epsilon, eps / 5.0);
  }

  EmdResult r;
  r.assignment = assigned;
  double total = 0;
  for (int i = 0; i < n; ++i) total += cost[std::size_t(i) * n + assigned[i]];
  r.emd = total / double(n);
  return r;
}

double emd_normalized(const PointCloud& pred, const PointCloud& gt, std::size_t cap,
                      double epsilon) {
  check_sizes(pred, gt);
  const double diag = gt.bbox_diagonal();
  const double scale = diag > 0 ? 1.0 / diag : 1.0;
  PointCloud p, g;
  p.points.reserve(pred.size());
  g.points.reserve(gt.size());
  for (const Vec3& q : pred.points) p.points.push_back(q * scale);
  for (const Vec3& q : gt.points) g.points.push_back(q * scale);
  if (p.size() <= cap) return emd_exact(p, g, cap).emd;
  return emd_approx(p, g, epsilon).emd;
}

double voxel_iou(const PointCloud& a, const PointCloud& b, double voxel_size) {
  if (voxel_size <= 0)
    fail(ErrorCategory::InvalidArgument, "voxel_iou: voxel_size must be > 0");
  if (a.empty() && b.empty())
    fail(ErrorCategory::EmptyInput, "voxel_iou: both clouds empty");

  // Shared grid anchored at the min corner of the joint bounding box.
  Vec3 origin{kInf, kInf, kInf};
  for (const Vec3& p : a.points) {
    origin.x = std::min(origin.x, p.x);
    origin.y = std::min(origin.y, p.y);
    origin.z = std::min(origin.z, p.z);
  }
  for (const Vec3& p : b.points) {
    origin.x = std::min(origin.x, p.x);
    origin.y = std::min(origin.y, p.y);
    origin.z = std::min(origin.z, p.z);
  }

  const auto ga = spatial::occupancy(a, origin, voxel_size);
  const auto gb = spatial::occupancy(b, origin, voxel_size);
  std::size_t inter = 0;
  for (const auto& cell : ga.occupied) inter += gb.occupied.count(cell);
  const std::size_t uni = ga.occupied.size() + gb.occupied.size() - inter;
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

SegResult seg_metrics(const PointCloud& pred_labels, const PointCloud& gt_labels) {
  if (pred_labels.size() != gt_labels.size())
    fail(ErrorCategory::DimensionMismatch, "seg_metrics: cloud size mismatch");
  if (!pred_labels.has_labels() || !gt_labels.has_labels())
    fail(ErrorCategory::InvalidArgument, "seg_metrics: both clouds must be labeled");
  if (gt_labels.empty()) fail(ErrorCategory::EmptyInput, "seg_metrics: empty clouds");

  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<int, Counts> conf;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gt_labels.size(); ++i) {
    const int g = gt_labels.labels[i], p = pred_labels.labels[i];
    if (g == p) {
      ++correct;
      ++conf[g].tp;
    } else {
      ++conf[g].fn;
      ++conf[p].fp;
    }
  }

  SegResult r;
  r.accuracy = double(correct) / double(gt_labels.size());
  std::map<int, bool> in_gt;
  for (int g : gt_labels.labels) in_gt[g] = true;

  double iou_sum = 0;
  std::size_t gt_classes = 0;
  for (const auto& [cls, c] : conf) {
    const std::size_t denom = c.tp + c.fp + c.fn;
    const double iou = denom == 0 ? 0.0 : double(c.tp) / double(denom);
    r.per_class_iou[cls] = iou;
    if (in_gt.count(cls)) {
      iou_sum += iou;
      ++gt_classes;
    }
  }
  r.mean_iou = gt_classes == 0 ? 0.0 : iou_sum / double(gt_classes);
  return r;
}

}  // namespace vsc::metrics
