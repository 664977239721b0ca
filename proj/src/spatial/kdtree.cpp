#include "vsc/spatial/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace vsc::spatial {

namespace {

double axis_coord(const Vec3& p, int axis) {
  return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
}

// Max-heap ordering: the worst (largest) neighbor at the front.
bool heap_less(const Neighbor& a, const Neighbor& b) { return a < b; }

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) {
  pts_.assign(points.begin(), points.end());
  order_.resize(pts_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!pts_.empty()) root_ = build(0, int(pts_.size()));
}

int KdTree::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  const int id = int(nodes_.size());
  nodes_.push_back(node);

  if (end - begin <= kLeafSize) return id;

  // Split on the widest axis at the median.
  Vec3 lo = pts_[begin], hi = pts_[begin];
  for (int i = begin; i < end; ++i) {
    const Vec3& p = pts_[i];
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
  }
  const Vec3 ext = hi - lo;
  int axis = 0;
  if (ext.y > axis_coord(ext, axis)) axis = 1;
  if (ext.z > axis_coord(ext, axis)) axis = 2;
  if (axis_coord(ext, axis) == 0.0) return id;  // all points identical: leaf

  const int mid = begin + (end - begin) / 2;
  std::vector<int> perm(end - begin);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Vec3> tmp_pts(pts_.begin() + begin, pts_.begin() + end);
  std::vector<int> tmp_ord(order_.begin() + begin, order_.begin() + end);
  // Keys include the original index, so the pivot is unique and the layout is
  // a pure function of the input.
  std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(),
                   [&](int a, int b) {
                     const double ca = axis_coord(tmp_pts[a], axis);
                     const double cb = axis_coord(tmp_pts[b], axis);
                     return ca < cb || (ca == cb && tmp_ord[a] < tmp_ord[b]);
                   });
  // Pivot coordinate bounds both halves: left <= split <= right.
  const double split = axis_coord(tmp_pts[perm[mid - begin]], axis);
  std::sort(perm.begin(), perm.begin() + (mid - begin),
            [&](int a, int b) { return tmp_ord[a] < tmp_ord[b]; });
  std::sort(perm.begin() + (mid - begin), perm.end(),
            [&](int a, int b) { return tmp_ord[a] < tmp_ord[b]; });
  for (int i = 0; i < end - begin; ++i) {
    pts_[begin + i] = tmp_pts[perm[i]];
    order_[begin + i] = tmp_ord[perm[i]];
  }

  nodes_[id].axis = axis;
  nodes_[id].split = split;
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node_id, const Vec3& q, int k,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const Neighbor cand{order_[i], sq_dist(q, pts_[i])};
      if (int(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), heap_less);
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end(), heap_less);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), heap_less);
      }
    }
    return;
  }

  const double qc = axis_coord(q, node.axis);
  const int near = qc < node.split ? node.left : node.right;
  const int far = qc < node.split ? node.right : node.left;
  search(near, q, k, heap);

  const double plane = qc - node.split;
  const double plane_sq = plane * plane;
  // Equality must still descend: an equal distance with a lower index wins.
  if (int(heap.size()) < k || plane_sq <= heap.front().sq_dist) search(far, q, k, heap);
}

Neighbor KdTree::nearest(const Vec3& q) const {
  auto nn = knn(q, 1);
  return nn[0];
}

std::vector<Neighbor> KdTree::knn(const Vec3& q, int k) const {
  std::vector<Neighbor> out;
  knn(q, k, out);
  return out;
}

void KdTree::knn(const Vec3& q, int k, std::vector<Neighbor>& out) const {
  if (k < 1) fail(ErrorCategory::InvalidArgument, "knn: k must be >= 1");
  if (k > size())
    fail(ErrorCategory::InvalidArgument, "knn: k exceeds indexed cloud size");
  out.clear();
  out.reserve(k);
  search(root_, q, k, out);
  std::sort_heap(out.begin(), out.end(), heap_less);
}

std::vector<Neighbor> knn_linear(std::span<const Vec3> points, const Vec3& q, int k) {
  if (k < 1 || k > int(points.size()))
    fail(ErrorCategory::InvalidArgument, "knn_linear: bad k");
  std::vector<Neighbor> all(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    all[i] = {int(i), sq_dist(q, points[i])};
  std::partial_sort(all.begin(), all.begin() + k, all.end());
  all.resize(k);
  return all;
}

double median_nn_spacing(const geom::PointCloud& pc) {
  if (pc.size() < 2)
    fail(ErrorCategory::InvalidArgument, "median_nn_spacing: need at least 2 points");
  const KdTree tree(pc);
  std::vector<double> spacing(pc.size());
  const std::int64_t n = std::int64_t(pc.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<Neighbor> nn;
    tree.knn(pc.points[i], 2, nn);
    // nn[0] is the point itself at distance 0 (or an exact duplicate).
    spacing[i] = std::sqrt(nn[1].sq_dist);
  }
  std::sort(spacing.begin(), spacing.end());
  const std::size_t m = spacing.size();
  return m % 2 == 1 ? spacing[m / 2] : 0.5 * (spacing[m / 2 - 1] + spacing[m / 2]);
}

std::vector<double> nn_sq_dists_serial(const geom::PointCloud& from,
                                       const KdTree& to_index) {
  std::vector<double> d(from.size());
  for (std::size_t i = 0; i < from.size(); ++i)
    d[i] = to_index.nearest(from.points[i]).sq_dist;
  return d;
}

std::vector<double> nn_sq_dists(const geom::PointCloud& from, const KdTree& to_index) {
  std::vector<double> d(from.size());
  const std::int64_t n = std::int64_t(from.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    d[i] = to_index.nearest(from.points[i]).sq_dist;
  return d;
}

}  // namespace vsc::spatial
