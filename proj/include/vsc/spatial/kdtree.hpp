#pragma once

#include <span>
#include <vector>

#include "vsc/geometry/types.hpp"

namespace vsc::spatial {

struct Neighbor {
  int index = -1;       // index into the source cloud
  double sq_dist = 0.0;

  // Lexicographic (sq_dist, index): distance ties break toward lower index,
  // which keeps graph construction reproducible across runs and platforms.
  bool operator<(const Neighbor& o) const {
    return sq_dist < o.sq_dist || (sq_dist == o.sq_dist && index < o.index);
  }
};

// Immutable 3D kd-tree retaining original point indices. Queries are exact:
// they match a linear scan including the tie rule. Safe for concurrent
// queries after construction.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);
  explicit KdTree(const geom::PointCloud& pc) : KdTree(std::span(pc.points)) {}

  int size() const { return int(pts_.size()); }

  Neighbor nearest(const Vec3& q) const;
  // Exactly the k smallest (sq_dist, index) pairs, ascending. k > size is an
  // error.
  std::vector<Neighbor> knn(const Vec3& q, int k) const;
  void knn(const Vec3& q, int k, std::vector<Neighbor>& out) const;

 private:
  struct Node {
    double split = 0.0;
    int axis = -1;   // -1 marks a leaf
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range in order_
  };

  int build(int begin, int end);
  void search(int node, const Vec3& q, int k, std::vector<Neighbor>& heap) const;

  std::vector<Vec3> pts_;    // reordered copies
  std::vector<int> order_;   // pts_[i] is source point order_[i]
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

// Reference linear scan with the same tie rule; the oracle for KdTree tests.
std::vector<Neighbor> knn_linear(std::span<const Vec3> points, const Vec3& q, int k);

// Median distance from each point to its nearest other point. Needs >= 2
// points. The default visibility threshold derives from this.
double median_nn_spacing(const geom::PointCloud& pc);

// Squared distance from every point of `from` to its nearest neighbor in the
// indexed cloud. The shared inner kernel of the Chamfer family; the parallel
// path and the serial reference are bit-identical.
std::vector<double> nn_sq_dists(const geom::PointCloud& from, const KdTree& to_index);
std::vector<double> nn_sq_dists_serial(const geom::PointCloud& from,
                                       const KdTree& to_index);

}  // namespace vsc::spatial
