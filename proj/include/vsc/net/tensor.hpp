#pragma once

#include <vector>

#include "vsc/core.hpp"

namespace vsc::net {

// Dense row-major 2D tensor of doubles. Scalars are 1x1; a point set is nx3.
struct Tensor {
  int rows = 0, cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(std::size_t(r) * c, 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double value) {
    Tensor t(r, c);
    std::fill(t.v.begin(), t.v.end(), value);
    return t;
  }
  static Tensor row3(double x, double y, double z) {
    Tensor t(1, 3);
    t.v = {x, y, z};
    return t;
  }
  static Tensor from_points(const std::vector<Vec3>& pts) {
    Tensor t(int(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      t.v[3 * i] = pts[i].x;
      t.v[3 * i + 1] = pts[i].y;
      t.v[3 * i + 2] = pts[i].z;
    }
    return t;
  }

  double& at(int r, int c) { return v[std::size_t(r) * cols + c]; }
  double at(int r, int c) const { return v[std::size_t(r) * cols + c]; }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool finite() const;

  Vec3 row_vec3(int r) const { return {at(r, 0), at(r, 1), at(r, 2)}; }
  std::vector<Vec3> to_points() const;
};

}  // namespace vsc::net
