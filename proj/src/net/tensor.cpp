#include "vsc/net/tensor.hpp"

#include <cmath>

namespace vsc::net {

bool Tensor::finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::vector<Vec3> Tensor::to_points() const {
  if (cols != 3) fail(ErrorCategory::DimensionMismatch, "to_points: tensor is not nx3");
  std::vector<Vec3> pts(rows);
  for (int i = 0; i < rows; ++i) pts[i] = row_vec3(i);
  return pts;
}

}  // namespace vsc::net
