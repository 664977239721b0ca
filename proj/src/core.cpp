#include "vsc/core.hpp"

namespace vsc {

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::InvalidArgument: return "invalid-argument";
    case ErrorCategory::DimensionMismatch: return "dimension-mismatch";
    case ErrorCategory::EmptyInput: return "empty-input";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Format: return "format";
    case ErrorCategory::Truncated: return "truncated";
    case ErrorCategory::Unsupported: return "unsupported";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::NotFound: return "not-found";
    case ErrorCategory::Internal: return "internal";
  }
  return "unknown";
}

Mat3 Mat3::rotation_x(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 r;
  r.m[0] = 1; r.m[1] = 0; r.m[2] = 0;
  r.m[3] = 0; r.m[4] = c; r.m[5] = -s;
  r.m[6] = 0; r.m[7] = s; r.m[8] = c;
  return r;
}

Mat3 Mat3::rotation_y(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 r;
  r.m[0] = c;  r.m[1] = 0; r.m[2] = s;
  r.m[3] = 0;  r.m[4] = 1; r.m[5] = 0;
  r.m[6] = -s; r.m[7] = 0; r.m[8] = c;
  return r;
}

Mat3 Mat3::rotation_z(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 r;
  r.m[0] = c; r.m[1] = -s; r.m[2] = 0;
  r.m[3] = s; r.m[4] = c;  r.m[5] = 0;
  r.m[6] = 0; r.m[7] = 0;  r.m[8] = 1;
  return r;
}

Mat3 Mat3::axis_angle(const Vec3& axis, double rad) {
  const double n = axis.norm();
  if (n == 0.0) fail(ErrorCategory::InvalidArgument, "axis_angle: zero axis");
  const Vec3 u = axis / n;
  const double c = std::cos(rad), s = std::sin(rad), t = 1.0 - c;
  Mat3 r;
  r.m[0] = c + u.x * u.x * t;
  r.m[1] = u.x * u.y * t - u.z * s;
  r.m[2] = u.x * u.z * t + u.y * s;
  r.m[3] = u.y * u.x * t + u.z * s;
  r.m[4] = c + u.y * u.y * t;
  r.m[5] = u.y * u.z * t - u.x * s;
  r.m[6] = u.z * u.x * t - u.y * s;
  r.m[7] = u.z * u.y * t + u.x * s;
  r.m[8] = c + u.z * u.z * t;
  return r;
}

}  // namespace vsc
