#pragma once

#include <array>

#include "sgf/geometry.hpp"

namespace sgf {

/// Row-major 4x4 homogeneous transform.
using Transform = std::array<double, 16>;

inline Transform identity_transform() { return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}; }

inline Vec3 transform_point(const Transform& t, const Vec3& p) {
  return {t[0] * p.x + t[1] * p.y + t[2] * p.z + t[3], t[4] * p.x + t[5] * p.y + t[6] * p.z + t[7],
          t[8] * p.x + t[9] * p.y + t[10] * p.z + t[11]};
}

inline Transform compose(const Transform& a, const Transform& b) {
  Transform out{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[r * 4 + k] * b[k * 4 + c];
      out[r * 4 + c] = s;
    }
  }
  return out;
}

/// Inverse of a rigid transform [R | t]: [R^T | -R^T t].
inline Transform invert_rigid(const Transform& t) {
  Transform out = identity_transform();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r * 4 + c] = t[c * 4 + r];
  }
  for (int r = 0; r < 3; ++r) {
    out[r * 4 + 3] = -(out[r * 4 + 0] * t[3] + out[r * 4 + 1] * t[7] + out[r * 4 + 2] * t[11]);
  }
  return out;
}

/// Determinant of the upper-left 3x3 block.
inline double linear_determinant(const Transform& t) {
  return t[0] * (t[5] * t[10] - t[6] * t[9]) - t[1] * (t[4] * t[10] - t[6] * t[8]) +
         t[2] * (t[4] * t[9] - t[5] * t[8]);
}

}  // namespace sgf
