#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgf {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double norm_xy() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// Closed interval [lo, hi] on one axis.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Signed overlap length; negative values are the separation gap.
inline double overlap_length(Interval a, Interval b) {
  return std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
}

/// Fraction of `part` covered by `whole`. A zero-length `part` counts as
/// fully covered when it lies inside `whole`, otherwise not at all.
inline double covered_fraction(Interval part, Interval whole) {
  if (part.length() <= 0.0) return whole.contains(part.lo) ? 1.0 : 0.0;
  return std::max(0.0, overlap_length(part, whole)) / part.length();
}

class AABB {
 public:
  AABB() = default;
  AABB(const Vec3& min_corner, const Vec3& max_corner) : min_(min_corner), max_(max_corner) {
    if (!(min_.x <= max_.x && min_.y <= max_.y && min_.z <= max_.z)) {
      throw std::invalid_argument("AABB min corner exceeds max corner");
    }
  }

  static AABB around(const Vec3& p) { return AABB(p, p); }

  void extend(const Vec3& p) {
    min_ = {std::min(min_.x, p.x), std::min(min_.y, p.y), std::min(min_.z, p.z)};
    max_ = {std::max(max_.x, p.x), std::max(max_.y, p.y), std::max(max_.z, p.z)};
  }
  void extend(const AABB& b) {
    extend(b.min_);
    extend(b.max_);
  }

  const Vec3& min() const { return min_; }
  const Vec3& max() const { return max_; }
  Vec3 size() const { return max_ - min_; }
  Vec3 center() const { return {(min_.x + max_.x) / 2, (min_.y + max_.y) / 2, (min_.z + max_.z) / 2}; }

  Interval x() const { return {min_.x, max_.x}; }
  Interval y() const { return {min_.y, max_.y}; }
  Interval z() const { return {min_.z, max_.z}; }

  double volume() const {
    const Vec3 s = size();
    return s.x * s.y * s.z;
  }
  double footprint_area() const {
    const Vec3 s = size();
    return s.x * s.y;
  }
  double diagonal_xy() const { return std::hypot(max_.x - min_.x, max_.y - min_.y); }
  bool contains(const Vec3& p) const {
    return x().contains(p.x) && y().contains(p.y) && z().contains(p.z);
  }

  AABB translated(const Vec3& t) const { return AABB(min_ + t, max_ + t); }

  friend bool operator==(const AABB&, const AABB&) = default;

 private:
  Vec3 min_;
  Vec3 max_;
};

/// vol(a ∩ b) / vol(a), computed per axis so flat boxes degrade to area.
inline double containment_fraction(const AABB& a, const AABB& b) {
  return covered_fraction(a.x(), b.x()) * covered_fraction(a.y(), b.y()) *
         covered_fraction(a.z(), b.z());
}

/// XY-intersection area / XY footprint of a.
inline double footprint_fraction(const AABB& a, const AABB& b) {
  return covered_fraction(a.x(), b.x()) * covered_fraction(a.y(), b.y());
}

/// XY-intersection area relative to the smaller footprint. Symmetric in its
/// arguments, including the equal-area tie.
inline double footprint_overlap_of_smaller(const AABB& a, const AABB& b) {
  const double area_a = a.footprint_area();
  const double area_b = b.footprint_area();
  if (area_a < area_b) return footprint_fraction(a, b);
  if (area_b < area_a) return footprint_fraction(b, a);
  return std::max(footprint_fraction(a, b), footprint_fraction(b, a));
}

/// Euclidean XY distance between two footprints; 0 when they touch or overlap.
inline double footprint_gap(const AABB& a, const AABB& b) {
  const double gx = std::max(0.0, -overlap_length(a.x(), b.x()));
  const double gy = std::max(0.0, -overlap_length(a.y(), b.y()));
  return std::hypot(gx, gy);
}

/// True when the footprints share a region of positive area.
inline bool footprints_overlap(const AABB& a, const AABB& b) {
  return overlap_length(a.x(), b.x()) > 0.0 && overlap_length(a.y(), b.y()) > 0.0;
}

}  // namespace sgf
