#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bandlab/errors.hpp"

namespace bandlab::h2 {

/// Point of the upper half-plane model of the hyperbolic plane.
struct Point {
  double x = 0.0;
  double y = 1.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Smallest accepted imaginary part. Radial samples at radius 40 legitimately
/// reach y ~ e^-40, so only values at or below the normal-double floor (and
/// non-finite input) are outside the domain.
inline constexpr double kMinHeight = std::numeric_limits<double>::min();

inline void check_point(const Point& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.y <= kMinHeight) {
    throw Error(ErrorKind::PointOutsideDomain,
                "upper half-plane point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
  }
}

/// d = 2 asinh(|p - q| / (2 sqrt(p.y q.y))); the asinh form keeps full
/// relative precision for nearby points where acosh(1 + eps) does not.
inline double distance(const Point& p, const Point& q) {
  const double chord = std::hypot(p.x - q.x, p.y - q.y);
  return 2.0 * std::asinh(chord / (2.0 * std::sqrt(p.y) * std::sqrt(q.y)));
}

/// Point at distance r from i along the geodesic whose Poincare-disk
/// direction angle is `angle` (angle 0 points straight up).
inline Point exp_at_i(double angle, double r) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  // Image of i e^r under the elliptic rotation fixing i, divided through by
  // e^r so large radii neither overflow nor cancel.
  const double inv = std::exp(-r);
  const double denom = c * c * inv + s * s / inv;
  if (!(denom > 0.0) || !std::isfinite(denom)) return {0.0, 1.0 / inv};
  return {s * c * (inv - 1.0 / inv) / denom, 1.0 / denom};
}

/// Disk direction angle of q seen from i.
inline double angle_from_i(const Point& q) {
  return std::atan2(-2.0 * q.x, q.x * q.x + q.y * q.y - 1.0);
}

/// Maps p to i (translation then dilation); `from_frame` inverts it.
inline Point to_frame(const Point& base, const Point& q) {
  return {(q.x - base.x) / base.y, q.y / base.y};
}
inline Point from_frame(const Point& base, const Point& q) {
  return {base.x + base.y * q.x, base.y * q.y};
}

/// Point at distance s from p on the geodesic to q.
inline Point geodesic_point(const Point& p, const Point& q, double s) {
  if (s == 0.0) return p;
  const Point local = to_frame(p, q);
  return from_frame(p, exp_at_i(angle_from_i(local), s));
}

/// Point at distance r from `base` in direction `angle`.
inline Point exp_at(const Point& base, double angle, double r) {
  return from_frame(base, exp_at_i(angle, r));
}

/// Exact Busemann function of the vertical ray t -> (base.x, base.y e^t).
inline double vertical_busemann(const Point& base, const Point& p) { return std::log(base.y / p.y); }

/// Point with the given vertical-ray Busemann value, on the horocycle through
/// that level, displaced along the horocycle so that its geodesic distance to
/// the point straight above `base` is `lateral` (sign gives the side).
inline Point horocycle_point(const Point& base, double level, double lateral) {
  const double height = base.y * std::exp(-level);
  const double shift = 2.0 * height * std::sinh(0.5 * std::abs(lateral));
  return {base.x + std::copysign(shift, lateral), height};
}

}  // namespace bandlab::h2
