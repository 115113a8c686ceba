#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bandlab/errors.hpp"
#include "bandlab/metric_core.hpp"
#include "bandlab/model_space.hpp"
#include "bandlab/random.hpp"

namespace bandlab {

enum class AnchorKind { radial, busemann };
enum class ProductMetricKind { max, euclidean };

inline std::string_view to_string(AnchorKind k) { return k == AnchorKind::radial ? "radial" : "busemann"; }
inline std::string_view to_string(ProductMetricKind k) { return k == ProductMetricKind::max ? "max" : "euclidean"; }

struct BandPoint {
  ModelPoint p1;
  ModelPoint p2;
  friend bool operator==(const BandPoint&, const BandPoint&) = default;
};

struct Membership {
  bool inside = false;
  /// Delta - |h1 - h2|; negative when the point is outside the band.
  double slack = 0.0;
};

inline double combine_factor_distances(ProductMetricKind kind, double d1, double d2) {
  return kind == ProductMetricKind::max ? std::max(d1, d2) : std::hypot(d1, d2);
}

/// The band Y_Delta = {(x1, x2) : |h1(x1) - h2(x2)| <= Delta} inside a product
/// of two model spaces, where h_i is the distance to the basepoint (radial) or
/// the Busemann function of the designated ray (busemann).
class BandSpace {
 public:
  BandSpace(ModelSpace factor1, ModelSpace factor2, double delta, AnchorKind anchor, ProductMetricKind metric)
      : factor1_(std::move(factor1)),
        factor2_(std::move(factor2)),
        delta_(delta),
        anchor_(anchor),
        metric_(metric) {
    if (!std::isfinite(delta) || delta < 0.0) {
      throw Error(ErrorKind::InvalidConfig, "band width must be finite and nonnegative");
    }
  }

  const ModelSpace& factor1() const noexcept { return factor1_; }
  const ModelSpace& factor2() const noexcept { return factor2_; }
  const ModelSpace& factor(int i) const noexcept { return i == 1 ? factor1_ : factor2_; }
  double delta() const noexcept { return delta_; }
  AnchorKind anchor() const noexcept { return anchor_; }
  ProductMetricKind metric() const noexcept { return metric_; }

  BandSpace with_metric(ProductMetricKind metric) const {
    BandSpace copy = *this;
    copy.metric_ = metric;
    return copy;
  }
  BandSpace with_delta(double delta) const {
    return BandSpace(factor1_, factor2_, delta, anchor_, metric_);
  }
  /// Same band with the two factors exchanged.
  BandSpace swapped() const { return BandSpace(factor2_, factor1_, delta_, anchor_, metric_); }

  /// Anchor functional h_i on factor i.
  double anchor_value(int i, const ModelPoint& p) const {
    const ModelSpace& f = factor(i);
    if (anchor_ == AnchorKind::radial) return f.distance(f.basepoint(), p);
    return busemann(f, f.ray(), p).value;
  }

  Membership membership(const BandPoint& p) const {
    const double gap = std::abs(anchor_value(1, p.p1) - anchor_value(2, p.p2));
    return {gap <= delta_ + kMetricTolerance, delta_ - gap};
  }

  void require_member(const BandPoint& p) const {
    const Membership m = membership(p);
    if (!m.inside) {
      throw Error(ErrorKind::MembershipViolation,
                  "anchor gap exceeds the band width by " + std::to_string(-m.slack));
    }
  }

  std::array<double, 2> factor_distances(const BandPoint& p, const BandPoint& q) const {
    return {factor1_.distance(p.p1, q.p1), factor2_.distance(p.p2, q.p2)};
  }

  /// Product distance without membership checks.
  double raw_distance(const BandPoint& p, const BandPoint& q) const {
    const auto [d1, d2] = factor_distances(p, q);
    return combine_factor_distances(metric_, d1, d2);
  }

  /// The basepoint pair (z1, z2), which is also (gamma1(0), gamma2(0)).
  BandPoint base() const { return {factor1_.basepoint(), factor2_.basepoint()}; }

 private:
  ModelSpace factor1_;
  ModelSpace factor2_;
  double delta_ = 0.0;
  AnchorKind anchor_ = AnchorKind::radial;
  ProductMetricKind metric_ = ProductMetricKind::max;
};

inline Membership band_membership(const BandSpace& band, const ModelPoint& p1, const ModelPoint& p2) {
  return band.membership({p1, p2});
}

inline double product_distance(const BandSpace& band, const BandPoint& p, const BandPoint& q) {
  band.require_member(p);
  band.require_member(q);
  return band.raw_distance(p, q);
}

struct SampleOptions {
  /// Use the same direction seed in both factors; with identical factors and
  /// Delta = 0 this samples the diagonal.
  bool shared_directions = false;
};

/// n points of the band, point 0 being the base pair. Radial bands draw a
/// common radius r in [0, cap] and per-factor radii within Delta/2 of it;
/// Busemann bands draw a common level in [-cap/2, cap/2] and per-factor
/// levels within Delta/2 of it, placed on exact horospheres with lateral
/// offsets up to cap/4.
inline std::vector<BandPoint> sample_band(const BandSpace& band, std::size_t n, double radius_cap,
                                          std::uint64_t seed, SampleOptions options = {}) {
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "sample size must be at least 1");
  if (!(radius_cap > 0.0)) throw Error(ErrorKind::InvalidConfig, "radius cap must be positive");
  const ModelSpace& f1 = band.factor1();
  const ModelSpace& f2 = band.factor2();
  const double half = 0.5 * band.delta();
  std::vector<BandPoint> out;
  out.reserve(n);
  out.push_back(band.base());
  Rng rng(seed);
  for (std::size_t i = 1; i < n; ++i) {
    const std::uint64_t seed1 = rng.next();
    const std::uint64_t seed2 = options.shared_directions ? seed1 : rng.next();
    if (band.anchor() == AnchorKind::radial) {
      const double top = std::min({radius_cap, f1.max_radius(), f2.max_radius()});
      const double r = rng.uniform(0.0, top);
      const double r1 = std::min(rng.uniform(std::max(0.0, r - half), r + half), f1.max_radius());
      const double r2 = options.shared_directions
                            ? r1
                            : std::min(rng.uniform(std::max(0.0, r - half), r + half), f2.max_radius());
      out.push_back({f1.radial_point(r1, seed1), f2.radial_point(r2, seed2)});
    } else {
      const auto [lo1, hi1] = f1.busemann_range();
      const auto [lo2, hi2] = f2.busemann_range();
      const double lo = std::max({-0.5 * radius_cap, lo1, lo2});
      const double hi = std::min({0.5 * radius_cap, hi1, hi2});
      const double level = rng.uniform(lo, hi);
      const double l1 = std::clamp(rng.uniform(level - half, level + half), lo1, hi1);
      const double l2 =
          options.shared_directions ? l1 : std::clamp(rng.uniform(level - half, level + half), lo2, hi2);
      out.push_back({f1.horosphere_point(l1, seed1, 0.25 * radius_cap),
                     f2.horosphere_point(l2, seed2, 0.25 * radius_cap)});
    }
    band.require_member(out.back());
  }
  return out;
}

/// Distance matrix of the sample under the band's product metric, base 0.
inline FiniteMetricSpace materialize(const BandSpace& band, const std::vector<BandPoint>& points) {
  for (const auto& p : points) band.require_member(p);
  return FiniteMetricSpace::from_distance(
      points.size(), [&](std::size_t i, std::size_t j) { return band.raw_distance(points[i], points[j]); });
}

/// Distance matrix of one factor's coordinates of the sample, base 0.
inline FiniteMetricSpace factor_space(const BandSpace& band, const std::vector<BandPoint>& points, int factor) {
  const ModelSpace& f = band.factor(factor);
  return FiniteMetricSpace::from_distance(points.size(), [&](std::size_t i, std::size_t j) {
    return factor == 1 ? f.distance(points[i].p1, points[j].p1) : f.distance(points[i].p2, points[j].p2);
  });
}

/// Largest-minus-second pairing sum of four band points under `metric`.
inline double band_quadruple_defect(const BandSpace& band, ProductMetricKind metric, const BandPoint& x,
                                    const BandPoint& y, const BandPoint& z, const BandPoint& w) {
  const BandSpace b = band.with_metric(metric);
  auto d = [&](const BandPoint& p, const BandPoint& q) { return b.raw_distance(p, q); };
  return pairing_excess(d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z));
}

struct CounterexampleQuadruple {
  BandPoint x;  // geodesic midpoint of y and z in both factors
  BandPoint y;  // (Y, Y)
  BandPoint z;  // (Z, Z)
  BandPoint w;  // (Y, Z)
  /// Half-width of the horocycle chord, in units of the base height.
  double half_chord = 0.0;
};

/// Horocycle half-chord s with d((-s, 1), (s, 1)) = d1, by bisection on the
/// exact distance.
inline double horocycle_half_chord(double d1) {
  if (!(d1 >= 0.0) || !std::isfinite(d1)) throw Error(ErrorKind::ParameterOutOfRange, "d1 must be >= 0");
  if (d1 == 0.0) return 0.0;
  auto dist = [](double s) { return h2::distance({-s, 1.0}, {s, 1.0}); };
  double lo = 0.0, hi = 1.0;
  while (dist(hi) < d1) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (dist(mid) < d1 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// The configuration showing the Euclidean product metric fails on Y_0:
/// y and z on one horocycle at distance d1, x their midpoint, all three on
/// the diagonal, and w = (y1, z2).
inline CounterexampleQuadruple counterexample_family(const BandSpace& band, double d1) {
  if (band.factor1().kind() != ModelKind::h2 || band.factor2().kind() != ModelKind::h2) {
    throw Error(ErrorKind::InvalidConfig, "the counterexample needs two hyperbolic-plane factors");
  }
  if (band.anchor() != AnchorKind::busemann) {
    throw Error(ErrorKind::InvalidConfig, "the counterexample needs Busemann anchors");
  }
  const double s = horocycle_half_chord(d1);
  auto in = [&](int i, double u, double v) -> ModelPoint {
    return h2::from_frame(band.factor(i).h2_base(), {u, v});
  };
  const double apex = std::sqrt(1.0 + s * s);
  CounterexampleQuadruple q;
  q.half_chord = s;
  q.x = {in(1, 0.0, apex), in(2, 0.0, apex)};
  q.y = {in(1, -s, 1.0), in(2, -s, 1.0)};
  q.z = {in(1, s, 1.0), in(2, s, 1.0)};
  q.w = {q.y.p1, q.z.p2};
  return q;
}

}  // namespace bandlab
