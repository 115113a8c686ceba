#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "bandlab/band.hpp"
#include "bandlab/errors.hpp"
#include "bandlab/metric_core.hpp"
#include "bandlab/model_space.hpp"

namespace bandlab {

// ---------------------------------------------------------------------------
// Embedding audits

enum class EmbeddingTag { isometric, rough, bilipschitz, quasi, none };

inline std::string_view to_string(EmbeddingTag t) {
  switch (t) {
    case EmbeddingTag::isometric: return "isometric";
    case EmbeddingTag::rough: return "rough";
    case EmbeddingTag::bilipschitz: return "bilipschitz";
    case EmbeddingTag::quasi: return "quasi";
    case EmbeddingTag::none: return "none";
  }
  return "none";
}

struct EmbeddingClass {
  double lambda = 1.0;
  double k = 0.0;
  EmbeddingTag tag = EmbeddingTag::none;
  /// Smallest k with lambda = 1.
  double rough_k = 0.0;
  /// Smallest lambda with k = 0 (infinite if the map collapses a pair).
  double bilipschitz_lambda = 1.0;
};

/// Smallest k such that (1/lambda) d1 - k <= d2 <= lambda d1 + k on all pairs.
inline double sandwich_k(const FiniteMetricSpace& source, const FiniteMetricSpace& image, double lambda) {
  double k = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = i + 1; j < source.size(); ++j) {
      const double d1 = source(i, j), d2 = image(i, j);
      k = std::max({k, d1 / lambda - d2, d2 - lambda * d1});
    }
  }
  return k;
}

/// Fits the sampled map i -> i between two spaces of equal size. The rough
/// fit is scored by k relative to the mean source distance, the bilipschitz
/// fit by lambda - 1; the smaller score names the class. Scores within
/// `tolerance` of zero count as exact.
inline EmbeddingClass embedding_audit(const FiniteMetricSpace& source, const FiniteMetricSpace& image,
                                      double tolerance = kMetricTolerance) {
  if (source.size() != image.size()) throw Error(ErrorKind::LengthMismatch, "source and image sizes differ");
  if (source.size() < 2) throw Error(ErrorKind::InsufficientSamples, "need at least two samples");
  EmbeddingClass out;
  double sum = 0.0;
  std::size_t pairs = 0;
  double lambda = 1.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = i + 1; j < source.size(); ++j) {
      const double d1 = source(i, j), d2 = image(i, j);
      out.rough_k = std::max(out.rough_k, std::abs(d2 - d1));
      sum += d1;
      ++pairs;
      if (d1 <= tolerance && d2 <= tolerance) continue;
      if (d1 <= tolerance || d2 <= tolerance) {
        lambda = std::numeric_limits<double>::infinity();
      } else {
        lambda = std::max({lambda, d2 / d1, d1 / d2});
      }
    }
  }
  out.bilipschitz_lambda = lambda;
  const double mean = sum / static_cast<double>(pairs);
  if (out.rough_k <= tolerance) {
    out.tag = EmbeddingTag::isometric;
    out.lambda = 1.0;
    out.k = 0.0;
    return out;
  }
  if (mean <= tolerance) {
    out.tag = EmbeddingTag::none;
    out.k = out.rough_k;
    return out;
  }
  const double rough_score = out.rough_k / mean;
  const double bilip_score = lambda - 1.0;
  if (std::min(rough_score, bilip_score) <= 1.0) {
    if (rough_score <= bilip_score) {
      out.tag = EmbeddingTag::rough;
      out.lambda = 1.0;
      out.k = out.rough_k;
    } else {
      out.tag = EmbeddingTag::bilipschitz;
      out.lambda = lambda;
      out.k = 0.0;
    }
    return out;
  }
  // Neither pure fit is convincing: best combined sandwich on a geometric grid.
  double best = std::numeric_limits<double>::infinity();
  const double top = std::isfinite(lambda) ? lambda : 64.0;
  for (double l = 1.0; l <= top * 1.0000001; l *= 1.05) {
    const double k = sandwich_k(source, image, l);
    const double score = (l - 1.0) + k / mean;
    if (score < best) {
      best = score;
      out.lambda = l;
      out.k = k;
    }
  }
  out.tag = EmbeddingTag::quasi;
  return out;
}

// ---------------------------------------------------------------------------
// Rough paths

template <class P>
struct RoughPath {
  std::vector<double> params;
  std::vector<P> points;
  double k = 0.0;
};

struct PathAudit {
  double k = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
};

/// Minimal k with |d(p_i, p_j) - |t_i - t_j|| <= k over all pairs, and the
/// first pair attaining it.
template <class P, class Dist>
PathAudit rough_path_audit(const RoughPath<P>& path, Dist&& dist) {
  if (path.points.size() != path.params.size()) {
    throw Error(ErrorKind::LengthMismatch, "params and points differ in length");
  }
  if (path.points.size() < 2) throw Error(ErrorKind::InsufficientSamples, "need at least two path samples");
  PathAudit out;
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    for (std::size_t j = i + 1; j < path.points.size(); ++j) {
      const double err = std::abs(dist(path.points[i], path.points[j]) - std::abs(path.params[i] - path.params[j]));
      if (err > out.k) out = {err, i, j};
    }
  }
  return out;
}

/// A side evaluable at any parameter in [0, length].
template <class P>
struct Side {
  std::function<P(double)> at;
  double length = 0.0;

  RoughPath<P> sample(double step) const {
    RoughPath<P> path;
    const auto m = static_cast<std::size_t>(std::ceil(length / step - 1e-9));
    for (std::size_t i = 0; i <= m; ++i) {
      const double t = std::min(length, static_cast<double>(i) * step);
      path.params.push_back(t);
      path.points.push_back(at(t));
    }
    return path;
  }
};

inline Side<ModelPoint> geodesic_side(const ModelSpace& space, const ModelPoint& from, const ModelPoint& to) {
  Side<ModelPoint> side;
  side.length = space.distance(from, to);
  side.at = [&space, from, to](double t) { return space.geodesic_point(from, to, t); };
  return side;
}

/// Sides of the triangle xyz: xy runs x -> y, xz runs x -> z, yz runs y -> z.
template <class P>
struct TriangleSides {
  RoughPath<P> xy, xz, yz;
};

template <class P, class Dist>
void require_closed(const TriangleSides<P>& s, Dist& dist, double tol) {
  auto close = [&](const P& a, const P& b) { return dist(a, b) <= tol; };
  if (s.xy.points.empty() || s.xz.points.empty() || s.yz.points.empty()) {
    throw Error(ErrorKind::EndpointsMismatch, "empty side");
  }
  if (!close(s.xy.points.front(), s.xz.points.front()) || !close(s.xy.points.back(), s.yz.points.front()) ||
      !close(s.xz.points.back(), s.yz.points.back())) {
    throw Error(ErrorKind::EndpointsMismatch, "triangle sides do not close up");
  }
}

/// Discretized slimness: the largest distance from a sample on one side to
/// the nearest sample on the other two.
template <class P, class Dist>
double thin_triangle_delta(const TriangleSides<P>& sides, Dist&& dist, double endpoint_tol = kMetricTolerance) {
  require_closed(sides, dist, endpoint_tol);
  const std::array<const RoughPath<P>*, 3> all{&sides.xy, &sides.xz, &sides.yz};
  double worst = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (const P& p : all[s]->points) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < 3 && nearest > worst; ++o) {
        if (o == s) continue;
        for (const P& q : all[o]->points) nearest = std::min(nearest, dist(p, q));
      }
      worst = std::max(worst, nearest);
    }
  }
  return worst;
}

struct LedgerEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

template <class P>
struct TriangleReport {
  P x, y, z;
  GromovTriple abc;
  double delta = 0.0;
  double k = 0.0;
  P x_internal, y_internal, z_internal;
  std::vector<LedgerEntry> ledger;

  bool all_pass() const {
    return std::all_of(ledger.begin(), ledger.end(), [](const LedgerEntry& e) { return e.pass; });
  }
};

/// Evaluates the internal points x~ = yz(b), y~ = xz(a), z~ = xy(a) and records
/// each bound for (delta, k)-hyperbolic triangles: vertex-to-internal-point
/// distances, the tripod inequality along [0, a], pairwise internal-point
/// distances, and forward/backward parameterization gaps.
template <class P, class Dist>
TriangleReport<P> internal_points_report(const Side<P>& xy, const Side<P>& xz, const Side<P>& yz, Dist&& dist,
                                         double k, double delta, std::size_t grid = 20,
                                         double tol = kMetricTolerance) {
  if (!xy.at || !xz.at || !yz.at) throw Error(ErrorKind::MissingParameters, "side without evaluator");
  if (!(delta >= 0.0) || !(k >= 0.0)) throw Error(ErrorKind::MissingParameters, "delta and k are required");
  TriangleReport<P> r;
  r.x = xy.at(0.0);
  r.y = xy.at(xy.length);
  r.z = xz.at(xz.length);
  const double endpoint_tol = std::max(tol, 2.0 * k);
  if (dist(r.x, xz.at(0.0)) > endpoint_tol || dist(r.y, yz.at(0.0)) > endpoint_tol ||
      dist(r.z, yz.at(yz.length)) > endpoint_tol) {
    throw Error(ErrorKind::EndpointsMismatch, "triangle sides do not close up");
  }
  r.delta = delta;
  r.k = k;
  const double dxy = dist(r.x, r.y), dxz = dist(r.x, r.z), dyz = dist(r.y, r.z);
  r.abc = {gromov_product(dxy, dxz, dyz), gromov_product(dxy, dyz, dxz), gromov_product(dxz, dyz, dxy)};
  const auto [a, b, c] = r.abc;
  auto clampt = [](double t, double len) { return std::clamp(t, 0.0, len); };
  r.z_internal = xy.at(clampt(a, xy.length));
  r.y_internal = xz.at(clampt(a, xz.length));
  r.x_internal = yz.at(clampt(b, yz.length));

  auto add = [&](std::string name, double lhs, double rhs) {
    r.ledger.push_back({std::move(name), lhs, rhs, lhs <= rhs + tol});
  };
  const double vertex_rhs = 2.0 * delta + 4.0 * k;
  add("d(z,z~) <= c + 2delta + 4k", dist(r.z, r.z_internal), c + vertex_rhs);
  add("d(y,y~) <= b + 2delta + 4k", dist(r.y, r.y_internal), b + vertex_rhs);
  add("d(x,x~) <= a + 2delta + 4k", dist(r.x, r.x_internal), a + vertex_rhs);
  const double tripod = 4.0 * delta + 15.0 * k;
  for (std::size_t g = 0; g <= grid; ++g) {
    const double t = a * static_cast<double>(g) / static_cast<double>(grid);
    add("d(xy(t),xz(t)) <= 4delta + 15k at t=" + std::to_string(t),
        dist(xy.at(clampt(t, xy.length)), xz.at(clampt(t, xz.length))), tripod);
  }
  add("d(x~,y~) <= 4delta + 15k", dist(r.x_internal, r.y_internal), tripod);
  add("d(x~,z~) <= 4delta + 15k", dist(r.x_internal, r.z_internal), tripod);
  add("d(y~,z~) <= 4delta + 15k", dist(r.y_internal, r.z_internal), tripod);
  add("d(xz(a), xz^-1(c)) <= 2k", dist(xz.at(clampt(a, xz.length)), xz.at(clampt(xz.length - c, xz.length))),
      2.0 * k);
  add("d(xy(a), xy^-1(b)) <= 2k", dist(xy.at(clampt(a, xy.length)), xy.at(clampt(xy.length - b, xy.length))),
      2.0 * k);
  add("d(yz(b), yz^-1(c)) <= 2k", dist(yz.at(clampt(b, yz.length)), yz.at(clampt(yz.length - c, yz.length))),
      2.0 * k);
  return r;
}

// ---------------------------------------------------------------------------
// Almost-geodesic witnesses in the band

enum class WitnessCase { at_x, at_y, from_x, from_y };

inline std::string_view to_string(WitnessCase c) {
  switch (c) {
    case WitnessCase::at_x: return "at_x";
    case WitnessCase::at_y: return "at_y";
    case WitnessCase::from_x: return "from_x";
    case WitnessCase::from_y: return "from_y";
  }
  return "at_x";
}

struct Witness {
  BandPoint point;
  WitnessCase kind = WitnessCase::at_x;
  /// Construction ran with the factors exchanged (the second factor realized d_m).
  bool swapped = false;
  /// Level of both factor coordinates (cases from_x / from_y).
  double level = 0.0;
  /// d_G(w_G, o_G) and d_F(w_F, o_F) + Delta, with F the dominant factor and o
  /// the endpoint the construction started from.
  double containment_lhs = 0.0;
  double containment_rhs = 0.0;
  /// |d_m(x, w) - t| and |d_m(y, w) - (d_m(x, y) - t)|.
  double x_error = 0.0;
  double y_error = 0.0;
  /// d_F(w_F, o_F) - u where u is t (from_x) or d_m(x,y) - t (from_y).
  double dominant_error = 0.0;
  /// Level was raised to the lowest one both factors reach (finite trees).
  bool truncated = false;
};

namespace detail {

inline ModelPoint descend(const BandSpace& band, const ModelSpace& f, const ModelPoint& p, double level) {
  return band.anchor() == AnchorKind::radial ? f.toward_base(p, level) : f.toward_end(p, level);
}

inline double anchor_of(const BandSpace& band, const ModelSpace& f, const ModelPoint& p) {
  if (band.anchor() == AnchorKind::radial) return f.distance(f.basepoint(), p);
  return busemann(f, f.ray(), p).value;
}

}  // namespace detail

/// Point w of the band with d_m(x, w) ~ t and d_m(y, w) ~ d_m(x, y) - t.
/// t <= Delta gives x, t >= d_m(x,y) - Delta gives y; otherwise both factor
/// coordinates are moved toward the anchor (basepoint or ray end) to the
/// common level h_F(x_F) - t, where F realizes d_m(x, y). Past the Gromov
/// product a_F the mirrored construction from y is used. In finite trees a
/// Busemann level below some ray leaf is unreachable; it is clamped there.
inline Witness almost_geodesic_witness(const BandSpace& band, const BandPoint& x, const BandPoint& y, double t) {
  if (band.metric() != ProductMetricKind::max) {
    throw Error(ErrorKind::InvalidConfig, "witnesses are built for the max product metric");
  }
  band.require_member(x);
  band.require_member(y);
  const auto [dx1, dx2] = band.factor_distances(x, y);
  const double total = std::max(dx1, dx2);
  if (!(t >= -1e-12) || t > total * (1.0 + 1e-12) + 1e-12) {
    throw Error(ErrorKind::ParameterOutOfRange,
                "t = " + std::to_string(t) + " outside [0, " + std::to_string(total) + "]");
  }
  t = std::clamp(t, 0.0, total);
  const double delta = band.delta();
  Witness w;
  auto finish = [&](Witness& out) {
    out.x_error = std::abs(band.raw_distance(x, out.point) - t);
    out.y_error = std::abs(band.raw_distance(y, out.point) - (total - t));
    return out;
  };
  if (t <= delta) {
    w.point = x;
    w.kind = WitnessCase::at_x;
    w.containment_rhs = delta;
    return finish(w);
  }
  if (t >= total - delta) {
    w.point = y;
    w.kind = WitnessCase::at_y;
    w.containment_rhs = delta;
    return finish(w);
  }
  w.swapped = dx2 > dx1;
  const ModelSpace& fd = w.swapped ? band.factor2() : band.factor1();
  const ModelSpace& fo = w.swapped ? band.factor1() : band.factor2();
  auto dom = [&](const BandPoint& p) -> const ModelPoint& { return w.swapped ? p.p2 : p.p1; };
  auto oth = [&](const BandPoint& p) -> const ModelPoint& { return w.swapped ? p.p1 : p.p2; };

  const double hx = detail::anchor_of(band, fd, dom(x));
  const double hy = detail::anchor_of(band, fd, dom(y));
  const double a = std::clamp(0.5 * (total + hx - hy), 0.0, total);
  const bool from_x = t <= a;
  const BandPoint& origin = from_x ? x : y;
  const double u = from_x ? t : total - t;
  double level = (from_x ? hx : hy) - u;
  if (band.anchor() == AnchorKind::busemann) {
    const double floor = std::max(band.factor1().busemann_range().first, band.factor2().busemann_range().first);
    if (level < floor) {
      level = floor;
      w.truncated = true;
    }
  }
  const ModelPoint wd = detail::descend(band, fd, dom(origin), level);
  const ModelPoint wo = detail::descend(band, fo, oth(origin), level);
  w.kind = from_x ? WitnessCase::from_x : WitnessCase::from_y;
  w.level = level;
  w.point = w.swapped ? BandPoint{wo, wd} : BandPoint{wd, wo};
  const double dd = fd.distance(wd, dom(origin));
  w.containment_lhs = fo.distance(wo, oth(origin));
  w.containment_rhs = dd + delta;
  w.dominant_error = dd - u;
  return finish(w);
}

/// Path of witnesses at parameters 0, step, 2 step, ..., d_m(x, y), audited.
inline RoughPath<BandPoint> rough_geodesic_between(const BandSpace& band, const BandPoint& x, const BandPoint& y,
                                                   double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::ParameterOutOfRange, "step must be positive");
  band.require_member(x);
  band.require_member(y);
  const double total = band.raw_distance(x, y);
  RoughPath<BandPoint> path;
  if (total == 0.0) {
    path.params = {0.0};
    path.points = {x};
    return path;
  }
  const auto m = static_cast<std::size_t>(std::floor(total / step + 1e-9));
  for (std::size_t i = 0; i <= m; ++i) {
    const double t = std::min(total, static_cast<double>(i) * step);
    path.params.push_back(t);
    path.points.push_back(almost_geodesic_witness(band, x, y, t).point);
  }
  if (path.params.back() < total) {
    path.params.push_back(total);
    path.points.push_back(y);
  }
  path.k = rough_path_audit(path, [&](const BandPoint& p, const BandPoint& q) { return band.raw_distance(p, q); }).k;
  return path;
}

struct AlmostGeodesicAudit {
  double k_emp = 0.0;
  std::size_t worst_pair = 0;
  double worst_t = 0.0;
  /// Measured slimness of factor triangles (x_i, y_i, z_i), max over the
  /// probed pairs and both factors.
  double factor_thinness = 0.0;
  double delta_prime = 0.0;
  double k_theory = 0.0;
  std::size_t witnesses = 0;
  std::size_t membership_failures = 0;
  std::size_t truncated_witnesses = 0;
  std::size_t containment_failures = 0;
  double max_containment_excess = -std::numeric_limits<double>::infinity();
};

struct AuditOptions {
  std::size_t t_grid = 10;
  /// Factor roughness constant; exact geodesics give 0.
  double k = 0.0;
  double thinness_step = 0.25;
  std::size_t thinness_pairs = 10;
};

/// K_emp = max over pairs and a uniform t grid (endpoints included) of the
/// two almost-geodesic errors of the witness. Also assembles
/// K_theory = 2k + delta' + Delta + 4k with delta' = 4 delta~ + 30k from the
/// measured factor thinness delta~.
inline AlmostGeodesicAudit almost_geodesic_audit(const BandSpace& band,
                                                 const std::vector<std::pair<BandPoint, BandPoint>>& pairs,
                                                 AuditOptions options = {}) {
  if (pairs.empty()) throw Error(ErrorKind::InsufficientSamples, "no pairs to audit");
  if (options.t_grid < 2) throw Error(ErrorKind::InvalidConfig, "t grid needs at least two values");
  if (band.delta() + 1e-12 < 4.0 * options.k) {
    throw Error(ErrorKind::InvalidConfig, "the band width must be at least 4k");
  }
  AlmostGeodesicAudit out;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [x, y] = pairs[p];
    const double total = band.raw_distance(x, y);
    for (std::size_t g = 0; g < options.t_grid; ++g) {
      const double t = total * static_cast<double>(g) / static_cast<double>(options.t_grid - 1);
      const Witness w = almost_geodesic_witness(band, x, y, t);
      ++out.witnesses;
      if (!band.membership(w.point).inside) ++out.membership_failures;
      if (w.truncated) ++out.truncated_witnesses;
      const double excess = w.containment_lhs - (w.containment_rhs + 4.0 * options.k);
      out.max_containment_excess = std::max(out.max_containment_excess, excess);
      if (excess > kMetricTolerance) ++out.containment_failures;
      const double err = std::max(w.x_error, w.y_error);
      if (err > out.k_emp) {
        out.k_emp = err;
        out.worst_pair = p;
        out.worst_t = t;
      }
    }
  }
  const std::size_t probe = std::min(options.thinness_pairs, pairs.size());
  for (std::size_t p = 0; p < probe; ++p) {
    for (int i = 1; i <= 2; ++i) {
      const ModelSpace& f = band.factor(i);
      const ModelPoint& xi = i == 1 ? pairs[p].first.p1 : pairs[p].first.p2;
      const ModelPoint& yi = i == 1 ? pairs[p].second.p1 : pairs[p].second.p2;
      const ModelPoint zi = f.basepoint();
      TriangleSides<ModelPoint> sides{geodesic_side(f, xi, yi).sample(options.thinness_step),
                                      geodesic_side(f, xi, zi).sample(options.thinness_step),
                                      geodesic_side(f, yi, zi).sample(options.thinness_step)};
      const double thin = thin_triangle_delta(
          sides, [&](const ModelPoint& a, const ModelPoint& b) { return f.distance(a, b); }, 1e-7);
      out.factor_thinness = std::max(out.factor_thinness, thin);
    }
  }
  out.delta_prime = 4.0 * out.factor_thinness + 30.0 * options.k;
  out.k_theory = 2.0 * options.k + out.delta_prime + band.delta() + 4.0 * options.k;
  return out;
}

}  // namespace bandlab
