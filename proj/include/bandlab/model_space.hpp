#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <variant>

#include "bandlab/errors.hpp"
#include "bandlab/h2.hpp"
#include "bandlab/metric_tree.hpp"
#include "bandlab/random.hpp"

namespace bandlab {

enum class ModelKind { h2, tree };

using ModelPoint = std::variant<h2::Point, tree::Point>;

/// Truncation of the Busemann liminf: grid step and evaluation bound.
struct Ray {
  double t_max = 40.0;
  double step = 0.25;
};

struct BusemannValue {
  double value = 0.0;
  /// Drop between the last two grid values; ~0 once the tail has converged.
  double last_decrement = 0.0;
};

/// Exact-geometry oracle: the upper half-plane or a finite metric tree, each
/// with a basepoint and a designated geodesic ray starting there.
class ModelSpace {
 public:
  static ModelSpace hyperbolic_plane(h2::Point base = {0.0, 1.0}, Ray ray = {}) {
    h2::check_point(base);
    ModelSpace s;
    s.kind_ = ModelKind::h2;
    s.h2_base_ = base;
    s.ray_ = ray;
    return s;
  }

  static ModelSpace metric_tree(tree::MetricTree t, Ray ray = {}) {
    ModelSpace s;
    s.kind_ = ModelKind::tree;
    s.tree_ = std::make_shared<const tree::MetricTree>(std::move(t));
    s.ray_ = ray;
    return s;
  }

  ModelKind kind() const noexcept { return kind_; }
  const Ray& ray() const noexcept { return ray_; }
  const tree::MetricTree& tree() const { return *tree_; }
  const h2::Point& h2_base() const noexcept { return h2_base_; }

  ModelPoint basepoint() const {
    if (kind_ == ModelKind::h2) return h2_base_;
    return tree::Point{tree::Node{tree_->root()}};
  }

  void check_point(const ModelPoint& p) const {
    if (kind_ == ModelKind::h2) {
      const auto* q = std::get_if<h2::Point>(&p);
      if (!q) throw Error(ErrorKind::PointOutsideDomain, "tree point given to the hyperbolic plane");
      h2::check_point(*q);
    } else {
      const auto* q = std::get_if<tree::Point>(&p);
      if (!q) throw Error(ErrorKind::PointOutsideDomain, "half-plane point given to a tree");
      tree_->check_point(*q);
    }
  }

  double distance(const ModelPoint& p, const ModelPoint& q) const {
    check_point(p);
    check_point(q);
    if (kind_ == ModelKind::h2) return h2::distance(std::get<h2::Point>(p), std::get<h2::Point>(q));
    return tree_->distance(std::get<tree::Point>(p), std::get<tree::Point>(q));
  }

  /// Point w on the geodesic from p to q with d(p, w) = s.
  ModelPoint geodesic_point(const ModelPoint& p, const ModelPoint& q, double s) const {
    const double total = distance(p, q);
    if (!(s >= 0.0) || s > total * (1.0 + 1e-12) + 1e-12) {
      throw Error(ErrorKind::ParameterOutOfRange,
                  "s = " + std::to_string(s) + " outside [0, " + std::to_string(total) + "]");
    }
    s = std::min(s, total);
    if (kind_ == ModelKind::h2) {
      if (s == total) return q;
      return h2::geodesic_point(std::get<h2::Point>(p), std::get<h2::Point>(q), s);
    }
    return tree_->geodesic_point(std::get<tree::Point>(p), std::get<tree::Point>(q), s);
  }

  /// Point at distance r from the basepoint, direction fixed by the seed.
  ModelPoint radial_point(double r, std::uint64_t direction_seed) const {
    if (!(r >= 0.0)) throw Error(ErrorKind::ParameterOutOfRange, "negative radius");
    if (kind_ == ModelKind::tree) return tree::Point{tree_->point_at_depth(r, direction_seed)};
    if (r == 0.0) return h2_base_;
    const double angle = 2.0 * std::numbers::pi * unit_from_bits(mix_seed(direction_seed));
    return h2::exp_at(h2_base_, angle, r);
  }

  /// Largest admissible radius for radial_point.
  double max_radius() const {
    return kind_ == ModelKind::tree ? tree_->eccentricity() : std::numeric_limits<double>::infinity();
  }

  /// Parameter bound of the designated ray (trees end at the ray's leaf).
  double ray_bound(const Ray& ray) const {
    return kind_ == ModelKind::tree ? std::min(ray.t_max, tree_->ray_length()) : ray.t_max;
  }

  ModelPoint ray_point(double t) const {
    if (kind_ == ModelKind::tree) return tree::Point{tree_->ray_point(t)};
    return h2::Point{h2_base_.x, h2_base_.y * std::exp(t)};
  }

  /// Closed-form Busemann value of the designated ray (log-height in the
  /// half-plane, projection formula in trees).
  double busemann_exact(const ModelPoint& p) const {
    check_point(p);
    if (kind_ == ModelKind::h2) return h2::vertical_busemann(h2_base_, std::get<h2::Point>(p));
    return tree_->busemann_exact(std::get<tree::Point>(p));
  }

  /// Range of Busemann values attained in the space.
  std::pair<double, double> busemann_range() const {
    if (kind_ == ModelKind::h2) {
      return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }
    return {tree_->min_busemann(), tree_->max_busemann()};
  }

  /// A point whose Busemann value is exactly `level`, lateral placement from
  /// the seed. Half-plane points sit on the horocycle at a lateral geodesic
  /// offset of up to `lateral_cap`.
  ModelPoint horosphere_point(double level, std::uint64_t seed, double lateral_cap) const {
    if (kind_ == ModelKind::tree) return tree::Point{tree_->point_at_level(level, seed)};
    Rng rng(seed);
    const double lateral = rng.uniform(-lateral_cap, lateral_cap);
    return h2::horocycle_point(h2_base_, level, lateral);
  }

  /// Point on the geodesic from p toward the basepoint at distance `level`
  /// from the basepoint.
  ModelPoint toward_base(const ModelPoint& p, double level) const {
    const ModelPoint z = basepoint();
    return geodesic_point(z, p, std::clamp(level, 0.0, distance(z, p)));
  }

  /// Point on the geodesic from p toward the end of the designated ray whose
  /// Busemann value is `level` (<= the value at p). Trees stop at the ray's leaf.
  ModelPoint toward_end(const ModelPoint& p, double level) const {
    check_point(p);
    if (kind_ == ModelKind::h2) {
      const auto& q = std::get<h2::Point>(p);
      return h2::Point{q.x, h2_base_.y * std::exp(-level)};
    }
    const tree::Point leaf = tree::Node{tree_->ray_leaf()};
    const auto& q = std::get<tree::Point>(p);
    const double span = tree_->distance(q, leaf);
    const double move = std::clamp(tree_->busemann_exact(q) - level, 0.0, span);
    return tree::Point{tree_->geodesic_point(q, leaf, move)};
  }

 private:
  ModelKind kind_ = ModelKind::h2;
  h2::Point h2_base_{0.0, 1.0};
  std::shared_ptr<const tree::MetricTree> tree_;
  Ray ray_;
};

inline double model_distance(const ModelSpace& space, const ModelPoint& p, const ModelPoint& q) {
  return space.distance(p, q);
}

inline ModelPoint model_geodesic_point(const ModelSpace& space, const ModelPoint& p, const ModelPoint& q,
                                       double s) {
  return space.geodesic_point(p, q, s);
}

inline ModelPoint radial_point(const ModelSpace& space, double r, std::uint64_t direction_seed) {
  return space.radial_point(r, direction_seed);
}

/// Truncated liminf: min over t in {0, h, 2h, ..., T} of d(p, gamma(t)) - t,
/// where T is the ray's bound (the grid always ends exactly at T).
inline BusemannValue busemann(const ModelSpace& space, const Ray& ray, const ModelPoint& p) {
  if (!(ray.step > 0.0) || !(ray.t_max >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "Busemann grid needs step > 0 and t_max >= 0");
  }
  const double bound = space.ray_bound(ray);
  const auto steps = static_cast<std::size_t>(std::floor(bound / ray.step + 1e-9));
  double best = std::numeric_limits<double>::infinity();
  double previous = std::numeric_limits<double>::infinity();
  double last = std::numeric_limits<double>::infinity();
  auto visit = [&](double t) {
    const double v = space.distance(p, space.ray_point(t)) - t;
    previous = last;
    last = v;
    best = std::min(best, v);
  };
  for (std::size_t k = 0; k <= steps; ++k) visit(std::min(bound, static_cast<double>(k) * ray.step));
  if (static_cast<double>(steps) * ray.step < bound) visit(bound);
  BusemannValue out;
  out.value = best;
  out.last_decrement = std::isfinite(previous) ? previous - last : 0.0;
  return out;
}

inline BusemannValue busemann(const ModelSpace& space, const ModelPoint& p) {
  return busemann(space, space.ray(), p);
}

}  // namespace bandlab
