#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bandlab/errors.hpp"
#include "bandlab/parallel.hpp"

namespace bandlab {

/// Absolute tolerance for metric-axiom and identity checks.
inline constexpr double kMetricTolerance = 1e-9;

/// Immutable finite (pseudo)metric space with a designated basepoint.
/// Only obtainable through validation, so every instance satisfies the
/// metric axioms within kMetricTolerance and is exactly symmetric.
class FiniteMetricSpace {
 public:
  using Matrix = std::vector<std::vector<double>>;

  static FiniteMetricSpace validate(const Matrix& rows, std::vector<std::string> labels = {},
                                    std::size_t base = 0);

  /// Builds the matrix from a pairwise distance callback (upper triangle only)
  /// and validates it.
  static FiniteMetricSpace from_distance(std::size_t n,
                                         const std::function<double(std::size_t, std::size_t)>& dist,
                                         std::vector<std::string> labels = {}, std::size_t base = 0);

  std::size_t size() const noexcept { return n_; }
  std::size_t base() const noexcept { return base_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return dist_[i * n_ + j]; }
  double distance(std::size_t i, std::size_t j) const {
    check_index(i);
    check_index(j);
    return (*this)(i, j);
  }

  void check_index(std::size_t i) const {
    if (i >= n_) {
      throw Error(ErrorKind::IndexOutOfRange,
                  "index " + std::to_string(i) + " outside space of size " + std::to_string(n_), {i});
    }
  }

  Matrix rows() const {
    Matrix out(n_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
    return out;
  }

 private:
  FiniteMetricSpace(std::size_t n, std::vector<double> dist, std::vector<std::string> labels, std::size_t base)
      : n_(n), dist_(std::move(dist)), labels_(std::move(labels)), base_(base) {}

  std::size_t n_ = 0;
  std::vector<double> dist_;
  std::vector<std::string> labels_;
  std::size_t base_ = 0;
};

inline FiniteMetricSpace validate_metric(const FiniteMetricSpace::Matrix& rows,
                                         std::vector<std::string> labels = {}, std::size_t base = 0) {
  return FiniteMetricSpace::validate(rows, std::move(labels), base);
}

inline FiniteMetricSpace FiniteMetricSpace::validate(const Matrix& rows, std::vector<std::string> labels,
                                                     std::size_t base) {
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw Error(ErrorKind::NotSquare,
                  "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " entries, expected " + std::to_string(n),
                  {i});
    }
  }
  if (n == 0) throw Error(ErrorKind::EmptySelection, "distance matrix has no points");
  if (base >= n) throw Error(ErrorKind::IndexOutOfRange, "base index outside the space", {base});
  if (labels.empty()) {
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  } else if (labels.size() != n) {
    throw Error(ErrorKind::LengthMismatch, "label count does not match matrix size");
  }

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = rows[i][j];
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFiniteDistance, "non-finite entry", {i, j});
      }
      if (i == j) {
        if (std::abs(v) > kMetricTolerance) {
          throw Error(ErrorKind::NonzeroDiagonal, "diagonal entry " + std::to_string(v), {i, i});
        }
        continue;
      }
      if (v < -kMetricTolerance) {
        throw Error(ErrorKind::NegativeDistance, "entry " + std::to_string(v), {std::min(i, j), std::max(i, j)});
      }
      if (i < j && std::abs(v - rows[j][i]) > kMetricTolerance) {
        throw Error(ErrorKind::AsymmetricMatrix, "d(i,j) != d(j,i)", {i, j});
      }
    }
  }
  // The upper triangle is authoritative; the stored matrix is exactly symmetric.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max(0.0, rows[i][j]);
      dist[i * n + j] = v;
      dist[j * n + i] = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = dist[i * n + j];
      for (std::size_t k = 0; k < n; ++k) {
        if (dij > dist[i * n + k] + dist[k * n + j] + kMetricTolerance) {
          throw Error(ErrorKind::TriangleViolation,
                      "d(" + std::to_string(i) + "," + std::to_string(j) + ") exceeds the path through " +
                          std::to_string(k),
                      {i, k, j});
        }
      }
    }
  }
  return FiniteMetricSpace(n, std::move(dist), std::move(labels), base);
}

inline FiniteMetricSpace FiniteMetricSpace::from_distance(
    std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist,
    std::vector<std::string> labels, std::size_t base) {
  Matrix rows(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      rows[i][j] = dist(i, j);
      rows[j][i] = rows[i][j];
    }
  }
  return validate(rows, std::move(labels), base);
}

// ---------------------------------------------------------------------------
// Gromov products

struct GromovTriple {
  double a = 0.0;  // (y.z)_x
  double b = 0.0;  // (x.z)_y
  double c = 0.0;  // (x.y)_z
};

/// (y.z)_x = 1/2 [d(y,x) + d(z,x) - d(y,z)], clamped into its a-priori range
/// [0, min(d(y,x), d(z,x))] to absorb rounding.
inline double gromov_product(const FiniteMetricSpace& space, std::size_t y, std::size_t z, std::size_t x) {
  const double dyx = space.distance(y, x);
  const double dzx = space.distance(z, x);
  const double dyz = space.distance(y, z);
  const double raw = 0.5 * (dyx + dzx - dyz);
  return std::clamp(raw, 0.0, std::min(dyx, dzx));
}

/// Gromov product from three raw distances, for spaces that are not
/// materialized as matrices.
inline double gromov_product(double d_yx, double d_zx, double d_yz) {
  return std::clamp(0.5 * (d_yx + d_zx - d_yz), 0.0, std::min(d_yx, d_zx));
}

inline GromovTriple triple_decomposition(const FiniteMetricSpace& space, std::size_t x, std::size_t y,
                                         std::size_t z) {
  return {gromov_product(space, y, z, x), gromov_product(space, x, z, y), gromov_product(space, x, y, z)};
}

// ---------------------------------------------------------------------------
// Four-point defects

/// Amount by which d(x,y)+d(z,w) exceeds the larger of the other two pairings,
/// floored at zero. This is the ordered form (without the 2*delta term).
inline double ordered_defect(const FiniteMetricSpace& s, std::size_t x, std::size_t y, std::size_t z,
                             std::size_t w) {
  const double lhs = s(x, y) + s(z, w);
  const double rhs = std::max(s(x, z) + s(y, w), s(x, w) + s(y, z));
  return std::max(0.0, lhs - rhs);
}

/// Largest pairing sum minus the second largest: the maximum of
/// ordered_defect over all orderings of the four points.
constexpr double pairing_excess(double s1, double s2, double s3) noexcept {
  const double hi = std::max({s1, s2, s3});
  const double lo = std::min({s1, s2, s3});
  const double mid = s1 + s2 + s3 - hi - lo;
  return std::max(0.0, hi - mid);
}

inline double quadruple_defect(const FiniteMetricSpace& s, std::size_t x, std::size_t y, std::size_t z,
                               std::size_t w) {
  return pairing_excess(s(x, y) + s(z, w), s(x, z) + s(y, w), s(x, w) + s(y, z));
}

/// delta together with the quadruple (x, y, w, z) that attains it. For the
/// three-point constant the last slot is the base.
struct DeltaReport {
  double delta = 0.0;
  std::array<std::size_t, 4> witness{0, 0, 0, 0};
};

namespace detail {

inline DeltaReport better_report(const DeltaReport& a, const DeltaReport& b) {
  if (b.delta > a.delta) return b;
  if (a.delta > b.delta) return a;
  return b.witness < a.witness ? b : a;
}

}  // namespace detail

/// Least delta for which the four-point condition holds on the whole space.
/// Enumerates unordered 4-subsets and the three pairings once each. Ties go to
/// the lexicographically smallest subset; with n < 4 the witness is (0,0,0,0).
inline DeltaReport four_point_delta(const FiniteMetricSpace& s, Parallelism par = {}) {
  const std::size_t n = s.size();
  DeltaReport init;
  if (n < 4) return init;
  init.witness = {0, 1, 2, 3};
  init.delta = 0.5 * quadruple_defect(s, 0, 1, 2, 3);
  return deterministic_reduce(
      n, par, init,
      [&](std::size_t i, DeltaReport& best) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double dij = s(i, j);
          for (std::size_t k = j + 1; k < n; ++k) {
            const double dik = s(i, k);
            const double djk = s(j, k);
            for (std::size_t l = k + 1; l < n; ++l) {
              const double delta = 0.5 * pairing_excess(dij + s(k, l), dik + s(j, l), s(i, l) + djk);
              if (delta > best.delta || (delta == best.delta && std::array{i, j, k, l} < best.witness)) {
                best.delta = delta;
                best.witness = {i, j, k, l};
              }
            }
          }
        }
      },
      detail::better_report);
}

/// Least delta~ with d(x,y)+d(w,z) <= max{d(x,w)+d(y,z), d(x,z)+d(y,w)} + 2 delta~
/// for all x, y, w and z fixed at `base`. Witness is (x, y, w, base), x<y<w.
inline DeltaReport three_point_delta(const FiniteMetricSpace& s, std::size_t base, Parallelism par = {}) {
  s.check_index(base);
  const std::size_t n = s.size();
  DeltaReport init;
  init.witness = {base, base, base, base};
  if (n < 4) return init;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < n; ++i)
    if (i != base) others.push_back(i);
  const std::size_t m = others.size();
  init.witness = {others[0], others[1], others[2], base};
  init.delta = 0.5 * quadruple_defect(s, others[0], others[1], others[2], base);
  return deterministic_reduce(
      m, par, init,
      [&](std::size_t a, DeltaReport& best) {
        const std::size_t x = others[a];
        for (std::size_t b = a + 1; b < m; ++b) {
          const std::size_t y = others[b];
          const double dxy = s(x, y);
          const double dyz = s(y, base);
          for (std::size_t c = b + 1; c < m; ++c) {
            const std::size_t w = others[c];
            const double delta =
                0.5 * pairing_excess(dxy + s(w, base), s(x, w) + dyz, s(x, base) + s(y, w));
            if (delta > best.delta || (delta == best.delta && std::array{x, y, w, base} < best.witness)) {
              best.delta = delta;
              best.witness = {x, y, w, base};
            }
          }
        }
      },
      detail::better_report);
}

/// Calls `visit(i, j, k, l, defect)` for every 4-subset in lexicographic order.
template <class Visit>
void for_each_quadruple(const FiniteMetricSpace& s, Visit&& visit) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) visit(i, j, k, l, quadruple_defect(s, i, j, k, l));
}

/// Restriction to the selected indices. The base is kept when selected,
/// otherwise the first selected point becomes the base.
inline FiniteMetricSpace subspace_restrict(const FiniteMetricSpace& s, std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorKind::EmptySelection, "no indices selected");
  for (std::size_t i : indices) s.check_index(i);
  const std::size_t m = indices.size();
  std::size_t base = 0;
  const auto found = std::find(indices.begin(), indices.end(), s.base());
  if (found != indices.end()) base = static_cast<std::size_t>(found - indices.begin());
  std::vector<std::string> labels;
  labels.reserve(m);
  for (std::size_t i : indices) labels.push_back(s.labels()[i]);
  return FiniteMetricSpace::from_distance(
      m, [&](std::size_t a, std::size_t b) { return s(indices[a], indices[b]); }, std::move(labels), base);
}

}  // namespace bandlab
