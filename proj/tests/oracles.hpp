#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's delta, distance or geodesic code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "bandlab/metric_core.hpp"
#include "bandlab/metric_tree.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Four-point constant over all ordered quadruples, repeats included, using
/// the Gromov-product form min((x.z)_w, (y.z)_w) - (x.y)_w.
inline double naive_four_point(const Matrix& d) {
  const std::size_t n = d.size();
  auto gp = [&](std::size_t a, std::size_t b, std::size_t w) { return 0.5 * (d[a][w] + d[b][w] - d[a][b]); };
  double best = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        for (std::size_t w = 0; w < n; ++w) best = std::max(best, std::min(gp(x, z, w), gp(y, z, w)) - gp(x, y, w));
  return best;
}

/// Three-point constant at `base` over all ordered triples.
inline double naive_three_point(const Matrix& d, std::size_t base) {
  const std::size_t n = d.size();
  auto gp = [&](std::size_t a, std::size_t b) { return 0.5 * (d[a][base] + d[b][base] - d[a][b]); };
  double best = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t w = 0; w < n; ++w) best = std::max(best, std::min(gp(x, w), gp(y, w)) - gp(x, y));
  return best;
}

inline Matrix rows_of(const bandlab::FiniteMetricSpace& s) {
  Matrix m(s.size(), std::vector<double>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) m[i][j] = s(i, j);
  return m;
}

inline Matrix euclidean_points(std::mt19937_64& rng, std::size_t n, std::size_t dim, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& c : p) c = u(rng);
  Matrix d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
      d[i][j] = std::sqrt(s);
    }
  return d;
}

/// All-pairs shortest paths.
inline Matrix floyd_warshall(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  const double inf = std::numeric_limits<double>::infinity();
  Matrix d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& [u, v, w] : edges) {
    d[u][v] = std::min(d[u][v], w);
    d[v][u] = std::min(d[v][u], w);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

/// Shortest-path metric of a random connected graph (not a tree in general).
inline Matrix random_graph_metric(std::mt19937_64& rng, std::size_t n, double extra_edge_prob = 0.3) {
  std::uniform_real_distribution<double> w(0.5, 5.0), coin(0.0, 1.0);
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng), i, w(rng));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng) < extra_edge_prob) edges.emplace_back(i, j, w(rng));
  return floyd_warshall(n, edges);
}

struct RandomTree {
  std::vector<bandlab::tree::LabeledEdge> labeled;
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;  // node i is label "n<i>"
  std::size_t nodes = 0;
};

inline RandomTree random_tree(std::mt19937_64& rng, std::size_t nodes, double lo = 0.5, double hi = 3.0) {
  std::uniform_real_distribution<double> w(lo, hi);
  RandomTree t;
  t.nodes = nodes;
  for (std::size_t i = 1; i < nodes; ++i) {
    const std::size_t p = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    const double len = w(rng);
    t.edges.emplace_back(p, i, len);
    t.labeled.push_back({"n" + std::to_string(p), "n" + std::to_string(i), len});
  }
  return t;
}

/// Distance between two points of a metric tree by subdividing the edges
/// that carry them and running Dijkstra on the refined graph.
inline double tree_point_distance(const bandlab::tree::MetricTree& t, const bandlab::tree::Point& a,
                                  const bandlab::tree::Point& b) {
  using namespace bandlab::tree;
  const std::size_t n = t.node_count();
  std::map<std::size_t, std::vector<std::pair<double, std::size_t>>> marks;  // edge -> (offset, vertex)
  std::size_t next = n;
  auto vertex_of = [&](const Point& p) -> std::size_t {
    if (const auto* node = std::get_if<Node>(&p)) return node->id;
    const auto& e = std::get<EdgePoint>(p);
    marks[e.edge].push_back({e.offset, next});
    return next++;
  };
  const std::size_t va = vertex_of(a), vb = vertex_of(b);
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(next);
  auto link = [&](std::size_t u, std::size_t v, double w) {
    adj[u].push_back({v, w});
    adj[v].push_back({u, w});
  };
  for (std::size_t e = 0; e < t.edges().size(); ++e) {
    const Edge& edge = t.edges()[e];
    auto it = marks.find(e);
    if (it == marks.end()) {
      link(edge.u, edge.v, edge.length);
      continue;
    }
    auto pts = it->second;
    std::sort(pts.begin(), pts.end());
    std::size_t prev = edge.u;
    double prev_off = 0.0;
    for (const auto& [off, v] : pts) {
      link(prev, v, off - prev_off);
      prev = v;
      prev_off = off;
    }
    link(prev, edge.v, edge.length - prev_off);
  }
  std::vector<double> dist(next, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[va] = 0.0;
  pq.push({0.0, va});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.push({dist[v], v});
      }
    }
  }
  return dist[vb];
}

/// Hyperbolic length of the geodesic arc from p to q in the upper half-plane
/// by composite Simpson integration of |dz| / y along the arc.
inline double h2_length_integral(double px, double py, double qx, double qy, int panels = 20000) {
  auto simpson = [&](auto&& f, double a, double b) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  if (std::abs(px - qx) < 1e-13) {
    // Vertical segment: integrate in log height to keep the integrand smooth.
    return std::abs(simpson([](double) { return 1.0; }, std::log(py), std::log(qy)));
  }
  const double c = ((qx * qx + qy * qy) - (px * px + py * py)) / (2.0 * (qx - px));
  const double tp = std::atan2(py, px - c), tq = std::atan2(qy, qx - c);
  // On the circle of radius R about (c, 0): |dz| = R d(theta), y = R sin(theta).
  return std::abs(simpson([](double th) { return 1.0 / std::sin(th); }, tp, tq));
}

}  // namespace oracle
