#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bandlab/errors.hpp"
#include "bandlab/random.hpp"

namespace bandlab::tree {

struct Node {
  std::size_t id = 0;
  friend bool operator==(const Node&, const Node&) = default;
};

/// Point inside an edge, `offset` measured from the edge's first endpoint.
struct EdgePoint {
  std::size_t edge = 0;
  double offset = 0.0;
  friend bool operator==(const EdgePoint&, const EdgePoint&) = default;
};

using Point = std::variant<Node, EdgePoint>;

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double length = 0.0;
};

struct LabeledEdge {
  std::string u;
  std::string v;
  double length = 0.0;
};

/// Finite weighted tree, rooted, with a designated root-to-leaf ray used for
/// Busemann functions. The ray runs to the deepest leaf (smallest id on ties).
class MetricTree {
 public:
  static MetricTree build(const std::vector<LabeledEdge>& edges, const std::string& root);

  std::size_t node_count() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t root() const noexcept { return root_; }
  double depth(std::size_t node) const { return depth_[node]; }
  /// Largest distance from the root.
  double eccentricity() const noexcept { return eccentricity_; }
  std::size_t ray_leaf() const noexcept { return ray_leaf_; }
  double ray_length() const noexcept { return depth_[ray_leaf_]; }

  std::size_t node_id(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw Error(ErrorKind::PointOutsideDomain, "unknown tree node '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  void check_point(const Point& p) const {
    if (const auto* n = std::get_if<Node>(&p)) {
      if (n->id >= node_count()) throw Error(ErrorKind::PointOutsideDomain, "node id out of range");
      return;
    }
    const auto& e = std::get<EdgePoint>(p);
    if (e.edge >= edges_.size()) throw Error(ErrorKind::PointOutsideDomain, "edge index out of range");
    if (!(e.offset >= 0.0) || e.offset > edges_[e.edge].length) {
      throw Error(ErrorKind::PointOutsideDomain,
                  "offset " + std::to_string(e.offset) + " outside edge " + std::to_string(e.edge));
    }
  }

  double node_distance(std::size_t a, std::size_t b) const {
    return depth_[a] + depth_[b] - 2.0 * depth_[lca(a, b)];
  }

  std::size_t lca(std::size_t a, std::size_t b) const {
    while (hops_[a] > hops_[b]) a = parent_[a];
    while (hops_[b] > hops_[a]) b = parent_[b];
    while (a != b) {
      a = parent_[a];
      b = parent_[b];
    }
    return a;
  }

  double distance(const Point& p, const Point& q) const {
    check_point(p);
    check_point(q);
    const auto* ep = std::get_if<EdgePoint>(&p);
    const auto* eq = std::get_if<EdgePoint>(&q);
    if (ep && eq && ep->edge == eq->edge) return std::abs(ep->offset - eq->offset);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, da] : exits(p))
      for (const auto& [b, db] : exits(q)) best = std::min(best, da + node_distance(a, b) + db);
    return best;
  }

  /// Point at distance s from p along the unique path to q.
  Point geodesic_point(const Point& p, const Point& q, double s) const;

  /// Every point at distance r from the root, choosing one by the seed.
  Point point_at_depth(double r, std::uint64_t seed) const;

  /// Point on the designated ray at parameter t in [0, ray_length()].
  Point ray_point(double t) const;

  /// Busemann value along the designated ray via the projection formula:
  /// q - s for a point at distance q from the ray, projecting to parameter s.
  double busemann_exact(const Point& p) const {
    check_point(p);
    if (const auto* n = std::get_if<Node>(&p)) return node_busemann_[n->id];
    const auto& e = std::get<EdgePoint>(p);
    const Edge& edge = edges_[e.edge];
    return node_busemann_[edge.u] + (node_busemann_[edge.v] - node_busemann_[edge.u]) * (e.offset / edge.length);
  }

  double min_busemann() const { return -ray_length(); }
  double max_busemann() const { return *std::max_element(node_busemann_.begin(), node_busemann_.end()); }

  /// Every point with Busemann value `level`, choosing one by the seed.
  Point point_at_level(double level, std::uint64_t seed) const;

  /// Distance of a point to the root.
  double radius(const Point& p) const { return distance(p, Node{root_}); }

 private:
  std::vector<std::pair<std::size_t, double>> exits(const Point& p) const {
    if (const auto* n = std::get_if<Node>(&p)) return {{n->id, 0.0}};
    const auto& e = std::get<EdgePoint>(p);
    const Edge& edge = edges_[e.edge];
    return {{edge.u, e.offset}, {edge.v, edge.length - e.offset}};
  }

  /// Edge point on `edge` at distance `from_node` from endpoint `node`.
  Point on_edge(std::size_t edge, std::size_t node, double from_node) const {
    const Edge& e = edges_[edge];
    const double offset = node == e.u ? from_node : e.length - from_node;
    return EdgePoint{edge, std::clamp(offset, 0.0, e.length)};
  }

  std::size_t edge_between(std::size_t a, std::size_t b) const {
    if (parent_[a] == b) return parent_edge_[a];
    return parent_edge_[b];
  }

  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  std::size_t root_ = 0;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> parent_edge_;
  std::vector<double> depth_;
  std::vector<std::size_t> hops_;
  std::vector<double> node_busemann_;
  double eccentricity_ = 0.0;
  std::size_t ray_leaf_ = 0;
};

inline MetricTree MetricTree::build(const std::vector<LabeledEdge>& labeled, const std::string& root) {
  MetricTree t;
  std::map<std::string, std::size_t> ids;
  auto intern = [&](const std::string& label) {
    const auto [it, inserted] = ids.emplace(label, t.labels_.size());
    if (inserted) t.labels_.push_back(label);
    return it->second;
  };
  for (const auto& e : labeled) {
    if (!std::isfinite(e.length) || e.length <= 0.0) {
      throw Error(ErrorKind::InvalidTree, "edge " + e.u + "-" + e.v + " has non-positive length");
    }
    if (e.u == e.v) throw Error(ErrorKind::InvalidTree, "self-loop at " + e.u);
    t.edges_.push_back({intern(e.u), intern(e.v), e.length});
  }
  if (labeled.empty()) intern(root);
  const auto root_it = ids.find(root);
  if (root_it == ids.end()) throw Error(ErrorKind::InvalidTree, "root '" + root + "' is not a node");
  t.root_ = root_it->second;

  const std::size_t n = t.labels_.size();
  if (t.edges_.size() != n - 1) throw Error(ErrorKind::InvalidTree, "edge count must be node count - 1");

  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t i = 0; i < t.edges_.size(); ++i) {
    incident[t.edges_[i].u].push_back(i);
    incident[t.edges_[i].v].push_back(i);
  }
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  t.parent_.assign(n, kNone);
  t.parent_edge_.assign(n, kNone);
  t.depth_.assign(n, 0.0);
  t.hops_.assign(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{t.root_};
  seen[t.root_] = true;
  t.parent_[t.root_] = t.root_;
  std::size_t visited = 0;
  while (!stack.empty()) {
    const std::size_t a = stack.back();
    stack.pop_back();
    ++visited;
    for (std::size_t ei : incident[a]) {
      const Edge& e = t.edges_[ei];
      const std::size_t b = e.u == a ? e.v : e.u;
      if (ei == t.parent_edge_[a]) continue;
      if (seen[b]) throw Error(ErrorKind::InvalidTree, "cycle through node " + t.labels_[b]);
      seen[b] = true;
      t.parent_[b] = a;
      t.parent_edge_[b] = ei;
      t.depth_[b] = t.depth_[a] + e.length;
      t.hops_[b] = t.hops_[a] + 1;
      stack.push_back(b);
    }
  }
  if (visited != n) throw Error(ErrorKind::InvalidTree, "tree is not connected");

  for (std::size_t i = 0; i < n; ++i) {
    if (t.depth_[i] > t.depth_[t.ray_leaf_]) t.ray_leaf_ = i;
  }
  t.eccentricity_ = t.depth_[t.ray_leaf_];
  t.node_busemann_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.node_busemann_[i] = t.depth_[i] - 2.0 * t.depth_[t.lca(i, t.ray_leaf_)];
  }
  return t;
}

inline Point MetricTree::geodesic_point(const Point& p, const Point& q, double s) const {
  const double total = distance(p, q);
  if (!(s >= 0.0) || s > total + 1e-12) {
    throw Error(ErrorKind::ParameterOutOfRange,
                "s = " + std::to_string(s) + " outside [0, " + std::to_string(total) + "]");
  }
  if (s <= 0.0) return p;
  const auto* ep = std::get_if<EdgePoint>(&p);
  const auto* eq = std::get_if<EdgePoint>(&q);
  if (ep && eq && ep->edge == eq->edge) {
    const double dir = eq->offset >= ep->offset ? 1.0 : -1.0;
    return EdgePoint{ep->edge, std::clamp(ep->offset + dir * s, 0.0, edges_[ep->edge].length)};
  }
  // Pick the exit/entry nodes realizing the distance.
  std::size_t a_best = 0, b_best = 0;
  double da_best = 0.0, best = std::numeric_limits<double>::infinity();
  for (const auto& [a, da] : exits(p)) {
    for (const auto& [b, db] : exits(q)) {
      const double len = da + node_distance(a, b) + db;
      if (len < best) {
        best = len;
        a_best = a;
        b_best = b;
        da_best = da;
      }
    }
  }
  if (s <= da_best) {
    const auto& e = std::get<EdgePoint>(p);
    // Moving from p toward endpoint a_best.
    return on_edge(e.edge, a_best, da_best - s);
  }
  double walked = da_best;
  // Node path a_best -> lca -> b_best.
  const std::size_t m = lca(a_best, b_best);
  std::vector<std::size_t> path;
  for (std::size_t x = a_best; x != m; x = parent_[x]) path.push_back(x);
  path.push_back(m);
  std::vector<std::size_t> down;
  for (std::size_t x = b_best; x != m; x = parent_[x]) down.push_back(x);
  path.insert(path.end(), down.rbegin(), down.rend());
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const std::size_t edge = edge_between(path[i], path[i + 1]);
    const double len = edges_[edge].length;
    if (s <= walked + len) return on_edge(edge, path[i], s - walked);
    walked += len;
  }
  if (const auto* e = std::get_if<EdgePoint>(&q)) {
    return on_edge(e->edge, b_best, std::min(s - walked, best - walked));
  }
  return q;
}

inline Point MetricTree::point_at_depth(double r, std::uint64_t seed) const {
  if (!(r >= 0.0)) throw Error(ErrorKind::ParameterOutOfRange, "negative radius");
  if (r > eccentricity_ + 1e-12) {
    throw Error(ErrorKind::RadiusExceedsTree,
                "radius " + std::to_string(r) + " exceeds eccentricity " + std::to_string(eccentricity_));
  }
  if (r == 0.0) return Node{root_};
  std::vector<std::size_t> candidates;
  for (std::size_t v = 0; v < node_count(); ++v) {
    if (v == root_) continue;
    if (depth_[parent_[v]] < r && r <= depth_[v] + 1e-12) candidates.push_back(v);
  }
  const std::size_t child = candidates[mix_seed(seed) % candidates.size()];
  const std::size_t par = parent_[child];
  return on_edge(parent_edge_[child], par, std::min(r - depth_[par], edges_[parent_edge_[child]].length));
}

inline Point MetricTree::ray_point(double t) const {
  if (!(t >= 0.0) || t > ray_length() + 1e-12) {
    throw Error(ErrorKind::ParameterOutOfRange, "ray parameter outside [0, ray length]");
  }
  if (t == 0.0) return Node{root_};
  for (std::size_t v = ray_leaf_; v != root_; v = parent_[v]) {
    const std::size_t par = parent_[v];
    if (depth_[par] < t) return on_edge(parent_edge_[v], par, std::min(t - depth_[par], depth_[v] - depth_[par]));
  }
  return Node{root_};
}

inline Point MetricTree::point_at_level(double level, std::uint64_t seed) const {
  constexpr double kSlack = 1e-12;
  if (level < min_busemann() - kSlack || level > max_busemann() + kSlack) {
    throw Error(ErrorKind::ParameterOutOfRange, "Busemann level " + std::to_string(level) + " not attained");
  }
  if (edges_.empty()) return Node{root_};
  std::vector<std::size_t> candidates;
  for (std::size_t v = 0; v < node_count(); ++v) {
    if (v == root_) continue;
    const double bp = node_busemann_[parent_[v]];
    const double bv = node_busemann_[v];
    if (std::min(bp, bv) - kSlack <= level && level <= std::max(bp, bv) + kSlack) candidates.push_back(v);
  }
  const std::size_t child = candidates[mix_seed(seed) % candidates.size()];
  const std::size_t par = parent_[child];
  const double len = edges_[parent_edge_[child]].length;
  return on_edge(parent_edge_[child], par, std::clamp(std::abs(level - node_busemann_[par]), 0.0, len));
}

}  // namespace bandlab::tree
