#pragma once

#include <cctype>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandlab/band.hpp"
#include "bandlab/errors.hpp"
#include "bandlab/metric_core.hpp"
#include "bandlab/model_space.hpp"
#include "bandlab/rough.hpp"

namespace bandlab::io {

using json = nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
  out << text;
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, what + ": " + e.what());
  }
}

/// Shortest decimal that round-trips a double.
inline std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// Distance matrices

inline FiniteMetricSpace::Matrix parse_matrix_csv(const std::string& text) {
  FiniteMetricSpace::Matrix rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline FiniteMetricSpace parse_matrix_json(const json& j) {
  try {
    const auto rows = j.at("dist").get<FiniteMetricSpace::Matrix>();
    std::vector<std::string> labels;
    if (j.contains("labels")) {
      for (const auto& l : j.at("labels")) labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    }
    const std::size_t base = j.value("base", std::size_t{0});
    return validate_metric(rows, std::move(labels), base);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("matrix JSON: ") + e.what());
  }
}

/// Reads the CSV form, or the JSON form when the text starts with '{'.
inline FiniteMetricSpace parse_matrix(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_matrix_json(parse_json(text, "matrix"));
  return validate_metric(parse_matrix_csv(text));
}

inline json matrix_to_json(const FiniteMetricSpace& s) {
  return {{"labels", s.labels()}, {"base", s.base()}, {"dist", s.rows()}};
}

inline std::string matrix_to_csv(const FiniteMetricSpace& s) {
  std::ostringstream out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) out << (j ? "," : "") << format_double(s(i, j));
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Model spaces and points

inline std::string label_of(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

/// {"edges": [[u, v, length], ...], "root": u}
inline tree::MetricTree parse_tree(const json& j) {
  try {
    std::vector<tree::LabeledEdge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw Error(ErrorKind::ParseError, "edge must be [u, v, length]");
      edges.push_back({label_of(e[0]), label_of(e[1]), e[2].get<double>()});
    }
    return tree::MetricTree::build(edges, label_of(j.at("root")));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("tree JSON: ") + e.what());
  }
}

inline Ray parse_ray(const json& j) {
  Ray ray;
  if (j.contains("ray")) {
    ray.t_max = j["ray"].value("t_max", ray.t_max);
    ray.step = j["ray"].value("step", ray.step);
  }
  return ray;
}

/// {"kind": "h2", "base": [x, y]} or {"kind": "tree", "edges": ..., "root": ...};
/// a tree may also be given by "file" pointing at a tree JSON document.
inline ModelSpace parse_model(const json& j, const std::string& dir = ".") {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const Ray ray = parse_ray(j);
    if (kind == "h2") {
      h2::Point base{0.0, 1.0};
      if (j.contains("base")) base = {j["base"].at(0).get<double>(), j["base"].at(1).get<double>()};
      return ModelSpace::hyperbolic_plane(base, ray);
    }
    if (kind == "tree") {
      if (j.contains("file")) {
        const std::string path = j["file"].get<std::string>();
        const std::string full = path.starts_with("/") ? path : dir + "/" + path;
        return ModelSpace::metric_tree(parse_tree(parse_json(read_file(full), full)), ray);
      }
      return ModelSpace::metric_tree(parse_tree(j), ray);
    }
    throw Error(ErrorKind::InvalidConfig, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("model spec: ") + e.what());
  }
}

inline json model_to_json(const ModelSpace& m) {
  json ray = {{"t_max", m.ray().t_max}, {"step", m.ray().step}};
  if (m.kind() == ModelKind::h2) return {{"kind", "h2"}, {"base", {m.h2_base().x, m.h2_base().y}}, {"ray", ray}};
  json edges = json::array();
  const auto& t = m.tree();
  for (const auto& e : t.edges()) edges.push_back({t.labels()[e.u], t.labels()[e.v], e.length});
  return {{"kind", "tree"}, {"edges", edges}, {"root", t.labels()[t.root()]}, {"ray", ray}};
}

inline json point_to_json(const ModelSpace& space, const ModelPoint& p) {
  if (const auto* q = std::get_if<h2::Point>(&p)) return json::array({q->x, q->y});
  const auto& tp = std::get<tree::Point>(p);
  if (const auto* n = std::get_if<tree::Node>(&tp)) return {{"node", space.tree().labels()[n->id]}};
  const auto& e = std::get<tree::EdgePoint>(tp);
  return {{"edge", e.edge}, {"offset", e.offset}};
}

inline ModelPoint point_from_json(const ModelSpace& space, const json& j) {
  try {
    ModelPoint p;
    if (space.kind() == ModelKind::h2) {
      p = h2::Point{j.at(0).get<double>(), j.at(1).get<double>()};
    } else if (j.contains("node")) {
      p = tree::Point{tree::Node{space.tree().node_id(label_of(j["node"]))}};
    } else {
      p = tree::Point{tree::EdgePoint{j.at("edge").get<std::size_t>(), j.at("offset").get<double>()}};
    }
    space.check_point(p);
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("point: ") + e.what());
  }
}

/// Half-plane point list, one "x,y" row per point.
inline std::vector<h2::Point> parse_h2_csv(const std::string& text) {
  std::vector<h2::Point> out;
  for (const auto& row : parse_matrix_csv(text)) {
    if (row.size() != 2) throw Error(ErrorKind::ParseError, "H2 rows must be x,y");
    h2::Point p{row[0], row[1]};
    h2::check_point(p);
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bands

inline AnchorKind parse_anchor(const std::string& s) {
  if (s == "radial") return AnchorKind::radial;
  if (s == "busemann") return AnchorKind::busemann;
  throw Error(ErrorKind::InvalidConfig, "anchor must be radial or busemann, got '" + s + "'");
}

inline ProductMetricKind parse_metric(const std::string& s) {
  if (s == "max") return ProductMetricKind::max;
  if (s == "euclidean") return ProductMetricKind::euclidean;
  throw Error(ErrorKind::InvalidConfig, "metric must be max or euclidean, got '" + s + "'");
}

/// {"factor1": model, "factor2": model, "delta": D, "anchor": ..., "metric": ...}
inline BandSpace parse_band(const json& j, const std::string& dir = ".") {
  try {
    return BandSpace(parse_model(j.at("factor1"), dir), parse_model(j.at("factor2"), dir),
                     j.at("delta").get<double>(), parse_anchor(j.value("anchor", "radial")),
                     parse_metric(j.value("metric", "max")));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("band spec: ") + e.what());
  }
}

inline json band_to_json(const BandSpace& b) {
  return {{"factor1", model_to_json(b.factor1())},
          {"factor2", model_to_json(b.factor2())},
          {"delta", b.delta()},
          {"anchor", to_string(b.anchor())},
          {"metric", to_string(b.metric())}};
}

inline json band_point_to_json(const BandSpace& b, const BandPoint& p) {
  return json::array({point_to_json(b.factor1(), p.p1), point_to_json(b.factor2(), p.p2)});
}

inline BandPoint band_point_from_json(const BandSpace& b, const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::ParseError, "band point must be [p1, p2]");
  return {point_from_json(b.factor1(), j[0]), point_from_json(b.factor2(), j[1])};
}

inline json band_points_to_json(const BandSpace& b, const std::vector<BandPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(band_point_to_json(b, p));
  return arr;
}

// ---------------------------------------------------------------------------
// Paths and triangle ledgers

template <class P, class PointJson>
json rough_path_to_json(const RoughPath<P>& path, PointJson&& encode) {
  json pts = json::array();
  for (const auto& p : path.points) pts.push_back(encode(p));
  return {{"params", path.params}, {"points", pts}, {"k", path.k}};
}

template <class P>
json triangle_ledger_to_json(const TriangleReport<P>& r) {
  json ledger = json::array();
  for (const auto& e : r.ledger) ledger.push_back({{"inequality", e.name}, {"lhs", e.lhs}, {"rhs", e.rhs}, {"pass", e.pass}});
  return {{"a", r.abc.a}, {"b", r.abc.b}, {"c", r.abc.c}, {"delta", r.delta}, {"k", r.k}, {"ledger", ledger}};
}

}  // namespace bandlab::io
