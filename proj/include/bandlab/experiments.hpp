#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandlab/band.hpp"
#include "bandlab/boundary.hpp"
#include "bandlab/errors.hpp"
#include "bandlab/io.hpp"
#include "bandlab/metric_core.hpp"
#include "bandlab/rough.hpp"

namespace bandlab {

using json = nlohmann::json;

struct ProbeConfig {
  std::size_t window = 10;
  double threshold = 20.0;
  std::size_t length = 60;
  /// Distance between consecutive sequence points along each ray.
  double spacing = 1.0;
  /// Lateral positions (in base-height units) of the boundary points.
  std::vector<double> offsets{0.0, 4.0};
};

struct ExperimentConfig {
  std::string experiment;
  std::optional<BandSpace> band;
  std::size_t n = 40;
  double radius_cap = 20.0;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
  std::size_t pairs = 100;
  std::size_t t_grid = 10;
  bool shared_directions = false;
  /// K_emp bound to assert; defaults to 3 Delta for tree factors.
  std::optional<double> k_emp_bound;
  double stability_factor = 2.0;
  double stability_tolerance = 0.1;
  std::vector<double> d1_values{5.0, 10.0, 20.0};
  ProbeConfig probe;
  std::string output;
  Parallelism parallelism;
  json source = json::object();
};

inline ExperimentConfig parse_experiment_config(const json& j, const std::string& dir = ".") {
  ExperimentConfig c;
  c.source = j;
  try {
    c.experiment = j.value("experiment", "");
    if (j.contains("band")) c.band = io::parse_band(j["band"], dir);
    c.n = j.value("n", c.n);
    c.radius_cap = j.value("radius_cap", c.radius_cap);
    c.seed = j.value("seed", c.seed);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.pairs = j.value("pairs", c.pairs);
    c.t_grid = j.value("t_grid", c.t_grid);
    c.shared_directions = j.value("shared_directions", c.shared_directions);
    if (j.contains("k_emp_bound")) c.k_emp_bound = j["k_emp_bound"].get<double>();
    c.stability_factor = j.value("stability_factor", c.stability_factor);
    c.stability_tolerance = j.value("stability_tolerance", c.stability_tolerance);
    if (j.contains("d1")) c.d1_values = j["d1"].get<std::vector<double>>();
    if (j.contains("probe")) {
      const json& p = j["probe"];
      c.probe.window = p.value("window", c.probe.window);
      c.probe.threshold = p.value("threshold", c.probe.threshold);
      c.probe.length = p.value("length", c.probe.length);
      c.probe.spacing = p.value("spacing", c.probe.spacing);
      if (p.contains("offsets")) c.probe.offsets = p["offsets"].get<std::vector<double>>();
    }
    c.output = j.value("output", "");
    c.parallelism.threads = j.value("threads", 1u);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("experiment config: ") + e.what());
  }
  if (!(c.tolerance >= 0.0)) throw Error(ErrorKind::InvalidConfig, "tolerance must be nonnegative");
  return c;
}

/// Measured quantities plus the checked inequalities, each embedding both
/// sides. Only asserted criteria decide `passed()`.
class Report {
 public:
  explicit Report(json config) : config_(std::move(config)) {}

  json& measurements() { return measurements_; }

  bool check(const std::string& name, double lhs, const std::string& relation, double rhs, bool asserted = true) {
    bool pass = false;
    if (relation == "<=") pass = lhs <= rhs;
    else if (relation == "<") pass = lhs < rhs;
    else if (relation == ">=") pass = lhs >= rhs;
    else if (relation == ">") pass = lhs > rhs;
    else if (relation == "==") pass = lhs == rhs;
    else throw Error(ErrorKind::InvalidConfig, "unknown relation " + relation);
    criteria_.push_back(
        {{"name", name}, {"lhs", lhs}, {"relation", relation}, {"rhs", rhs}, {"pass", pass}, {"asserted", asserted}});
    return pass;
  }

  bool passed() const {
    for (const auto& c : criteria_)
      if (c["asserted"].get<bool>() && !c["pass"].get<bool>()) return false;
    return true;
  }

  const json& criteria() const { return criteria_; }

  json to_json(double duration_ms) const {
    return {{"config", config_},
            {"measurements", measurements_},
            {"criteria", criteria_},
            {"passed", passed()},
            {"duration_ms", duration_ms}};
  }

 private:
  json config_;
  json measurements_ = json::object();
  json criteria_ = json::array();
};

struct ExperimentResult {
  json report;
  bool passed = false;
  /// Per-quadruple defects (i,j,k,l,defect) where the experiment has them.
  std::string quadruple_csv;
};

namespace detail {

inline json config_echo(const ExperimentConfig& c) {
  json echo = c.source;
  echo["experiment"] = c.experiment;
  if (c.band) echo["band"] = io::band_to_json(*c.band);
  echo["n"] = c.n;
  echo["radius_cap"] = c.radius_cap;
  echo["seed"] = c.seed;
  echo["tolerance"] = c.tolerance;
  echo.erase("threads");
  return echo;
}

inline const BandSpace& require_band(const ExperimentConfig& c) {
  if (!c.band) throw Error(ErrorKind::InvalidConfig, "config has no band");
  return *c.band;
}

inline bool both_trees(const BandSpace& b) {
  return b.factor1().kind() == ModelKind::tree && b.factor2().kind() == ModelKind::tree;
}

inline json witness_json(const std::array<std::size_t, 4>& w) { return json::array({w[0], w[1], w[2], w[3]}); }

struct HyperbolicityMeasure {
  DeltaReport band;
  DeltaReport band_at_base;
  DeltaReport factor1;
  DeltaReport factor2;
  std::size_t quadruples = 0;
  std::size_t violations = 0;
  double bound = 0.0;
  std::string csv;
};

inline HyperbolicityMeasure measure_hyperbolicity(const BandSpace& band, const ExperimentConfig& c, double cap,
                                                  bool want_csv) {
  const auto pts = sample_band(band, c.n, cap, c.seed, {c.shared_directions});
  const FiniteMetricSpace m = materialize(band, pts);
  HyperbolicityMeasure out;
  out.band = four_point_delta(m, c.parallelism);
  out.band_at_base = three_point_delta(m, 0, c.parallelism);
  out.factor1 = three_point_delta(factor_space(band, pts, 1), 0, c.parallelism);
  out.factor2 = three_point_delta(factor_space(band, pts, 2), 0, c.parallelism);
  out.bound = 2.0 * std::max(out.factor1.delta, out.factor2.delta) + band.delta();
  std::ostringstream csv;
  if (want_csv) csv << "i,j,k,l,defect\n";
  for_each_quadruple(m, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l, double defect) {
    ++out.quadruples;
    if (0.5 * defect > out.bound + c.tolerance) ++out.violations;
    if (want_csv) csv << i << ',' << j << ',' << k << ',' << l << ',' << io::format_double(defect) << '\n';
  });
  out.csv = csv.str();
  return out;
}

inline void record_hyperbolicity(Report& r, const BandSpace& band, const HyperbolicityMeasure& h, double tol,
                                 bool assert_bound) {
  json& m = r.measurements();
  m["delta_band"] = h.band.delta;
  m["delta_band_witness"] = witness_json(h.band.witness);
  m["delta_tilde_band_at_base"] = h.band_at_base.delta;
  m["delta_tilde_factor1"] = h.factor1.delta;
  m["delta_tilde_factor2"] = h.factor2.delta;
  m["bound_2delta_plus_Delta"] = h.bound;
  m["quadruples"] = h.quadruples;
  r.check("delta_band <= 2 max(delta~1, delta~2) + Delta", h.band.delta, "<=", h.bound + tol, assert_bound);
  r.check("chain at base: 2 delta~_band <= 2 max(delta~1, delta~2) + Delta", 2.0 * h.band_at_base.delta, "<=",
          2.0 * std::max(h.factor1.delta, h.factor2.delta) + band.delta() + tol, assert_bound);
  r.check("quadruples with defect/2 above the bound", static_cast<double>(h.violations), "==", 0.0, assert_bound);
}

inline std::vector<std::pair<BandPoint, BandPoint>> sample_pairs(const BandSpace& band, std::size_t count,
                                                                 double cap, std::uint64_t seed, bool shared) {
  const auto pts = sample_band(band, 2 * count + 1, cap, seed, {shared});
  std::vector<std::pair<BandPoint, BandPoint>> pairs;
  for (std::size_t i = 1; i + 1 < pts.size(); i += 2) pairs.emplace_back(pts[i], pts[i + 1]);
  return pairs;
}

inline void record_audit(Report& r, const BandSpace& band, const ExperimentConfig& c, bool assert_stability) {
  AuditOptions opt;
  opt.t_grid = c.t_grid;
  const auto pairs = sample_pairs(band, c.pairs, c.radius_cap, c.seed, c.shared_directions);
  const auto a = almost_geodesic_audit(band, pairs, opt);
  const double wide_cap = c.radius_cap * c.stability_factor;
  const auto wide =
      almost_geodesic_audit(band, sample_pairs(band, c.pairs, wide_cap, c.seed, c.shared_directions), opt);
  json& m = r.measurements();
  m["pairs"] = pairs.size();
  m["t_grid"] = c.t_grid;
  m["witnesses"] = a.witnesses;
  m["truncated_witnesses"] = a.truncated_witnesses + wide.truncated_witnesses;
  m["k_emp"] = a.k_emp;
  m["k_emp_worst_pair"] = a.worst_pair;
  m["k_emp_worst_t"] = a.worst_t;
  m["factor_thinness"] = a.factor_thinness;
  m["delta_prime"] = a.delta_prime;
  m["k_theory"] = a.k_theory;
  m["max_containment_excess"] = a.max_containment_excess;
  m["k_emp_wide_cap"] = wide.k_emp;
  m["wide_radius_cap"] = wide_cap;
  r.check("witnesses outside the band", static_cast<double>(a.membership_failures + wide.membership_failures), "==",
          0.0);
  r.check("witnesses violating d2(w2,o2) <= d1(w1,o1) + Delta",
          static_cast<double>(a.containment_failures + wide.containment_failures), "==", 0.0);
  std::optional<double> bound = c.k_emp_bound;
  if (!bound && both_trees(band)) bound = 3.0 * band.delta() + kMetricTolerance;
  if (bound) r.check("K_emp <= bound", a.k_emp, "<=", *bound);
  r.check("K_emp stable when the radius cap grows: |K_wide - K| <= tol * K",
          std::abs(wide.k_emp - a.k_emp), "<=", c.stability_tolerance * a.k_emp + kMetricTolerance,
          assert_stability);
}

}  // namespace detail

/// Hyperbolicity of a sampled radial band against the factor three-point
/// constants: delta_band <= 2 max(delta~_i) + Delta.
inline ExperimentResult run_theorem1(const ExperimentConfig& c, bool want_csv = false) {
  const auto start = std::chrono::steady_clock::now();
  const BandSpace& band = detail::require_band(c);
  if (band.metric() != ProductMetricKind::max) throw Error(ErrorKind::InvalidConfig, "theorem1 needs the max metric");
  if (c.n < 4) throw Error(ErrorKind::InvalidConfig, "delta experiments need n >= 4");
  Report r(detail::config_echo(c));
  const auto h = detail::measure_hyperbolicity(band, c, c.radius_cap, want_csv);
  detail::record_hyperbolicity(r, band, h, c.tolerance, band.anchor() == AnchorKind::radial);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {r.to_json(ms), r.passed(), h.csv};
}

/// Almost-geodesic audit of the witness construction.
inline ExperimentResult run_theorem2_audit(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const BandSpace& band = detail::require_band(c);
  if (band.metric() != ProductMetricKind::max) throw Error(ErrorKind::InvalidConfig, "theorem2 needs the max metric");
  Report r(detail::config_echo(c));
  detail::record_audit(r, band, c, true);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {r.to_json(ms), r.passed(), {}};
}

inline BandSpace default_counterexample_band() {
  const auto h = ModelSpace::hyperbolic_plane();
  return BandSpace(h, h, 0.0, AnchorKind::busemann, ProductMetricKind::euclidean);
}

/// Four-point defects of the horocycle configuration under d_e and d_m.
inline ExperimentResult run_counterexample(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const BandSpace band = c.band ? *c.band : default_counterexample_band();
  if (band.anchor() != AnchorKind::busemann || band.delta() != 0.0) {
    throw Error(ErrorKind::InvalidConfig, "the counterexample runs on the Delta = 0 Busemann band");
  }
  if (c.d1_values.empty()) throw Error(ErrorKind::InvalidConfig, "no d1 values");
  ExperimentConfig echo_cfg = c;
  echo_cfg.band = band;
  Report r(detail::config_echo(echo_cfg));
  const double expected_ratio = std::numbers::sqrt2 - 1.0;
  constexpr double kTol = 1e-4;

  // Empirical three-point constant of the half-plane on a radial sample.
  const BandSpace radial(band.factor1(), band.factor1(), 0.0, AnchorKind::radial, ProductMetricKind::max);
  const auto h2_sample = sample_band(radial, 30, c.radius_cap, c.seed);
  const double h2_delta = three_point_delta(factor_space(radial, h2_sample, 1), 0).delta;

  json rows = json::array();
  std::vector<double> xs, ys_e, ys_m;
  std::size_t outside = 0;
  double worst_symmetry = 0.0;
  for (double d1 : c.d1_values) {
    const auto q = counterexample_family(band, d1);
    for (const auto* p : {&q.x, &q.y, &q.z, &q.w})
      if (!band.membership(*p).inside) ++outside;
    for (int i = 1; i <= 2; ++i) {
      const ModelSpace& f = band.factor(i);
      auto pick = [&](const BandPoint& p) -> const ModelPoint& { return i == 1 ? p.p1 : p.p2; };
      const double dyz = f.distance(pick(q.y), pick(q.z));
      worst_symmetry = std::max({worst_symmetry, std::abs(f.distance(pick(q.x), pick(q.y)) - 0.5 * dyz),
                                 std::abs(f.distance(pick(q.x), pick(q.z)) - 0.5 * dyz), std::abs(dyz - d1)});
    }
    const double de = band_quadruple_defect(band, ProductMetricKind::euclidean, q.x, q.y, q.z, q.w);
    const double dm = band_quadruple_defect(band, ProductMetricKind::max, q.x, q.y, q.z, q.w);
    rows.push_back({{"d1", d1}, {"half_chord", q.half_chord}, {"defect_euclidean", de}, {"defect_max", dm},
                    {"defect_euclidean_over_d1", d1 > 0 ? de / d1 : 0.0}});
    xs.push_back(d1);
    ys_e.push_back(0.5 * de);
    ys_m.push_back(dm);
    r.check("|defect_e - (sqrt2 - 1) d1| at d1=" + io::format_double(d1), std::abs(de - expected_ratio * d1), "<=",
            kTol);
  }
  // Least-squares line through (d1, defect_e / 2).
  const double nn = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys_e[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys_e[i];
  }
  const double denom = nn * sxx - sx * sx;
  const double slope = denom != 0.0 ? (nn * sxy - sx * sy) / denom : (sx != 0.0 ? sy / sx : 0.0);
  const double intercept = (sy - slope * sx) / nn;
  const double max_dm = *std::max_element(ys_m.begin(), ys_m.end());

  json& m = r.measurements();
  m["rows"] = rows;
  m["slope_half_defect_euclidean"] = slope;
  m["intercept_half_defect_euclidean"] = intercept;
  m["expected_slope"] = expected_ratio / 2.0;
  m["max_defect_max_metric"] = max_dm;
  m["h2_delta_tilde_emp"] = h2_delta;
  m["max_midpoint_symmetry_error"] = worst_symmetry;
  r.check("quadruple points outside Y_0", static_cast<double>(outside), "==", 0.0);
  r.check("midpoint symmetry d(x,y) = d(x,z) = d(y,z)/2, d(y,z) = d1", worst_symmetry, "<=", 1e-9);
  if (xs.size() >= 2) r.check("|slope - (sqrt2 - 1)/2|", std::abs(slope - expected_ratio / 2.0), "<=", kTol);
  r.check("max d_m defect <= 2 delta~_H2 + 1e-6", max_dm, "<=", 2.0 * h2_delta + 1e-6);
  if (xs.size() >= 2) {
    // Growth of the d_m defect between the two largest d1 values.
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    const double top = ys_m[order.back()], prev = ys_m[order[order.size() - 2]];
    r.check("d_m defect at largest d1 <= 1.05 x defect at next d1", top, "<=", 1.05 * prev + kMetricTolerance);
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {r.to_json(ms), r.passed(), {}};
}

/// Diagonal sequences marching to the boundary point at lateral offset a
/// (half-plane factors), one point per `spacing` of Busemann level.
inline std::vector<BandPoint> diagonal_boundary_sequence(const BandSpace& band, double offset, const ProbeConfig& p) {
  std::vector<BandPoint> seq;
  for (std::size_t i = 1; i <= p.length; ++i) {
    const double height = std::exp(-p.spacing * static_cast<double>(i));
    seq.push_back({h2::from_frame(band.factor1().h2_base(), {offset, height}),
                   h2::from_frame(band.factor2().h2_base(), {offset, height})});
  }
  return seq;
}

/// Busemann-band counterpart of theorem1 + theorem2, plus boundary probes.
inline ExperimentResult run_limitcase(const ExperimentConfig& c, bool want_csv = false) {
  const auto start = std::chrono::steady_clock::now();
  const BandSpace& band = detail::require_band(c);
  if (band.anchor() != AnchorKind::busemann) throw Error(ErrorKind::InvalidConfig, "limitcase needs Busemann anchors");
  if (band.metric() != ProductMetricKind::max) throw Error(ErrorKind::InvalidConfig, "limitcase needs the max metric");
  if (c.n < 4) throw Error(ErrorKind::InvalidConfig, "delta experiments need n >= 4");
  Report r(detail::config_echo(c));
  const auto h = detail::measure_hyperbolicity(band, c, c.radius_cap, want_csv);
  detail::record_hyperbolicity(r, band, h, c.tolerance, false);
  r.check("delta_band is finite", std::isfinite(h.band.delta) ? 1.0 : 0.0, "==", 1.0);
  if (detail::both_trees(band) && band.delta() == 0.0) {
    r.check("tree factors, Delta = 0: delta_band <= tolerance", h.band.delta, "<=", c.tolerance);
  }
  const auto wide = detail::measure_hyperbolicity(band, c, c.radius_cap * c.stability_factor, false);
  r.measurements()["delta_band_wide_cap"] = wide.band.delta;
  r.check("delta_band stable when the radius cap grows: |delta_wide - delta| <= tol * delta",
          std::abs(wide.band.delta - h.band.delta), "<=", c.stability_tolerance * h.band.delta + kMetricTolerance,
          false);
  detail::record_audit(r, band, c, false);

  if (band.factor1().kind() == ModelKind::h2 && band.factor2().kind() == ModelKind::h2 &&
      c.probe.offsets.size() >= 2) {
    const auto s1 = diagonal_boundary_sequence(band, c.probe.offsets[0], c.probe);
    const auto s2 = diagonal_boundary_sequence(band, c.probe.offsets[1], c.probe);
    const auto dist = [&](const BandPoint& p, const BandPoint& q) { return band.raw_distance(p, q); };
    const auto probe = class_probe(s1, s2, band.base(), c.probe.window, c.probe.threshold, dist);
    r.measurements()["probe"] = {{"offsets", c.probe.offsets},
                                 {"window", c.probe.window},
                                 {"threshold", c.probe.threshold},
                                 {"length", c.probe.length},
                                 {"self_tail_min_1", probe.first.min_tail_product},
                                 {"self_tail_min_2", probe.second.min_tail_product},
                                 {"verdict_1", to_string(probe.first.verdict)},
                                 {"verdict_2", to_string(probe.second.verdict)},
                                 {"cross_tail_min", probe.cross_tail_min},
                                 {"equivalent", probe.equivalent}};
    r.check("probe: sequence 1 self tail min > threshold", probe.first.min_tail_product, ">", c.probe.threshold,
            false);
    r.check("probe: sequence 2 self tail min > threshold", probe.second.min_tail_product, ">", c.probe.threshold,
            false);
    r.check("probe: distinct boundary pairs not equivalent (cross tail min <= threshold)", probe.cross_tail_min,
            "<=", c.probe.threshold);
  } else {
    r.measurements()["probe"] = "skipped: boundary probes need half-plane factors";
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {r.to_json(ms), r.passed(), h.csv};
}

/// Sequence-file probe: {"space" | "band": spec, "seq1": [...], "seq2": [...],
/// "base": point (optional), "window": w, "threshold": r}.
inline ExperimentResult run_probe_file(const json& j, const std::string& dir = ".") {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t window = j.value("window", std::size_t{10});
  const double threshold = j.value("threshold", 20.0);
  Report r(j);
  ClassProbe probe;
  try {
    if (j.contains("band")) {
      const BandSpace band = io::parse_band(j["band"], dir);
      std::vector<BandPoint> s1, s2;
      for (const auto& p : j.at("seq1")) s1.push_back(io::band_point_from_json(band, p));
      for (const auto& p : j.at("seq2")) s2.push_back(io::band_point_from_json(band, p));
      const BandPoint base = j.contains("base") ? io::band_point_from_json(band, j["base"]) : band.base();
      probe = class_probe(s1, s2, base, window, threshold,
                          [&](const BandPoint& p, const BandPoint& q) { return band.raw_distance(p, q); });
    } else {
      const ModelSpace space = io::parse_model(j.at("space"), dir);
      std::vector<ModelPoint> s1, s2;
      for (const auto& p : j.at("seq1")) s1.push_back(io::point_from_json(space, p));
      for (const auto& p : j.at("seq2")) s2.push_back(io::point_from_json(space, p));
      const ModelPoint base = j.contains("base") ? io::point_from_json(space, j["base"]) : space.basepoint();
      probe = class_probe(s1, s2, base, window, threshold,
                          [&](const ModelPoint& p, const ModelPoint& q) { return space.distance(p, q); });
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("sequence file: ") + e.what());
  }
  r.measurements() = {{"self_tail_min_1", probe.first.min_tail_product},
                      {"self_tail_min_2", probe.second.min_tail_product},
                      {"verdict_1", to_string(probe.first.verdict)},
                      {"verdict_2", to_string(probe.second.verdict)},
                      {"cross_tail_min", probe.cross_tail_min},
                      {"equivalent", probe.equivalent},
                      {"window", window},
                      {"threshold", threshold}};
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {r.to_json(ms), r.passed(), {}};
}

}  // namespace bandlab
