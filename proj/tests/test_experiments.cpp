#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bandlab/experiments.hpp"

using namespace bandlab;

namespace {

const std::string kData = BANDLAB_DATA_DIR;

ExperimentConfig load(const std::string& name) {
  return parse_experiment_config(io::parse_json(io::read_file(kData + "/" + name), name), kData);
}

json strip_duration(json report) {
  report.erase("duration_ms");
  return report;
}

double measurement(const ExperimentResult& r, const std::string& key) {
  return r.report["measurements"][key].get<double>();
}

// Every criterion's verdict follows from its embedded numbers.
void expect_recomputable(const json& report) {
  for (const auto& c : report["criteria"]) {
    const double lhs = c["lhs"], rhs = c["rhs"];
    const std::string rel = c["relation"];
    bool pass = false;
    if (rel == "<=") pass = lhs <= rhs;
    else if (rel == "<") pass = lhs < rhs;
    else if (rel == ">=") pass = lhs >= rhs;
    else if (rel == ">") pass = lhs > rhs;
    else if (rel == "==") pass = lhs == rhs;
    else ADD_FAILURE() << rel;
    EXPECT_EQ(pass, c["pass"].get<bool>()) << c["name"];
  }
  for (const char* key : {"config", "measurements", "criteria", "duration_ms"}) EXPECT_TRUE(report.contains(key));
}

}  // namespace

TEST(Config, DefaultsAndErrors) {
  const auto c = parse_experiment_config(json::object());
  EXPECT_FALSE(c.band.has_value());
  EXPECT_EQ(c.tolerance, 1e-8);
  EXPECT_EQ(c.d1_values, (std::vector<double>{5, 10, 20}));
  EXPECT_EQ(c.probe.window, 10u);
  EXPECT_EQ(c.probe.threshold, 20.0);
  EXPECT_EQ(c.probe.length, 60u);
  EXPECT_THROW(parse_experiment_config({{"n", "many"}}), Error);
  EXPECT_THROW(parse_experiment_config({{"tolerance", -1.0}}), Error);
  EXPECT_THROW(run_theorem1(c), Error);

  auto small = load("theorem1_tree.json");
  small.n = 3;
  EXPECT_THROW(run_theorem1(small), Error);
  auto eu = load("theorem1_h2.json");
  eu.band = eu.band->with_metric(ProductMetricKind::euclidean);
  EXPECT_THROW(run_theorem1(eu), Error);
  EXPECT_THROW(run_theorem2_audit(eu), Error);
  EXPECT_THROW(run_limitcase(load("theorem1_h2.json")), Error);
  EXPECT_THROW(run_counterexample(load("theorem1_h2.json")), Error);
}

TEST(Experiments, Theorem1TreeBands) {
  auto c = load("theorem1_tree.json");
  for (double delta : {0.0, 1.0, 2.0}) {
    c.band = c.band->with_delta(delta);
    const auto r = run_theorem1(c);
    EXPECT_TRUE(r.passed);
    EXPECT_LE(measurement(r, "delta_band"), delta + 1e-8);
    expect_recomputable(r.report);
  }
}

TEST(Experiments, Theorem1H2AndCsv) {
  const auto r = run_theorem1(load("theorem1_h2.json"), true);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(measurement(r, "delta_band"), 2.0 * std::max(measurement(r, "delta_tilde_factor1"),
                                                         measurement(r, "delta_tilde_factor2")) + 1.0 + 1e-8);
  // Header plus one row per 4-subset of 30 points.
  const auto rows = std::count(r.quadruple_csv.begin(), r.quadruple_csv.end(), '\n');
  EXPECT_EQ(rows, 1 + 27405);
  expect_recomputable(r.report);
}

TEST(Experiments, Theorem2Audits) {
  const auto tree = run_theorem2_audit(load("theorem2_tree.json"));
  EXPECT_TRUE(tree.passed);
  EXPECT_LE(measurement(tree, "k_emp"), 6.0);
  const auto diag = run_theorem2_audit(load("theorem2_diagonal.json"));
  EXPECT_TRUE(diag.passed);
  EXPECT_LE(measurement(diag, "k_emp"), 1e-9);
  const auto h2 = run_theorem2_audit(load("theorem2_h2.json"));
  EXPECT_TRUE(h2.passed);
  const double ratio = measurement(h2, "k_emp_wide_cap") / measurement(h2, "k_emp");
  EXPECT_GE(ratio, 0.9);
  EXPECT_LE(ratio, 1.1);
  for (const auto* r : {&tree, &diag, &h2}) expect_recomputable(r->report);
}

TEST(Experiments, CounterexampleSlope) {
  const auto r = run_counterexample(load("counterexample.json"));
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(measurement(r, "slope_half_defect_euclidean"), (std::numbers::sqrt2 - 1.0) / 2.0, 1e-4);
  EXPECT_NEAR(measurement(r, "slope_half_defect_euclidean"), 0.20711, 1e-4);
  expect_recomputable(r.report);

  // Default band when the config has none; d1 = 0 is a degenerate row.
  ExperimentConfig c;
  c.d1_values = {0.0, 3.0, 6.0};
  const auto d = run_counterexample(c);
  EXPECT_TRUE(d.passed);
  EXPECT_EQ(d.report["measurements"]["rows"][0]["defect_euclidean"].get<double>(), 0.0);
  c.d1_values.clear();
  EXPECT_THROW(run_counterexample(c), Error);
}

TEST(Experiments, LimitCase) {
  const auto h2 = run_limitcase(load("limitcase_h2.json"));
  EXPECT_TRUE(h2.passed);
  EXPECT_TRUE(std::isfinite(measurement(h2, "delta_band")));
  EXPECT_FALSE(h2.report["measurements"]["probe"]["equivalent"].get<bool>());
  expect_recomputable(h2.report);

  const auto tree = run_limitcase(load("limitcase_tree.json"));
  EXPECT_TRUE(tree.passed);
  EXPECT_NEAR(measurement(tree, "delta_band"), 0.0, 1e-9);
  EXPECT_TRUE(tree.report["measurements"]["probe"].is_string());
}

TEST(Experiments, FailingCriterionFailsTheRun) {
  auto c = load("theorem2_tree.json");
  c.k_emp_bound = 0.5;  // K_emp on this band is about 2
  const auto r = run_theorem2_audit(c);
  EXPECT_FALSE(r.passed);
  expect_recomputable(r.report);
}

TEST(Experiments, ReportsAreDeterministic) {
  for (const char* name : {"theorem1_h2.json", "theorem2_tree.json", "counterexample.json", "limitcase_h2.json"}) {
    auto c = load(name);
    auto run = [&](unsigned threads) {
      c.parallelism.threads = threads;
      const std::string n = name;
      if (n.starts_with("theorem1")) return run_theorem1(c);
      if (n.starts_with("theorem2")) return run_theorem2_audit(c);
      if (n.starts_with("counter")) return run_counterexample(c);
      return run_limitcase(c);
    };
    const auto a = run(1), b = run(1), p = run(4);
    EXPECT_EQ(strip_duration(a.report).dump(), strip_duration(b.report).dump()) << name;
    EXPECT_EQ(strip_duration(a.report).dump(), strip_duration(p.report).dump()) << name;
  }
}

TEST(Experiments, ProbeFile) {
  const auto r = run_probe_file(io::parse_json(io::read_file(kData + "/probe_h2.json"), "probe"), kData);
  const auto& m = r.report["measurements"];
  EXPECT_EQ(m["verdict_1"], "converges");
  EXPECT_EQ(m["verdict_2"], "converges");
  EXPECT_FALSE(m["equivalent"].get<bool>());
  EXPECT_THROW(run_probe_file(json{{"space", {{"kind", "h2"}}}, {"seq1", json::array()}}), Error);
}
