#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "csg/harness.hpp"

namespace csg {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("csg_harness_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path& out, std::size_t threads) {
  ExperimentConfig cfg = parse_config(R"J({
    "problem": "quadratic1d",
    "replications": 6,
    "iterations": 40,
    "base_seed": 11,
    "optimizers": [
      {"method": "sg", "schedule": {"kind": "power", "c": 1, "p": 1}},
      {"method": "csg", "weights": "inexact_hybrid(1.5)"},
      {"method": "csg", "weights": "exact_hybrid", "name": "hybrid a1=0",
       "metric": {"a1": 0, "a2": 1}},
      {"method": "sag", "sag_m": 5}
    ]
  })J");
  cfg.output_dir = out.string();
  cfg.threads = threads;
  return cfg;
}

TEST(Quantile, TypeSevenInterpolation) {
  EXPECT_EQ(quantile({3.0}, 0.9), 3.0);
  EXPECT_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_NEAR(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.1), 1.4, 1e-15);
  EXPECT_EQ(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.0), 1.0);
  EXPECT_EQ(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 1.0), 5.0);
  EXPECT_NEAR(quantile({10.0, 20.0}, 0.25), 12.5, 1e-14);
  EXPECT_THROW(quantile({}, 0.5), InvalidInput);
  EXPECT_THROW(quantile({1.0}, 1.5), InvalidInput);
}

TEST(Quantile, MonotoneInTheLevel) {
  Rng rng = make_rng(50);
  std::vector<double> v(37);
  for (double& x : v) x = uniform01(rng);
  double prev = -1.0;
  for (double q = 0.0; q <= 1.0; q += 0.01) {
    const double cur = quantile(v, q);
    EXPECT_GE(cur, prev);
    prev = cur;
  }
}

TEST(StepsToTolerance, CountingDefinition) {
  std::vector<std::vector<double>> below(10, std::vector<double>(100, 0.001));
  EXPECT_EQ(steps_to_tolerance(below, 0.01), 0u);

  std::vector<std::vector<double>> above(10, std::vector<double>(100, 1.0));
  EXPECT_EQ(steps_to_tolerance(above, 0.01), std::nullopt);

  std::vector<std::vector<double>> mixed(10, std::vector<double>(100, 1.0));
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t n = 57; n < 100; ++n) mixed[r][n] = 0.001;
  }
  EXPECT_EQ(steps_to_tolerance(mixed, 0.01, 0.9), 57u);
  EXPECT_EQ(steps_to_tolerance(mixed, 0.01, 0.95), std::nullopt);
}

TEST(StepsToTolerance, ShortRowsCountAsNotBelow) {
  std::vector<std::vector<double>> e = {{1.0, 0.0, 0.0}, {1.0, 0.0}};
  EXPECT_EQ(steps_to_tolerance(e, 0.5, 1.0), 1u);
  e[1].pop_back();
  EXPECT_EQ(steps_to_tolerance(e, 0.5, 1.0), std::nullopt);
  EXPECT_EQ(steps_to_tolerance(e, 0.5, 0.5), 1u);
}

TEST(ParseConfig, DefaultsAndNames) {
  const ExperimentConfig cfg = parse_config(R"J({"problem": "nested_cosine",
    "optimizers": [{"method": "csg", "weights": "exact_hybrid"}, {"method": "ascgd"}]})J");
  EXPECT_EQ(cfg.replications, 100u);
  EXPECT_EQ(cfg.iterations, 1000u);
  ASSERT_EQ(cfg.optimizers.size(), 2u);
  EXPECT_EQ(cfg.optimizers[0].name, "csg-exact_hybrid");
  EXPECT_NEAR(cfg.optimizers[0].schedule.step(5), 1.0 / 30.0, 1e-16);
  EXPECT_EQ(cfg.optimizers[1].name, "ascgd");
  EXPECT_TRUE(cfg.optimizers[1].scgd.accelerated);
}

TEST(ParseConfig, RejectsMalformedInput) {
  const char* bad[] = {
      R"J({"problem": "quadratic1d"})J",
      R"J({"problem": "quadratic1d", "optimizers": []})J",
      R"J({"problem": "rosenbrock", "optimizers": [{"method": "sg"}]})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "sg"}], "colour": 1})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "newton"}]})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "csg"}]})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "csg", "weights": "exact(2)"}]})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "sg"}, {"method": "sg"}]})J",
      R"J({"problem": "nested_cosine", "optimizers": [{"method": "sg"}]})J",
      R"J({"problem": "chance_penalty", "optimizers": [{"method": "ascgd"}]})J",
      R"J({"problem": {"name": "chance_penalty", "lambda": -1}, "optimizers": [{"method": "scgd"}]})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "sg"}],
          "start_region": {"lower": [0.2], "upper": [0.9]}})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "sg", "schedule": {"kind": "constant", "c": 0}}]})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "csg", "weights": "exact",
          "schedule": {"kind": "admissible", "s_lower": 0.5, "s_upper": 2, "D": 0.7}}]})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "sg"}], "replications": -3})J",
      R"J({"problem": "quadratic1d", "optimizers": [{"method": "sg"}], "csv_stride": 0})J",
      R"J(not json)J",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config(text), ConfigError) << text;
}

TEST(ParseConfig, MethodNames) {
  std::size_t m = 0;
  EXPECT_EQ(parse_method("sag(25)", &m), Method::sag);
  EXPECT_EQ(m, 25u);
  for (Method k : {Method::csg, Method::sg, Method::sag, Method::scgd, Method::ascgd}) {
    EXPECT_EQ(parse_method(to_string(k)), k);
  }
  EXPECT_THROW(parse_method("sag(0)"), ConfigError);
}

TEST(RunExperiment, ZeroIterationsGiveSingleRowsAndRawQuantiles) {
  ExperimentConfig cfg = parse_config(R"J({"problem": "quadratic1d", "replications": 1, "iterations": 0,
    "write_files": false, "optimizers": [{"method": "csg", "weights": "exact"}]})J");
  const ExperimentResult res = run_experiment(cfg);
  const OptimizerResult& r = res.at("csg-exact");
  ASSERT_EQ(r.errors.size(), 1u);
  ASSERT_EQ(r.errors[0].size(), 1u);
  ASSERT_EQ(r.quantiles.size(), 1u);
  for (double q : r.quantiles[0]) EXPECT_EQ(q, r.errors[0][0]);
}

TEST(RunExperiment, WritesCsvWithTheExactHeaderAndSummary) {
  const fs::path out = scratch_dir("schema");
  const ExperimentResult res = run_experiment(small_config(out, 1));
  ASSERT_EQ(res.csv_paths.size(), 4u);
  for (const auto& path : res.csv_paths) {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header,
              "iteration,replication,optimizer,theta,abs_error,jhat,stationarity,grad_error,grad_evals,sample_draws,"
              "weight_time_ns");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    EXPECT_EQ(lines, 6u * 41u) << path;
  }
  EXPECT_TRUE(fs::exists(out / "hybrid_a1_0.csv"));
  const auto summary = nlohmann::json::parse(slurp(res.summary_path));
  ASSERT_TRUE(summary.contains("config"));
  ASSERT_TRUE(summary.contains("per_optimizer"));
  const auto& sg = summary["per_optimizer"]["sg"];
  EXPECT_EQ(sg["quantiles"].size(), 41u);
  EXPECT_EQ(sg["quantiles"][0].size(), 5u);
  EXPECT_TRUE(sg["steps_to_tolerance"].contains("0.1"));
  EXPECT_TRUE(fs::exists(out / "steps_to_tolerance.csv"));
}

TEST(RunExperiment, OutputIsByteIdenticalAcrossRunsAndThreadCounts) {
  const fs::path a = scratch_dir("det_a");
  const fs::path b = scratch_dir("det_b");
  const fs::path c = scratch_dir("det_c");
  const auto ra = run_experiment(small_config(a, 1));
  run_experiment(small_config(b, 1));
  run_experiment(small_config(c, 3));
  for (const auto& path : ra.csv_paths) {
    const fs::path name = fs::path(path).filename();
    const std::string ref = slurp(a / name);
    EXPECT_FALSE(ref.empty());
    EXPECT_EQ(ref, slurp(b / name)) << name;
    EXPECT_EQ(ref, slurp(c / name)) << name;
  }
  EXPECT_EQ(slurp(a / "summary.json"), slurp(c / "summary.json"));
}

TEST(RunExperiment, SharedStartPointAcrossOptimizers) {
  ExperimentConfig cfg = small_config(scratch_dir("start"), 1);
  cfg.write_files = false;
  const auto res = run_experiment(cfg);
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    const double e0 = res.optimizers[0].errors[r][0];
    for (const auto& opt : res.optimizers) EXPECT_EQ(opt.errors[r][0], e0);
  }
  for (const auto& opt : res.optimizers) EXPECT_TRUE(opt.feasible);
}

TEST(RunExperiment, CsvStrideKeepsTheLastIteration) {
  ExperimentConfig cfg = small_config(scratch_dir("stride"), 1);
  cfg.csv_stride = 15;
  const auto res = run_experiment(cfg);
  std::ifstream in(res.csv_paths[0]);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> iters;
  while (std::getline(in, line)) {
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    if (line.substr(c1 + 1, c2 - c1 - 1) != "0") continue;
    iters.push_back(line.substr(0, c1));
  }
  EXPECT_EQ(iters, (std::vector<std::string>{"0", "15", "30", "40"}));
}

TEST(RunExperiment, ChanceProblemUsesTheOracleReference) {
  ExperimentConfig cfg = parse_config(R"J({"problem": "chance_penalty", "replications": 2, "iterations": 5,
    "write_files": false, "oracle_resolution": 1e-4,
    "optimizers": [{"method": "scgd"}, {"method": "csg", "weights": "empirical"}]})J");
  const auto res = run_experiment(cfg);
  ASSERT_TRUE(res.reference.has_value());
  EXPECT_LT(std::fabs((*res.reference)[0] - 0.25), 1.5e-3);
}

TEST(Figures, EveryRecipeParses) {
  FigureOptions opts;
  opts.replications = 2;
  opts.iterations = 3;
  for (const char* id : {"fig1", "fig2", "fig3", "fig4", "fig5"}) {
    const ExperimentConfig cfg = parse_config(figure_config_json(id, opts));
    EXPECT_EQ(cfg.replications, 2u) << id;
    EXPECT_EQ(cfg.iterations, 3u) << id;
    EXPECT_FALSE(cfg.optimizers.empty()) << id;
  }
  EXPECT_EQ(parse_config(figure_config_json("fig2", {})).optimizers.size(), 16u);
  EXPECT_EQ(parse_config(figure_config_json("fig1", {})).replications, 100u);
  EXPECT_THROW(figure_config_json("fig9", opts), ConfigError);
}

TEST(Selftest, AllChecksPass) {
  std::ostringstream out;
  EXPECT_EQ(run_selftest(out), 0) << out.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace csg
