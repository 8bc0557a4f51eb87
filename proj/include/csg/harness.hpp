#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csg/baselines.hpp"
#include "csg/optimizer.hpp"
#include "csg/problem.hpp"
#include "csg/schedule.hpp"
#include "csg/weights.hpp"

namespace csg {

enum class Method { csg, sg, sag, scgd, ascgd };

struct OptimizerSpec {
  std::string name;
  Method method = Method::csg;
  WeightStrategy strategy;
  StepSchedule schedule = StepSchedule::constant(1.0);
  JointMetric metric;
  std::size_t sag_m = 100;
  ScgdConfig scgd;
};

struct ExperimentConfig {
  /// quadratic1d | nested_cosine | chance_penalty
  std::string problem = "quadratic1d";
  double penalty_lambda = 3.0;
  double penalty_a = 25.0;
  std::vector<OptimizerSpec> optimizers;
  std::size_t replications = 100;
  std::size_t iterations = 1000;
  std::uint64_t base_seed = 0;
  /// Defaults to the design domain of the problem.
  std::optional<BoxDomain> start_region;
  std::string output_dir = "csg_out";
  /// 0 = one worker per hardware thread.
  std::size_t threads = 0;
  bool record_timing = false;
  /// Only every csv_stride-th iteration (and the last) goes to the CSV files.
  std::size_t csv_stride = 1;
  bool write_files = true;
  std::vector<double> tolerances = {1e-1, 1e-2, 1e-3};
  double confidence = 0.9;
  StoppingRule stop;
  /// Grid resolution of the oracle that supplies theta_opt when the problem
  /// has no closed-form optimum.
  double oracle_resolution = 1e-6;
  /// The JSON document the config was parsed from, echoed into the summary.
  std::string source_json;
};

/// Parses a JSON experiment description. Throws ConfigError with the
/// offending key on malformed input.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

Method parse_method(std::string_view text, std::size_t* sag_m = nullptr);
std::string to_string(Method method);

inline constexpr std::array<double, 5> kQuantileLevels = {0.1, 0.25, 0.5, 0.75, 0.9};

/// Linear-interpolation sample quantile (type 7): position q (n - 1) in the
/// sorted data. Throws InvalidInput on empty data or q outside [0, 1].
double quantile(std::vector<double> values, double q);

/// Smallest iteration n at which the fraction of replications with
/// error[r][n] < tolerance is at least `confidence`; nullopt if never.
/// Missing entries (shorter rows) count as not below the tolerance.
std::optional<std::size_t> steps_to_tolerance(const std::vector<std::vector<double>>& errors, double tolerance,
                                              double confidence = 0.9);

struct OptimizerResult {
  std::string name;
  /// errors[r][n]: abs_error of replication r after n gradient evaluations.
  std::vector<std::vector<double>> errors;
  /// Per iteration, quantiles at kQuantileLevels over successful replications.
  std::vector<std::array<double, 5>> quantiles;
  std::vector<std::pair<double, std::optional<std::size_t>>> steps_to_tol;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
  /// False if any iterate of any replication left the design domain.
  bool feasible = true;
};

struct ExperimentResult {
  std::vector<OptimizerResult> optimizers;
  /// theta* or theta_opt used as the error reference (empty if none).
  std::optional<Design> reference;
  std::vector<std::string> csv_paths;
  std::string summary_path;

  const OptimizerResult& at(std::string_view name) const;
};

/// Runs every optimizer on every replication. Replication r seeds its
/// generator with base_seed + r, draws the common start point, and hands each
/// optimizer a copy of the generator state after that draw. Output does not
/// depend on the number of worker threads. Throws Error if fewer than 90% of
/// the replications of some optimizer succeed.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Experiment descriptions behind the five figures.
struct FigureOptions {
  std::optional<std::size_t> replications;
  std::optional<std::size_t> iterations;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> threads;
  std::uint64_t base_seed = 1;
};
std::string figure_config_json(std::string_view figure_id, const FigureOptions& options);
ExperimentResult reproduce_figure(std::string_view figure_id, const FigureOptions& options);

/// Quick invariant checks; writes one PASS/FAIL line per check, returns the
/// number of failures.
int run_selftest(std::ostream& out);

}  // namespace csg
