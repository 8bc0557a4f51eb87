#include "csg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "csg/problems.hpp"

namespace csg {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config parsing

namespace {

const json& require_key(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T get_as(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const json& v = require_key(obj, key, where);
  if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

StepSchedule parse_schedule(const json& v, std::size_t d_par, const std::string& where) {
  if (v.is_number()) return StepSchedule::constant(v.get<double>());
  if (!v.is_object()) throw ConfigError(where + ": schedule must be a number or an object");
  const std::string kind = get_as<std::string>(require_key(v, "kind", where), where + ".kind");
  if (kind == "constant") {
    reject_unknown(v, {"kind", "c"}, where);
    return StepSchedule::constant(get_number(v, "c", where));
  }
  if (kind == "power") {
    reject_unknown(v, {"kind", "c", "p"}, where);
    return StepSchedule::power(get_number(v, "c", where), get_number(v, "p", where));
  }
  if (kind == "admissible") {
    reject_unknown(v, {"kind", "c", "p", "s_lower", "s_upper", "D"}, where);
    const double sl = get_number(v, "s_lower", where);
    const double su = get_number(v, "s_upper", where);
    const double d = get_number(v, "D", where);
    if (v.contains("c") || v.contains("p")) {
      return StepSchedule::admissible(get_number(v, "c", where), get_number(v, "p", where), sl, su, d, d_par);
    }
    return StepSchedule::admissible(sl, su, d, d_par);
  }
  throw ConfigError(where + ": unknown schedule kind '" + kind + "'");
}

JointMetric parse_metric(const json& v, const std::string& where) {
  if (!v.is_object()) throw ConfigError(where + ": metric must be an object");
  reject_unknown(v, {"a1", "a2", "design_norm", "param_norm"}, where);
  JointMetric m;
  if (v.contains("a1")) m.a1 = get_number(v, "a1", where);
  if (v.contains("a2")) m.a2 = get_number(v, "a2", where);
  try {
    if (v.contains("design_norm")) m.design_norm = parse_norm(get_as<std::string>(v["design_norm"], where));
    if (v.contains("param_norm")) m.param_norm = parse_norm(get_as<std::string>(v["param_norm"], where));
    m.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return m;
}

bool is_composed_problem(const std::string& name) { return name == "nested_cosine" || name == "chance_penalty"; }

StepSchedule default_csg_schedule(const std::string& problem) {
  if (problem == "nested_cosine") return StepSchedule::constant(kNestedCosineStep);
  if (problem == "chance_penalty") return StepSchedule::power(1.0, 1.0);
  return StepSchedule::constant(1.0);
}

OptimizerSpec parse_optimizer(const json& v, const ExperimentConfig& cfg, std::size_t index) {
  const std::string where = "optimizers[" + std::to_string(index) + "]";
  if (!v.is_object()) throw ConfigError(where + ": expected an object");
  reject_unknown(v, {"name", "method", "weights", "schedule", "metric", "sag_m", "alpha", "beta", "sigma"}, where);
  OptimizerSpec spec;
  std::size_t sag_m = 100;
  spec.method = parse_method(get_as<std::string>(require_key(v, "method", where), where + ".method"), &sag_m);
  spec.sag_m = v.contains("sag_m") ? get_count(v["sag_m"], where + ".sag_m") : sag_m;
  constexpr std::size_t d_par = 1;
  spec.schedule = v.contains("schedule") ? parse_schedule(v["schedule"], d_par, where + ".schedule")
                                         : default_csg_schedule(cfg.problem);
  if (v.contains("metric")) spec.metric = parse_metric(v["metric"], where + ".metric");

  if (spec.method == Method::csg) {
    spec.strategy = parse_weight_strategy(get_as<std::string>(require_key(v, "weights", where), where + ".weights"));
  } else if (v.contains("weights")) {
    throw ConfigError(where + ": 'weights' applies to csg only");
  }

  if (spec.method == Method::scgd) spec.scgd = ScgdConfig::basic();
  if (spec.method == Method::ascgd) {
    double sigma = 0.0;
    if (v.contains("sigma")) {
      sigma = get_number(v, "sigma", where);
    } else if (cfg.problem == "nested_cosine") {
      sigma = nested_cosine_convexity();
    } else if (!v.contains("alpha")) {
      throw ConfigError(where + ": ascgd needs 'sigma' or an explicit 'alpha' schedule for this problem");
    } else {
      sigma = 1.0;
    }
    spec.scgd = ScgdConfig::accelerated_strongly_convex(sigma);
  }
  if (spec.method == Method::scgd || spec.method == Method::ascgd) {
    if (v.contains("alpha")) spec.scgd.alpha = parse_schedule(v["alpha"], d_par, where + ".alpha");
    if (v.contains("beta")) spec.scgd.beta = parse_schedule(v["beta"], d_par, where + ".beta");
  }
  if (spec.method == Method::sg || spec.method == Method::sag) {
    if (is_composed_problem(cfg.problem)) {
      throw ConfigError(where + ": " + to_string(spec.method) + " needs a problem without an outer composition");
    }
  }

  if (v.contains("name")) {
    spec.name = get_as<std::string>(v["name"], where + ".name");
  } else {
    spec.name = to_string(spec.method);
    if (spec.method == Method::csg) spec.name += "-" + to_string(spec.strategy);
  }
  if (spec.name.empty()) throw ConfigError(where + ": empty name");
  return spec;
}

}  // namespace

Method parse_method(std::string_view text, std::size_t* sag_m) {
  if (text == "csg") return Method::csg;
  if (text == "sg") return Method::sg;
  if (text == "scgd") return Method::scgd;
  if (text == "ascgd") return Method::ascgd;
  if (text == "sag") return Method::sag;
  if (text.starts_with("sag(") && text.ends_with(")")) {
    const std::string arg(text.substr(4, text.size() - 5));
    char* end = nullptr;
    const unsigned long long m = std::strtoull(arg.c_str(), &end, 10);
    if (arg.empty() || *end != '\0' || m == 0) throw ConfigError("sag(m): m must be a positive integer");
    if (sag_m != nullptr) *sag_m = static_cast<std::size_t>(m);
    return Method::sag;
  }
  throw ConfigError("unknown method '" + std::string(text) + "' (expected csg, sg, sag(m), scgd or ascgd)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::csg:
      return "csg";
    case Method::sg:
      return "sg";
    case Method::sag:
      return "sag";
    case Method::scgd:
      return "scgd";
    case Method::ascgd:
      return "ascgd";
  }
  return "csg";
}

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(doc,
                 {"problem", "optimizers", "replications", "iterations", "base_seed", "start_region", "output_dir",
                  "threads", "record_timing", "csv_stride", "write_files", "tolerances", "confidence",
                  "stationarity_tol", "stationarity_t", "oracle_resolution"},
                 "config");
  ExperimentConfig cfg;
  cfg.source_json = ordered_json::parse(json_text).dump();

  const json& prob = require_key(doc, "problem", "config");
  if (prob.is_string()) {
    cfg.problem = prob.get<std::string>();
  } else if (prob.is_object()) {
    reject_unknown(prob, {"name", "lambda", "a"}, "config.problem");
    cfg.problem = get_as<std::string>(require_key(prob, "name", "config.problem"), "config.problem.name");
    if (prob.contains("lambda")) cfg.penalty_lambda = get_number(prob, "lambda", "config.problem");
    if (prob.contains("a")) cfg.penalty_a = get_number(prob, "a", "config.problem");
  } else {
    throw ConfigError("config.problem: expected a name or an object");
  }
  if (cfg.problem != "quadratic1d" && cfg.problem != "nested_cosine" && cfg.problem != "chance_penalty") {
    throw ConfigError("config.problem: unknown problem '" + cfg.problem +
                      "' (expected quadratic1d, nested_cosine or chance_penalty)");
  }

  if (doc.contains("replications")) cfg.replications = get_count(doc["replications"], "config.replications");
  if (cfg.replications < 1) throw ConfigError("config.replications must be >= 1");
  if (doc.contains("iterations")) cfg.iterations = get_count(doc["iterations"], "config.iterations");
  if (doc.contains("base_seed")) cfg.base_seed = get_as<std::uint64_t>(doc["base_seed"], "config.base_seed");
  if (doc.contains("output_dir")) cfg.output_dir = get_as<std::string>(doc["output_dir"], "config.output_dir");
  if (doc.contains("threads")) cfg.threads = get_count(doc["threads"], "config.threads");
  if (doc.contains("record_timing")) cfg.record_timing = get_as<bool>(doc["record_timing"], "config.record_timing");
  if (doc.contains("write_files")) cfg.write_files = get_as<bool>(doc["write_files"], "config.write_files");
  if (doc.contains("csv_stride")) cfg.csv_stride = get_count(doc["csv_stride"], "config.csv_stride");
  if (cfg.csv_stride < 1) throw ConfigError("config.csv_stride must be >= 1");
  if (doc.contains("tolerances")) {
    cfg.tolerances = get_as<std::vector<double>>(doc["tolerances"], "config.tolerances");
    for (double t : cfg.tolerances) {
      if (!(t > 0.0)) throw ConfigError("config.tolerances: entries must be > 0");
    }
  }
  if (doc.contains("confidence")) cfg.confidence = get_number(doc, "confidence", "config");
  if (!(cfg.confidence > 0.0 && cfg.confidence <= 1.0)) throw ConfigError("config.confidence must lie in (0, 1]");
  cfg.stop.max_iters = cfg.iterations;
  if (doc.contains("stationarity_tol")) cfg.stop.stationarity_tol = get_number(doc, "stationarity_tol", "config");
  if (doc.contains("stationarity_t")) cfg.stop.stationarity_t = get_number(doc, "stationarity_t", "config");
  cfg.stop.validate();
  if (doc.contains("oracle_resolution")) cfg.oracle_resolution = get_number(doc, "oracle_resolution", "config");

  const BoxDomain domain = [&] {
    if (cfg.problem == "quadratic1d") return make_quadratic_1d().domain;
    if (cfg.problem == "nested_cosine") return make_nested_cosine().inner.domain;
    return make_chance_penalty(cfg.penalty_lambda, cfg.penalty_a).inner.domain;
  }();
  if (doc.contains("start_region")) {
    const json& sr = doc["start_region"];
    if (!sr.is_object()) throw ConfigError("config.start_region: expected {lower, upper}");
    reject_unknown(sr, {"lower", "upper"}, "config.start_region");
    try {
      cfg.start_region = BoxDomain(get_as<std::vector<double>>(require_key(sr, "lower", "config.start_region"), "lower"),
                                   get_as<std::vector<double>>(require_key(sr, "upper", "config.start_region"), "upper"));
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("config.start_region: ") + e.what());
    }
    if (!cfg.start_region->subset_of(domain)) throw ConfigError("config.start_region must lie inside the design domain");
  }

  const json& opts = require_key(doc, "optimizers", "config");
  if (!opts.is_array() || opts.empty()) throw ConfigError("config.optimizers: expected a nonempty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < opts.size(); ++i) {
    cfg.optimizers.push_back(parse_optimizer(opts[i], cfg, i));
    if (!names.insert(cfg.optimizers.back().name).second) {
      throw ConfigError("config.optimizers: duplicate name '" + cfg.optimizers.back().name + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Statistics

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile: no data");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile: level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::optional<std::size_t> steps_to_tolerance(const std::vector<std::vector<double>>& errors, double tolerance,
                                              double confidence) {
  if (errors.empty()) throw InvalidInput("steps_to_tolerance: no traces");
  std::size_t longest = 0;
  for (const auto& e : errors) longest = std::max(longest, e.size());
  const double needed = confidence * static_cast<double>(errors.size());
  for (std::size_t n = 0; n < longest; ++n) {
    std::size_t below = 0;
    for (const auto& e : errors) {
      if (n < e.size() && e[n] < tolerance) ++below;
    }
    if (static_cast<double>(below) >= needed) return n;
  }
  return std::nullopt;
}

const OptimizerResult& ExperimentResult::at(std::string_view name) const {
  for (const auto& o : optimizers) {
    if (o.name == name) return o;
  }
  throw InvalidInput("no optimizer named '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Experiment driver

namespace {

struct ProblemBundle {
  bool composed = false;
  Problem plain;
  ComposedObjective comp;

  const Problem& inner() const { return composed ? comp.inner : plain; }
  const BoxDomain& domain() const { return inner().domain; }
};

ProblemBundle make_bundle(const ExperimentConfig& cfg) {
  ProblemBundle b;
  if (cfg.problem == "quadratic1d") {
    b.plain = make_quadratic_1d();
  } else if (cfg.problem == "nested_cosine") {
    b.composed = true;
    b.comp = make_nested_cosine();
  } else {
    b.composed = true;
    b.comp = make_chance_penalty(cfg.penalty_lambda, cfg.penalty_a);
    b.comp.theta_star = theta_opt_oracle(b.comp, cfg.oracle_resolution);
  }
  return b;
}

void validate_against(const OptimizerSpec& spec, const ProblemBundle& b) {
  if (spec.method != Method::csg) return;
  const Problem& in = b.inner();
  spec.strategy.validate(in.d_par, &in.dist);
  if (b.composed && b.comp.y_dist) spec.strategy.validate(b.comp.d_y(), &*b.comp.y_dist);
  if (spec.schedule.kind() == StepSchedule::Kind::admissible && spec.schedule.d_par() != in.d_par) {
    throw ConfigError(spec.name + ": admissible schedule built for the wrong parameter dimension");
  }
}

RunTrace run_one(const OptimizerSpec& spec, const ProblemBundle& b, const Design& start, Rng rng,
                 const ExperimentConfig& cfg) {
  const StepOptions options{NeighborSearch::indexed, cfg.record_timing};
  switch (spec.method) {
    case Method::csg:
      if (b.composed) return run_csg(b.comp, start, spec.strategy, spec.schedule, spec.metric, cfg.stop, rng, options);
      return run_csg(b.plain, start, spec.strategy, spec.schedule, spec.metric, cfg.stop, rng, options);
    case Method::sg:
      return run_sg(b.plain, start, spec.schedule, cfg.stop, rng);
    case Method::sag:
      return run_sag(b.plain, start, spec.schedule, spec.sag_m, cfg.stop, rng);
    case Method::scgd:
    case Method::ascgd:
      if (b.composed) return run_scgd(b.comp, start, spec.scgd, cfg.stop, rng);
      return run_scgd(identity_composition(b.plain), start, spec.scgd, cfg.stop, rng);
  }
  throw ConfigError("unknown method");
}

void append_number(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_rows(std::string& out, const RunTrace& trace, std::size_t rep, const std::string& name,
                 std::size_t stride) {
  const std::size_t last = trace.rows.empty() ? 0 : trace.rows.back().iteration;
  for (const auto& row : trace.rows) {
    if (row.iteration % stride != 0 && row.iteration != last) continue;
    out += std::to_string(row.iteration);
    out += ',';
    out += std::to_string(rep);
    out += ',';
    out += name;
    out += ',';
    for (std::size_t i = 0; i < row.theta.size(); ++i) {
      if (i > 0) out += ';';
      append_number(out, row.theta[i]);
    }
    for (double v : {row.abs_error, row.jhat, row.stationarity, row.grad_error}) {
      out += ',';
      append_number(out, v);
    }
    out += ',';
    out += std::to_string(row.grad_evals);
    out += ',';
    out += std::to_string(row.sample_draws);
    out += ',';
    out += std::to_string(row.weight_time_ns);
    out += '\n';
  }
}

struct RepOutput {
  std::vector<std::string> csv;
  std::vector<std::vector<double>> errors;
  std::vector<std::optional<std::string>> failures;
  std::vector<bool> feasible;
};

std::string file_stem(const std::string& name) {
  std::string s = name;
  for (char& c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return s;
}

constexpr const char* kCsvHeader =
    "iteration,replication,optimizer,theta,abs_error,jhat,stationarity,grad_error,grad_evals,sample_draws,"
    "weight_time_ns\n";

std::string tolerance_key(double tol) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", tol);
  return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.optimizers.empty()) throw ConfigError("run_experiment: no optimizers");
  if (cfg.replications < 1) throw ConfigError("run_experiment: replications must be >= 1");
  const ProblemBundle bundle = make_bundle(cfg);
  for (const auto& spec : cfg.optimizers) validate_against(spec, bundle);
  const BoxDomain start_region = cfg.start_region.value_or(bundle.domain());
  if (!start_region.subset_of(bundle.domain())) throw ConfigError("start_region must lie inside the design domain");

  const std::size_t n_opt = cfg.optimizers.size();
  const std::size_t reps = cfg.replications;

  ExperimentResult result;
  result.reference = bundle.composed ? bundle.comp.theta_star : bundle.plain.theta_star;
  result.optimizers.resize(n_opt);
  for (std::size_t o = 0; o < n_opt; ++o) {
    result.optimizers[o].name = cfg.optimizers[o].name;
    result.optimizers[o].errors.resize(reps);
  }

  std::vector<std::ofstream> files;
  if (cfg.write_files) {
    std::filesystem::create_directories(cfg.output_dir);
    for (const auto& spec : cfg.optimizers) {
      const auto path = (std::filesystem::path(cfg.output_dir) / (file_stem(spec.name) + ".csv")).string();
      files.emplace_back(path, std::ios::binary | std::ios::trunc);
      if (!files.back()) throw Error("cannot write '" + path + "'");
      files.back() << kCsvHeader;
      result.csv_paths.push_back(path);
    }
  }

  // Completed replications are flushed strictly in replication order, so the
  // files do not depend on scheduling.
  std::mutex mu;
  std::vector<std::optional<RepOutput>> pending(reps);
  std::size_t next_flush = 0;
  auto flush_ready = [&] {
    while (next_flush < reps && pending[next_flush]) {
      RepOutput& out = *pending[next_flush];
      for (std::size_t o = 0; o < n_opt; ++o) {
        if (cfg.write_files) files[o] << out.csv[o];
        auto& res = result.optimizers[o];
        res.errors[next_flush] = std::move(out.errors[o]);
        if (out.failures[o]) {
          ++res.failures;
          res.failure_messages.push_back("replication " + std::to_string(next_flush) + ": " + *out.failures[o]);
        }
        res.feasible = res.feasible && out.feasible[o];
      }
      pending[next_flush].reset();
      ++next_flush;
    }
  };

  auto run_replication = [&](std::size_t r) {
    Rng rng = make_rng(cfg.base_seed + r);
    std::vector<double> start(start_region.dimension());
    for (std::size_t i = 0; i < start.size(); ++i) {
      start[i] = uniform_in(rng, start_region.lower()[i], start_region.upper()[i]);
    }
    const Design theta0(std::move(start));
    RepOutput out;
    out.csv.resize(n_opt);
    out.errors.resize(n_opt);
    out.failures.resize(n_opt);
    out.feasible.assign(n_opt, true);
    for (std::size_t o = 0; o < n_opt; ++o) {
      const RunTrace trace = run_one(cfg.optimizers[o], bundle, theta0, rng, cfg);
      if (cfg.write_files) append_rows(out.csv[o], trace, r, cfg.optimizers[o].name, cfg.csv_stride);
      auto& err = out.errors[o];
      err.reserve(cfg.iterations + 1);
      for (const auto& row : trace.rows) {
        err.push_back(row.abs_error);
        out.feasible[o] = out.feasible[o] && bundle.domain().contains(row.theta);
      }
      // A run stopped by the stationarity rule keeps its last iterate.
      if (trace.ok()) {
        while (err.size() < cfg.iterations + 1) err.push_back(err.back());
      }
      out.failures[o] = trace.failure;
    }
    std::lock_guard<std::mutex> lock(mu);
    pending[r] = std::move(out);
    flush_ready();
  };

  std::size_t workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  workers = std::min(workers, reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        run_replication(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(reps);
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  for (auto& f : files) f.close();

  // Aggregation over successful replications.
  for (std::size_t o = 0; o < n_opt; ++o) {
    auto& res = result.optimizers[o];
    const std::size_t ok = reps - res.failures;
    if (static_cast<double>(ok) < 0.9 * static_cast<double>(reps)) {
      throw Error(res.name + ": only " + std::to_string(ok) + " of " + std::to_string(reps) +
                  " replications succeeded (first failure: " + res.failure_messages.front() + ")");
    }
    std::vector<std::vector<double>> good;
    good.reserve(ok);
    for (std::size_t r = 0; r < reps; ++r) {
      if (res.errors[r].size() == cfg.iterations + 1) good.push_back(res.errors[r]);
    }
    res.quantiles.assign(cfg.iterations + 1, {});
    std::vector<double> column;
    for (std::size_t n = 0; n <= cfg.iterations; ++n) {
      column.clear();
      for (const auto& e : good) {
        if (!std::isnan(e[n])) column.push_back(e[n]);
      }
      for (std::size_t q = 0; q < kQuantileLevels.size(); ++q) {
        res.quantiles[n][q] = column.empty() ? std::nan("") : quantile(column, kQuantileLevels[q]);
      }
    }
    for (double tol : cfg.tolerances) {
      res.steps_to_tol.emplace_back(tol, good.empty() ? std::nullopt
                                                      : steps_to_tolerance(good, tol, cfg.confidence));
    }
  }

  if (cfg.write_files) {
    ordered_json summary;
    summary["config"] = ordered_json::parse(cfg.source_json.empty() ? "{}" : cfg.source_json);
    if (result.reference) summary["reference_theta"] = result.reference->coords();
    ordered_json per = ordered_json::object();
    for (const auto& res : result.optimizers) {
      ordered_json o;
      o["quantile_levels"] = kQuantileLevels;
      ordered_json qs = ordered_json::array();
      for (const auto& q : res.quantiles) {
        ordered_json row = ordered_json::array();
        for (double v : q) row.push_back(std::isnan(v) ? ordered_json(nullptr) : ordered_json(v));
        qs.push_back(std::move(row));
      }
      o["quantiles"] = std::move(qs);
      ordered_json st = ordered_json::object();
      for (const auto& [tol, n] : res.steps_to_tol) st[tolerance_key(tol)] = n ? ordered_json(*n) : ordered_json(nullptr);
      o["steps_to_tolerance"] = std::move(st);
      o["failures"] = res.failures;
      o["failure_messages"] = res.failure_messages;
      per[res.name] = std::move(o);
    }
    summary["per_optimizer"] = std::move(per);
    result.summary_path = (std::filesystem::path(cfg.output_dir) / "summary.json").string();
    std::ofstream js(result.summary_path, std::ios::binary | std::ios::trunc);
    js << summary.dump(1) << '\n';

    std::ofstream table(std::filesystem::path(cfg.output_dir) / "steps_to_tolerance.csv",
                        std::ios::binary | std::ios::trunc);
    table << "optimizer,tolerance,steps\n";
    for (const auto& res : result.optimizers) {
      for (const auto& [tol, n] : res.steps_to_tol) {
        table << res.name << ',' << tolerance_key(tol) << ',' << (n ? std::to_string(*n) : std::string("none"))
              << '\n';
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Figure recipes

std::string figure_config_json(std::string_view id, const FigureOptions& options) {
  ordered_json cfg;
  ordered_json opts = ordered_json::array();
  auto csg = [](const std::string& name, const std::string& weights, const ordered_json& schedule) {
    return ordered_json{{"name", name}, {"method", "csg"}, {"weights", weights}, {"schedule", schedule}};
  };
  const ordered_json tau1 = {{"kind", "constant"}, {"c", 1.0}};
  std::size_t reps = 100;
  std::size_t iters = 1000;

  if (id == "fig1") {
    cfg["problem"] = "quadratic1d";
    opts.push_back(csg("csg-empirical", "empirical", tau1));
    opts.push_back(csg("csg-inexact-beta1", "inexact_hybrid(1)", tau1));
    opts.push_back(csg("csg-inexact-beta1.5", "inexact_hybrid(1.5)", tau1));
    opts.push_back(csg("csg-inexact-beta2", "inexact_hybrid(2)", tau1));
    opts.push_back(csg("csg-exact-hybrid", "exact_hybrid", tau1));
    cfg["tolerances"] = {1e-1, 1e-2};
  } else if (id == "fig2") {
    cfg["problem"] = "quadratic1d";
    const std::vector<std::pair<std::string, double>> steps = {{"n^-1", 1.0}, {"n^-2/3", 2.0 / 3.0},
                                                               {"n^-1/3", 1.0 / 3.0}, {"1", 0.0}};
    for (const auto& [label, p] : steps) {
      const ordered_json sched = {{"kind", "power"}, {"c", 1.0}, {"p", p}};
      opts.push_back(ordered_json{{"name", "sg tau=" + label}, {"method", "sg"}, {"schedule", sched}});
      opts.push_back(csg("csg-empirical tau=" + label, "empirical", sched));
      opts.push_back(csg("csg-exact-hybrid tau=" + label, "exact_hybrid", sched));
      opts.push_back(csg("csg-exact tau=" + label, "exact", sched));
    }
    cfg["tolerances"] = {1e-1, 1e-2};
  } else if (id == "fig3" || id == "fig4") {
    cfg["problem"] = "nested_cosine";
    iters = 5000;
    cfg["start_region"] = {{"lower", {5.5}}, {"upper", {9.5}}};
    const ordered_json step = {{"kind", "constant"}, {"c", kNestedCosineStep}};
    opts.push_back(ordered_json{{"name", "ascgd"}, {"method", "ascgd"}});
    opts.push_back(csg("csg-empirical", "empirical", step));
    opts.push_back(csg("csg-inexact-beta1.5", "inexact_hybrid(1.5)", step));
    opts.push_back(csg("csg-exact-hybrid", "exact_hybrid", step));
    if (id == "fig4") {
      cfg["tolerances"] = {1e-1, 1e-2, 1e-3, 1e-4};
      cfg["csv_stride"] = 10;
    } else {
      cfg["tolerances"] = {1e-1, 1e-2};
    }
  } else if (id == "fig5") {
    cfg["problem"] = {{"name", "chance_penalty"}, {"lambda", 3.0}, {"a", 25.0}};
    iters = 2000;
    const ordered_json step = {{"kind", "power"}, {"c", 1.0}, {"p", 1.0}};
    opts.push_back(ordered_json{{"name", "scgd"}, {"method", "scgd"}});
    opts.push_back(csg("csg-empirical", "empirical", step));
    opts.push_back(csg("csg-inexact-beta1.5", "inexact_hybrid(1.5)", step));
    opts.push_back(csg("csg-exact-hybrid", "exact_hybrid", step));
    cfg["tolerances"] = {1e-1, 1e-2, 1e-3};
  } else {
    throw ConfigError("unknown figure '" + std::string(id) + "' (expected fig1 .. fig5)");
  }
  cfg["replications"] = options.replications.value_or(reps);
  cfg["iterations"] = options.iterations.value_or(iters);
  cfg["base_seed"] = options.base_seed;
  cfg["output_dir"] = options.output_dir.value_or("csg_out/" + std::string(id));
  if (options.threads) cfg["threads"] = *options.threads;
  cfg["optimizers"] = std::move(opts);
  return cfg.dump();
}

ExperimentResult reproduce_figure(std::string_view id, const FigureOptions& options) {
  return run_experiment(parse_config(figure_config_json(id, options)));
}

}  // namespace csg
