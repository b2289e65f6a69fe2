#include "predfb/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "predfb/builtins.hpp"
#include "predfb/io.hpp"
#include "predfb/linear.hpp"
#include "predfb/math_util.hpp"
#include "predfb/sim.hpp"
#include "predfb/sweeps.hpp"

namespace predfb {
namespace {

using nlohmann::json;

double require_num(const json& p, const char* key) {
  if (!p.contains(key) || !p[key].is_number())
    throw ValidationError(std::string("config: missing numeric field \"") + key +
                          "\"");
  return p[key].get<double>();
}

double num_or(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_number())
    throw ValidationError(std::string("config: field \"") + key +
                          "\" must be a number");
  return p[key].get<double>();
}

Mat mat_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ValidationError(std::string("config: \"") + name +
                          "\" must be a nested array (rows of numbers)");
  const std::size_t rows = j.size(), cols = j[0].size();
  Mat m(static_cast<long>(rows), static_cast<long>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ValidationError(std::string("config: \"") + name +
                            "\" rows have inconsistent lengths");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw ValidationError(std::string("config: \"") + name +
                              "\" entries must be numbers");
      m(static_cast<long>(r), static_cast<long>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Vec vec_from_json(const json& j, const char* name) {
  if (j.is_number()) {
    Vec v(1);
    v(0) = j.get<double>();
    return v;
  }
  if (!j.is_array() || j.empty())
    throw ValidationError(std::string("config: \"") + name +
                          "\" must be a number or a non-empty array");
  Vec v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ValidationError(std::string("config: \"") + name +
                            "\" entries must be numbers");
    v(static_cast<long>(i)) = j[i].get<double>();
  }
  return v;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_to_json(const Mat& m) {
  json a = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

LinearSystem linear_from_json(const json& sys) {
  if (sys.is_object() && sys.contains("builtin")) {
    std::string name = sys["builtin"].get<std::string>();
    if (name == "benchmark") return benchmark_linear(require_num(sys, "p"));
    throw ValidationError("config: unknown linear builtin \"" + name + "\"");
  }
  if (!sys.is_object() || !sys.contains("A") || !sys.contains("B") ||
      !sys.contains("K"))
    throw ValidationError("config: linear system needs A, B, K and delay");
  LinearSystem lin;
  lin.A = mat_from_json(sys["A"], "A");
  lin.B = mat_from_json(sys["B"], "B");
  lin.K = mat_from_json(sys["K"], "K");
  lin.delay = require_num(sys, "delay");
  if (!(lin.delay > 0.0)) throw ValidationError("config: delay must be positive");
  if (lin.B.rows() != lin.A.rows() || lin.K.cols() != lin.A.rows() ||
      lin.K.rows() != lin.B.cols())
    throw ValidationError("config: A, B, K dimensions are inconsistent");
  return lin;
}

// Piecewise-linear record from knot rows [t, u_1, ..., u_m] covering
// [lo, hi]; "zero" records the zero signal at the two endpoints.
std::shared_ptr<InputHistory> history_from_json(const json& j, int input_dim,
                                                double lo, double hi) {
  auto hist = std::make_shared<InputHistory>(input_dim, hi - lo);
  if (j.is_string() && j.get<std::string>() == "zero") {
    hist->record(lo, Vec::Zero(input_dim));
    hist->record(hi, Vec::Zero(input_dim));
    return hist;
  }
  if (!j.is_array() || j.size() < 2)
    throw ValidationError("config: input must be \"zero\" or >= 2 knot rows");
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != input_dim + 1)
      throw ValidationError("config: input knot rows are [t, u_1, ..., u_m]");
    double t = row[0].get<double>();
    Vec u(input_dim);
    for (int c = 0; c < input_dim; ++c) u(c) = row[c + 1].get<double>();
    hist->record(t, u);
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(lo) + std::abs(hi));
  if (hist->start_time() > lo + tol || hist->end_time() < hi - tol)
    throw ValidationError("config: input knots must cover [" + fmt_g17(lo) + ", " +
                          fmt_g17(hi) + "]");
  return hist;
}

InputSignal signal_from_json(const json& j, int input_dim, double lo, double hi) {
  if (j.is_string() && j.get<std::string>() == "zero")
    return [input_dim](double) { return Vec::Zero(input_dim); };
  auto hist = history_from_json(j, input_dim, lo, hi);
  return [hist](double t) {
    return hist->value(std::clamp(t, hist->start_time(), hist->end_time()));
  };
}

ScheduleKind schedule_kind_from_json(const json& sched) {
  std::string kind = sched.value("kind", "uniform");
  if (kind == "uniform") return ScheduleKind::Uniform;
  if (kind == "jittered") return ScheduleKind::Jittered;
  if (kind == "random") return ScheduleKind::Random;
  throw ValidationError("config: unknown schedule kind \"" + kind + "\"");
}

void write_summary(const std::string& out_dir, const json& summary) {
  write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");
}

// Accuracy demand for cubic runs: zero-argument "design" resolves the
// certificate-derived curve; objects select the practical curve.
AccuracyFn accuracy_from_json(const json& p, const NonlinearSystem& sys,
                              const CompletenessCertificate& cert,
                              const FeedbackCertificate& fb, const BoundsPack& pack,
                              double sample_period) {
  const json acc = p.contains("accuracy") ? p["accuracy"] : json("practical");
  if (acc.is_string() && acc.get<std::string>() == "design")
    return derive_design(sys, cert, fb, pack, sample_period).accuracy;
  if (acc.is_string() && acc.get<std::string>() == "practical")
    return practical_accuracy(pack, 20.0, 1e6);
  if (acc.is_object())
    return practical_accuracy(pack, num_or(acc, "scale", 20.0),
                              num_or(acc, "grid_budget", 1e6));
  throw ValidationError(
      "config: accuracy must be \"design\", \"practical\", or an object");
}

int run_sweep_f(const json& p, const std::string& out_dir, const json& echo) {
  double r = require_num(p, "sample_period");
  double pmin = num_or(p, "p_min", 1.01);
  double pmax = num_or(p, "p_max", 10.0);
  double step = num_or(p, "p_step", 0.01);
  if (!(step > 0.0) || !(pmax > pmin))
    throw ValidationError("config: need p_step > 0 and p_max > p_min");
  std::vector<double> grid;
  for (long long i = 0;; ++i) {
    double v = pmin + step * static_cast<double>(i);
    if (v > pmax + 1e-12) break;
    grid.push_back(v);
  }
  FSweepResult res = f_sweep(r, grid);
  write_fsweep_csv(out_dir + "/fsweep.csv", res);
  json summary;
  summary["argmin_p"] = res.argmin_p;
  summary["f_min"] = res.f_min;
  summary["n_star_at_argmin"] = res.n_star_at_argmin;
  summary["rows"] = res.rows.size();
  summary["config"] = echo;
  write_summary(out_dir, summary);
  return 0;
}

int run_design_linear(const json& p, const std::string& out_dir, const json& echo) {
  LinearSystem lin = linear_from_json(p.at("system"));
  double r = require_num(p, "sample_period");
  if (!(r > 0.0)) throw ValidationError("config: sample_period must be positive");
  LinearGainReport rep = iss_gain(lin.A, lin.B, lin.K);
  double gamma = rep.gamma;
  std::string gamma_source = "iss";
  if (p.contains("gamma")) {  // reproduction mode: pin the gain by hand
    gamma = require_num(p, "gamma");
    gamma_source = "config";
  }
  MinGridResult g = min_grid_count(lin, r, gamma);
  json summary;
  summary["decay_rate"] = rep.mu;
  summary["spectral_abscissa"] = rep.abscissa;
  summary["gain"] = gamma;
  summary["gain_source"] = gamma_source;
  summary["gain_margin"] = rep.margin;
  summary["quadratic_certificate"] = mat_to_json(rep.P);
  summary["grid_scale"] = g.lhs;
  summary["grid_count"] = g.n_star;
  summary["config"] = echo;
  write_summary(out_dir, summary);
  return 0;
}

int run_predict(const json& p, const std::string& out_dir, const json& echo,
                std::uint64_t /*seed*/) {
  const json& sysj = p.at("system");
  json summary;
  if (sysj.is_object() && sysj.contains("A")) {
    LinearSystem lin = linear_from_json(sysj);
    if (!p.contains("grid") || !p["grid"].is_number_integer())
      throw ValidationError("config: linear predict needs an integer \"grid\"");
    long long grid = p["grid"].get<long long>();
    Vec x0 = vec_from_json(p.at("x0"), "x0");
    int m = static_cast<int>(lin.B.cols());
    auto hist = history_from_json(p.at("input"), m, 0.0, lin.delay);
    Vec z = linear_predict(lin.A, lin.B, *hist, x0, lin.delay, lin.delay, grid);
    double sup = hist->sup_norm_window(lin.delay);
    summary["prediction"] = vec_to_json(z);
    summary["steps"] = grid;
    summary["step_size"] = lin.delay / static_cast<double>(grid);
    summary["error_bound"] =
        linear_error_bound(spectral_norm(lin.A), spectral_norm(lin.B), lin.delay,
                           grid, x0.norm(), sup);
    summary["size_measure"] = x0.norm() + sup;
  } else {
    if (!sysj.is_object() || sysj.value("builtin", "") != "cubic")
      throw ValidationError("config: predict system must be linear matrices or "
                            "{\"builtin\": \"cubic\"}");
    double delay = require_num(p, "delay");
    NonlinearSystem sys = cubic_system();
    CompletenessCertificate cert = cubic_completeness(delay);
    BoundsPack pack = build_bounds_pack(sys, cert, delay);
    FeedbackCertificate fb = cubic_feedback(delay);
    AccuracyFn acc = accuracy_from_json(p, sys, cert, fb, pack, delay);
    Vec x0 = vec_from_json(p.at("x0"), "x0");
    auto hist = history_from_json(p.at("input"), 1, 0.0, delay);
    double n_max = num_or(p, "n_max", 1e7);
    PredictorOutput out;
    if (p.contains("grid") && p["grid"].is_number_integer()) {
      long long forced = p["grid"].get<long long>();
      if (forced < 1) throw ValidationError("config: grid must be >= 1");
      Mat states = euler_trajectory(sys, x0, *hist, 0.0, delay, forced);
      out.z = states.col(forced);
      out.steps = forced;
      out.h = delay / static_cast<double>(forced);
      out.size_measure = x0.norm() + hist->sup_norm_window(delay);
      out.apriori_bound = apriori_error_bound(pack, out.size_measure, forced);
      out.accuracy_target = acc.value(out.size_measure);
    } else {
      out = predict(sys, pack, acc, *hist, x0, delay, n_max);
    }
    summary["prediction"] = vec_to_json(out.z);
    summary["steps"] = out.steps;
    summary["step_size"] = out.h;
    summary["error_bound"] = out.apriori_bound;
    summary["accuracy_target"] = out.accuracy_target;
    summary["size_measure"] = out.size_measure;
  }
  summary["config"] = echo;
  write_summary(out_dir, summary);
  return 0;
}

int run_simulate(const json& p, const std::string& out_dir, const json& echo,
                 std::uint64_t seed) {
  const json& schedj = p.at("schedule");
  double period = require_num(schedj, "period");
  double horizon = require_num(schedj, "horizon");
  SamplingSchedule sched =
      make_schedule(schedule_kind_from_json(schedj), period, horizon, seed);

  SimOptions opts;
  opts.steps_per_unit = static_cast<int>(num_or(p, "steps_per_unit", 1000));
  opts.record_dt = num_or(p, "record_dt", 0.0);
  opts.n_max = num_or(p, "n_max", 1e7);

  const json& sysj = p.at("system");
  Trajectory traj;
  json summary;
  double window = 0.0;
  const bool is_cubic = sysj.is_object() && sysj.value("builtin", "") == "cubic";
  if (!is_cubic) {
    LinearSystem lin = linear_from_json(sysj);
    if (!p.contains("grid") || !p["grid"].is_number_integer())
      throw ValidationError("config: linear simulate needs an integer \"grid\"");
    long long grid = p["grid"].get<long long>();
    Vec x0 = vec_from_json(p.at("x0"), "x0");
    int m = static_cast<int>(lin.B.cols());
    InputSignal u0 = signal_from_json(p.contains("input") ? p["input"] : json("zero"),
                                      m, -lin.delay, 0.0);
    traj = simulate_linear(lin, sched, x0, u0, opts, grid);
    window = lin.delay;
  } else {
    double delay = require_num(p, "delay");
    NonlinearSystem sys = cubic_system();
    CompletenessCertificate cert = cubic_completeness(delay, period);
    BoundsPack pack = build_bounds_pack(sys, cert, delay);
    FeedbackCertificate fb = cubic_feedback(period);
    AccuracyFn acc = accuracy_from_json(p, sys, cert, fb, pack, period);
    if (p.contains("grid") && p["grid"].is_number_integer())
      opts.forced_grid = p["grid"].get<long long>();
    Vec x0 = vec_from_json(p.at("x0"), "x0");
    InputSignal u0 = signal_from_json(p.contains("input") ? p["input"] : json("zero"),
                                      1, -delay, 0.0);
    traj = simulate_nonlinear(sys, pack, acc, sched, x0, u0, opts);
    window = delay;

    DerivedDesign design = derive_design(sys, cert, fb, pack, period);
    ClaimReport claims = claim_checks(traj, design, fb);
    json cj;
    cj["ultimate_level"] = claims.ultimate_level;
    cj["reach_time"] = claims.reach_time;
    cj["stayed"] = claims.stayed;
    cj["max_after_reach"] = claims.max_after_reach;
    cj["ultimate_ok"] = claims.ultimate_ok;
    cj["capture_time"] = claims.capture_time;
    cj["state_rate"] = claims.state_rate;
    cj["input_rate"] = claims.input_rate;
    cj["exponential_ok"] = claims.exponential_ok;
    cj["sup_metric"] = claims.sup_metric;
    cj["bounded_ok"] = claims.bounded_ok;
    cj["ok"] = claims.ok;
    summary["claims"] = cj;
  }

  write_trajectory_csv(out_dir + "/trajectory.csv", traj);
  write_history_csv(out_dir + "/history.csv", traj);

  const double span = traj.times.back() - traj.times.front();
  if (span >= 5.0 * window - 1e-9) {
    DecayFit fit = decay_fit(traj, window);
    summary["decay_rate"] = fit.rate;
    summary["prefactor"] = std::exp(fit.log_m0);
    summary["envelope_excess"] = fit.envelope_excess;
    summary["envelope_ok"] = fit.envelope_ok;
    summary["final_ratio"] = fit.final_ratio;
  } else {
    summary["decay_rate"] = nullptr;  // run too short for a fit
  }
  summary["rows"] = traj.times.size();
  summary["samples"] = traj.samples.size();
  long long max_grid = 0;
  for (const auto& sp : traj.samples) max_grid = std::max(max_grid, sp.prediction.steps);
  summary["max_grid"] = max_grid;
  summary["config"] = echo;
  write_summary(out_dir, summary);
  return 0;
}

int run_verify_bounds(const json& p, const std::string& out_dir, const json& echo,
                      std::uint64_t seed) {
  std::string which = p.value("system", "linear");
  int cases = static_cast<int>(num_or(p, "cases", 100));
  json summary;
  bool ok = false;
  if (which == "linear" || which == "zero") {
    double delay = num_or(p, "delay", 1.0);
    LinearBoundSweep res;
    if (which == "linear") {
      res = linear_bound_sweep(cases, delay, seed);
    } else {
      // Zero plant: the predictor, the reference, and the bound all vanish.
      Mat Z = Mat::Zero(1, 1);
      for (int i = 0; i < cases; ++i) {
        InputHistory hist(1, delay);
        hist.record(0.0, Vec::Zero(1));
        hist.record(delay, Vec::Zero(1));
        LinearBoundRow row;
        row.case_index = static_cast<std::uint64_t>(i);
        row.steps = 8;
        Vec z = linear_predict(Z, Z, hist, Vec::Zero(1), delay, delay, row.steps);
        row.error = z.norm();
        row.bound = linear_error_bound(0.0, 0.0, delay, row.steps, 0.0, 0.0);
        row.slack = row.bound - row.error;
        res.rows.push_back(row);
      }
      res.min_slack = 0.0;
      res.all_ok = true;
      for (const auto& r : res.rows)
        if (r.slack < 0.0) res.all_ok = false;
    }
    write_linear_sweep_csv(out_dir + "/bounds.csv", res);
    summary["min_slack"] = res.min_slack;
    int viol = 0;
    for (const auto& r : res.rows)
      if (r.slack < 0.0) ++viol;
    summary["violations"] = viol;
    summary["cases"] = res.rows.size();
    ok = res.all_ok;
  } else if (which == "cubic") {
    double delay = num_or(p, "delay", 0.5);
    double n_max = num_or(p, "n_max", 2e6);
    NonlinearSystem sys = cubic_system();
    CompletenessCertificate cert = cubic_completeness(delay);
    BoundsPack pack = build_bounds_pack(sys, cert, delay);
    FeedbackCertificate fb = cubic_feedback(delay);
    AccuracyFn acc = accuracy_from_json(p, sys, cert, fb, pack, delay);
    NonlinearBoundSweep res =
        nonlinear_bound_sweep(sys, pack, acc, cases, seed, n_max);
    write_nonlinear_sweep_csv(out_dir + "/bounds.csv", res);
    summary["min_energy_slack"] = res.min_energy_slack;
    summary["min_error_slack"] = res.min_error_slack;
    summary["min_apriori_margin"] = res.min_apriori_margin;
    summary["min_state_margin"] = res.min_state_margin;
    int viol = 0;
    for (const auto& r : res.rows)
      if (!r.ok) ++viol;
    summary["violations"] = viol;
    summary["cases"] = res.rows.size();
    ok = res.all_ok;
  } else {
    throw ValidationError("config: verify-bounds system must be linear, cubic, "
                          "or zero");
  }
  summary["all_ok"] = ok;
  summary["config"] = echo;
  write_summary(out_dir, summary);
  return ok ? 0 : 1;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config: document must be an object");
  RunConfig cfg;
  if (!doc.contains("mode") || !doc["mode"].is_string())
    throw ValidationError("config: missing string field \"mode\"");
  cfg.mode = doc["mode"].get<std::string>();
  static const char* known[] = {"design-linear", "predict", "simulate", "sweep-f",
                                "verify-bounds"};
  if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
        return cfg.mode == k;
      }) == std::end(known))
    throw ValidationError("config: unknown mode \"" + cfg.mode + "\"");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer())
      throw ValidationError("config: \"seed\" must be an integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("threads")) {
    if (!doc["threads"].is_number_integer())
      throw ValidationError("config: \"threads\" must be an integer");
    cfg.threads = doc["threads"].get<int>();
  }
  cfg.params = doc;
  return cfg;
}

int run_config(const RunConfig& cfg, const std::string& out_dir) {
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  std::filesystem::create_directories(out_dir);
  json echo = cfg.params;
  echo["mode"] = cfg.mode;
  echo["seed"] = cfg.seed;
  echo["threads"] = cfg.threads;
  write_text_file(out_dir + "/config.json", echo.dump(2) + "\n");

  try {
    if (cfg.mode == "sweep-f") return run_sweep_f(cfg.params, out_dir, echo);
    if (cfg.mode == "design-linear")
      return run_design_linear(cfg.params, out_dir, echo);
    if (cfg.mode == "predict")
      return run_predict(cfg.params, out_dir, echo, cfg.seed);
    if (cfg.mode == "simulate")
      return run_simulate(cfg.params, out_dir, echo, cfg.seed);
    if (cfg.mode == "verify-bounds")
      return run_verify_bounds(cfg.params, out_dir, echo, cfg.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  throw ValidationError("config: unknown mode \"" + cfg.mode + "\"");
}

int run_cli(int argc, char** argv) {
  CLI::App app{
      "Certified predictor feedback for input-delay systems: designs, "
      "predictions, closed-loop simulations, and bound-verification sweeps "
      "driven by a JSON config. Exit codes: 0 success, 1 bound violations "
      "found (verify-bounds), 2 invalid config or arguments, 3 numerical "
      "failure."};
  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;
  int threads = -1;
  app.add_option("config", config_path, "path to the JSON config")->required();
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--threads", threads, "override the config thread count");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  json doc;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::fprintf(stderr, "error: cannot open config %s\n", config_path.c_str());
      return 2;
    }
    try {
      in >> doc;
    } catch (const json::exception& e) {
      std::fprintf(stderr, "error: config parse failed: %s\n", e.what());
      return 2;
    }
  }

  try {
    RunConfig cfg = parse_config(doc);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (threads >= 0) cfg.threads = threads;
    return run_config(cfg, out_dir);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 3;
  }
}

}  // namespace predfb
