// Acceptance gate: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line. Exit status is the number of failures.
//
//   acceptance                 run everything
//   acceptance --criterion N   run one check
//
// Checks 3 and 4 replay the same seeded sweep and split its verdicts:
// 3 owns the terminal error and state-confinement bounds, 4 owns the
// energy and per-step error envelopes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "predfb/builtins.hpp"
#include "predfb/cli.hpp"
#include "predfb/euler.hpp"
#include "predfb/linear.hpp"
#include "predfb/math_util.hpp"
#include "predfb/oracle.hpp"
#include "predfb/sim.hpp"
#include "predfb/sweeps.hpp"

using namespace predfb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Vec v1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

InputSignal zero_input() {
  return [](double) -> Vec { return Vec::Zero(1); };
}

InputSignal const_input(double c) {
  return [c](double) -> Vec { return Vec::Constant(1, c); };
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Shared cubic fixtures: delay 1/2, sampling period 1/4.
struct CubicRig {
  NonlinearSystem sys;
  CompletenessCertificate cert;
  FeedbackCertificate fb;
  BoundsPack pack;
  CubicRig()
      : sys(cubic_system()),
        cert(cubic_completeness(0.5, 0.25)),
        fb(cubic_feedback(0.25)),
        pack(build_bounds_pack(sys, cert, 0.5)) {}
};

// Initial data draw shared by checks 3, 4, and 6: |x0| + |u0| <= 1 with the
// total size, its split, and both signs seeded per case.
void draw_initial(std::uint64_t seed, std::uint64_t index, double* x0, double* u0) {
  std::mt19937_64 rng(splitmix64(seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double total = unit(rng);
  double frac = unit(rng);
  double x_mag = total * frac;
  double u_mag = total - x_mag;
  *x0 = unit(rng) < 0.5 ? -x_mag : x_mag;
  *u0 = unit(rng) < 0.5 ? -u_mag : u_mag;
}

// ---------------------------------------------------------------------------
// 1. Grid-count objective sweep: argmin 1.93, objective near 64.71, 65 cells.

Outcome criterion1() {
  std::vector<double> grid;
  for (long long i = 0;; ++i) {
    double p = 1.01 + 0.01 * static_cast<double>(i);
    if (p > 10.0 + 1e-12) break;
    grid.push_back(p);
  }
  FSweepResult res = f_sweep(1.0, grid);
  MinGridResult g = min_grid_count(benchmark_linear(res.argmin_p), 1.0,
                                   1.0 / (res.argmin_p - 1.0));
  Outcome out;
  out.pass = std::abs(res.argmin_p - 1.93) <= 1e-9 &&
             std::abs(res.f_min - 64.71) <= 0.05 && res.n_star_at_argmin == 65 &&
             g.n_star == 65;
  out.detail = "argmin p=" + num(res.argmin_p) + ", objective=" + num(res.f_min) +
               ", grid=" + std::to_string(g.n_star);
  return out;
}

// ---------------------------------------------------------------------------
// 2. Seeded scalar linear predictions never exceed the certified bound.

Outcome criterion2() {
  LinearBoundSweep sweep = linear_bound_sweep(100, 1.0, 1001);
  int violations = 0;
  for (const LinearBoundRow& row : sweep.rows)
    if (row.slack < 0.0) ++violations;
  Outcome out;
  out.pass = sweep.rows.size() == 100 && violations == 0 && sweep.all_ok;
  out.detail = std::to_string(sweep.rows.size()) + " cases, " +
               std::to_string(violations) + " violations, min slack=" +
               num(sweep.min_slack);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Seeded cubic predictions: terminal error under the a priori bound and
//    every iterate inside the certified state ball.

NonlinearBoundSweep cubic_sweep() {
  CubicRig rig;
  AccuracyFn acc = practical_accuracy(rig.pack, 20.0, 1e6);
  return nonlinear_bound_sweep(rig.sys, rig.pack, acc, 100, 1002, 2e6);
}

Outcome criterion3() {
  NonlinearBoundSweep sweep = cubic_sweep();
  int violations = 0;
  for (const NonlinearBoundRow& row : sweep.rows)
    if (row.error > row.apriori_bound || row.state_margin < 0.0) ++violations;
  Outcome out;
  out.pass = sweep.rows.size() == 100 && violations == 0 &&
             sweep.min_apriori_margin >= 0.0 && sweep.min_state_margin >= 0.0;
  out.detail = std::to_string(sweep.rows.size()) + " cases, " +
               std::to_string(violations) + " violations, min bound margin=" +
               num(sweep.min_apriori_margin) + ", min state margin=" +
               num(sweep.min_state_margin);
  return out;
}

// ---------------------------------------------------------------------------
// 4. The same runs keep nonnegative energy and per-step error slack at every
//    grid step.

Outcome criterion4() {
  NonlinearBoundSweep sweep = cubic_sweep();
  Outcome out;
  out.pass = sweep.rows.size() == 100 && sweep.min_energy_slack >= 0.0 &&
             sweep.min_error_slack >= 0.0;
  out.detail = "min energy slack=" + num(sweep.min_energy_slack) +
               ", min error slack=" + num(sweep.min_error_slack);
  return out;
}

// ---------------------------------------------------------------------------
// 5. Benchmark loop at 65 cells: uniform plus 20 random schedules all decay
//    exponentially with a tight envelope. The 10% envelope slack is kept as
//    stated even though random gap mixing provably exceeds it: the hybrid
//    norm holds stale input levels across long gaps, so stretches of slow
//    local decay bulge 10-35% above the exponential fitted to the trailing
//    60%, independent of the recording density. The uniform schedule passes
//    with ~6%; the rate and terminal-ratio clauses hold for every schedule.

Outcome criterion5() {
  SimOptions opts;
  opts.steps_per_unit = 500;
  ScheduleDecaySweep sweep = schedule_decay_sweep(benchmark_linear(1.93), 65, 1.0,
                                                  30.0, opts, v1(1.0), 20, 1003);
  Outcome out;
  out.pass = sweep.rows.size() == 21 && sweep.min_rate > 0.0 &&
             sweep.max_envelope_excess <= 0.10 && sweep.max_final_ratio < 1e-3;
  out.detail = std::to_string(sweep.rows.size()) + " schedules, min rate=" +
               num(sweep.min_rate) + ", max envelope excess=" +
               num(sweep.max_envelope_excess) + ", max final ratio=" +
               num(sweep.max_final_ratio);
  if (!out.pass) {
    std::printf("  note: uniform-schedule excess %s; %d of %zu schedules hold"
                " 10%% slack; every schedule satisfies the rate and terminal"
                " clauses\n",
                num(sweep.rows.front().envelope_excess).c_str(),
                static_cast<int>(std::count_if(
                    sweep.rows.begin(), sweep.rows.end(),
                    [](const ScheduleDecayRow& r) {
                      return r.envelope_excess <= 0.10;
                    })),
                sweep.rows.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// 6. Closed cubic loop under the certificate-derived accuracy demand: every
//    seeded run must reach and hold the residual level and then decay.
//    The demand itself sizes grids beyond any buildable count, so runs abort
//    at the grid cap; the check reports that honestly instead of substituting
//    a weaker demand. A practical-accuracy surrogate is printed for context.

Outcome criterion6() {
  CubicRig rig;
  DerivedDesign design = derive_design(rig.sys, rig.cert, rig.fb, rig.pack, 0.25);
  SamplingSchedule sched = make_schedule(ScheduleKind::Uniform, 0.25, 10.0, 0);

  int ok_runs = 0, capped = 0;
  double worst_demand = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    double x0 = 0.0, u0 = 0.0;
    draw_initial(1006, k, &x0, &u0);
    SimOptions opts;
    opts.steps_per_unit = 400;
    opts.n_max = 1e7;
    try {
      Trajectory traj = simulate_nonlinear(rig.sys, rig.pack, design.accuracy,
                                           sched, v1(x0), const_input(u0), opts);
      ClaimReport rep = claim_checks(traj, design, rig.fb);
      if (rep.ok) ++ok_runs;
    } catch (const GridCapError& e) {
      ++capped;
      worst_demand = std::max(worst_demand, e.required);
    }
  }

  AccuracyFn practical = practical_accuracy(rig.pack, 20.0, 1e6);
  int surrogate_ok = 0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    double x0 = 0.0, u0 = 0.0;
    draw_initial(1006, k, &x0, &u0);
    SimOptions opts;
    opts.steps_per_unit = 400;
    opts.n_max = 1e7;
    Trajectory traj = simulate_nonlinear(rig.sys, rig.pack, practical, sched,
                                         v1(x0), const_input(u0), opts);
    if (claim_checks(traj, design, rig.fb).ok) ++surrogate_ok;
  }
  std::printf("  note: certified accuracy aborted %d/10 runs at the grid cap; "
              "largest demand ~%s cells against cap 1e7\n",
              capped, num(worst_demand).c_str());
  std::printf("  note: practical-accuracy surrogate satisfies reach/stay/decay "
              "claims on %d/10 of the same runs\n",
              surrogate_ok);

  Outcome out;
  out.pass = ok_runs == 10;
  out.detail = std::to_string(ok_runs) + "/10 runs completed under the " +
               "certified demand (" + std::to_string(capped) +
               " hit the grid cap, largest demand ~" + num(worst_demand) +
               " cells)";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Order checks on three plants: the predictor converges at first order and
//    the reference integrator at fourth.

Outcome criterion7() {
  struct Plant {
    const char* name;
    NonlinearSystem sys;
    Vec x0;
    double tau;
  };
  std::vector<Plant> plants;
  plants.push_back({"cubic", cubic_system(), v1(0.7), 0.5});
  plants.push_back(
      {"scalar linear", linear_as_nonlinear(benchmark_linear(1.93)), v1(0.9), 1.0});
  NonlinearSystem osc;
  osc.state_dim = 2;
  osc.input_dim = 1;
  osc.dynamics = [](const Vec& x, const Vec& u) -> Vec {
    Vec dx(2);
    dx(0) = x(1);
    dx(1) = -x(0) - x(1) * x(1) * x(1) + u(0);
    return dx;
  };
  osc.feedback = [](const Vec&) -> Vec { return Vec::Zero(1); };
  osc.growth = [](double s) { return 1.0 + 3.0 * s * s; };
  Vec x2(2);
  x2 << 0.5, -0.3;
  plants.push_back({"planar oscillator", osc, x2, 0.5});

  bool all_ok = true;
  std::string worst;
  for (const Plant& plant : plants) {
    InputHistory hist(1, plant.tau);
    for (int j = 0; j <= 16; ++j) {
      double t = plant.tau * j / 16.0;
      hist.record(t, v1(std::sin(2.0 * t)));
    }
    InputSignal recorded = [&hist, &plant](double t) {
      return hist.value(std::clamp(t, 0.0, plant.tau));
    };
    OracleResult ref =
        rk4_reference(plant.sys.dynamics, recorded, plant.x0, 0.0, plant.tau, 3200);

    std::vector<double> errs;
    for (long long n : {128, 256, 512, 1024}) {
      Mat states = euler_trajectory(plant.sys, plant.x0, hist, 0.0, plant.tau, n);
      errs.push_back((states.col(n) - ref.state).norm());
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
      double ratio = errs[i + 1] / errs[i];
      if (!(ratio >= 0.4 && ratio <= 0.6)) {
        all_ok = false;
        worst = std::string(plant.name) + " first-order ratio " + num(ratio);
      }
    }

    InputSignal smooth = [](double t) { return v1(std::sin(2.0 * t)); };
    Vec truth =
        rk4_on_grid(plant.sys.dynamics, smooth, plant.x0, 0.0,
                    plant.tau / 4096.0, 4096, 1)
            .col(4096);
    std::vector<double> oerrs;
    for (long long n : {4, 8, 16}) {
      Vec end = rk4_on_grid(plant.sys.dynamics, smooth, plant.x0, 0.0,
                            plant.tau / static_cast<double>(n), n, 1)
                    .col(n);
      oerrs.push_back((end - truth).norm());
    }
    for (std::size_t i = 0; i + 1 < oerrs.size(); ++i) {
      double ratio = oerrs[i + 1] / oerrs[i];
      if (!(ratio >= 1.0 / 22.0 && ratio <= 1.0 / 10.0)) {
        all_ok = false;
        worst = std::string(plant.name) + " fourth-order ratio " + num(ratio);
      }
    }
  }

  Outcome out;
  out.pass = all_ok;
  out.detail = all_ok ? "first-order ratios in [0.4, 0.6] and reference ratios "
                        "in [1/22, 1/10] on all three plants"
                      : worst;
  return out;
}

// ---------------------------------------------------------------------------
// 8. Zero data: exactly zero trajectories, unit grids, byte-identical reruns.

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion8() {
  Outcome out;

  // API level: the sized loop never leaves the origin and sizes unit grids.
  CubicRig rig;
  AccuracyFn acc = practical_accuracy(rig.pack, 20.0, 1e6);
  SamplingSchedule sched = make_schedule(ScheduleKind::Uniform, 0.25, 3.0, 0);
  SimOptions opts;
  opts.steps_per_unit = 200;
  Trajectory traj = simulate_nonlinear(rig.sys, rig.pack, acc, sched, v1(0.0),
                                       zero_input(), opts);
  bool zeros = true, unit_grids = true;
  for (int i = 0; i < traj.x.cols(); ++i)
    if (traj.x(0, i) != 0.0 || traj.z(0, i) != 0.0 || traj.u(0, i) != 0.0)
      zeros = false;
  for (const SamplePoint& sp : traj.samples)
    if (sp.prediction.steps != 1) unit_grids = false;

  // File level: two fresh CLI runs produce identical bytes.
  fs::path base = fs::temp_directory_path() / "predfb_acceptance_c8";
  fs::remove_all(base);
  fs::create_directories(base);
  json cfg = {{"mode", "simulate"},
              {"system", {{"builtin", "cubic"}}},
              {"delay", 0.5},
              {"schedule", {{"kind", "uniform"}, {"period", 0.25}, {"horizon", 3.0}}},
              {"x0", {0.0}},
              {"input", "zero"},
              {"steps_per_unit", 200}};
  RunConfig rc = parse_config(cfg);
  run_config(rc, (base / "a").string());
  run_config(rc, (base / "b").string());
  bool identical =
      slurp(base / "a" / "trajectory.csv") == slurp(base / "b" / "trajectory.csv") &&
      slurp(base / "a" / "history.csv") == slurp(base / "b" / "history.csv") &&
      slurp(base / "a" / "summary.json") == slurp(base / "b" / "summary.json");

  // The recorded CSV itself carries only zero states and unit sample grids.
  bool csv_zero = true, csv_unit = true;
  {
    std::istringstream rows(slurp(base / "a" / "trajectory.csv"));
    std::string line;
    std::getline(rows, line);  // header
    while (std::getline(rows, line)) {
      std::vector<std::string> cells;
      std::istringstream cs(line);
      std::string cell;
      while (std::getline(cs, cell, ',')) cells.push_back(cell);
      if (cells.size() != 6) {
        csv_zero = false;
        break;
      }
      if (std::stod(cells[1]) != 0.0 || std::stod(cells[2]) != 0.0 ||
          std::stod(cells[3]) != 0.0)
        csv_zero = false;
      if (cells[4] == "1" && cells[5] != "1") csv_unit = false;
    }
  }

  out.pass = zeros && unit_grids && identical && csv_zero && csv_unit;
  out.detail = std::string("zero rows: ") + (zeros && csv_zero ? "yes" : "NO") +
               ", unit grids: " + (unit_grids && csv_unit ? "yes" : "NO") +
               ", reruns byte-identical: " + (identical ? "yes" : "NO");
  return out;
}

using CriterionFn = Outcome (*)();

struct Entry {
  CriterionFn fn;
  double budget_seconds;  // 0: no time requirement
};

const Entry kEntries[] = {
    {criterion1, 1.0},  {criterion2, 30.0}, {criterion3, 120.0},
    {criterion4, 120.0}, {criterion5, 60.0}, {criterion6, 300.0},
    {criterion7, 30.0}, {criterion8, 0.0},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
      if (only < 1 || only > 8) {
        std::fprintf(stderr, "error: --criterion expects 1..8\n");
        return 64;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 64;
    }
  }

  int failures = 0;
  for (int i = 1; i <= 8; ++i) {
    if (only != 0 && i != only) continue;
    const Entry& entry = kEntries[i - 1];
    auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = entry.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("unexpected exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    bool in_budget = entry.budget_seconds == 0.0 || elapsed < entry.budget_seconds;
    bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    std::string suffix;
    if (!in_budget)
      suffix = " [over " + num(entry.budget_seconds) + "s budget]";
    std::printf("criterion %d: %s - %s%s (%.1fs)\n", i, pass ? "PASS" : "FAIL",
                out.detail.c_str(), suffix.c_str(), elapsed);
  }
  return failures;
}
