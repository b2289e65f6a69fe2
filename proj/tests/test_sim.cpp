#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "predfb/builtins.hpp"
#include "predfb/sim.hpp"

using namespace predfb;

namespace {
constexpr double kTau = 0.5;

InputSignal zero_input() {
  return [](double) -> Vec { return Vec::Zero(1); };
}

Vec v1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

struct CubicSetup {
  NonlinearSystem sys;
  CompletenessCertificate cert;
  FeedbackCertificate fb;
  BoundsPack pack;
  AccuracyFn acc;
  CubicSetup()
      : sys(cubic_system()),
        cert(cubic_completeness(kTau, 0.25)),
        fb(cubic_feedback(0.25)),
        pack(build_bounds_pack(sys, cert, kTau)),
        acc(practical_accuracy(pack, 20.0, 1e6)) {}
};

// Synthetic one-dimensional trajectory x(t) = x_amp e^{-rate t},
// u(t) = u_amp e^{-rate t}, recorded on a uniform dt grid with a matching
// prelude on [-delay, 0).
Trajectory synthetic_exponential(double rate, double x_amp, double u_amp,
                                 double horizon, double dt, double delay) {
  Trajectory traj;
  traj.delay = delay;
  int pre = static_cast<int>(std::llround(delay / dt));
  for (int j = 0; j < pre; ++j) traj.prelude_times.push_back(-delay + j * dt);
  traj.prelude_u.resize(1, pre);
  for (int j = 0; j < pre; ++j)
    traj.prelude_u(0, j) = u_amp * std::exp(-rate * traj.prelude_times[j]);
  int rows = static_cast<int>(std::llround(horizon / dt)) + 1;
  traj.x.resize(1, rows);
  traj.z.resize(1, rows);
  traj.u.resize(1, rows);
  for (int i = 0; i < rows; ++i) {
    double t = i * dt;
    traj.times.push_back(t);
    traj.x(0, i) = x_amp * std::exp(-rate * t);
    traj.z(0, i) = traj.x(0, i);
    traj.u(0, i) = u_amp * std::exp(-rate * t);
  }
  traj.is_sample.assign(rows, 0);
  traj.grid_used.assign(rows, 1);
  return traj;
}
}  // namespace

TEST_CASE("uniform schedule hits every multiple and the horizon") {
  SamplingSchedule s = make_schedule(ScheduleKind::Uniform, 1.0, 10.0, 0);
  REQUIRE(s.times.size() == 11);
  for (int i = 0; i <= 10; ++i)
    CHECK(s.times[i] == doctest::Approx(double(i)).epsilon(1e-12));
  CHECK(s.times.back() == 10.0);

  SamplingSchedule frac = make_schedule(ScheduleKind::Uniform, 1.0, 10.5, 0);
  CHECK(frac.times.size() == 11);
  CHECK(frac.times.back() == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("jittered and random schedules respect their gap laws") {
  SamplingSchedule j = make_schedule(ScheduleKind::Jittered, 1.0, 20.0, 42);
  CHECK(j.times.front() == 0.0);
  for (std::size_t i = 1; i < j.times.size(); ++i) {
    double gap = j.times[i] - j.times[i - 1];
    CHECK(gap >= 0.5 - 1e-12);
    CHECK(gap <= 1.0 + 1e-12);
  }
  CHECK(j.times.back() < 20.0);
  CHECK(20.0 - j.times.back() <= 1.0 + 1e-12);

  SamplingSchedule r = make_schedule(ScheduleKind::Random, 1.0, 20.0, 7);
  for (std::size_t i = 1; i < r.times.size(); ++i) {
    double gap = r.times[i] - r.times[i - 1];
    CHECK(gap > 0.0);
    CHECK(gap <= 1.0 + 1e-12);
  }
  CHECK(20.0 - r.times.back() <= 1.0 + 1e-12);

  SamplingSchedule r2 = make_schedule(ScheduleKind::Random, 1.0, 20.0, 7);
  CHECK(r.times == r2.times);
  SamplingSchedule r3 = make_schedule(ScheduleKind::Random, 1.0, 20.0, 8);
  CHECK(r.times != r3.times);
}

TEST_CASE("schedule construction validates period and horizon") {
  CHECK_THROWS_AS(make_schedule(ScheduleKind::Uniform, 0.0, 10.0, 0),
                  ValidationError);
  CHECK_THROWS_AS(make_schedule(ScheduleKind::Uniform, 1.0, 0.0, 0),
                  ValidationError);
}

TEST_CASE("zero initial data stays exactly zero with unit grids") {
  CubicSetup c;
  SamplingSchedule sched = make_schedule(ScheduleKind::Uniform, 0.25, 3.0, 0);
  SimOptions opts;
  opts.steps_per_unit = 200;
  Trajectory traj =
      simulate_nonlinear(c.sys, c.pack, c.acc, sched, v1(0.0), zero_input(), opts);

  for (int i = 0; i < traj.x.cols(); ++i) {
    CHECK(traj.x(0, i) == 0.0);
    CHECK(traj.z(0, i) == 0.0);
    CHECK(traj.u(0, i) == 0.0);
  }
  REQUIRE(traj.samples.size() == sched.times.size());
  for (const SamplePoint& sp : traj.samples) {
    CHECK(sp.prediction.steps == 1);
    CHECK(sp.prediction.z(0) == 0.0);
  }
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (traj.is_sample[i]) CHECK(traj.grid_used[i] == 1);

  // Degenerate-zero runs satisfy every closed-loop claim trivially.
  DerivedDesign design = derive_design(c.sys, c.cert, c.fb, c.pack, 0.25);
  ClaimReport rep = claim_checks(traj, design, c.fb);
  CHECK(rep.ultimate_ok);
  CHECK(rep.exponential_ok);
  CHECK(rep.bounded_ok);
  CHECK(rep.ok);
  CHECK(rep.sup_metric == 0.0);
}

TEST_CASE("closed-loop runs are bitwise reproducible") {
  CubicSetup c;
  SamplingSchedule sched = make_schedule(ScheduleKind::Random, 0.4, 3.0, 19);
  SimOptions opts;
  opts.steps_per_unit = 200;
  Trajectory a =
      simulate_nonlinear(c.sys, c.pack, c.acc, sched, v1(0.6), zero_input(), opts);
  Trajectory b =
      simulate_nonlinear(c.sys, c.pack, c.acc, sched, v1(0.6), zero_input(), opts);
  REQUIRE(a.times == b.times);
  for (int i = 0; i < a.x.cols(); ++i) {
    CHECK(a.x(0, i) == b.x(0, i));
    CHECK(a.z(0, i) == b.z(0, i));
    CHECK(a.u(0, i) == b.u(0, i));
  }
  CHECK(a.grid_used == b.grid_used);
}

TEST_CASE("recorded input rows equal the feedback of the controller rows") {
  CubicSetup c;
  SamplingSchedule sched = make_schedule(ScheduleKind::Uniform, 0.25, 2.0, 0);
  SimOptions opts;
  opts.steps_per_unit = 200;
  Trajectory traj =
      simulate_nonlinear(c.sys, c.pack, c.acc, sched, v1(0.5), zero_input(), opts);
  for (int i = 0; i < traj.u.cols(); ++i) {
    Vec k = c.sys.feedback(traj.z.col(i));
    CHECK(traj.u(0, i) == k(0));
  }
}

TEST_CASE("micro-step refinement does not move the recorded run") {
  CubicSetup c;
  SamplingSchedule sched = make_schedule(ScheduleKind::Uniform, 0.25, 2.0, 0);
  SimOptions coarse, fine;
  coarse.steps_per_unit = 500;
  fine.steps_per_unit = 2000;
  Trajectory a =
      simulate_nonlinear(c.sys, c.pack, c.acc, sched, v1(0.6), zero_input(), coarse);
  Trajectory b =
      simulate_nonlinear(c.sys, c.pack, c.acc, sched, v1(0.6), zero_input(), fine);
  REQUIRE(a.times.size() == b.times.size());
  double worst = 0.0;
  for (int i = 0; i < a.x.cols(); ++i)
    worst = std::max(worst, std::abs(a.x(0, i) - b.x(0, i)));
  CHECK(worst < 1e-8);
}

TEST_CASE("forced fine grids predict the recorded state one delay ahead") {
  CubicSetup c;
  SamplingSchedule sched = make_schedule(ScheduleKind::Uniform, 0.25, 2.0, 0);
  SimOptions opts;
  opts.steps_per_unit = 400;
  opts.forced_grid = 100000;
  Trajectory traj =
      simulate_nonlinear(c.sys, c.pack, c.acc, sched, v1(0.6), zero_input(), opts);

  int checked = 0;
  for (const SamplePoint& sp : traj.samples) {
    double target = sp.t + kTau;
    if (target > traj.times.back() + 1e-9) continue;
    std::size_t best = 0;
    double best_gap = 1e300;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      double gap = std::abs(traj.times[i] - target);
      if (gap < best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    REQUIRE(best_gap < 1e-6);
    CHECK(std::abs(sp.prediction.z(0) - traj.x(0, best)) < 1e-3);
    ++checked;
  }
  CHECK(checked >= 6);
}

TEST_CASE("closed-loop claims hold on a converging cubic run") {
  CubicSetup c;
  SamplingSchedule sched = make_schedule(ScheduleKind::Uniform, 0.25, 8.0, 0);
  SimOptions opts;
  opts.steps_per_unit = 400;
  opts.forced_grid = 2000;
  Trajectory traj =
      simulate_nonlinear(c.sys, c.pack, c.acc, sched, v1(0.6), zero_input(), opts);

  DerivedDesign design = derive_design(c.sys, c.cert, c.fb, c.pack, 0.25);
  ClaimReport rep = claim_checks(traj, design, c.fb);
  CHECK(rep.ultimate_ok);
  CHECK(rep.reach_time >= 0.0);
  CHECK(rep.stayed);
  CHECK(rep.capture_time >= 0.0);
  CHECK(rep.state_rate > 0.0);
  CHECK(rep.input_rate > 0.0);
  CHECK(rep.exponential_ok);
  CHECK(rep.bounded_ok);
  CHECK(rep.ok);
}

TEST_CASE("claim checker flags a run that never reaches the residual set") {
  CubicSetup c;
  DerivedDesign design = derive_design(c.sys, c.cert, c.fb, c.pack, 0.25);
  Trajectory stuck = synthetic_exponential(0.0, 1.0, 0.5, 10.0, 0.01, kTau);
  ClaimReport rep = claim_checks(stuck, design, c.fb);
  CHECK_FALSE(rep.ultimate_ok);
  CHECK(rep.reach_time < 0.0);
  CHECK_FALSE(rep.ok);
}

TEST_CASE("decay fit recovers a synthetic exponential") {
  Trajectory traj = synthetic_exponential(1.0, 1.0, 0.5, 10.0, 0.01, 1.0);
  DecayFit fit = decay_fit(traj, 1.0);
  // The fit window's sup is taken over stored rows, so a window edge landing
  // a rounding error past a row perturbs the sup by one grid cell; the rate
  // and envelope tolerances absorb that, not solver error.
  CHECK(fit.rate == doctest::Approx(1.0).epsilon(5e-4));
  CHECK(fit.envelope_excess < 5e-3);
  CHECK(fit.final_ratio ==
        doctest::Approx(std::exp(-10.0)).epsilon(1e-6));

  Trajectory flat = synthetic_exponential(0.0, 1.0, 0.5, 10.0, 0.01, 1.0);
  DecayFit ffit = decay_fit(flat, 1.0);
  CHECK(ffit.rate == doctest::Approx(0.0).epsilon(1e-9));

  Trajectory brief = synthetic_exponential(1.0, 1.0, 0.5, 3.0, 0.01, 1.0);
  CHECK_THROWS_AS(decay_fit(brief, 1.0), ValidationError);
}

TEST_CASE("linear benchmark loop decays under the uniform schedule") {
  LinearSystem lin = benchmark_linear(1.93);
  SamplingSchedule sched = make_schedule(ScheduleKind::Uniform, 1.0, 15.0, 0);
  SimOptions opts;
  opts.steps_per_unit = 300;
  Trajectory traj = simulate_linear(lin, sched, v1(1.0), zero_input(), opts, 65);
  DecayFit fit = decay_fit(traj, lin.delay);
  CHECK(fit.rate > 0.5);
  CHECK(fit.envelope_excess <= 0.10);
  CHECK(fit.final_ratio < 1e-2);
}
