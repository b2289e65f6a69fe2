#pragma once

#include <string>

#include "predfb/linear.hpp"
#include "predfb/sim.hpp"
#include "predfb/sweeps.hpp"

namespace predfb {

// All writers format doubles with "%.17g" and end lines with '\n', so a rerun
// with the same inputs reproduces files byte for byte.

// Columns: t, x_1..x_n, z_1..z_n, u_1..u_m, is_sample_instant, N_used.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Columns: time, u_1..u_m; prelude rows first, then the recorded run.
void write_history_csv(const std::string& path, const Trajectory& traj);

// Columns: p, f.
void write_fsweep_csv(const std::string& path, const FSweepResult& res);

void write_linear_sweep_csv(const std::string& path, const LinearBoundSweep& res);
void write_nonlinear_sweep_csv(const std::string& path, const NonlinearBoundSweep& res);
void write_decay_sweep_csv(const std::string& path, const ScheduleDecaySweep& res);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace predfb
