#include "predfb/io.hpp"

#include <fstream>
#include <sstream>

#include "predfb/math_util.hpp"
#include "predfb/types.hpp"

namespace predfb {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' stays '\n'
  if (!out) throw ValidationError("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw NumericError("write failed: " + path);
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  const long n = traj.x.rows(), m = traj.u.rows();
  out << "t";
  for (long i = 0; i < n; ++i) out << ",x_" << (i + 1);
  for (long i = 0; i < n; ++i) out << ",z_" << (i + 1);
  for (long i = 0; i < m; ++i) out << ",u_" << (i + 1);
  out << ",is_sample_instant,N_used\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const long c = static_cast<long>(k);
    out << fmt_g17(traj.times[k]);
    for (long i = 0; i < n; ++i) out << ',' << fmt_g17(traj.x(i, c));
    for (long i = 0; i < n; ++i) out << ',' << fmt_g17(traj.z(i, c));
    for (long i = 0; i < m; ++i) out << ',' << fmt_g17(traj.u(i, c));
    out << ',' << static_cast<int>(traj.is_sample[k]) << ',' << traj.grid_used[k]
        << '\n';
  }
  finish(out, path);
}

void write_history_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  const long m = traj.u.rows();
  out << "time";
  for (long i = 0; i < m; ++i) out << ",u_" << (i + 1);
  out << '\n';
  for (std::size_t k = 0; k < traj.prelude_times.size(); ++k) {
    out << fmt_g17(traj.prelude_times[k]);
    for (long i = 0; i < m; ++i)
      out << ',' << fmt_g17(traj.prelude_u(i, static_cast<long>(k)));
    out << '\n';
  }
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << fmt_g17(traj.times[k]);
    for (long i = 0; i < m; ++i)
      out << ',' << fmt_g17(traj.u(i, static_cast<long>(k)));
    out << '\n';
  }
  finish(out, path);
}

void write_fsweep_csv(const std::string& path, const FSweepResult& res) {
  std::ofstream out = open_out(path);
  out << "p,f\n";
  for (const auto& [p, f] : res.rows)
    out << fmt_g17(p) << ',' << fmt_g17(f) << '\n';
  finish(out, path);
}

void write_linear_sweep_csv(const std::string& path, const LinearBoundSweep& res) {
  std::ofstream out = open_out(path);
  out << "case,a,b,steps,x0,input_sup,error,bound,slack\n";
  for (const auto& r : res.rows) {
    out << r.case_index << ',' << fmt_g17(r.a) << ',' << fmt_g17(r.b) << ','
        << r.steps << ',' << fmt_g17(r.x0) << ',' << fmt_g17(r.input_sup) << ','
        << fmt_g17(r.error) << ',' << fmt_g17(r.bound) << ',' << fmt_g17(r.slack)
        << '\n';
  }
  finish(out, path);
}

void write_nonlinear_sweep_csv(const std::string& path,
                               const NonlinearBoundSweep& res) {
  std::ofstream out = open_out(path);
  out << "case,x0,size_measure,steps,error,apriori_bound,min_energy_slack,"
         "min_error_slack,state_margin,ok\n";
  for (const auto& r : res.rows) {
    out << r.case_index << ',' << fmt_g17(r.x0) << ',' << fmt_g17(r.size_measure)
        << ',' << r.steps << ',' << fmt_g17(r.error) << ','
        << fmt_g17(r.apriori_bound) << ',' << fmt_g17(r.min_energy_slack) << ','
        << fmt_g17(r.min_error_slack) << ',' << fmt_g17(r.state_margin) << ','
        << (r.ok ? 1 : 0) << '\n';
  }
  finish(out, path);
}

void write_decay_sweep_csv(const std::string& path, const ScheduleDecaySweep& res) {
  std::ofstream out = open_out(path);
  out << "seed,rate,envelope_excess,final_ratio\n";
  for (const auto& r : res.rows) {
    out << r.seed << ',' << fmt_g17(r.rate) << ',' << fmt_g17(r.envelope_excess)
        << ',' << fmt_g17(r.final_ratio) << '\n';
  }
  finish(out, path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_out(path);
  out << content;
  finish(out, path);
}

}  // namespace predfb
