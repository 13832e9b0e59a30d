#pragma once

#include "wbrf/mesh.hpp"
#include "wbrf/profile.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wbrf {

// Right-hand side of the fixed-x system for (f, g, jac), stacked as columns.
// Open ends are allowed (soliton windows); pole rows use the regular limits.
Eigen::ArrayXXd ricci_rhs(const SpatialGrid& grid, const Eigen::ArrayXXd& y);

// Generic classical RK4 step on a stacked state.
template <typename Rhs>
Eigen::ArrayXXd rk4(const Eigen::ArrayXXd& y, double dt, Rhs&& rhs) {
  const Eigen::ArrayXXd k1 = rhs(y);
  const Eigen::ArrayXXd k2 = rhs(y + 0.5 * dt * k1);
  const Eigen::ArrayXXd k3 = rhs(y + 0.5 * dt * k2);
  const Eigen::ArrayXXd k4 = rhs(y + dt * k3);
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One RK4 step of Ricci flow.  dt == 0 returns the input.
MetricProfile step(const MetricProfile& p, double dt);

// Parabolic step bound cfl * min(ds_min^2, mu^2 / c_curv).
struct StepControl {
  double cfl = 0.2;
  double c_curv = 8.0;
  RemeshMode remesh = RemeshMode::Graded;
  double remesh_ratio = 2.0;
};
double stable_dt(const MetricProfile& p, const StepControl& c);

// Applies the remesh policy.  Returns true when the nodes moved.
bool maybe_remesh(MetricProfile& p, const StepControl& c);

struct StopCriteria {
  double mu_stop_fraction = 0.02;
  double mu2_stop_fraction = 0.0;  // stop once mu^2 <= fraction * mu(0)^2 (0 disables)
  double dt_floor = 1e-12;
  double t_max = -1.0;             // negative: 10 mu(0)^2 / 4
  double t_end = -1.0;             // negative: disabled; otherwise land exactly on it
  std::int64_t max_steps = -1;     // pause (checkpoint) after this many total steps
};

struct OutputControl {
  std::int64_t record_stride = 20;
  int snapshots_per_octave = 4;  // snapshot each time mu^2 crosses mu0^2 2^(-j/k)
};

enum class StopReason { None, MuStop, Mu2Stop, DtFloor, TMax, TEnd, MaxSteps };
std::string to_string(StopReason r);
StopReason stop_reason_from_string(const std::string& s);

struct TEstimate {
  double T = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double fit_residual = 0.0;  // max |residual| / max mu^2 over the fit window
  bool slope_ok = false;      // slope inside [-12.2, -3.8]
  std::size_t window = 0;
};

struct FlowTrajectory {
  std::vector<MetricProfile> snapshots;
  std::vector<DiagnosticRecord> series;
  StopReason reason = StopReason::None;
  std::optional<TEstimate> T_est;
  std::vector<std::pair<double, double>> type1_ratio_series;
};

struct BlowThrough : std::runtime_error {
  BlowThrough(const std::string& what, FlowTrajectory partial)
      : std::runtime_error(what), trajectory(std::move(partial)) {}
  FlowTrajectory trajectory;  // last snapshot is the last valid state
};

struct RunOptions {
  StopCriteria stop;
  StepControl stepping;
  OutputControl output;
  double delta = 0.5;
  bool override_closeness = false;
};

// Everything needed to continue a run bit-for-bit.
struct RunState {
  MetricProfile profile;
  std::int64_t step = 0;
  double mu0 = 0.0;
  std::int64_t remesh_count = 0;
  int next_octave = 1;
  double last_dt = 0.0;
  FlowTrajectory trajectory;
};

class FlowRunner {
 public:
  FlowRunner(const MetricProfile& initial, RunOptions options);
  FlowRunner(RunState state, RunOptions options);

  // Steps until a stop criterion fires.  MaxSteps pauses without final output.
  StopReason advance();

  const RunState& state() const { return st_; }
  const RunOptions& options() const { return opt_; }
  RunOptions& options() { return opt_; }

  // Trajectory with T estimate and Type-I ratios filled in.
  FlowTrajectory finish() const;

 private:
  void record(double dt);
  void snapshot();
  StopReason check_stop() const;

  RunOptions opt_;
  RunState st_;
};

FlowTrajectory run(const MetricProfile& initial, const RunOptions& options);

// Least-squares line through mu^2 over the final 20% of records.
TEstimate estimate_T(const std::vector<DiagnosticRecord>& series);

// sup|kappa| (T - t) over the last two decades of T - t.
struct Type1Summary {
  std::vector<std::pair<double, double>> ratios;  // (t, sup|k| (T - t))
  std::vector<std::pair<double, double>> mu2_rate;  // (t, mu^2 / (T - t))
  double ratio_min = 0.0, ratio_max = 0.0;
};
Type1Summary type1_ratios(const std::vector<DiagnosticRecord>& series, double T);

}  // namespace wbrf
