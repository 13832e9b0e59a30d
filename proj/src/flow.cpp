#include "wbrf/flow.hpp"

#include "wbrf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace wbrf {

namespace {

// x-derivative at an end node of an odd field, from the reflected stencil.
double odd_dx_at(const Eigen::Ref<const ArrayXd>& v, Index i, double h) {
  const Index n = v.size();
  if (i == 0) return (16.0 * v(1) - 2.0 * v(2)) / (12.0 * h);
  return (2.0 * v(n - 3) - 16.0 * v(n - 2)) / (12.0 * h);
}

}  // namespace

Eigen::ArrayXXd ricci_rhs(const SpatialGrid& G, const Eigen::ArrayXXd& y) {
  const Index n = G.size();
  const ArrayXd f = y.col(0);
  const ArrayXd g = y.col(1);
  const ArrayXd jac = y.col(2);

  const ArrayXd f_x = G.dx(f, Parity::Odd);
  const ArrayXd g_x = G.dx(g, Parity::Even);
  const ArrayXd ij = jac.inverse();
  const ArrayXd stretch = G.dx(jac, Parity::Even) * ij;
  const ArrayXd ij2 = ij.square();
  const ArrayXd f_s = f_x * ij;
  const ArrayXd g_s = g_x * ij;
  const ArrayXd f_ss = (G.dxx(f, Parity::Odd) - stretch * f_x) * ij2;
  const ArrayXd g_ss = (G.dxx(g, Parity::Even) - stretch * g_x) * ij2;
  const ArrayXd ig = g.inverse();
  const ArrayXd ig2 = ig.square();

  Eigen::ArrayXXd out(n, 3);
  out.col(0) = f_ss + 2.0 * g_s * ig * f_s - 2.0 * f.cube() * ig2.square();
  out.col(1) = g_ss + (f_s / f + g_s * ig) * g_s + 2.0 * (f.square() - 2.0 * g.square()) * ig2 * ig;
  ArrayXd lam = f_ss / f + 2.0 * g_ss * ig;

  const double h = G.h();
  for (Index i : {Index(0), n - 1}) {
    const bool pole = (i == 0) ? G.left() == EndKind::Pole : G.right() == EndKind::Pole;
    if (!pole) continue;
    out(i, 0) = 0.0;
    out(i, 1) = 2.0 * g_ss(i) - 4.0 * ig(i);
  }
  // At a pole jac must follow f_x so that f_s stays +-1.
  for (Index i : {Index(0), n - 1}) {
    const bool pole = (i == 0) ? G.left() == EndKind::Pole : G.right() == EndKind::Pole;
    if (!pole) continue;
    lam(i) = odd_dx_at(out.col(0), i, h) / f_x(i);
  }
  out.col(2) = lam * jac;
  return out;
}

namespace {

Eigen::ArrayXXd stack(const MetricProfile& p) {
  Eigen::ArrayXXd y(p.grid.size(), 3);
  y.col(0) = p.f;
  y.col(1) = p.g;
  y.col(2) = p.jac;
  return y;
}

bool healthy(const MetricProfile& p) {
  return p.f.allFinite() && p.g.allFinite() && p.jac.allFinite() && (p.g > 0.0).all() && (p.jac > 0.0).all();
}

}  // namespace

MetricProfile step(const MetricProfile& p, double dt) {
  if (dt == 0.0) return p;
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be nonnegative");
  const auto& G = p.grid;
  const Eigen::ArrayXXd y = rk4(stack(p), dt, [&](const Eigen::ArrayXXd& z) { return ricci_rhs(G, z); });
  MetricProfile out(G, y.col(0), y.col(1), y.col(2), p.t + dt);
  if (G.left() == EndKind::Pole) out.f(0) = 0.0;
  if (G.right() == EndKind::Pole) out.f(G.size() - 1) = 0.0;
  if (!healthy(out)) {
    FlowTrajectory partial;
    partial.snapshots.push_back(p);
    throw BlowThrough("non-finite or non-positive g/jac after step at t=" + std::to_string(p.t), std::move(partial));
  }
  return out;
}

double stable_dt(const MetricProfile& p, const StepControl& c) {
  const double ds = p.grid.h() * p.jac.minCoeff();
  const double mu = p.g.minCoeff();
  return c.cfl * std::min(ds * ds, mu * mu / c.c_curv);
}

bool maybe_remesh(MetricProfile& p, const StepControl& c) {
  if (c.remesh == RemeshMode::Off) return false;
  const Index n = p.grid.size();
  const ArrayXd monitor = c.remesh == RemeshMode::Graded ? p.g : ArrayXd::Ones(n).eval();
  if (mesh_distortion(p.jac, monitor) <= c.remesh_ratio) return false;
  auto r = regrid(p.grid, p.jac, monitor, {{&p.f, Parity::Odd}, {&p.g, Parity::Even}});
  p.f = std::move(r.fields[0]);
  p.g = std::move(r.fields[1]);
  p.jac = std::move(r.jac);
  p.f(0) = 0.0;
  p.f(n - 1) = 0.0;
  return true;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "none";
    case StopReason::MuStop: return "mu_stop";
    case StopReason::Mu2Stop: return "mu2_stop";
    case StopReason::DtFloor: return "dt_floor";
    case StopReason::TMax: return "t_max";
    case StopReason::TEnd: return "t_end";
    case StopReason::MaxSteps: return "max_steps";
  }
  return "none";
}

StopReason stop_reason_from_string(const std::string& s) {
  for (auto r : {StopReason::None, StopReason::MuStop, StopReason::Mu2Stop, StopReason::DtFloor, StopReason::TMax,
                 StopReason::TEnd, StopReason::MaxSteps})
    if (to_string(r) == s) return r;
  throw std::invalid_argument("unknown stop reason: " + s);
}

FlowRunner::FlowRunner(const MetricProfile& initial, RunOptions options)
    : opt_(std::move(options)), st_{initial, 0, 0.0, 0, 1, 0.0, {}} {
  initial.validate();
  if (!opt_.override_closeness) {
    const auto rep = closeness_report(initial, opt_.delta);
    if (!rep.all()) throw ParameterError("initial profile fails the closeness conditions (set override to run anyway)");
  }
  st_.mu0 = initial.g.minCoeff();
  record(0.0);
  snapshot();
}

FlowRunner::FlowRunner(RunState state, RunOptions options) : opt_(std::move(options)), st_(std::move(state)) {
  st_.profile.validate();
}

void FlowRunner::record(double dt) {
  auto r = compute_diagnostics(st_.profile, opt_.delta);
  r.step = st_.step;
  r.dt = dt;
  r.remesh_count = st_.remesh_count;
  st_.trajectory.series.push_back(r);
}

void FlowRunner::snapshot() { st_.trajectory.snapshots.push_back(st_.profile); }

StopReason FlowRunner::check_stop() const {
  const auto& s = opt_.stop;
  const double mu = st_.profile.g.minCoeff();
  if (mu <= s.mu_stop_fraction * st_.mu0) return StopReason::MuStop;
  if (s.mu2_stop_fraction > 0.0 && mu * mu <= s.mu2_stop_fraction * st_.mu0 * st_.mu0) return StopReason::Mu2Stop;
  const double t_max = s.t_max > 0.0 ? s.t_max : 2.5 * st_.mu0 * st_.mu0;
  if (st_.profile.t >= t_max) return StopReason::TMax;
  if (s.t_end >= 0.0 && st_.profile.t >= s.t_end) return StopReason::TEnd;
  if (s.max_steps >= 0 && st_.step >= s.max_steps) return StopReason::MaxSteps;
  return StopReason::None;
}

StopReason FlowRunner::advance() {
  auto finalize = [&](StopReason why) {
    if (why != StopReason::MaxSteps) {
      if (st_.trajectory.series.empty() || st_.trajectory.series.back().step != st_.step) record(st_.last_dt);
      if (st_.trajectory.snapshots.empty() || st_.trajectory.snapshots.back().t != st_.profile.t) snapshot();
    }
    st_.trajectory.reason = why;
    return why;
  };

  const double mu0sq = st_.mu0 * st_.mu0;
  const int per_octave = std::max(1, opt_.output.snapshots_per_octave);
  const std::int64_t stride = std::max<std::int64_t>(1, opt_.output.record_stride);
  for (;;) {
    if (const auto why = check_stop(); why != StopReason::None) return finalize(why);

    double dt = stable_dt(st_.profile, opt_.stepping);
    bool landing = false;
    if (opt_.stop.t_end >= 0.0 && st_.profile.t + dt >= opt_.stop.t_end) {
      dt = opt_.stop.t_end - st_.profile.t;
      landing = true;
    }
    if (dt < opt_.stop.dt_floor && !landing) return finalize(StopReason::DtFloor);

    MetricProfile next = [&] {
      try {
        return step(st_.profile, dt);
      } catch (BlowThrough& e) {
        FlowTrajectory partial = st_.trajectory;
        partial.snapshots.push_back(st_.profile);
        partial.reason = StopReason::None;
        throw BlowThrough(e.what(), std::move(partial));
      }
    }();
    if (landing) next.t = opt_.stop.t_end;
    st_.profile = std::move(next);
    st_.last_dt = dt;
    ++st_.step;
    if (maybe_remesh(st_.profile, opt_.stepping)) ++st_.remesh_count;

    if (st_.step % stride == 0) record(dt);
    const double mu = st_.profile.g.minCoeff();
    bool crossed = false;
    while (mu * mu <= mu0sq * std::exp2(-static_cast<double>(st_.next_octave) / per_octave)) {
      ++st_.next_octave;
      crossed = true;
    }
    if (crossed) snapshot();
  }
}

FlowTrajectory FlowRunner::finish() const {
  FlowTrajectory tr = st_.trajectory;
  try {
    tr.T_est = estimate_T(tr.series);
    tr.type1_ratio_series = type1_ratios(tr.series, tr.T_est->T).ratios;
  } catch (const EstimationError&) {
    tr.T_est.reset();
  }
  return tr;
}

FlowTrajectory run(const MetricProfile& initial, const RunOptions& options) {
  FlowRunner runner(initial, options);
  runner.advance();
  return runner.finish();
}

TEstimate estimate_T(const std::vector<DiagnosticRecord>& series) {
  const std::size_t n = series.size();
  if (n < 10) throw EstimationError("estimate_T needs at least 10 records");
  const std::size_t w = std::max<std::size_t>(10, n / 5);
  const std::size_t first = n - w;
  for (std::size_t i = first + 1; i < n; ++i)
    if (series[i].mu > series[i - 1].mu) throw EstimationError("mu is not monotone over the fit window");

  const double m = static_cast<double>(w);
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    tm += series[i].t;
    ym += series[i].mu * series[i].mu;
  }
  tm /= m;
  ym /= m;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double dt = series[i].t - tm;
    stt += dt * dt;
    sty += dt * (series[i].mu * series[i].mu - ym);
  }
  if (!(stt > 0.0)) throw EstimationError("degenerate time window");
  TEstimate e;
  e.slope = sty / stt;
  e.intercept = ym - e.slope * tm;
  if (!(e.slope < 0.0)) throw EstimationError("mu^2 is not decreasing");
  e.T = -e.intercept / e.slope;
  double worst = 0.0, ymax = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double y = series[i].mu * series[i].mu;
    worst = std::max(worst, std::abs(y - (e.intercept + e.slope * series[i].t)));
    ymax = std::max(ymax, y);
  }
  e.fit_residual = worst / ymax;
  e.slope_ok = e.slope >= -12.2 && e.slope <= -3.8;
  e.window = w;
  return e;
}

Type1Summary type1_ratios(const std::vector<DiagnosticRecord>& series, double T) {
  Type1Summary out;
  double tau_last = -1.0;
  for (auto it = series.rbegin(); it != series.rend(); ++it)
    if (T - it->t > 0.0) {
      tau_last = T - it->t;
      break;
    }
  if (tau_last <= 0.0) return out;
  out.ratio_min = INFINITY;
  out.ratio_max = -INFINITY;
  for (const auto& r : series) {
    const double tau = T - r.t;
    if (tau <= 0.0 || tau > 100.0 * tau_last) continue;
    const double q = r.sup_curv * tau;
    out.ratios.emplace_back(r.t, q);
    out.mu2_rate.emplace_back(r.t, r.mu * r.mu / tau);
    out.ratio_min = std::min(out.ratio_min, q);
    out.ratio_max = std::max(out.ratio_max, q);
  }
  return out;
}

}  // namespace wbrf
