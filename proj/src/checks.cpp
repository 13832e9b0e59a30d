#include "wbrf/checks.hpp"

#include "wbrf/blowup.hpp"
#include "wbrf/errors.hpp"
#include "wbrf/io.hpp"
#include "wbrf/kahler.hpp"
#include "wbrf/soliton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace wbrf {

namespace {

std::string sci(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << v;
  return o.str();
}

std::string fix(double v, int digits = 4) {
  std::ostringstream o;
  o.precision(digits);
  o << std::fixed << v;
  return o.str();
}

double h_of(Index n) { return 2.0 / static_cast<double>(n - 1); }

LabeledRun flow_run(const std::string& label, double eps, Index n, const RunOptions& opt) {
  SeedParams sp;
  sp.epsilon = eps;
  LabeledRun r{label, n, sp.delta, {}};
  r.traj = run(construct_initial_metric(sp, SpatialGrid(n)), opt);
  return r;
}

}  // namespace

std::vector<double> observed_orders(const std::vector<double>& e, const std::vector<Index>& n) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) out.push_back(std::log(e[k] / e[k + 1]) / std::log(h_of(n[k]) / h_of(n[k + 1])));
  return out;
}

CriterionResult check_soliton_identities(Index nodes) {
  CriterionResult c{1, "soliton identities", false, ""};
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = make_soliton(-10.0, 10.0, nodes);
  const auto res = ode_residuals(p);
  ArrayXd r(1);
  r(0) = -0.365076;
  const double phi_neg = solve_phi(r)(0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok1 = res.res1_max <= 1e-12, ok2 = res.res2_max <= 1e-10;
  const bool ok3 = std::abs(phi_neg - 2.0) <= 1e-10, ok4 = secs < 1.0;
  c.pass = ok1 && ok2 && ok3 && ok4;
  c.detail = "ode1 " + sci(res.res1_max) + " (<=1e-12) ode2 " + sci(res.res2_max) + " (<=1e-10) phi(-0.365076)=" +
             fix(phi_neg, 10) + " (2 +- 1e-10" + (ok3 ? "" : ", FAILS; phi=2 at r=+" + fix(sol::implicit_r(2.0, 0.0), 6)) +
             ") runtime " + fix(secs, 3) + "s (<1s)";
  return c;
}

CriterionResult check_kahler_preservation(const std::vector<LabeledRun>& runs) {
  CriterionResult c{2, "Kahler preservation", true, ""};
  std::vector<double> err;
  std::vector<Index> ns;
  std::string d;
  for (const auto& r : runs) {
    double e = 0.0;
    for (const auto& rec : r.traj.series) e = std::max(e, rec.F_max_abs / rec.mu);
    const double bound = 10.0 * h_of(r.nodes) * h_of(r.nodes);
    c.pass = c.pass && e <= bound;
    err.push_back(e);
    ns.push_back(r.nodes);
    d += "N=" + std::to_string(r.nodes) + " max|F|/mu " + sci(e) + " (<=" + sci(bound) + ") ";
  }
  const auto ord = observed_orders(err, ns);
  for (double o : ord) {
    c.pass = c.pass && o >= 1.8;
    d += "order " + fix(o, 2) + " ";
  }
  c.detail = d + "(>=1.8)";
  return c;
}

CriterionResult check_psi_window(const std::vector<LabeledRun>& runs) {
  CriterionResult c{3, "psi window", true, ""};
  for (const auto& r : runs) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& rec : r.traj.series) {
      lo = std::min(lo, rec.psi_min);
      hi = std::max(hi, rec.psi_max);
    }
    const bool ok = lo >= -1.0 - 1e-6 && hi <= r.tol();
    c.pass = c.pass && ok;
    c.detail += r.label + " psi in [" + fix(lo, 6) + ", " + sci(hi) + "] (>= -1-1e-6, <= " + sci(r.tol()) + ") ";
  }
  return c;
}

CriterionResult check_gradient_bounds(const std::vector<LabeledRun>& runs) {
  CriterionResult c{4, "gradient bounds", true, ""};
  for (const auto& r : runs) {
    double gs = 0.0, fs = -INFINITY;
    for (const auto& rec : r.traj.series) {
      gs = std::max(gs, rec.gs_max_abs);
      fs = std::max(fs, rec.fs_max);
    }
    const double fs_bound = std::max(2.0 / std::sqrt(3.0), r.traj.series.front().fs_max) + r.tol();
    const bool ok = gs <= 1.0 + r.tol() && fs <= fs_bound;
    c.pass = c.pass && ok;
    c.detail += r.label + " max|g_s| " + fix(gs, 6) + " (<=1+10h^2) max f_s " + fix(fs, 6) + " (<=" + fix(fs_bound, 6) + ") ";
  }
  return c;
}

CriterionResult check_threshold(const std::vector<LabeledRun>& runs) {
  CriterionResult c{5, "threshold", true, ""};
  for (const auto& r : runs) {
    double lo = INFINITY, worst_drop = 0.0;
    const auto& s = r.traj.series;
    for (std::size_t i = 0; i < s.size(); ++i) {
      lo = std::min(lo, s[i].threshold);
      if (i == 0) continue;
      // Allowed decrease accumulates per step: 10 h^2 dt summed over the steps in between.
      const double allowed = r.tol() * (s[i].t - s[i - 1].t);
      worst_drop = std::max(worst_drop, (s[i - 1].threshold - s[i].threshold) - allowed);
    }
    const double floor = r.delta * r.delta - r.tol();
    const bool ok = lo >= floor && worst_drop <= 0.0;
    c.pass = c.pass && ok;
    c.detail += r.label + " min " + fix(lo, 6) + " (>=" + fix(floor, 6) + ") excess drop " + sci(worst_drop) + " (<=0) ";
  }
  return c;
}

CriterionResult check_pole_rates(const std::vector<LabeledRun>& runs, const LabeledRun& kahler, const LabeledRun& perturbed) {
  CriterionResult c{6, "pole rates", true, ""};
  for (const auto& r : runs) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& rec : r.traj.series) {
      lo = std::min(lo, rec.rate_g2_minus);
      hi = std::max(hi, rec.rate_g2_minus);
    }
    const bool ok = lo >= -12.2 && hi <= -3.8;
    c.pass = c.pass && ok;
    c.detail += r.label + " rate in [" + fix(lo) + ", " + fix(hi) + "] ";
  }
  const double r0 = kahler.traj.series.front().rate_g2_minus;
  const double r1 = perturbed.traj.series.front().rate_g2_minus;
  c.pass = c.pass && std::abs(r0 + 4.0) <= 0.05 && std::abs(r1 + 4.2) <= 0.05;
  c.detail += "(within [-12.2, -3.8]) t=0: eps=0 " + fix(r0) + " (-4 +- 0.05) eps=0.05 " + fix(r1) + " (-4.2 +- 0.05)";
  return c;
}

CriterionResult check_singularity_location(const std::vector<LabeledRun>& runs) {
  CriterionResult c{7, "singularity location", true, ""};
  for (const auto& r : runs) {
    const auto& s = r.traj.series;
    std::size_t good = 0;
    for (const auto& rec : s)
      if (rec.mu_argmin == 0 || rec.g_minus - rec.mu <= r.tol()) ++good;
    const double frac = static_cast<double>(good) / static_cast<double>(s.size());
    const bool has_T = r.traj.T_est.has_value();
    const double res = has_T ? r.traj.T_est->fit_residual : INFINITY;
    const bool ok = frac >= 0.99 && has_T && res <= 0.01;
    c.pass = c.pass && ok;
    c.detail += r.label + " argmin at s_- " + fix(100.0 * frac, 2) + "% (>=99%) fit residual " + sci(res) + " (<=1%)";
    if (has_T) c.detail += " T=" + fix(r.traj.T_est->T, 6);
    c.detail += " ";
  }
  return c;
}

CriterionResult check_type1(const std::vector<LabeledRun>& runs) {
  CriterionResult c{8, "Type-I", true, ""};
  for (const auto& r : runs) {
    if (!r.traj.T_est) {
      c.pass = false;
      c.detail += r.label + " has no T estimate ";
      continue;
    }
    const double T = r.traj.T_est->T;
    const auto t1 = type1_ratios(r.traj.series, T);
    // Convergence of mu^2/(T - t): spread over the final decade relative to its mean.
    double tau_last = T - r.traj.series.back().t;
    double lo = INFINITY, hi = -INFINITY, sum = 0.0;
    int cnt = 0;
    for (const auto& [t, q] : t1.mu2_rate) {
      if (T - t > 10.0 * tau_last) continue;
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      sum += q;
      ++cnt;
    }
    const double mean = cnt ? sum / cnt : NAN;
    const double spread = cnt ? (hi - lo) / mean : INFINITY;
    const bool ok = !t1.ratios.empty() && t1.ratio_min >= 0.25 && t1.ratio_max <= 50.0 && cnt >= 3 && spread <= 0.05 &&
                    mean >= 3.7 && mean <= 12.3;
    c.pass = c.pass && ok;
    c.detail += r.label + " sup|k|(T-t) in [" + fix(t1.ratio_min) + ", " + fix(t1.ratio_max) + "] ([0.25, 50]) mu^2/(T-t) " +
                fix(mean) + " ([3.7, 12.3]) spread " + sci(spread) + " (<=5%) ";
  }
  return c;
}

CriterionResult check_blowup(const LabeledRun& r, int count) {
  CriterionResult c{9, "blow-up convergence", false, ""};
  const auto sol = make_soliton(-1.0, 1.0, 33);
  std::vector<double> d;
  try {
    for (const auto& fr : extract_blowup_sequence(r.traj, count)) d.push_back(align_distance(fr, sol).dist);
  } catch (const std::exception& e) {
    c.detail = r.label + " extraction/alignment failed: " + e.what() + " ";
  }
  bool mono = d.size() == static_cast<std::size_t>(count);
  for (std::size_t k = d.size() >= 3 ? d.size() - 2 : 1; k < d.size(); ++k) mono = mono && d[k] <= d[k - 1];
  const double last = d.empty() ? INFINITY : d.back();
  c.detail += r.label + " dist";
  for (double v : d) c.detail += " " + sci(v);
  c.detail += std::string(" (last 3 nonincreasing: ") + (mono ? "yes" : "no") + ", final <= 0.05)";

  // Self-alignment: g^2 = 2 phi(rho + 1.3) on rho in [-6, 6].
  const Index n = 601;
  ArrayXd rho = ArrayXd::LinSpaced(n, -6.0, 6.0), g2(n), f2(n);
  for (Index i = 0; i < n; ++i) {
    const double w = sol::solve_w(rho(i) + 1.3);
    g2(i) = 2.0 * (1.0 + w);
    f2(i) = 2.0 * sol::phi_r_implicit(w);
  }
  const auto a = align_arrays(rho, g2, f2, sol);
  const bool self_ok = std::abs(a.chi_star + 1.3) <= 1e-6 && std::abs(a.scale_star - 0.5) <= 1e-6 && a.dist <= 1e-8;
  c.detail += "; self-alignment chi " + fix(a.chi_star, 9) + " sigma " + fix(a.scale_star, 9) + " (1e-6) dist " + sci(a.dist) +
              " (<=1e-8)";
  c.pass = mono && last <= 0.05 && self_ok;
  return c;
}

CriterionResult check_scalar_equivalence(const std::vector<Index>& twin_nodes, const std::vector<Index>& u_nodes) {
  CriterionResult c{10, "scalar-full equivalence", true, ""};
  std::vector<double> dev;
  for (Index n : twin_nodes) {
    // mu0 = alpha = 1 and mu^2 = mu0^2 - 4t, so the singular time is 1/4.
    const auto k = construct_initial_metric(SeedParams{}, SpatialGrid(n));
    const double T = k.g(0) * k.g(0) / 4.0;
    const auto tw = twin_run(k, 0.5 * T);
    const double bound = 10.0 * h_of(n) * h_of(n);
    c.pass = c.pass && tw.max_rel_dev <= bound;
    dev.push_back(tw.max_rel_dev);
    c.detail += "N=" + std::to_string(n) + " twin dev " + sci(tw.max_rel_dev) + " (<=" + sci(bound) + ") ";
  }
  for (double o : observed_orders(dev, twin_nodes)) {
    c.pass = c.pass && o >= 1.8;
    c.detail += "order " + fix(o, 2) + " ";
  }
  c.detail += "(>=1.8); u residual";
  double prev = 0.0;
  for (Index n : u_nodes) {
    const auto cs = calabi_from_profile(construct_initial_metric(SeedParams{}, SpatialGrid(n)));
    const double res = u_consistency(cs, advance_calabi(cs, 1e-5)).residual;
    if (prev > 0.0) c.pass = c.pass && prev / res >= 4.0;
    c.detail += " " + sci(res);
    prev = res;
  }
  c.detail += " (ratio >= 4 per halving)";
  return c;
}

CriterionResult check_determinism(Index nodes) {
  CriterionResult c{11, "determinism", false, ""};
  SeedParams sp;
  sp.epsilon = 0.05;
  const auto p = construct_initial_metric(sp, SpatialGrid(nodes));
  RunOptions o;
  o.stop.mu2_stop_fraction = 0.5;
  o.output.record_stride = 7;
  const auto full = run(p, o);

  RunOptions first = o;
  first.stop.max_steps = static_cast<std::int64_t>(full.series.back().step / 3);
  FlowRunner a(p, first);
  a.advance();
  const auto file = std::filesystem::temp_directory_path() / ("wbrf_determinism_" + std::to_string(nodes) + ".json");
  save_checkpoint(a.state(), o, file);
  auto [st, opt] = load_checkpoint(file);
  std::filesystem::remove(file);
  FlowRunner b(std::move(st), opt);
  b.advance();
  const auto resumed = b.finish();
  const auto x = series_csv(full.series, FloatFormat::Decimal), y = series_csv(resumed.series, FloatFormat::Decimal);
  const auto xh = series_csv(full.series, FloatFormat::Hex), yh = series_csv(resumed.series, FloatFormat::Hex);
  c.pass = x == y && xh == yh;
  c.detail = "N=" + std::to_string(nodes) + " pause at step " + std::to_string(first.stop.max_steps) + ", " +
             std::to_string(full.series.size()) + " records, CSV sha256 " + sha256_hex(x).substr(0, 16) + " vs " +
             sha256_hex(y).substr(0, 16) + (c.pass ? " (identical)" : " (DIFFER)");
  return c;
}

std::vector<CriterionResult> run_acceptance(const AcceptancePlan& plan,
                                            const std::function<void(const std::string&)>& progress) {
  auto note = [&](const std::string& s) {
    if (progress) progress(s);
  };
  std::vector<CriterionResult> out;
  out.push_back(check_soliton_identities(plan.soliton_nodes));
  note("soliton identities done");

  std::vector<LabeledRun> kahler;
  RunOptions ko;
  ko.stop.mu2_stop_fraction = plan.kahler_mu2_fraction;
  for (Index n : plan.kahler_nodes) {
    kahler.push_back(flow_run("eps=0 N=" + std::to_string(n), 0.0, n, ko));
    note("Kahler run N=" + std::to_string(n) + " done");
  }
  // Full runs to the mu stop, used by the whole-run criteria.
  RunOptions fo;
  const Index nk = plan.kahler_nodes.size() > 1 ? plan.kahler_nodes[1] : plan.kahler_nodes.front();
  LabeledRun kfull = flow_run("eps=0 N=" + std::to_string(nk) + " full", 0.0, nk, fo);
  note("eps=0 full run done");
  LabeledRun pert = flow_run("eps=" + fix(plan.blowup_epsilon, 2) + " N=" + std::to_string(plan.blowup_nodes), plan.blowup_epsilon,
                             plan.blowup_nodes, fo);
  note("perturbed full run done");

  std::vector<LabeledRun> whole = {kfull, pert};
  std::vector<LabeledRun> all = kahler;
  all.push_back(kfull);
  all.push_back(pert);

  out.push_back(check_kahler_preservation(kahler));
  out.push_back(check_psi_window({pert}));
  out.push_back(check_gradient_bounds(all));
  out.push_back(check_threshold(all));
  out.push_back(check_pole_rates(all, kfull, pert));
  out.push_back(check_singularity_location(whole));
  out.push_back(check_type1(whole));
  out.push_back(check_blowup(pert, plan.blowup_count));
  note("blow-up done");
  out.push_back(check_scalar_equivalence(plan.twin_nodes, plan.u_nodes));
  note("scalar equivalence done");
  out.push_back(check_determinism(plan.determinism_nodes));
  return out;
}

std::string format_result(const CriterionResult& r) {
  return std::string(r.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " (" + r.title + "): " + r.detail;
}

}  // namespace wbrf
