#include "wbrf/blowup.hpp"
#include "wbrf/checks.hpp"
#include "wbrf/config.hpp"
#include "wbrf/errors.hpp"
#include "wbrf/io.hpp"
#include "wbrf/kahler.hpp"
#include "wbrf/soliton.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

using namespace wbrf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailed = 1;      // a check or acceptance criterion failed
constexpr int kBadConfig = 2;   // config or parameter error
constexpr int kBadData = 3;     // initial data rejected or a run could not proceed

struct Common {
  std::string config;
  std::string out;
  Index grid = 0;
  std::string resume;
  bool strict = false;
};

RunConfig load_config(const Common& c) {
  std::vector<std::string> warnings;
  RunConfig cfg = c.config.empty() ? parse_config("schema_version = 1\n")
                                   : parse_config(read_file(c.config), c.strict, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (c.grid > 0) {
    if (c.grid < 33) throw ConfigError({"--grid: must be at least 33"});
    cfg.nodes = c.grid;
  }
  return cfg;
}

fs::path out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("WBRF_OUT_DIR"); env && *env) return env;
  return "wbrf_out";
}

void print_manifest(const Manifest& m, const fs::path& dir) {
  std::cout << "wrote " << m.files.size() << " files to " << dir.string() << (m.complete ? "" : " (INCOMPLETE)") << "\n";
  for (const auto& e : m.errors) std::cerr << "error: " << e << "\n";
}

json closeness_json(const ClosenessReport& r) {
  json j = json::array();
  const char* names = "abcde";
  for (int k = 0; k < kFlagCount; ++k)
    j.push_back({{"flag", std::string(1, names[k])}, {"pass", r.pass[k]}, {"margin", r.margin[k]}, {"node", r.where[k]}});
  return j;
}

int cmd_validate(const Common& c) {
  const RunConfig cfg = load_config(c);
  std::cout << serialize_config(cfg);
  const auto p = construct_initial_metric(cfg.seed, SpatialGrid(cfg.nodes));
  const auto r = validate_closeness(p, cfg.seed.delta);
  std::cout << "\n# closeness flags\n" << closeness_json(r).dump(2) << "\n";
  return r.all() ? kOk : kFailed;
}

// Runs (or resumes) the flow and writes outputs.  Returns the trajectory.
FlowTrajectory do_run(const Common& c, const RunConfig& cfg, const fs::path& dir, bool write) {
  std::unique_ptr<FlowRunner> runner;
  if (!c.resume.empty()) {
    auto [st, opt] = load_checkpoint(c.resume);
    // The config may lift or move the pause point; everything else comes from the checkpoint.
    opt.stop.max_steps = cfg.stop.max_steps;
    runner = std::make_unique<FlowRunner>(std::move(st), opt);
  } else {
    const auto p = construct_initial_metric(cfg.seed, SpatialGrid(cfg.nodes));
    runner = std::make_unique<FlowRunner>(p, cfg.run_options());
  }
  const StopReason why = runner->advance();
  FlowTrajectory tr = why == StopReason::MaxSteps ? runner->state().trajectory : runner->finish();
  std::cout << "stop: " << to_string(why) << " at step " << runner->state().step << " t=" << format_double(runner->state().profile.t, FloatFormat::Decimal)
            << "\n";
  if (tr.T_est)
    std::cout << "T_est " << format_double(tr.T_est->T, FloatFormat::Decimal) << " slope " << tr.T_est->slope
              << " fit residual " << tr.T_est->fit_residual << "\n";
  if (write) {
    fs::create_directories(dir);
    save_checkpoint(runner->state(), runner->options(), dir / "checkpoint.json");
    OutputBundle b{&tr, {}, {}};
    b.extra_json.emplace_back("config.json", json{{"config", serialize_config(cfg)}});
    print_manifest(write_outputs(b, dir, cfg.float_format, cfg.tag), dir);
    std::cout << "checkpoint: " << (dir / "checkpoint.json").string() << " (not listed in the manifest)\n";
  }
  return tr;
}

int cmd_run(const Common& c) {
  const RunConfig cfg = load_config(c);
  do_run(c, cfg, out_dir(c), true);
  return kOk;
}

int cmd_soliton(const Common& c) {
  const RunConfig cfg = load_config(c);
  const auto p = make_soliton(cfg.soliton_r_min, cfg.soliton_r_max, cfg.soliton_nodes);
  const auto ode = ode_residuals(p);
  const auto sys = soliton_system_residuals(p);
  const auto stp = soliton_step_check(p, 1e-5);
  const FloatFormat f = cfg.float_format;
  json prof;
  prof["schema_version"] = kSchemaVersion;
  prof["kind"] = "soliton";
  for (const auto& [name, arr] : {std::pair<const char*, const ArrayXd*>{"r", &p.r}, {"phi", &p.phi}, {"phi_r", &p.phi_r},
                                  {"s", &p.s}, {"f", &p.f}, {"g", &p.g}}) {
    json a = json::array();
    for (Index i = 0; i < arr->size(); ++i) a.push_back(format_double((*arr)(i), f));
    prof[name] = a;
  }
  json res = {{"ode1", ode.res1_max},   {"ode2", ode.res2_max},     {"ode1_fd", ode.res1_fd_max},
              {"ode2_fd", ode.res2_fd_max}, {"implicit", ode.implicit_max}, {"lambda", sys.lambda},
              {"scale", sys.scale},     {"h1d", sys.h1d_max},       {"g2d", sys.g2d_max},
              {"F", sys.F_max},         {"F_fd", sys.F_fd_max},     {"step_dev", stp.max_dev},
              {"step_dt", stp.dt},      {"phi_eq_2_at_r", sol::implicit_r(2.0, 0.0)}};
  std::cout << res.dump(2) << "\n";
  const fs::path dir = out_dir(c);
  OutputBundle b;
  b.extra_json.emplace_back("soliton.json", prof);
  b.extra_json.emplace_back("soliton_residuals.json", res);
  print_manifest(write_outputs(b, dir, f, cfg.tag), dir);
  return kOk;
}

int cmd_blowup(const Common& c) {
  RunConfig cfg = load_config(c);
  const fs::path dir = out_dir(c);
  const auto tr = do_run(c, cfg, dir, false);
  const auto frames = extract_blowup_sequence(tr, cfg.blowup_count);
  const auto sol = make_soliton(-1.0, 1.0, 33);
  OutputBundle b{&tr, {}, {}};
  int k = 0;
  for (const auto& fr : frames) {
    AlignmentRow row{k, fr.t_center, fr.K, align_distance(fr, sol, cfg.blowup_window)};
    std::cout << "frame " << k << " t=" << format_double(fr.t_center, FloatFormat::Decimal) << " K=" << fr.K
              << " chi*=" << row.a.chi_star << " scale*=" << row.a.scale_star << " dist=" << row.a.dist << "\n";
    json fj = profile_to_json(fr.profile, cfg.float_format);
    json rw = json::array();
    for (Index i = 0; i < fr.r_window.size(); ++i) rw.push_back(format_double(fr.r_window(i), cfg.float_format));
    fj["rho"] = rw;
    fj["K"] = fr.K;
    fj["t_center"] = fr.t_center;
    b.extra_json.emplace_back("frames/frame_" + std::to_string(k) + ".json", fj);
    b.alignments.push_back(row);
    ++k;
  }
  fs::create_directories(dir / "frames");
  print_manifest(write_outputs(b, dir, cfg.float_format, cfg.tag), dir);
  return kOk;
}

int cmd_twin(const Common& c) {
  const RunConfig cfg = load_config(c);
  if (cfg.seed.epsilon != 0.0) throw ConfigError({"seed.epsilon: twin runs need Kahler data (epsilon = 0)"});
  const auto p = construct_initial_metric(cfg.seed, SpatialGrid(cfg.nodes));
  // mu^2 = mu0^2 - 4t on Kahler data.
  const double T = p.g(0) * p.g(0) / 4.0;
  const auto tw = twin_run(p, cfg.twin_fraction * T, cfg.stepping);
  json j = {{"schema_version", kSchemaVersion}, {"kind", "twin"},           {"nodes", cfg.nodes},
            {"t_end", tw.t_end},                {"max_rel_dev", tw.max_rel_dev}, {"steps_full", tw.steps_full},
            {"steps_scalar", tw.steps_scalar},  {"remesh_full", tw.remesh_full}, {"remesh_scalar", tw.remesh_scalar}};
  std::cout << j.dump(2) << "\n";
  const fs::path dir = out_dir(c);
  OutputBundle b;
  b.extra_json.emplace_back("twin.json", j);
  print_manifest(write_outputs(b, dir, cfg.float_format, cfg.tag), dir);
  return kOk;
}

int cmd_report(const Common& c, bool quick) {
  const RunConfig cfg = load_config(c);
  AcceptancePlan plan;
  plan.soliton_nodes = cfg.soliton_nodes;
  plan.blowup_count = cfg.blowup_count;
  if (quick) {
    plan.kahler_nodes = {65, 129, 257};
    plan.blowup_nodes = 257;
    plan.determinism_nodes = 65;
  }
  if (c.grid > 0) plan.blowup_nodes = c.grid;
  const auto results = run_acceptance(plan, [](const std::string& s) { std::cerr << s << "\n"; });
  json rows = json::array();
  bool all = true;
  for (const auto& r : results) {
    std::cout << format_result(r) << "\n";
    rows.push_back({{"criterion", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
    all = all && r.pass;
  }
  const fs::path dir = out_dir(c);
  OutputBundle b;
  b.extra_json.emplace_back("report.json", json{{"schema_version", kSchemaVersion}, {"quick", quick}, {"criteria", rows}});
  print_manifest(write_outputs(b, dir, cfg.float_format, cfg.tag), dir);
  return all ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warped Berger Ricci flow on the twisted product of two spheres"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
    s->add_option("--out", c.out, "output directory (default: $WBRF_OUT_DIR, then ./wbrf_out)");
    s->add_option("--grid", c.grid, "number of grid nodes, overrides grid.nodes");
    s->add_flag("--strict", c.strict, "treat unknown config keys as errors");
  };
  auto* validate = app.add_subcommand("validate", "check a config and the closeness flags of its initial data");
  auto* runc = app.add_subcommand("run", "evolve the flow and write diagnostics, snapshots and a checkpoint");
  auto* soliton = app.add_subcommand("soliton", "sample the blow-down soliton and its residuals");
  auto* blowup = app.add_subcommand("blowup", "run, extract blow-up frames and align them to the soliton");
  auto* twin = app.add_subcommand("twin", "compare the full system with the scalar Kahler flow");
  auto* report = app.add_subcommand("report", "run the acceptance checks and print one line per criterion");
  for (auto* s : {validate, runc, soliton, blowup, twin, report}) add_common(s);
  for (auto* s : {runc, blowup}) s->add_option("--resume", c.resume, "checkpoint to continue from")->check(CLI::ExistingFile);
  bool quick = false;
  report->add_flag("--quick", quick, "small grids for a fast smoke run");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*validate) return cmd_validate(c);
    if (*runc) return cmd_run(c);
    if (*soliton) return cmd_soliton(c);
    if (*blowup) return cmd_blowup(c);
    if (*twin) return cmd_twin(c);
    if (*report) return cmd_report(c, quick);
  } catch (const ConfigError& e) {
    for (const auto& m : e.errors) std::cerr << "config error: " << m << "\n";
    return kBadConfig;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const BlowThrough& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kBadData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadData;
  }
  return kOk;
}
