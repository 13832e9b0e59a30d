#include "wbrf/config.hpp"

#include "wbrf/errors.hpp"
#include "wbrf/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace wbrf {

namespace pt = boost::property_tree;

RunOptions RunConfig::run_options() const {
  RunOptions o;
  o.stop = stop;
  o.stepping = stepping;
  o.output = output;
  o.delta = seed.delta;
  o.override_closeness = override_closeness;
  return o;
}

namespace {

const char* f_kind_name(FShapeKind k) { return k == FShapeKind::HalfSine ? "half_sine" : "plateau"; }
const char* phi_kind_name(PhiKind k) { return k == PhiKind::Constant ? "constant" : "bump"; }
const char* remesh_name(RemeshMode m) {
  switch (m) {
    case RemeshMode::Graded: return "graded";
    case RemeshMode::Uniform: return "uniform";
    case RemeshMode::Off: return "off";
  }
  return "graded";
}

// One schema entry: how to read a value into the config and how to print it back.
struct Field {
  std::function<void(RunConfig&, const std::string&)> read;
  std::function<std::string(const RunConfig&)> write;
};

std::string fmt(double v) { return format_double(v, FloatFormat::Decimal); }

double to_double(const std::string& s) { return parse_double(s); }

long long to_int(const std::string& s) {
  std::size_t pos = 0;
  const long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true or false");
}

template <typename E>
E to_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> opts) {
  std::string names;
  for (const auto& [name, val] : opts) {
    if (s == name) return val;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw std::invalid_argument("expected one of " + names);
}

#define DBL(path, member) \
  {path, {[](RunConfig& c, const std::string& v) { c.member = to_double(v); }, [](const RunConfig& c) { return fmt(c.member); }}}
#define INT(path, member, type)                                                                    \
  {path,                                                                                           \
   {[](RunConfig& c, const std::string& v) { c.member = static_cast<type>(to_int(v)); },           \
    [](const RunConfig& c) { return std::to_string(c.member); }}}

// Key order here is the serialization order.
const std::vector<std::pair<std::string, Field>>& schema() {
  static const std::vector<std::pair<std::string, Field>> s = {
      INT("schema_version", schema_version, int),
      {"tag", {[](RunConfig& c, const std::string& v) { c.tag = v; }, [](const RunConfig& c) { return c.tag; }}},
      {"seed.f_shape",
       {[](RunConfig& c, const std::string& v) {
          c.seed.f_shape.kind = to_enum<FShapeKind>(v, {{"half_sine", FShapeKind::HalfSine}, {"plateau", FShapeKind::Plateau}});
        },
        [](const RunConfig& c) { return std::string(f_kind_name(c.seed.f_shape.kind)); }}},
      DBL("seed.f_length", seed.f_shape.length),
      DBL("seed.f_cap", seed.f_shape.cap),
      DBL("seed.alpha", seed.alpha),
      DBL("seed.delta", seed.delta),
      DBL("seed.epsilon", seed.epsilon),
      {"seed.phi_shape",
       {[](RunConfig& c, const std::string& v) {
          c.seed.phi.kind = to_enum<PhiKind>(v, {{"constant", PhiKind::Constant}, {"bump", PhiKind::Bump}});
        },
        [](const RunConfig& c) { return std::string(phi_kind_name(c.seed.phi.kind)); }}},
      DBL("seed.phi_center", seed.phi.center),
      DBL("seed.phi_width", seed.phi.width),
      INT("grid.nodes", nodes, Index),
      DBL("stepping.cfl", stepping.cfl),
      DBL("stepping.c_curv", stepping.c_curv),
      {"stepping.remesh",
       {[](RunConfig& c, const std::string& v) {
          c.stepping.remesh = to_enum<RemeshMode>(
              v, {{"graded", RemeshMode::Graded}, {"uniform", RemeshMode::Uniform}, {"off", RemeshMode::Off}});
        },
        [](const RunConfig& c) { return std::string(remesh_name(c.stepping.remesh)); }}},
      DBL("stepping.remesh_ratio", stepping.remesh_ratio),
      DBL("stop.mu_stop_fraction", stop.mu_stop_fraction),
      DBL("stop.mu2_stop_fraction", stop.mu2_stop_fraction),
      DBL("stop.dt_floor", stop.dt_floor),
      DBL("stop.t_max", stop.t_max),
      DBL("stop.t_end", stop.t_end),
      INT("stop.max_steps", stop.max_steps, std::int64_t),
      INT("output.record_stride", output.record_stride, std::int64_t),
      INT("output.snapshots_per_octave", output.snapshots_per_octave, int),
      {"output.float_format",
       {[](RunConfig& c, const std::string& v) {
          c.float_format = to_enum<FloatFormat>(v, {{"decimal", FloatFormat::Decimal}, {"hex", FloatFormat::Hex}});
        },
        [](const RunConfig& c) { return std::string(c.float_format == FloatFormat::Hex ? "hex" : "decimal"); }}},
      INT("blowup.count", blowup_count, int),
      DBL("blowup.window", blowup_window),
      DBL("soliton.r_min", soliton_r_min),
      DBL("soliton.r_max", soliton_r_max),
      INT("soliton.nodes", soliton_nodes, Index),
      DBL("report.twin_fraction", twin_fraction),
      {"report.override_closeness",
       {[](RunConfig& c, const std::string& v) { c.override_closeness = to_bool(v); },
        [](const RunConfig& c) { return std::string(c.override_closeness ? "true" : "false"); }}},
  };
  return s;
}

#undef DBL
#undef INT

const std::set<std::string> kRequired = {"schema_version"};

void validate(const RunConfig& c, std::vector<std::string>& errs) {
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  need(c.schema_version == kSchemaVersion, "schema_version: only version " + std::to_string(kSchemaVersion) + " is supported");
  need(c.seed.f_shape.length > 0.0, "seed.f_length: must be positive");
  need(c.seed.f_shape.cap > 0.0, "seed.f_cap: must be positive");
  need(c.seed.alpha > 0.0, "seed.alpha: must be positive");
  need(c.seed.delta > 0.0, "seed.delta: must be positive");
  need(c.seed.epsilon >= 0.0 && c.seed.epsilon < 1.0, "seed.epsilon: must lie in [0, 1)");
  need(c.seed.phi.width > 0.0, "seed.phi_width: must be positive");
  need(c.nodes >= 33, "grid.nodes: must be at least 33");
  need(c.stepping.cfl > 0.0 && c.stepping.cfl <= 1.0, "stepping.cfl: must lie in (0, 1]");
  need(c.stepping.c_curv > 0.0, "stepping.c_curv: must be positive");
  need(c.stepping.remesh_ratio > 1.0, "stepping.remesh_ratio: must exceed 1");
  need(c.stop.mu_stop_fraction >= 0.0 && c.stop.mu_stop_fraction < 1.0, "stop.mu_stop_fraction: must lie in [0, 1)");
  need(c.stop.mu2_stop_fraction >= 0.0 && c.stop.mu2_stop_fraction < 1.0, "stop.mu2_stop_fraction: must lie in [0, 1)");
  need(c.stop.dt_floor > 0.0, "stop.dt_floor: must be positive");
  need(c.output.record_stride >= 1, "output.record_stride: must be at least 1");
  need(c.output.snapshots_per_octave >= 1, "output.snapshots_per_octave: must be at least 1");
  need(c.blowup_count >= 3, "blowup.count: must be at least 3");
  need(c.blowup_window > 0.0, "blowup.window: must be positive");
  need(c.soliton_r_min < c.soliton_r_max, "soliton.r_min: must be below soliton.r_max");
  need(c.soliton_nodes >= 33, "soliton.nodes: must be at least 33");
  need(c.twin_fraction > 0.0 && c.twin_fraction < 1.0, "report.twin_fraction: must lie in (0, 1)");
  if (c.seed.f_shape.length > 0.0 && c.seed.alpha > 0.0 && c.seed.delta > 0.0 && c.seed.epsilon >= 0.0) {
    try {
      check_seed(c.seed);
    } catch (const ParameterError& e) {
      errs.push_back(std::string("seed: ") + e.what());
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, bool strict, std::vector<std::string>* warnings) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("syntax: ") + e.what()});
  }

  std::map<std::string, std::string> kv;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      kv[key] = node.data();
    } else {
      for (const auto& [sub, leaf] : node) kv[key + "." + sub] = leaf.data();
    }
  }

  RunConfig c;
  std::vector<std::string> errs;
  std::set<std::string> seen;
  for (const auto& [path, field] : schema()) {
    const auto it = kv.find(path);
    if (it == kv.end()) continue;
    seen.insert(path);
    try {
      field.read(c, it->second);
    } catch (const std::exception& e) {
      errs.push_back(path + ": cannot read '" + it->second + "' (" + e.what() + ")");
    }
  }
  for (const auto& k : kRequired)
    if (!seen.count(k)) errs.push_back(k + ": required key is missing");
  for (const auto& [k, v] : kv) {
    if (seen.count(k)) continue;
    const std::string msg = k + ": unknown key";
    if (strict) {
      errs.push_back(msg);
    } else if (warnings) {
      warnings->push_back(msg);
    }
  }
  if (errs.empty()) validate(c, errs);
  if (!errs.empty()) throw ConfigError(std::move(errs));
  if (warnings)
    for (auto& w : seed_warnings(c.seed)) warnings->push_back("seed: " + w);
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  std::string section;
  for (const auto& [path, field] : schema()) {
    const auto dot = path.find('.');
    const std::string sec = dot == std::string::npos ? "" : path.substr(0, dot);
    const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << key << " = " << field.write(c) << "\n";
  }
  return out.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize_config(a) == serialize_config(b); }

}  // namespace wbrf
