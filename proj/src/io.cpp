#include "wbrf/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace wbrf {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v, FloatFormat fmt) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  if (fmt == FloatFormat::Decimal) {
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  }
  const bool neg = std::signbit(v);
  const auto r = std::to_chars(buf, buf + sizeof buf, std::abs(v), std::chars_format::hex);
  return std::string(neg ? "-0x" : "0x") + std::string(buf, r.ptr);
}

double parse_double(std::string_view s) {
  const std::string str(s);
  if (str.empty()) throw std::invalid_argument("empty number");
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size()) throw std::invalid_argument("not a number: '" + str + "'");
  return v;
}

namespace {

struct Column {
  std::string name;
  std::function<std::string(const DiagnosticRecord&, FloatFormat)> put;
  std::function<void(DiagnosticRecord&, const std::string&)> get;
};

Column dcol(const std::string& name, double DiagnosticRecord::*m) {
  return {name, [m](const DiagnosticRecord& r, FloatFormat f) { return format_double(r.*m, f); },
          [m](DiagnosticRecord& r, const std::string& s) { r.*m = parse_double(s); }};
}

template <typename I>
Column icol(const std::string& name, I DiagnosticRecord::*m) {
  return {name, [m](const DiagnosticRecord& r, FloatFormat) { return std::to_string(r.*m); },
          [m](DiagnosticRecord& r, const std::string& s) { r.*m = static_cast<I>(std::stoll(s)); }};
}

Column flagcol(int k) {
  const char name[] = {'f', 'l', 'a', 'g', '_', static_cast<char>('a' + k), '\0'};
  return {name, [k](const DiagnosticRecord& r, FloatFormat) { return std::string(r.flags[k] ? "1" : "0"); },
          [k](DiagnosticRecord& r, const std::string& s) { r.flags[k] = s == "1"; }};
}

const std::vector<Column>& columns() {
  static const std::vector<Column> c = [] {
    using R = DiagnosticRecord;
    std::vector<Column> v = {
        dcol("t", &R::t),
        icol("step", &R::step),
        dcol("dt", &R::dt),
        dcol("mu", &R::mu),
        icol("mu_argmin", &R::mu_argmin),
        dcol("g_minus", &R::g_minus),
        dcol("g_plus", &R::g_plus),
        dcol("s_minus", &R::s_minus),
        dcol("s_plus", &R::s_plus),
        dcol("threshold", &R::threshold),
        dcol("rate_g2_minus", &R::rate_g2_minus),
        dcol("rate_g2_plus", &R::rate_g2_plus),
        dcol("psi_min", &R::psi_min),
        dcol("psi_max", &R::psi_max),
        dcol("F_max_abs", &R::F_max_abs),
        dcol("fs_min", &R::fs_min),
        dcol("fs_max", &R::fs_max),
        dcol("gs_max_abs", &R::gs_max_abs),
        dcol("sup_curv", &R::sup_curv),
        dcol("curv_mu2", &R::curv_mu2),
        dcol("Q_min", &R::Q_min),
    };
    for (int k = 0; k < kFlagCount; ++k) v.push_back(flagcol(k));
    v.push_back(icol("remesh_count", &R::remesh_count));
    return v;
  }();
  return c;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

json jnum(double v, FloatFormat fmt) {
  if (fmt == FloatFormat::Hex || !std::isfinite(v)) return format_double(v, fmt);
  return v;
}

double jnum_of(const json& j) { return j.is_string() ? parse_double(j.get<std::string>()) : j.get<double>(); }

json array_json(const ArrayXd& a, FloatFormat fmt) {
  json out = json::array();
  for (Index i = 0; i < a.size(); ++i) out.push_back(jnum(a(i), fmt));
  return out;
}

ArrayXd array_of(const json& j) {
  ArrayXd a(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) a(static_cast<Index>(i)) = jnum_of(j[i]);
  return a;
}

const char* end_name(EndKind e) { return e == EndKind::Pole ? "pole" : "open"; }
EndKind end_of(const std::string& s) {
  if (s == "pole") return EndKind::Pole;
  if (s == "open") return EndKind::Open;
  throw std::invalid_argument("unknown end kind '" + s + "'");
}

}  // namespace

const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : columns()) v.push_back(c.name);
    return v;
  }();
  return names;
}

std::string series_csv(const std::vector<DiagnosticRecord>& series, FloatFormat fmt) {
  std::string out;
  const auto& cols = columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out += (k ? "," : "") + cols[k].name;
  out += "\n";
  for (const auto& r : series) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (k) out += ",";
      out += cols[k].put(r, fmt);
    }
    out += "\n";
  }
  return out;
}

std::vector<DiagnosticRecord> parse_series_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("series CSV: missing header");
  const auto header = split(line, ',');
  const auto& cols = columns();
  if (header.size() < cols.size()) throw std::invalid_argument("series CSV: header has too few columns");
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (header[k] != cols[k].name) throw std::invalid_argument("series CSV: unexpected column '" + header[k] + "'");
  std::vector<DiagnosticRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw std::invalid_argument("series CSV: ragged row");
    DiagnosticRecord r;
    for (std::size_t k = 0; k < cols.size(); ++k) cols[k].get(r, cells[k]);
    out.push_back(r);
  }
  return out;
}

json profile_to_json(const MetricProfile& p, FloatFormat fmt) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "profile";
  j["t"] = jnum(p.t, fmt);
  j["nodes"] = p.grid.size();
  j["left"] = end_name(p.grid.left());
  j["right"] = end_name(p.grid.right());
  j["f"] = array_json(p.f, fmt);
  j["g"] = array_json(p.g, fmt);
  j["jac"] = array_json(p.jac, fmt);
  if (p.grid.closed()) j["s"] = array_json(arclength(p), fmt);
  return j;
}

MetricProfile profile_from_json(const json& j) {
  const Index n = j.at("nodes").get<Index>();
  SpatialGrid grid(n, end_of(j.at("left").get<std::string>()), end_of(j.at("right").get<std::string>()));
  MetricProfile p(grid, array_of(j.at("f")), array_of(j.at("g")), array_of(j.at("jac")), jnum_of(j.at("t")));
  if (p.f.size() != n || p.g.size() != n || p.jac.size() != n)
    throw std::invalid_argument("profile JSON: array length differs from nodes");
  return p;
}

json alignments_to_json(const std::vector<AlignmentRow>& rows, FloatFormat fmt) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "alignments";
  j["rows"] = json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"k", r.k},
                         {"t_k", jnum(r.t_k, fmt)},
                         {"K_k", jnum(r.K_k, fmt)},
                         {"chi_star", jnum(r.a.chi_star, fmt)},
                         {"scale_star", jnum(r.a.scale_star, fmt)},
                         {"dist", jnum(r.a.dist, fmt)},
                         {"f2_dist", jnum(r.a.f2_dist, fmt)},
                         {"nodes", r.a.nodes}});
  return j;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return out.str();
}

json manifest_to_json(const Manifest& m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "manifest";
  j["tag"] = m.tag;
  j["complete"] = m.complete;
  j["errors"] = m.errors;
  j["files"] = json::array();
  for (const auto& f : m.files) j["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  return j;
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& file, std::string_view bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw std::runtime_error("short write to " + file.string());
}

Manifest write_outputs(const OutputBundle& b, const fs::path& dir, FloatFormat fmt, const std::string& tag) {
  Manifest m;
  m.tag = tag;
  std::error_code ec;
  fs::create_directories(dir, ec);

  auto emit = [&](const std::string& name, const std::string& bytes) {
    try {
      write_file(dir / name, bytes);
      m.files.push_back({name, bytes.size(), sha256_hex(bytes)});
    } catch (const std::exception& e) {
      m.complete = false;
      m.errors.push_back(e.what());
    }
  };

  static const std::vector<DiagnosticRecord> kEmpty;
  emit("series.csv", series_csv(b.trajectory ? b.trajectory->series : kEmpty, fmt));
  if (b.trajectory && !b.trajectory->snapshots.empty()) {
    fs::create_directories(dir / "snapshots", ec);
    for (std::size_t k = 0; k < b.trajectory->snapshots.size(); ++k) {
      std::ostringstream name;
      name << "snapshots/snapshot_" << std::setw(3) << std::setfill('0') << k << ".json";
      emit(name.str(), profile_to_json(b.trajectory->snapshots[k], fmt).dump() + "\n");
    }
  }
  if (!b.alignments.empty()) emit("alignments.json", alignments_to_json(b.alignments, fmt).dump(2) + "\n");
  for (const auto& [name, doc] : b.extra_json) emit(name, doc.dump(2) + "\n");

  // The manifest itself is not listed.
  try {
    write_file(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
  } catch (const std::exception& e) {
    m.complete = false;
    m.errors.push_back(e.what());
  }
  return m;
}

namespace {

constexpr FloatFormat kHex = FloatFormat::Hex;

json record_json(const DiagnosticRecord& r) {
  json row = json::array();
  for (const auto& c : columns()) row.push_back(c.put(r, kHex));
  return row;
}

DiagnosticRecord record_of(const json& j) {
  DiagnosticRecord r;
  const auto& cols = columns();
  if (j.size() != cols.size()) throw std::invalid_argument("checkpoint: record has wrong length");
  for (std::size_t k = 0; k < cols.size(); ++k) cols[k].get(r, j[k].get<std::string>());
  return r;
}

}  // namespace

json checkpoint_to_json(const RunState& st, const RunOptions& opt) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "checkpoint";
  j["profile"] = profile_to_json(st.profile, kHex);
  j["step"] = st.step;
  j["mu0"] = format_double(st.mu0, kHex);
  j["remesh_count"] = st.remesh_count;
  j["next_octave"] = st.next_octave;
  j["last_dt"] = format_double(st.last_dt, kHex);
  json tr;
  tr["reason"] = to_string(st.trajectory.reason);
  tr["series"] = json::array();
  for (const auto& r : st.trajectory.series) tr["series"].push_back(record_json(r));
  tr["snapshots"] = json::array();
  for (const auto& p : st.trajectory.snapshots) tr["snapshots"].push_back(profile_to_json(p, kHex));
  j["trajectory"] = tr;

  json o;
  o["stop"] = {{"mu_stop_fraction", format_double(opt.stop.mu_stop_fraction, kHex)},
               {"mu2_stop_fraction", format_double(opt.stop.mu2_stop_fraction, kHex)},
               {"dt_floor", format_double(opt.stop.dt_floor, kHex)},
               {"t_max", format_double(opt.stop.t_max, kHex)},
               {"t_end", format_double(opt.stop.t_end, kHex)},
               {"max_steps", opt.stop.max_steps}};
  o["stepping"] = {{"cfl", format_double(opt.stepping.cfl, kHex)},
                   {"c_curv", format_double(opt.stepping.c_curv, kHex)},
                   {"remesh", static_cast<int>(opt.stepping.remesh)},
                   {"remesh_ratio", format_double(opt.stepping.remesh_ratio, kHex)}};
  o["output"] = {{"record_stride", opt.output.record_stride}, {"snapshots_per_octave", opt.output.snapshots_per_octave}};
  o["delta"] = format_double(opt.delta, kHex);
  o["override_closeness"] = opt.override_closeness;
  j["options"] = o;
  return j;
}

std::pair<RunState, RunOptions> checkpoint_from_json(const json& j) {
  if (j.at("kind") != "checkpoint") throw std::invalid_argument("not a checkpoint document");
  if (j.at("schema_version").get<int>() != kSchemaVersion) throw std::invalid_argument("checkpoint schema mismatch");
  RunState st{profile_from_json(j.at("profile")), 0, 0.0, 0, 1, 0.0, {}};
  st.step = j.at("step").get<std::int64_t>();
  st.mu0 = jnum_of(j.at("mu0"));
  st.remesh_count = j.at("remesh_count").get<std::int64_t>();
  st.next_octave = j.at("next_octave").get<int>();
  st.last_dt = jnum_of(j.at("last_dt"));
  const auto& tr = j.at("trajectory");
  st.trajectory.reason = stop_reason_from_string(tr.at("reason").get<std::string>());
  for (const auto& r : tr.at("series")) st.trajectory.series.push_back(record_of(r));
  for (const auto& p : tr.at("snapshots")) st.trajectory.snapshots.push_back(profile_from_json(p));

  RunOptions opt;
  const auto& o = j.at("options");
  const auto& s = o.at("stop");
  opt.stop.mu_stop_fraction = jnum_of(s.at("mu_stop_fraction"));
  opt.stop.mu2_stop_fraction = jnum_of(s.at("mu2_stop_fraction"));
  opt.stop.dt_floor = jnum_of(s.at("dt_floor"));
  opt.stop.t_max = jnum_of(s.at("t_max"));
  opt.stop.t_end = jnum_of(s.at("t_end"));
  opt.stop.max_steps = s.at("max_steps").get<std::int64_t>();
  const auto& p = o.at("stepping");
  opt.stepping.cfl = jnum_of(p.at("cfl"));
  opt.stepping.c_curv = jnum_of(p.at("c_curv"));
  opt.stepping.remesh = static_cast<RemeshMode>(p.at("remesh").get<int>());
  opt.stepping.remesh_ratio = jnum_of(p.at("remesh_ratio"));
  opt.output.record_stride = o.at("output").at("record_stride").get<std::int64_t>();
  opt.output.snapshots_per_octave = o.at("output").at("snapshots_per_octave").get<int>();
  opt.delta = jnum_of(o.at("delta"));
  opt.override_closeness = o.at("override_closeness").get<bool>();
  return {std::move(st), opt};
}

void save_checkpoint(const RunState& st, const RunOptions& opt, const fs::path& file) {
  write_file(file, checkpoint_to_json(st, opt).dump() + "\n");
}

std::pair<RunState, RunOptions> load_checkpoint(const fs::path& file) {
  return checkpoint_from_json(json::parse(read_file(file)));
}

}  // namespace wbrf
