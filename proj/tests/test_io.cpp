#include "wbrf/config.hpp"
#include "wbrf/errors.hpp"
#include "wbrf/initial_data.hpp"
#include "wbrf/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

using namespace wbrf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wbrf_test_" + name);
  fs::remove_all(p);
  return p;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool has_error(const ConfigError& e, const std::string& needle) {
  for (const auto& s : e.errors)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

RunOptions short_run() {
  RunOptions o;
  o.stop.mu2_stop_fraction = 0.8;
  o.output.record_stride = 3;
  return o;
}

MetricProfile seed(double eps, Index n) {
  SeedParams sp;
  sp.epsilon = eps;
  return construct_initial_metric(sp, SpatialGrid(n));
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("doubles round trip in both formats") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 2000; ++i) {
      std::uint64_t b = bits(rng);
      double v;
      std::memcpy(&v, &b, sizeof v);
      if (!std::isfinite(v)) continue;
      CHECK(same_bits(parse_double(format_double(v, FloatFormat::Decimal)), v));
      CHECK(same_bits(parse_double(format_double(v, FloatFormat::Hex)), v));
    }
    for (double v : {0.0, -0.0, 1.0 / 3.0, std::numeric_limits<double>::denorm_min(), -1e300}) {
      CHECK(same_bits(parse_double(format_double(v, FloatFormat::Decimal)), v));
      CHECK(same_bits(parse_double(format_double(v, FloatFormat::Hex)), v));
    }
    CHECK(std::isinf(parse_double(format_double(-INFINITY, FloatFormat::Hex))));
    CHECK(format_double(0.1, FloatFormat::Decimal) == "0.1");
    CHECK(format_double(1.0, FloatFormat::Hex) == "0x1p+0");
    CHECK_THROWS(parse_double("1.0x"));
    CHECK_THROWS(parse_double(""));
  }

  TEST_CASE("minimal config fills defaults") {
    const auto c = parse_config("schema_version = 1\n");
    CHECK(c.nodes == 257);
    CHECK(c.seed.alpha == 1.0);
    CHECK(c.seed.delta == 0.5);
    CHECK(c.stepping.cfl == 0.2);
    CHECK(c.blowup_count == 5);
    const std::string text = serialize_config(c);
    for (const char* key : {"alpha = 1", "delta = 0.5", "epsilon = 0", "nodes = 257", "remesh = graded",
                            "float_format = decimal", "[stop]", "[blowup]"})
      CHECK(text.find(key) != std::string::npos);
  }

  TEST_CASE("seed inequality violation is reported") {
    try {
      parse_config("schema_version = 1\n[seed]\nalpha = 1.2\ndelta = 1.0\nf_shape = half_sine\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(has_error(e, "alpha^2 + delta^2 <= A^2/2"));
    }
  }

  TEST_CASE("field-level errors are collected") {
    try {
      parse_config("[seed]\nalpha = abc\n[grid]\nnodes = 12x\n[bogus]\nkey = 1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(has_error(e, "schema_version: required key is missing"));
      CHECK(has_error(e, "seed.alpha"));
      CHECK(has_error(e, "grid.nodes"));
      CHECK(has_error(e, "bogus.key: unknown key"));
      CHECK(e.errors.size() == 4);
    }
    try {
      parse_config("schema_version = 1\n[grid]\nnodes = 8\n[stepping]\ncfl = 2\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(has_error(e, "grid.nodes"));
      CHECK(has_error(e, "stepping.cfl"));
    }
    CHECK_THROWS_AS(parse_config("schema_version = 1\n[seed\n"), ConfigError);
  }

  TEST_CASE("unknown keys warn outside strict mode") {
    std::vector<std::string> warn;
    const auto c = parse_config("schema_version = 1\nextra = 3\n[seed]\nepsilon = 0.05\n", false, &warn);
    CHECK(c.seed.epsilon == 0.05);
    REQUIRE(warn.size() == 2);
    CHECK(warn[0] == "extra: unknown key");
    CHECK(warn[1].find("constant") != std::string::npos);
  }

  TEST_CASE("config round trip is idempotent") {
    const std::string text =
        "schema_version = 1\ntag = sweep-7\n[seed]\nf_shape = plateau\nf_length = 3.5\nf_cap = 1.1\n"
        "epsilon = 0.03\nphi_shape = bump\nphi_width = 0.7\n[grid]\nnodes = 513\n[stepping]\nremesh = off\n"
        "[stop]\nt_end = 0.1\nmax_steps = 100\n[output]\nfloat_format = hex\n[report]\noverride_closeness = true\n";
    const auto a = parse_config(text);
    const auto b = parse_config(serialize_config(a));
    CHECK(a == b);
    CHECK(serialize_config(a) == serialize_config(b));
    CHECK(b.seed.f_shape.kind == FShapeKind::Plateau);
    CHECK(b.stepping.remesh == RemeshMode::Off);
    CHECK(b.float_format == FloatFormat::Hex);
    CHECK(b.tag == "sweep-7");
    CHECK(b.stop.max_steps == 100);
  }

  TEST_CASE("series CSV round trips exactly") {
    const auto tr = run(seed(0.05, 65), short_run());
    REQUIRE(tr.series.size() > 3);
    for (auto fmt : {FloatFormat::Decimal, FloatFormat::Hex}) {
      const auto back = parse_series_csv(series_csv(tr.series, fmt));
      REQUIRE(back.size() == tr.series.size());
      CHECK(series_csv(back, FloatFormat::Hex) == series_csv(tr.series, FloatFormat::Hex));
    }
    const auto header = series_csv({}, FloatFormat::Decimal);
    CHECK(header.rfind("t,step,dt,mu,mu_argmin,", 0) == 0);
    CHECK(std::count(header.begin(), header.end(), '\n') == 1);
  }

  TEST_CASE("profile JSON round trips exactly") {
    const auto p = seed(0.05, 65);
    for (auto fmt : {FloatFormat::Decimal, FloatFormat::Hex}) {
      const auto q = profile_from_json(nlohmann::json::parse(profile_to_json(p, fmt).dump()));
      CHECK((q.f == p.f).all());
      CHECK((q.g == p.g).all());
      CHECK((q.jac == p.jac).all());
      CHECK(q.grid == p.grid);
    }
  }

  TEST_CASE("sha256 of a known message") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("empty trajectory writes a header-only CSV and a manifest") {
    const auto dir = scratch("empty");
    FlowTrajectory empty;
    const auto m = write_outputs(OutputBundle{&empty, {}, {}}, dir, FloatFormat::Decimal, "t0");
    CHECK(m.complete);
    REQUIRE(m.files.size() == 1);
    CHECK(m.files[0].name == "series.csv");
    CHECK(read_file(dir / "series.csv") == series_csv({}, FloatFormat::Decimal));
    const auto j = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(j["complete"] == true);
    CHECK(j["tag"] == "t0");
    CHECK(j["files"][0]["sha256"] == sha256_hex(read_file(dir / "series.csv")));
  }

  TEST_CASE("manifest hash changes iff a payload byte changes") {
    const auto tr = run(seed(0.05, 65), short_run());
    auto tr2 = tr;
    const auto a = write_outputs(OutputBundle{&tr, {}, {}}, scratch("ha"), FloatFormat::Hex, "x");
    const auto b = write_outputs(OutputBundle{&tr2, {}, {}}, scratch("hb"), FloatFormat::Hex, "x");
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t k = 0; k < a.files.size(); ++k) CHECK(a.files[k].sha256 == b.files[k].sha256);
    tr2.series[1].mu = std::nextafter(tr2.series[1].mu, 1.0);
    const auto c = write_outputs(OutputBundle{&tr2, {}, {}}, scratch("hc"), FloatFormat::Hex, "x");
    CHECK(c.files[0].sha256 != a.files[0].sha256);
    for (std::size_t k = 1; k < a.files.size(); ++k) CHECK(c.files[k].sha256 == a.files[k].sha256);
  }

  TEST_CASE("unwritable payload marks the manifest incomplete") {
    const auto dir = scratch("partial");
    fs::create_directories(dir / "series.csv");
    FlowTrajectory empty;
    const auto m = write_outputs(OutputBundle{&empty, {}, {}}, dir, FloatFormat::Decimal, "p");
    CHECK_FALSE(m.complete);
    CHECK(m.files.empty());
    CHECK(m.errors.size() == 1);
    const auto j = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(j["complete"] == false);
  }

  TEST_CASE("checkpoint resume reproduces the series CSV bitwise") {
    const auto p = seed(0.05, 65);
    const auto o = short_run();
    const auto full = run(p, o);

    RunOptions first = o;
    first.stop.max_steps = 17;
    FlowRunner a(p, first);
    REQUIRE(a.advance() == StopReason::MaxSteps);
    const auto file = scratch("ckpt.json");
    RunOptions saved = o;
    save_checkpoint(a.state(), saved, file);
    auto [st, opt] = load_checkpoint(file);
    CHECK(opt.stop.max_steps == -1);
    FlowRunner b(std::move(st), opt);
    b.advance();
    const auto resumed = b.finish();
    for (auto fmt : {FloatFormat::Decimal, FloatFormat::Hex})
      CHECK(series_csv(resumed.series, fmt) == series_csv(full.series, fmt));
    REQUIRE(resumed.snapshots.size() == full.snapshots.size());
    CHECK((resumed.snapshots.back().g == full.snapshots.back().g).all());
  }
}
