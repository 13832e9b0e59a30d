#pragma once

#include "wbrf/flow.hpp"
#include "wbrf/initial_data.hpp"

#include <string>
#include <vector>

namespace wbrf {

enum class FloatFormat { Decimal, Hex };

// Everything a CLI invocation needs.  Lengths are in the metric's units,
// times in Ricci flow time.
struct RunConfig {
  int schema_version = 1;
  std::string tag = "default";  // copied into every manifest
  SeedParams seed;
  Index nodes = 257;
  StepControl stepping;
  StopCriteria stop;
  OutputControl output;
  FloatFormat float_format = FloatFormat::Decimal;
  int blowup_count = 5;
  double blowup_window = 5.0;
  double soliton_r_min = -10.0;
  double soliton_r_max = 10.0;
  Index soliton_nodes = 4096;
  double twin_fraction = 0.5;  // twin runs stop at this fraction of T
  bool override_closeness = false;

  RunOptions run_options() const;
};

inline constexpr int kSchemaVersion = 1;

// INI text with flat sections.  Collects every field-level problem and throws
// ConfigError with the full list.  Unknown keys are errors in strict mode and
// warnings otherwise.
RunConfig parse_config(const std::string& text, bool strict = true, std::vector<std::string>* warnings = nullptr);

// Every effective value, with doubles in shortest round-trip form.
std::string serialize_config(const RunConfig& c);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace wbrf
