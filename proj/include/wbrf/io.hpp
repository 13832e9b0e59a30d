#pragma once

#include "wbrf/blowup.hpp"
#include "wbrf/config.hpp"
#include "wbrf/flow.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wbrf {

// Shortest round-trip decimal, or hex float with a 0x prefix.  Both parse back
// to the identical double with parse_double.
std::string format_double(double v, FloatFormat fmt);
double parse_double(std::string_view s);

// Diagnostic series CSV.  Column order is fixed; new columns are only appended.
const std::vector<std::string>& series_columns();
std::string series_csv(const std::vector<DiagnosticRecord>& series, FloatFormat fmt);
std::vector<DiagnosticRecord> parse_series_csv(const std::string& text);

nlohmann::json profile_to_json(const MetricProfile& p, FloatFormat fmt);
MetricProfile profile_from_json(const nlohmann::json& j);

struct AlignmentRow {
  int k = 0;
  double t_k = 0.0;
  double K_k = 0.0;
  Alignment a;
};
nlohmann::json alignments_to_json(const std::vector<AlignmentRow>& rows, FloatFormat fmt);

std::string sha256_hex(std::string_view bytes);

struct ManifestEntry {
  std::string name;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};
struct Manifest {
  std::string tag;
  bool complete = true;
  std::vector<ManifestEntry> files;
  std::vector<std::string> errors;
};
nlohmann::json manifest_to_json(const Manifest& m);

// Everything a run can emit.  Absent parts are skipped.
struct OutputBundle {
  const FlowTrajectory* trajectory = nullptr;
  std::vector<AlignmentRow> alignments;
  std::vector<std::pair<std::string, nlohmann::json>> extra_json;  // name, document
};

// Writes series.csv, snapshots/snapshot_NNN.json, alignments.json and any
// extra documents into dir, then manifest.json listing each payload with its
// hash.  A payload that cannot be written is recorded and the manifest is
// marked incomplete.
Manifest write_outputs(const OutputBundle& bundle, const std::filesystem::path& dir, FloatFormat fmt,
                       const std::string& tag);

// Checkpoint: the full RunState and RunOptions, every double in hex.
nlohmann::json checkpoint_to_json(const RunState& st, const RunOptions& opt);
std::pair<RunState, RunOptions> checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const RunState& st, const RunOptions& opt, const std::filesystem::path& file);
std::pair<RunState, RunOptions> load_checkpoint(const std::filesystem::path& file);

std::string read_file(const std::filesystem::path& file);
// Throws std::runtime_error when the file cannot be written completely.
void write_file(const std::filesystem::path& file, std::string_view bytes);

}  // namespace wbrf
