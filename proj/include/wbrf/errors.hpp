#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wbrf {

// Profile arrays violate a structural invariant (sign, size, pole values).
struct InvalidProfile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Initial-data parameters violate one of the admissibility inequalities.
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExtractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The theta band (nodes with g_s bounded away from zero) is empty.
struct BandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> errs)
      : std::runtime_error(join(errs)), errors(std::move(errs)) {}
  std::vector<std::string> errors;

 private:
  static std::string join(const std::vector<std::string>& errs) {
    std::string out;
    for (const auto& e : errs) {
      if (!out.empty()) out += "; ";
      out += e;
    }
    return out;
  }
};

}  // namespace wbrf
