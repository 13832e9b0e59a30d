// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// --quick shrinks every grid for a fast smoke run; the verdict then is not the
// acceptance verdict.
#include "wbrf/checks.hpp"

#include <chrono>
#include <cstring>
#include <iostream>

int main(int argc, char** argv) {
  wbrf::AcceptancePlan plan;
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  if (quick) {
    plan.kahler_nodes = {65, 129, 257};
    plan.blowup_nodes = 257;
    plan.determinism_nodes = 65;
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  const auto results = wbrf::run_acceptance(plan, [&](const std::string& s) {
    std::cerr << "[" << static_cast<long>(elapsed()) << "s] " << s << std::endl;
  });
  int failed = 0;
  for (const auto& r : results) {
    std::cout << wbrf::format_result(r) << "\n";
    failed += r.pass ? 0 : 1;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << results.size() - failed << "/" << results.size()
            << " criteria in " << static_cast<long>(elapsed()) << "s" << (quick ? " (quick grids)" : "") << std::endl;
  return failed ? 1 : 0;
}
