#pragma once

#include "wbrf/flow.hpp"
#include "wbrf/initial_data.hpp"

#include <functional>
#include <string>
#include <vector>

namespace wbrf {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // measured values against their pinned tolerances
};

// A finished flow run together with what is needed to judge it.
struct LabeledRun {
  std::string label;
  Index nodes = 0;
  double delta = 0.5;
  FlowTrajectory traj;
  double tol() const { return SpatialGrid(nodes).tolerance(); }
};

// Grid sizes and run lengths for the acceptance suite.  The defaults are the
// full-size plan; the CLI report can shrink them.
struct AcceptancePlan {
  Index soliton_nodes = 4096;
  std::vector<Index> kahler_nodes = {512, 1024, 2048};
  double kahler_mu2_fraction = 0.25;
  Index blowup_nodes = 2048;
  double blowup_epsilon = 0.05;
  int blowup_count = 5;
  std::vector<Index> twin_nodes = {65, 129, 257};
  std::vector<Index> u_nodes = {65, 129, 257};
  Index determinism_nodes = 129;
};

// Criterion-level checks.  Each returns one pass/fail line's worth of data.
CriterionResult check_soliton_identities(Index nodes);
CriterionResult check_kahler_preservation(const std::vector<LabeledRun>& runs);
CriterionResult check_psi_window(const std::vector<LabeledRun>& runs);
CriterionResult check_gradient_bounds(const std::vector<LabeledRun>& runs);
CriterionResult check_threshold(const std::vector<LabeledRun>& runs);
CriterionResult check_pole_rates(const std::vector<LabeledRun>& runs, const LabeledRun& kahler, const LabeledRun& perturbed);
CriterionResult check_singularity_location(const std::vector<LabeledRun>& runs);
CriterionResult check_type1(const std::vector<LabeledRun>& runs);
CriterionResult check_blowup(const LabeledRun& run, int count);
CriterionResult check_scalar_equivalence(const std::vector<Index>& twin_nodes, const std::vector<Index>& u_nodes);
CriterionResult check_determinism(Index nodes);

// Observed order log2(e_k / e_{k+1}) for each consecutive pair (grids double).
std::vector<double> observed_orders(const std::vector<double>& errors, const std::vector<Index>& nodes);

// Runs the whole plan.  progress receives one line per finished stage.
std::vector<CriterionResult> run_acceptance(const AcceptancePlan& plan,
                                            const std::function<void(const std::string&)>& progress = {});

std::string format_result(const CriterionResult& r);

}  // namespace wbrf
