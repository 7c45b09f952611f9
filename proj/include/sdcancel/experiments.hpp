#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdcancel/config.hpp"
#include "sdcancel/report.hpp"

namespace sdcancel {

struct DesignOutcome {
  Controller controller;
  VerificationReport verification;
  Timings timings;
};

/// Plant -> lifting -> synthesis (nominal or robust) -> verification.
DesignOutcome run_design(const ExperimentConfig& cfg);

/// Closed-loop simulation with the config's channel (extra paths applied).
SimulationTrace run_simulation(const ExperimentConfig& cfg, const StateSpace& k);

struct CriterionResult {
  int id = 0;
  bool pass = false;
  std::string detail;
};

/// Measured quantities of the three design examples and the criteria
/// evaluated on them.
struct PaperRun {
  DesignOutcome nominal, nominal_40db, robust;
  SimulationTrace fig9, fig10, fig11;
  double fig10_loop_radius = 0.0;
  double fig11_loop_radius = 0.0;
  std::vector<CriterionResult> criteria;  // 1 .. 5
  nlohmann::json summary;
};

/// Runs everything with pinned seeds; writes fig9.csv, fig10.csv,
/// fig11.csv and summary.json into out_dir when it is non-empty.
PaperRun reproduce_paper(const std::string& out_dir);

/// Individual criteria (also used by reproduce_paper).
CriterionResult check_nominal_reproduction(const DesignOutcome& d,
                                           const SimulationTrace& trace);
CriterionResult check_l2_bound(const ExperimentConfig& cfg, const Controller& k,
                               int draws = 20, std::uint64_t base_seed = 1000);
CriterionResult check_instability(const SimulationTrace& trace, double loop_radius);
CriterionResult check_robust(const ExperimentConfig& cfg, const DesignOutcome& d,
                             const SimulationTrace& trace, double loop_radius,
                             int perturbations = 50, std::uint64_t seed = 2024);
CriterionResult check_fsfh_convergence(const ExperimentConfig& cfg,
                                       const Controller& k, int N_fine);

struct LiftCheckRow {
  int N = 0;
  double gamma_synth = 0.0;    // resynthesized at N
  double norm_of_design = 0.0; // the config-N controller evaluated at N
};
std::vector<LiftCheckRow> lift_check(const ExperimentConfig& cfg,
                                     const std::vector<int>& factors);

/// Command-line entry point; returns the process exit code
/// (0 success, 1 config/IO error, 2 infeasible or unexpected outcome).
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sdcancel
