#pragma once

#include <optional>
#include <string>
#include <vector>

#include "harness/presets.h"
#include "solvers/miqp_baseline.h"

namespace c3 {

struct TrialRecord {
  int trial = 0;
  uint64_t seed = 0;
  bool solver_ok = true;
  std::string failure;
  bool stabilized = false;
  double success_time_s = -1.0;
  double final_state_inf_norm = 0.0;
  double accumulated_cost = 0.0;
  int steps = 0;
  double qp_ms_mean = 0.0;
  double proj_ms_mean = 0.0;
  double proj_ms_std = 0.0;
};

struct ResultsTable {
  std::vector<TrialRecord> trials;
  int num_success = 0;
  double proj_ms_mean = 0.0;  // across all calls of all trials
  double proj_ms_std = 0.0;
};

// Seeded closed-loop trials of the C3 controller against the simulated LCS
// plant. Writes one CSV per trial plus summary.csv when out_dir is nonempty
// (timing columns are wall clock and vary run to run; all other columns are
// reproducible given the seed). Solver failures are recorded per trial and
// the run continues.
ResultsTable RunExperiment(const ExperimentConfig& config,
                           const std::string& out_dir = "");

struct CostToGoSample {
  int step = 0;
  double time_s = 0.0;
  double c3_cost = 0.0;
  double miqp_cost = 0.0;
  double realized_cost = 0.0;
  double c3_comp_residual = 0.0;
  bool miqp_ok = true;  // false when the baseline budget was exhausted
};

struct CostToGoSeries {
  std::vector<CostToGoSample> samples;
  bool completed = true;
  std::string failure;
};

// Per control step of one closed-loop trial: the N-step cost of the C3 plan,
// of the full-MIQP plan from the same state, and the realized cost over the
// logged future. Requires a control rate matching the model step.
CostToGoSeries CompareCostToGo(const ExperimentConfig& config,
                               const MiqpOptions& miqp_options = {},
                               const std::string& out_csv = "");

struct ProjectionBench {
  int calls = 0;
  double lcp_mean_s = 0.0, lcp_std_s = 0.0;
  double admm_mean_s = 0.0, admm_std_s = 0.0;
  double miqp_mean_s = 0.0, miqp_std_s = 0.0;
};

// Times the three projections on identical targets harvested from a seeded
// closed-loop run (one target per ADMM iteration per step).
ProjectionBench BenchProjections(const ExperimentConfig& config, int calls,
                                 const std::string& out_csv = "");

// Deterministic float formatting shared by all CSV writers.
std::string FormatDouble(double value);

}  // namespace c3
