#pragma once

#include <vector>

#include <Eigen/Dense>

#include "solvers/c3.h"

namespace c3 {

struct MiqpOptions {
  double big_m = 1000.0;
  Eigen::VectorXd big_m_rows;  // optional per-contact override
  // Node budget; 0 picks 500000 and requires N * n_lambda <= 40.
  long max_nodes = 0;
  double tolerance = 1e-9;
  QpOptions qp;
  LcpOptions lcp;
  // Seed the incumbent with an LCP-projection C3 rollout; tightens pruning
  // substantially compared to a cold start.
  bool seed_incumbent = true;
  int seed_theta = 10;
  double seed_g_scale = 0.1;
};

struct MiqpResult {
  std::vector<Eigen::VectorXd> x;       // N+1
  std::vector<Eigen::VectorXd> lambda;  // N
  std::vector<Eigen::VectorXd> u;       // N
  std::vector<ModeVector> modes;        // N, entry 1 = lambda clamped to zero
  double objective = 0.0;
  long nodes = 0;
  bool found = false;
  bool optimal = false;           // false when the budget ran out
  bool budget_exhausted = false;
  double max_comp_residual = 0.0;
  // True when the incumbent came from the C3 seed and no tree node beat it.
  bool incumbent_is_seed = false;
};

// Exact full-horizon mixed-integer solve of the hybrid MPC problem by
// depth-first branch-and-bound over per-step contact modes. Branching is
// chronological: earliest step with a complementarity violation, most
// violated pair within it. Node bounds come from the convex relaxation that
// keeps the big-M boxes and drops the orthogonality constraints.
MiqpResult SolveFullMiqp(const McpProblemSpec& spec,
                         const MiqpOptions& options = {});

}  // namespace c3
