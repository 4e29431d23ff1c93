#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qp/mpc_qp.h"
#include "solvers/projections.h"

namespace c3 {

enum class ProjectionMethod { kMiqp, kLcp, kNestedAdmm };

// Inputs of the consensus ADMM loop. G must be positive definite; rho > 0.
// Per-step overrides (G_k, rho_k) broadcast from the scalars when empty.
struct C3Config {
  int theta = 10;
  Eigen::MatrixXd G;                  // consensus weight, block size nz
  std::vector<Eigen::MatrixXd> G_k;   // optional per-k override (size N)
  double rho = 1.0;
  Eigen::VectorXd rho_k;              // optional per-k override (size N)
  ProjectionMethod projection = ProjectionMethod::kLcp;
  Eigen::MatrixXd U;                  // empty: BlockDiagonalWeight defaults
  MiqpProjectionOptions miqp;
  NestedAdmmOptions admm;
  LcpOptions lcp;
  QpOptions qp;
  std::vector<Eigen::VectorXd> delta0;  // empty: zeros
  std::vector<Eigen::VectorXd> w0;      // empty: zeros
  // Fan the per-step projections out across threads. Results must match the
  // sequential execution bit for bit (the projections are pure).
  bool parallel_projection = false;
  int num_threads = 0;  // 0: hardware concurrency
  bool record_iterates = false;
  // Receding horizon only: initialize delta/w from the previous plan shifted
  // by one step instead of zeros. Off by default.
  bool shift_warm_start = false;
};

struct C3IterationStats {
  double primal_residual = 0.0;  // ||z - delta|| over the horizon
  double comp_residual = 0.0;    // worst complementarity residual of delta_k
  double qp_objective = 0.0;
  double qp_seconds = 0.0;
  double proj_seconds = 0.0;
  double dual_seconds = 0.0;
};

// Snapshot taken at the end of an ADMM iteration (record_iterates only).
struct C3Iterate {
  std::vector<Eigen::VectorXd> z;       // z_k slices, k = 0..N-1
  std::vector<Eigen::VectorXd> delta;
  std::vector<Eigen::VectorXd> w_before_scaling;
  std::vector<Eigen::VectorXd> w;       // after the rho scaling
  std::vector<Eigen::MatrixXd> G_used;  // weight used by this iteration's QP
  std::vector<Eigen::MatrixXd> G_after_scaling;
};

struct C3StepResult {
  Eigen::VectorXd u0;
  std::vector<Eigen::VectorXd> x;       // predicted states, N+1
  std::vector<Eigen::VectorXd> lambda;  // N
  std::vector<Eigen::VectorXd> u;       // N
  std::vector<Eigen::VectorXd> delta_final;
  std::vector<Eigen::VectorXd> w_final;
  std::vector<C3IterationStats> iterations;
  std::vector<C3Iterate> history;
  double qp_seconds = 0.0;
  double proj_seconds = 0.0;
  double dual_seconds = 0.0;
};

// Consensus complementarity controller. Factors the quadratic-step systems
// once per (model, costs, weights) and reuses them across control steps; use
// UpdateModel for per-step relinearization.
class C3Solver {
 public:
  C3Solver(const McpProblemSpec& spec, const C3Config& config);

  void SetInitialState(const Eigen::VectorXd& x0);
  void UpdateModel(const LcsModel& model);

  // Runs exactly theta ADMM iterations (quadratic step, projection, dual
  // update, rho scaling) and returns u0 from the final z. Contact-free
  // problems reduce to a single convex QP.
  C3StepResult Solve();
  C3StepResult Solve(const std::vector<Eigen::VectorXd>& delta0,
                     const std::vector<Eigen::VectorXd>& w0);

  const McpProblemSpec& spec() const { return spec_; }
  const C3Config& config() const { return config_; }

 private:
  void Rebuild();
  Eigen::VectorXd SolveQuadraticStep(int iter,
                                     const std::vector<Eigen::VectorXd>& delta,
                                     const std::vector<Eigen::VectorXd>& w,
                                     double* objective);
  Eigen::VectorXd ProjectOne(const Eigen::VectorXd& target) const;

  McpProblemSpec spec_;
  C3Config config_;
  StackedLayout layout_;
  ComplementaritySet set_;
  Eigen::MatrixXd U_;
  std::vector<Eigen::MatrixXd> G_base_;  // per k
  Eigen::VectorXd rho_;                  // per k
  std::vector<std::vector<Eigen::MatrixXd>> G_iter_;  // [iter][k]

  Eigen::MatrixXd base_P_;
  Eigen::MatrixXd Aeq_;
  Eigen::VectorXd beq_;

  // Equality-only fast path: prefactored KKT per iteration index.
  bool equality_only_ = true;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> kkt_lu_;
  bool kkt_ok_ = false;

  // Inequality path: cached null-space reduction and Hessian factors.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> aeq_qr_;
  int aeq_rank_ = 0;
  Eigen::MatrixXd null_basis_;
  Eigen::MatrixXd reduced_A_;
  std::vector<DenseActiveSetQp> reduced_qp_;
  Eigen::VectorXd particular_;
  Eigen::VectorXd reduced_b_;
  std::vector<std::vector<int>> active_hint_;
};

// One-shot convenience wrapper.
C3StepResult C3Solve(const McpProblemSpec& spec, const C3Config& config);

// Plant oracle: consumes the current state and input, returns the next state.
using PlantStepFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
// Called once per control step with the measured state and previous input to
// produce a fresh local LCS approximation.
using RelinearizeFn =
    std::function<LcsModel(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct RecedingHorizonLog {
  Trajectory trajectory;  // states (T+1), inputs (T), stage costs
  std::vector<C3StepResult> steps;
  bool completed = true;
  int failed_step = -1;
  std::string failure;
};

// Receding-horizon loop: rebuild the spec at the measured state (and model,
// when relinearizing), solve, apply u0, repeat. Solver or plant failure stops
// the run and leaves the partial log.
RecedingHorizonLog C3RecedingHorizon(const PlantStepFn& plant,
                                     const McpProblemSpec& spec_template,
                                     const C3Config& config, int t_steps,
                                     const RelinearizeFn& relinearize = nullptr);

// N-step objective of rolling the given inputs through the model from
// spec.x0, with contact forces from the exact per-step LCP.
double CostToGo(const McpProblemSpec& spec,
                const std::vector<Eigen::VectorXd>& inputs,
                const LcpOptions& lcp_options = {});

// Same objective evaluated on logged data (states.size() >= N+1).
double TrajectoryCost(const McpProblemSpec& spec,
                      const std::vector<Eigen::VectorXd>& states,
                      const std::vector<Eigen::VectorXd>& inputs);

}  // namespace c3
