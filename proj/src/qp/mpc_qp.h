#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lcs/lcs.h"
#include "qp/qp_solver.h"

namespace c3 {

// Variable stacking for the horizon problem. The order is part of the public
// contract: z = [z_0, ..., z_{N-1}, x_N] with z_k = [x_k; lambda_k; u_k] and a
// bare terminal state block (the terminal state has no complementarity copy).
struct StackedLayout {
  int n_x = 0;
  int n_lambda = 0;
  int n_u = 0;
  int horizon = 0;

  int block_size() const { return n_x + n_lambda + n_u; }
  int total() const { return horizon * block_size() + n_x; }
  // Valid for k = 0..N; k = N addresses the terminal state.
  int x_offset(int k) const { return k * block_size(); }
  int lambda_offset(int k) const { return x_offset(k) + n_x; }
  int u_offset(int k) const { return lambda_offset(k) + n_lambda; }
};

// Horizon problem data: stage costs, convex constraints and initial state.
// Q has N+1 entries (terminal cost last), R has N.
struct McpProblemSpec {
  LcsModel model;
  int horizon = 0;
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::MatrixXd> R;
  // Convex constraint set on the stacked variables: C_ineq z <= c_ineq.
  Eigen::MatrixXd C_ineq;
  Eigen::VectorXd c_ineq;
  Eigen::VectorXd x0;

  StackedLayout layout() const {
    return StackedLayout{model.num_states(), model.num_contacts(),
                         model.num_inputs(), horizon};
  }
  bool has_inequalities() const { return C_ineq.rows() > 0; }

  // Checks dimensions, Q PSD and R PD (by factorization). Throws
  // std::invalid_argument on violation.
  void Validate() const;

  static McpProblemSpec Uniform(const LcsModel& model, int horizon,
                                const Eigen::MatrixXd& Q,
                                const Eigen::MatrixXd& R,
                                const Eigen::MatrixXd& QN,
                                const Eigen::VectorXd& x0);

  // Box constraints appended to C_ineq. State bounds apply to k = 1..N (the
  // initial state is pinned by the dynamics equalities); input bounds apply
  // to k = 0..N-1. Infinite bounds are skipped.
  void AddStateBound(int state_index, double lower, double upper);
  void AddInputBound(int input_index, double lower, double upper);
};

// Builds the quadratic step QP: stage costs plus the consensus penalty
//   sum_k (z_k - delta_k + w_k)' G_k (z_k - delta_k + w_k),
// subject to the initial-condition rows, the N dynamics rows and C_ineq.
// Pass empty deltas/duals/G for the plain contact-free MPC problem (G = 0).
QuadraticProgram AssembleMpcQp(const McpProblemSpec& spec,
                               const std::vector<Eigen::VectorXd>& deltas,
                               const std::vector<Eigen::VectorXd>& duals,
                               const std::vector<Eigen::MatrixXd>& G);

}  // namespace c3
