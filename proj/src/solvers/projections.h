#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lcs/lcp_solver.h"
#include "lcs/lcs.h"
#include "qp/qp_solver.h"

namespace c3 {

// Data of the per-time-step complementarity set
//   H_k = { (x, lambda, u) : gap = E x + F lambda + H u + c >= 0,
//           lambda >= 0, lambda' gap = 0 }.
struct ComplementaritySet {
  Eigen::MatrixXd E;
  Eigen::MatrixXd F;
  Eigen::MatrixXd H;
  Eigen::VectorXd c;

  int n_x() const { return static_cast<int>(E.cols()); }
  int n_lambda() const { return static_cast<int>(F.rows()); }
  int n_u() const { return static_cast<int>(H.cols()); }
  int point_size() const { return n_x() + n_lambda() + n_u(); }

  static ComplementaritySet FromModel(const LcsModel& model) {
    return ComplementaritySet{model.E, model.F, model.H, model.c};
  }

  void Validate() const;
  Eigen::VectorXd XSlice(const Eigen::VectorXd& point) const {
    return point.head(n_x());
  }
  Eigen::VectorXd LambdaSlice(const Eigen::VectorXd& point) const {
    return point.segment(n_x(), n_lambda());
  }
  Eigen::VectorXd USlice(const Eigen::VectorXd& point) const {
    return point.tail(n_u());
  }
  Eigen::VectorXd Gap(const Eigen::VectorXd& point) const;
  double Residual(const Eigen::VectorXd& point) const {
    return ComplementarityResidual(LambdaSlice(point), Gap(point));
  }
};

// Point to project (alpha = z_k + w_k) and the PSD weight of the distance
// metric. The weight need not be positive definite; exactly singular
// directions fall back to staying at the target.
struct ProjectionTarget {
  Eigen::VectorXd point;
  Eigen::MatrixXd U;

  double Objective(const Eigen::VectorXd& delta) const {
    const Eigen::VectorXd e = delta - point;
    return e.dot(U * e);
  }
};

// Block-diagonal weight diag(wx*I, wlambda*I, wu*I); the defaults expose the
// configuration knob with a small force weight.
Eigen::MatrixXd BlockDiagonalWeight(int n_x, int n_lambda, int n_u,
                                    double wx = 1.0, double wlambda = 0.01,
                                    double wu = 1.0);

// Per-contact mode: entry 1 clamps lambda_i to zero (inactive contact),
// entry 0 clamps the gap (active contact). Matches the big-M binaries of the
// full mixed-integer formulation.
using ModeVector = Eigen::VectorXi;

struct MiqpProjectionOptions {
  double big_m = 1000.0;
  Eigen::VectorXd big_m_rows;  // optional per-row override
  long max_nodes = 20000;
  double tolerance = 1e-9;
  QpOptions qp;
};

struct MiqpProjectionResult {
  Eigen::VectorXd delta;
  ModeVector mode;
  double objective = 0.0;
  bool found = false;        // false when the set is infeasible
  bool optimal = false;      // false when the node budget ran out
  bool big_m_warning = false;
  long nodes = 0;
};

// Exact projection via depth-first branch-and-bound over contact modes,
// branching on the pair with the largest complementarity violation in the
// relaxation. Globally optimal under the big-M relaxation when `optimal`.
MiqpProjectionResult ProjectMiqp(const ProjectionTarget& target,
                                 const ComplementaritySet& set,
                                 const MiqpProjectionOptions& options = {});

struct LcpProjectionResult {
  Eigen::VectorXd delta;
  LcpStatus status = LcpStatus::kRay;
  int pivots = 0;
};

// Shooting projection: copies the x and u slices of the target verbatim and
// solves LCP(E x + H u + c, F) for the force slice. The result lies exactly
// in H_k whenever the LCP solves.
LcpProjectionResult ProjectLcp(const ProjectionTarget& target,
                               const ComplementaritySet& set,
                               const LcpOptions& options = {});

struct NestedAdmmOptions {
  int inner_iters = 50;
  double inner_rho = 1.0;
  double divergence_threshold = 1e6;
};

struct NestedAdmmResult {
  Eigen::VectorXd delta;
  double comp_residual = 0.0;
  bool diverged = false;
  int iterations = 0;
};

// Approximate projection via an inner consensus ADMM on (delta, gap) with an
// element-wise complementarity snap. No feasibility or optimality guarantee;
// the final complementarity residual is reported.
NestedAdmmResult ProjectNestedAdmm(const ProjectionTarget& target,
                                   const ComplementaritySet& set,
                                   const NestedAdmmOptions& options = {});

struct ProjectionEnumerationResult {
  Eigen::VectorXd delta;
  ModeVector mode;
  double objective = 0.0;
  bool feasible = false;
};

// Exhaustive oracle: solves all 2^{n_lambda} mode-patterned convex QPs and
// returns the global optimum. Requires n_lambda <= 12.
ProjectionEnumerationResult EnumerateProjectionOracle(
    const ProjectionTarget& target, const ComplementaritySet& set,
    const QpOptions& options = {});

}  // namespace c3
