#include "solvers/projections.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ComplementaritySet::Validate() const {
  const int m = n_lambda();
  if (F.cols() != m) throw std::invalid_argument("ComplementaritySet: F square");
  if (E.rows() != m || H.rows() != m || c.size() != m) {
    throw std::invalid_argument("ComplementaritySet: row mismatch");
  }
}

VectorXd ComplementaritySet::Gap(const VectorXd& point) const {
  return E * XSlice(point) + F * LambdaSlice(point) + H * USlice(point) + c;
}

MatrixXd BlockDiagonalWeight(int n_x, int n_lambda, int n_u, double wx,
                             double wlambda, double wu) {
  VectorXd diag(n_x + n_lambda + n_u);
  diag.head(n_x).setConstant(wx);
  diag.segment(n_x, n_lambda).setConstant(wlambda);
  diag.tail(n_u).setConstant(wu);
  return diag.asDiagonal();
}

namespace {

void ValidateTarget(const ProjectionTarget& target,
                    const ComplementaritySet& set) {
  set.Validate();
  const int nz = set.point_size();
  if (target.point.size() != nz) {
    throw std::invalid_argument("ProjectionTarget: point dimension mismatch");
  }
  if (target.U.rows() != nz || target.U.cols() != nz) {
    throw std::invalid_argument("ProjectionTarget: U dimension mismatch");
  }
}

// Mode-constrained relaxation of the projection QP. `modes[i]` is -1
// (unfixed), 0 (gap_i = 0) or 1 (lambda_i = 0). Unfixed pairs keep both
// inequalities but no orthogonality. All rows carry the big-M box.
QuadraticProgram BuildNodeQp(const MatrixXd& U_eff, const VectorXd& alpha,
                             const ComplementaritySet& set,
                             const std::vector<int8_t>& modes,
                             const VectorXd& big_m) {
  const int nz = set.point_size();
  const int m = set.n_lambda();
  const int n_x = set.n_x();
  MatrixXd gap_rows(m, nz);
  gap_rows.leftCols(n_x) = set.E;
  gap_rows.middleCols(n_x, m) = set.F;
  gap_rows.rightCols(set.n_u()) = set.H;

  QuadraticProgram qp;
  qp.P = 2.0 * U_eff;
  qp.r = -2.0 * (U_eff * alpha);
  qp.c0 = alpha.dot(U_eff * alpha);

  int num_fixed = 0;
  for (int8_t s : modes) num_fixed += (s >= 0);
  qp.Aeq = MatrixXd::Zero(num_fixed, nz);
  qp.beq = VectorXd::Zero(num_fixed);
  int row = 0;
  for (int i = 0; i < m; ++i) {
    if (modes[i] == 1) {
      qp.Aeq(row, n_x + i) = 1.0;  // lambda_i = 0
      qp.beq[row] = 0.0;
      ++row;
    } else if (modes[i] == 0) {
      qp.Aeq.row(row) = gap_rows.row(i);  // gap_i = 0
      qp.beq[row] = -set.c[i];
      ++row;
    }
  }

  // gap >= 0, lambda >= 0, gap <= M, lambda <= M.
  qp.Ain = MatrixXd::Zero(4 * m, nz);
  qp.bin = VectorXd::Zero(4 * m);
  for (int i = 0; i < m; ++i) {
    qp.Ain.row(i) = -gap_rows.row(i);
    qp.bin[i] = set.c[i];
    qp.Ain(m + i, n_x + i) = -1.0;
    qp.bin[m + i] = 0.0;
    qp.Ain.row(2 * m + i) = gap_rows.row(i);
    qp.bin[2 * m + i] = big_m[i] - set.c[i];
    qp.Ain(3 * m + i, n_x + i) = 1.0;
    qp.bin[3 * m + i] = big_m[i];
  }
  return qp;
}

MatrixXd EffectiveWeight(const MatrixXd& U) {
  Eigen::LLT<MatrixXd> llt(U);
  if (llt.info() == Eigen::Success) return U;
  // Singular weights leave some directions free; a tiny ridge keeps them at
  // the target instead of drifting.
  MatrixXd U_eff = U;
  const double ridge = 1e-10 * (1.0 + U.diagonal().cwiseAbs().maxCoeff());
  U_eff.diagonal().array() += ridge;
  return U_eff;
}

}  // namespace

MiqpProjectionResult ProjectMiqp(const ProjectionTarget& target,
                                 const ComplementaritySet& set,
                                 const MiqpProjectionOptions& options) {
  ValidateTarget(target, set);
  const int m = set.n_lambda();
  MiqpProjectionResult result;
  if (m == 0) {
    result.delta = target.point;
    result.mode.resize(0);
    result.objective = 0.0;
    result.found = true;
    result.optimal = true;
    return result;
  }

  VectorXd big_m = options.big_m_rows.size() > 0
                       ? options.big_m_rows
                       : VectorXd::Constant(m, options.big_m);
  if (big_m.size() != m) {
    throw std::invalid_argument("ProjectMiqp: big_m_rows size mismatch");
  }
  const MatrixXd U_eff = EffectiveWeight(target.U);

  struct Node {
    std::vector<int8_t> modes;
  };
  std::vector<Node> stack;
  stack.push_back(Node{std::vector<int8_t>(m, -1)});

  double best_objective = std::numeric_limits<double>::infinity();
  VectorXd best_delta;
  ModeVector best_mode = ModeVector::Zero(m);
  bool exhausted = false;

  while (!stack.empty()) {
    if (result.nodes >= options.max_nodes) {
      exhausted = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++result.nodes;

    QuadraticProgram qp =
        BuildNodeQp(U_eff, target.point, set, node.modes, big_m);
    QpSolution sol = SolveQp(qp, options.qp);
    if (sol.status == QpStatus::kInfeasible) continue;
    const double bound = sol.objective;
    if (bound >= best_objective - 1e-12 * (1.0 + std::abs(best_objective))) {
      continue;
    }

    const VectorXd lambda = set.LambdaSlice(sol.v);
    const VectorXd gap = set.Gap(sol.v);
    int branch_index = -1;
    double worst = options.tolerance;
    for (int i = 0; i < m; ++i) {
      if (node.modes[i] >= 0) continue;
      const double viol = std::abs(lambda[i] * gap[i]);
      if (viol > worst) {
        worst = viol;
        branch_index = i;
      }
    }

    if (branch_index < 0) {
      // Complementary within tolerance: node solved exactly.
      best_objective = bound;
      best_delta = sol.v;
      for (int i = 0; i < m; ++i) {
        best_mode[i] =
            (node.modes[i] >= 0) ? node.modes[i] : (lambda[i] <= gap[i] ? 1 : 0);
      }
      continue;
    }

    Node follow = node;   // side the relaxation leans toward, explored first
    Node other = node;
    const bool lambda_smaller = lambda[branch_index] <= gap[branch_index];
    follow.modes[branch_index] = lambda_smaller ? 1 : 0;
    other.modes[branch_index] = lambda_smaller ? 0 : 1;
    stack.push_back(std::move(other));
    stack.push_back(std::move(follow));
  }

  result.found = std::isfinite(best_objective);
  result.optimal = result.found && !exhausted;
  if (result.found) {
    result.delta = best_delta;
    result.mode = best_mode;
    result.objective = target.Objective(best_delta);
    const VectorXd lambda = set.LambdaSlice(best_delta);
    const VectorXd gap = set.Gap(best_delta);
    for (int i = 0; i < m; ++i) {
      const double margin = 1e-6 * big_m[i];
      if (lambda[i] >= big_m[i] - margin || gap[i] >= big_m[i] - margin) {
        result.big_m_warning = true;
      }
    }
  }
  return result;
}

LcpProjectionResult ProjectLcp(const ProjectionTarget& target,
                               const ComplementaritySet& set,
                               const LcpOptions& options) {
  ValidateTarget(target, set);
  LcpProjectionResult result;
  result.delta = target.point;
  if (set.n_lambda() == 0) {
    result.status = LcpStatus::kSolved;
    return result;
  }
  const VectorXd q = set.E * set.XSlice(target.point) +
                     set.H * set.USlice(target.point) + set.c;
  LcpSolution sol = SolveLcp(LcpProblem{q, set.F}, options);
  result.status = sol.status;
  result.pivots = sol.pivots;
  if (sol.status == LcpStatus::kSolved) {
    result.delta.segment(set.n_x(), set.n_lambda()) = sol.lambda;
  }
  return result;
}

namespace {

// Euclidean projection of a pair onto {a >= 0, b >= 0, ab = 0}: snap to the
// nearer axis, ties to the larger coordinate, (0,0) when both are negative.
inline void PairProject(double a, double b, double* pa, double* pb) {
  if (a <= 0.0 && b <= 0.0) {
    *pa = 0.0;
    *pb = 0.0;
  } else if (a >= b) {
    *pa = a;
    *pb = 0.0;
  } else {
    *pa = 0.0;
    *pb = b;
  }
}

}  // namespace

NestedAdmmResult ProjectNestedAdmm(const ProjectionTarget& target,
                                   const ComplementaritySet& set,
                                   const NestedAdmmOptions& options) {
  ValidateTarget(target, set);
  if (options.inner_iters < 1) {
    throw std::invalid_argument("ProjectNestedAdmm: inner_iters must be >= 1");
  }
  const int nz = set.point_size();
  const int m = set.n_lambda();
  const int n_x = set.n_x();
  NestedAdmmResult result;
  if (m == 0) {
    result.delta = target.point;
    return result;
  }

  MatrixXd gap_rows(m, nz);
  gap_rows.leftCols(n_x) = set.E;
  gap_rows.middleCols(n_x, m) = set.F;
  gap_rows.rightCols(set.n_u()) = set.H;

  const double rho = options.inner_rho;
  MatrixXd K = 2.0 * target.U + rho * MatrixXd::Identity(nz, nz) +
               rho * gap_rows.transpose() * gap_rows;
  Eigen::LLT<MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("ProjectNestedAdmm: inner system not PD");
  }
  const VectorXd two_u_alpha = 2.0 * (target.U * target.point);

  // Consensus variables: v = (delta, y) constrained to the affine gap
  // manifold, omega = element-wise complementary copy, s = scaled duals.
  VectorXd omega(nz + m);
  omega.head(nz) = target.point;
  omega.tail(m) = set.Gap(target.point);
  VectorXd s = VectorXd::Zero(nz + m);
  VectorXd v(nz + m);

  VectorXd best_delta = target.point;
  double best_residual = std::numeric_limits<double>::infinity();
  VectorXd delta(nz);

  for (int j = 0; j < options.inner_iters; ++j) {
    ++result.iterations;
    const VectorXd p = omega - s;
    delta = llt.solve(two_u_alpha + rho * p.head(nz) +
                      rho * gap_rows.transpose() * (p.tail(m) - set.c));
    v.head(nz) = delta;
    v.tail(m) = gap_rows * delta + set.c;

    const VectorXd q = v + s;
    omega = q;
    for (int i = 0; i < m; ++i) {
      PairProject(q[n_x + i], q[nz + i], &omega[n_x + i], &omega[nz + i]);
    }
    s += v - omega;

    const double residual = set.Residual(omega.head(nz));
    if (residual < best_residual) {
      best_residual = residual;
      best_delta = omega.head(nz);
    }
    if (residual > options.divergence_threshold) {
      result.diverged = true;
      result.delta = best_delta;
      result.comp_residual = best_residual;
      return result;
    }
  }
  result.delta = omega.head(nz);
  result.comp_residual = set.Residual(result.delta);
  return result;
}

ProjectionEnumerationResult EnumerateProjectionOracle(
    const ProjectionTarget& target, const ComplementaritySet& set,
    const QpOptions& options) {
  ValidateTarget(target, set);
  const int m = set.n_lambda();
  if (m > 12) {
    throw std::invalid_argument("EnumerateProjectionOracle: n_lambda > 12");
  }
  ProjectionEnumerationResult result;
  const int nz = set.point_size();
  const int n_x = set.n_x();
  if (m == 0) {
    result.delta = target.point;
    result.mode.resize(0);
    result.feasible = true;
    return result;
  }

  MatrixXd gap_rows(m, nz);
  gap_rows.leftCols(n_x) = set.E;
  gap_rows.middleCols(n_x, m) = set.F;
  gap_rows.rightCols(set.n_u()) = set.H;
  const MatrixXd U_eff = EffectiveWeight(target.U);

  double best = std::numeric_limits<double>::infinity();
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    QuadraticProgram qp;
    qp.P = 2.0 * U_eff;
    qp.r = -2.0 * (U_eff * target.point);
    qp.c0 = target.point.dot(U_eff * target.point);
    qp.Aeq = MatrixXd::Zero(m, nz);
    qp.beq = VectorXd::Zero(m);
    qp.Ain = MatrixXd::Zero(m, nz);
    qp.bin = VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) {
        qp.Aeq(i, n_x + i) = 1.0;       // lambda_i = 0
        qp.Ain.row(i) = -gap_rows.row(i);  // gap_i >= 0
        qp.bin[i] = set.c[i];
      } else {
        qp.Aeq.row(i) = gap_rows.row(i);  // gap_i = 0
        qp.beq[i] = -set.c[i];
        qp.Ain(i, n_x + i) = -1.0;  // lambda_i >= 0
        qp.bin[i] = 0.0;
      }
    }
    QpSolution sol = SolveQp(qp, options);
    if (sol.status != QpStatus::kOptimal) continue;
    const double objective = target.Objective(sol.v);
    if (objective < best) {
      best = objective;
      result.delta = sol.v;
      result.feasible = true;
      result.mode.resize(m);
      for (int i = 0; i < m; ++i) result.mode[i] = (mask >> i) & 1;
      result.objective = objective;
    }
  }
  return result;
}

}  // namespace c3
