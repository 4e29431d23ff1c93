#include "solvers/miqp_baseline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "common/failure.h"

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Node {
  std::vector<int8_t> modes;  // N * m entries, -1 unfixed
  double parent_bound;
};

}  // namespace

MiqpResult SolveFullMiqp(const McpProblemSpec& spec,
                         const MiqpOptions& options) {
  spec.Validate();
  const StackedLayout lay = spec.layout();
  const int N = lay.horizon;
  const int m = lay.n_lambda;
  const int total = lay.total();

  long max_nodes = options.max_nodes;
  if (max_nodes <= 0) {
    if (N * m > 40) {
      throw std::invalid_argument(
          "SolveFullMiqp: N * n_lambda > 40 needs an explicit node budget");
    }
    max_nodes = 500000;
  }

  MiqpResult result;
  if (m == 0) {
    // Convex problem; no modes to search.
    QuadraticProgram qp = AssembleMpcQp(spec, {}, {}, {});
    QpSolution sol = SolveQp(qp, options.qp);
    if (sol.status != QpStatus::kOptimal) return result;
    result.found = true;
    result.optimal = true;
    result.objective = sol.objective;
    result.nodes = 1;
    for (int k = 0; k <= N; ++k) {
      result.x.push_back(sol.v.segment(lay.x_offset(k), lay.n_x));
    }
    for (int k = 0; k < N; ++k) {
      result.lambda.push_back(VectorXd::Zero(0));
      result.u.push_back(sol.v.segment(lay.u_offset(k), lay.n_u));
      result.modes.push_back(ModeVector::Zero(0));
    }
    return result;
  }

  VectorXd big_m = options.big_m_rows.size() > 0
                       ? options.big_m_rows
                       : VectorXd::Constant(m, options.big_m);
  if (big_m.size() != m) {
    throw std::invalid_argument("SolveFullMiqp: big_m_rows size mismatch");
  }

  const QuadraticProgram base = AssembleMpcQp(spec, {}, {}, {});

  // Gap rows on the stacked variables, one block per step.
  std::vector<MatrixXd> gap_rows(N);
  for (int k = 0; k < N; ++k) {
    MatrixXd rows = MatrixXd::Zero(m, total);
    rows.middleCols(lay.x_offset(k), lay.n_x) = spec.model.E;
    rows.middleCols(lay.lambda_offset(k), m) = spec.model.F;
    if (lay.n_u > 0) rows.middleCols(lay.u_offset(k), lay.n_u) = spec.model.H;
    gap_rows[k] = rows;
  }

  // Inequalities shared by every node: user constraints plus, per (k, i),
  // gap >= 0, lambda >= 0, gap <= M, lambda <= M.
  const int user_rows = static_cast<int>(base.Ain.rows());
  MatrixXd Ain(user_rows + 4 * N * m, total);
  VectorXd bin(user_rows + 4 * N * m);
  if (user_rows > 0) {
    Ain.topRows(user_rows) = base.Ain;
    bin.head(user_rows) = base.bin;
  }
  int row = user_rows;
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < m; ++i) {
      Ain.row(row) = -gap_rows[k].row(i);
      bin[row++] = spec.model.c[i];
    }
    for (int i = 0; i < m; ++i) {
      Ain.row(row).setZero();
      Ain(row, lay.lambda_offset(k) + i) = -1.0;
      bin[row++] = 0.0;
    }
    for (int i = 0; i < m; ++i) {
      Ain.row(row) = gap_rows[k].row(i);
      bin[row++] = big_m[i] - spec.model.c[i];
    }
    for (int i = 0; i < m; ++i) {
      Ain.row(row).setZero();
      Ain(row, lay.lambda_offset(k) + i) = 1.0;
      bin[row++] = big_m[i];
    }
  }

  double incumbent = std::numeric_limits<double>::infinity();
  VectorXd incumbent_z;
  std::vector<int8_t> incumbent_modes(N * m, -1);
  bool incumbent_from_seed = false;

  // Incumbent seeding from an LCP-projection C3 rollout.
  if (options.seed_incumbent) {
    try {
      C3Config seed_config;
      seed_config.theta = options.seed_theta;
      seed_config.rho = 1.0;
      seed_config.G = options.seed_g_scale *
                      MatrixXd::Identity(lay.block_size(), lay.block_size());
      seed_config.projection = ProjectionMethod::kLcp;
      seed_config.lcp = options.lcp;
      seed_config.qp = options.qp;
      C3StepResult c3 = C3Solve(spec, seed_config);

      VectorXd z = VectorXd::Zero(total);
      VectorXd x = spec.x0;
      bool ok = true;
      for (int k = 0; k < N; ++k) {
        LcsStepResult step = LcsStep(spec.model, x, c3.u[k], options.lcp);
        if ((step.lambda.array() > big_m.array()).any() ||
            (step.y.array() > big_m.array()).any()) {
          ok = false;
          break;
        }
        z.segment(lay.x_offset(k), lay.n_x) = x;
        z.segment(lay.lambda_offset(k), m) = step.lambda;
        if (lay.n_u > 0) z.segment(lay.u_offset(k), lay.n_u) = c3.u[k];
        x = step.x_next;
      }
      z.segment(lay.x_offset(N), lay.n_x) = x;
      if (ok && user_rows > 0) {
        ok = ((base.Ain * z - base.bin).array() <= options.tolerance).all();
      }
      if (ok) {
        incumbent = base.Objective(z);
        incumbent_z = z;
        for (int k = 0; k < N; ++k) {
          const VectorXd lam = z.segment(lay.lambda_offset(k), m);
          const VectorXd gap = gap_rows[k] * z + spec.model.c;
          for (int i = 0; i < m; ++i) {
            incumbent_modes[k * m + i] = lam[i] <= gap[i] ? 1 : 0;
          }
        }
        incumbent_from_seed = true;
      }
    } catch (const SolveFailure&) {
      // Cold start.
    }
  }

  const int base_eq = static_cast<int>(base.Aeq.rows());
  std::vector<Node> stack;
  stack.push_back(
      Node{std::vector<int8_t>(N * m, -1),
           -std::numeric_limits<double>::infinity()});
  bool exhausted = false;

  while (!stack.empty()) {
    if (result.nodes >= max_nodes) {
      exhausted = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    const double prune_margin = 1e-12 * (1.0 + std::abs(incumbent));
    if (node.parent_bound >= incumbent - prune_margin) continue;
    ++result.nodes;

    int num_fixed = 0;
    for (int8_t s : node.modes) num_fixed += (s >= 0);

    QuadraticProgram qp;
    qp.P = base.P;
    qp.r = base.r;
    qp.c0 = base.c0;
    qp.Ain = Ain;
    qp.bin = bin;
    qp.Aeq = MatrixXd::Zero(base_eq + num_fixed, total);
    qp.beq = VectorXd::Zero(base_eq + num_fixed);
    qp.Aeq.topRows(base_eq) = base.Aeq;
    qp.beq.head(base_eq) = base.beq;
    int eq_row = base_eq;
    for (int k = 0; k < N; ++k) {
      for (int i = 0; i < m; ++i) {
        const int8_t mode = node.modes[k * m + i];
        if (mode == 1) {
          qp.Aeq(eq_row, lay.lambda_offset(k) + i) = 1.0;
          qp.beq[eq_row++] = 0.0;
        } else if (mode == 0) {
          qp.Aeq.row(eq_row) = gap_rows[k].row(i);
          qp.beq[eq_row++] = -spec.model.c[i];
        }
      }
    }

    QpSolution sol = SolveQp(qp, options.qp);
    if (sol.status == QpStatus::kInfeasible) continue;
    if (sol.status == QpStatus::kIterLimit) {
      throw SolveFailure("qp_iterlimit", "MIQP node relaxation hit its cap");
    }
    const double bound = sol.objective;
    if (bound >= incumbent - prune_margin) continue;

    // Chronological branching: earliest step with a violated pair, most
    // violated pair within it.
    int branch_k = -1;
    int branch_i = -1;
    bool lambda_smaller = true;
    for (int k = 0; k < N && branch_k < 0; ++k) {
      const VectorXd lam = sol.v.segment(lay.lambda_offset(k), m);
      const VectorXd gap = gap_rows[k] * sol.v + spec.model.c;
      double worst = options.tolerance;
      for (int i = 0; i < m; ++i) {
        if (node.modes[k * m + i] >= 0) continue;
        const double viol = std::abs(lam[i] * gap[i]);
        if (viol > worst) {
          worst = viol;
          branch_k = k;
          branch_i = i;
          lambda_smaller = lam[i] <= gap[i];
        }
      }
    }

    if (branch_k < 0) {
      // Complementary: the relaxation solved this node exactly.
      incumbent = bound;
      incumbent_z = sol.v;
      incumbent_from_seed = false;
      for (int k = 0; k < N; ++k) {
        const VectorXd lam = sol.v.segment(lay.lambda_offset(k), m);
        const VectorXd gap = gap_rows[k] * sol.v + spec.model.c;
        for (int i = 0; i < m; ++i) {
          incumbent_modes[k * m + i] = node.modes[k * m + i] >= 0
                                           ? node.modes[k * m + i]
                                           : (lam[i] <= gap[i] ? 1 : 0);
        }
      }
      continue;
    }

    Node follow = node;
    Node other = node;
    follow.modes[branch_k * m + branch_i] = lambda_smaller ? 1 : 0;
    other.modes[branch_k * m + branch_i] = lambda_smaller ? 0 : 1;
    follow.parent_bound = bound;
    other.parent_bound = bound;
    stack.push_back(std::move(other));
    stack.push_back(std::move(follow));
  }

  result.found = std::isfinite(incumbent);
  result.optimal = result.found && !exhausted;
  result.budget_exhausted = exhausted;
  result.incumbent_is_seed = result.found && incumbent_from_seed;
  if (!result.found) return result;

  result.objective = incumbent;
  for (int k = 0; k <= N; ++k) {
    result.x.push_back(incumbent_z.segment(lay.x_offset(k), lay.n_x));
  }
  for (int k = 0; k < N; ++k) {
    result.lambda.push_back(incumbent_z.segment(lay.lambda_offset(k), m));
    result.u.push_back(incumbent_z.segment(lay.u_offset(k), lay.n_u));
    ModeVector mode(m);
    for (int i = 0; i < m; ++i) mode[i] = incumbent_modes[k * m + i];
    result.modes.push_back(mode);
    const VectorXd gap = gap_rows[k] * incumbent_z + spec.model.c;
    result.max_comp_residual =
        std::max(result.max_comp_residual,
                 ComplementarityResidual(result.lambda.back(), gap));
  }
  return result;
}

}  // namespace c3
