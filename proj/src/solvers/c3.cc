#include "solvers/c3.h"

#include <chrono>
#include <cmath>
#include <future>
#include <stdexcept>

#include "common/failure.h"

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double Seconds(std::chrono::steady_clock::time_point from,
               std::chrono::steady_clock::time_point to) {
  return std::chrono::duration<double>(to - from).count();
}

bool IsPd(const MatrixXd& M) {
  Eigen::LLT<MatrixXd> llt(0.5 * (M + M.transpose()));
  return llt.info() == Eigen::Success;
}

// Minimum-norm solution of Aeq v = beq from the cached QR of Aeq'.
VectorXd ParticularFromQr(const Eigen::ColPivHouseholderQR<MatrixXd>& qr,
                          int rank, const VectorXd& beq, int num_vars,
                          bool* consistent) {
  const int me = static_cast<int>(beq.size());
  *consistent = true;
  if (rank == 0) {
    *consistent = beq.lpNorm<Eigen::Infinity>() <= 1e-9;
    return VectorXd::Zero(num_vars);
  }
  VectorXd pb = qr.colsPermutation().transpose() * beq;
  MatrixXd R = qr.matrixR().topRows(std::min<int>(num_vars, me));
  VectorXd w1 = R.topLeftCorner(rank, rank)
                    .transpose()
                    .triangularView<Eigen::Lower>()
                    .solve(pb.head(rank));
  if (me > rank) {
    VectorXd tail = pb.tail(me - rank) -
                    R.topRightCorner(rank, me - rank).transpose() * w1;
    if (tail.lpNorm<Eigen::Infinity>() >
        1e-9 * (1.0 + beq.lpNorm<Eigen::Infinity>())) {
      *consistent = false;
    }
  }
  MatrixXd Q = qr.householderQ();
  return Q.leftCols(rank) * w1;
}

}  // namespace

C3Solver::C3Solver(const McpProblemSpec& spec, const C3Config& config)
    : spec_(spec), config_(config) {
  spec_.Validate();
  layout_ = spec_.layout();
  const int N = layout_.horizon;
  const int nz = layout_.block_size();
  if (config_.theta < 1) {
    throw std::invalid_argument("C3Config: theta must be >= 1");
  }

  if (!config_.G_k.empty()) {
    if (static_cast<int>(config_.G_k.size()) != N) {
      throw std::invalid_argument("C3Config: G_k must have N entries");
    }
    G_base_ = config_.G_k;
  } else {
    if (config_.G.rows() != nz || config_.G.cols() != nz) {
      throw std::invalid_argument("C3Config: G must be nz x nz");
    }
    G_base_.assign(N, config_.G);
  }
  if (layout_.n_lambda > 0) {
    for (const MatrixXd& Gk : G_base_) {
      if (!IsPd(Gk)) throw std::invalid_argument("C3Config: G must be PD");
    }
  }

  if (config_.rho_k.size() > 0) {
    if (config_.rho_k.size() != N) {
      throw std::invalid_argument("C3Config: rho_k must have N entries");
    }
    rho_ = config_.rho_k;
  } else {
    rho_ = VectorXd::Constant(N, config_.rho);
  }
  if ((rho_.array() <= 0.0).any()) {
    throw std::invalid_argument("C3Config: rho must be positive");
  }

  U_ = config_.U.size() > 0
           ? config_.U
           : BlockDiagonalWeight(layout_.n_x, layout_.n_lambda, layout_.n_u);
  if (U_.rows() != nz || U_.cols() != nz) {
    throw std::invalid_argument("C3Config: U must be nz x nz");
  }

  set_ = ComplementaritySet::FromModel(spec_.model);
  Rebuild();
}

void C3Solver::SetInitialState(const VectorXd& x0) {
  if (x0.size() != layout_.n_x) {
    throw std::invalid_argument("C3Solver: x0 dimension mismatch");
  }
  spec_.x0 = x0;
  beq_.head(layout_.n_x) = x0;
  if (pin_lambda0_) {
    // With H = 0 the first-step force is a function of the measured state
    // alone; pinning it to the plant's own LCP response removes the phantom
    // first-step force from the quadratic step (the applied u0 is otherwise
    // computed against contact forces the plant will not deliver).
    LcpProblem lcp{spec_.model.E * x0 + spec_.model.c, spec_.model.F};
    LcpSolution sol = SolveLcp(lcp, config_.lcp);
    if (sol.status != LcpStatus::kSolved) {
      throw SolveFailure("lcp", "lambda0 pin: LCP unsolved at current state");
    }
    beq_.tail(layout_.n_lambda) = sol.lambda;
  }
  if (!equality_only_ && layout_.n_lambda > 0) {
    bool consistent = true;
    particular_ = ParticularFromQr(aeq_qr_, aeq_rank_, beq_, layout_.total(),
                                   &consistent);
    if (!consistent) {
      throw SolveFailure("qp_infeasible", "dynamics equalities inconsistent");
    }
    reduced_b_ = spec_.c_ineq - spec_.C_ineq * particular_;
  }
}

void C3Solver::UpdateModel(const LcsModel& model) {
  if (model.num_states() != layout_.n_x ||
      model.num_contacts() != layout_.n_lambda ||
      model.num_inputs() != layout_.n_u) {
    throw std::invalid_argument("C3Solver: model dimensions changed");
  }
  spec_.model = model;
  set_ = ComplementaritySet::FromModel(model);
  Rebuild();
}

void C3Solver::Rebuild() {
  const int N = layout_.horizon;
  const int total = layout_.total();
  const int nz = layout_.block_size();

  // Scaled weights per iteration index, G_{i+1} = rho G_i (Algorithm line 5).
  G_iter_.assign(config_.theta + 1, G_base_);
  for (int i = 1; i <= config_.theta; ++i) {
    for (int k = 0; k < N; ++k) {
      G_iter_[i][k] = rho_[k] * G_iter_[i - 1][k];
    }
  }

  QuadraticProgram base = AssembleMpcQp(spec_, {}, {}, {});
  base_P_ = base.P;
  Aeq_ = base.Aeq;
  beq_ = base.beq;
  equality_only_ = !spec_.has_inequalities();

  if (layout_.n_lambda == 0) return;

  pin_lambda0_ = spec_.model.H.isZero(0);
  if (pin_lambda0_) {
    const int rows = static_cast<int>(Aeq_.rows());
    Aeq_.conservativeResize(rows + layout_.n_lambda, Eigen::NoChange);
    Aeq_.bottomRows(layout_.n_lambda).setZero();
    Aeq_.block(rows, layout_.lambda_offset(0), layout_.n_lambda,
               layout_.n_lambda) =
        MatrixXd::Identity(layout_.n_lambda, layout_.n_lambda);
    beq_.conservativeResize(rows + layout_.n_lambda);
    beq_.tail(layout_.n_lambda).setZero();
  }

  auto iteration_hessian = [&](int i) {
    MatrixXd P = base_P_;
    for (int k = 0; k < N; ++k) {
      P.block(layout_.x_offset(k), layout_.x_offset(k), nz, nz) +=
          2.0 * G_iter_[i][k];
    }
    return P;
  };

  if (equality_only_) {
    const int me = static_cast<int>(Aeq_.rows());
    kkt_lu_.clear();
    kkt_lu_.reserve(config_.theta);
    kkt_ok_ = true;
    for (int i = 0; i < config_.theta; ++i) {
      MatrixXd kkt = MatrixXd::Zero(total + me, total + me);
      kkt.topLeftCorner(total, total) = iteration_hessian(i);
      kkt.topRightCorner(total, me) = Aeq_.transpose();
      kkt.bottomLeftCorner(me, total) = Aeq_;
      kkt_lu_.emplace_back(kkt);
      // Probe the factorization; a singular KKT system falls back to the
      // rank-revealing solver.
      VectorXd probe = VectorXd::Ones(total + me);
      if ((kkt * kkt_lu_.back().solve(probe) - probe).lpNorm<Eigen::Infinity>() >
          1e-6 * (total + me)) {
        kkt_ok_ = false;
      }
    }
  } else {
    aeq_qr_.compute(Aeq_.transpose());
    aeq_rank_ = static_cast<int>(aeq_qr_.rank());
    MatrixXd Q = aeq_qr_.householderQ();
    null_basis_ = Q.rightCols(total - aeq_rank_);
    reduced_A_ = spec_.C_ineq * null_basis_;
    reduced_qp_.assign(config_.theta, DenseActiveSetQp());
    for (int i = 0; i < config_.theta; ++i) {
      MatrixXd Pr = null_basis_.transpose() * iteration_hessian(i) * null_basis_;
      reduced_qp_[i].SetHessian(0.5 * (Pr + Pr.transpose()));
    }
    active_hint_.assign(config_.theta, {});
  }
  SetInitialState(spec_.x0);
}

VectorXd C3Solver::SolveQuadraticStep(int iter,
                                      const std::vector<VectorXd>& delta,
                                      const std::vector<VectorXd>& w,
                                      double* objective) {
  const int N = layout_.horizon;
  const int nz = layout_.block_size();
  const int total = layout_.total();
  const std::vector<MatrixXd>& G = G_iter_[iter];

  VectorXd r = VectorXd::Zero(total);
  double c0 = 0.0;
  for (int k = 0; k < N; ++k) {
    const VectorXd target = delta[k] - w[k];
    r.segment(layout_.x_offset(k), nz) = -2.0 * (G[k] * target);
    c0 += target.dot(G[k] * target);
  }

  VectorXd z;
  if (equality_only_) {
    const int me = static_cast<int>(Aeq_.rows());
    if (kkt_ok_) {
      VectorXd rhs(total + me);
      rhs.head(total) = -r;
      rhs.tail(me) = beq_;
      z = kkt_lu_[iter].solve(rhs).head(total);
    } else {
      QuadraticProgram qp = AssembleMpcQp(spec_, delta, w, G);
      QpSolution sol = SolveEqQp(qp, config_.qp);
      if (sol.status != QpStatus::kOptimal) {
        throw SolveFailure("qp_infeasible", "quadratic step KKT inconsistent",
                           -1, iter);
      }
      z = sol.v;
    }
  } else {
    VectorXd full_grad = base_P_ * particular_ + r;
    for (int k = 0; k < N; ++k) {
      full_grad.segment(layout_.x_offset(k), nz) +=
          2.0 * (G_iter_[iter][k] *
                 particular_.segment(layout_.x_offset(k), nz));
    }
    VectorXd r_red = null_basis_.transpose() * full_grad;
    ActiveSetResult res = reduced_qp_[iter].Solve(
        r_red, reduced_A_, reduced_b_, config_.qp, active_hint_[iter]);
    if (res.status == QpStatus::kInfeasible) {
      throw SolveFailure("qp_infeasible",
                         "quadratic step infeasible (convex constraints)", -1,
                         iter);
    }
    if (res.status == QpStatus::kIterLimit) {
      throw SolveFailure("qp_iterlimit", "quadratic step iteration cap hit",
                         -1, iter);
    }
    active_hint_[iter] = res.active;
    z = particular_ + null_basis_ * res.x;
  }

  if (objective != nullptr) {
    double cost = z.dot(base_P_ * z) * 0.5 + c0;
    for (int k = 0; k < N; ++k) {
      cost += r.segment(layout_.x_offset(k), nz)
                  .dot(z.segment(layout_.x_offset(k), nz));
      const VectorXd zk = z.segment(layout_.x_offset(k), nz);
      cost += zk.dot(G[k] * zk);
    }
    *objective = cost;
  }
  return z;
}

VectorXd C3Solver::ProjectOne(const VectorXd& target) const {
  ProjectionTarget t{target, U_};
  switch (config_.projection) {
    case ProjectionMethod::kMiqp: {
      MiqpProjectionResult res = ProjectMiqp(t, set_, config_.miqp);
      if (!res.found) {
        throw SolveFailure("projection_infeasible",
                           "MIQP projection found no feasible mode");
      }
      return res.delta;
    }
    case ProjectionMethod::kLcp: {
      LcpProjectionResult res = ProjectLcp(t, set_, config_.lcp);
      if (res.status != LcpStatus::kSolved) {
        throw SolveFailure("lcp", "LCP projection failed");
      }
      return res.delta;
    }
    case ProjectionMethod::kNestedAdmm: {
      return ProjectNestedAdmm(t, set_, config_.admm).delta;
    }
  }
  throw std::logic_error("unknown projection method");
}

C3StepResult C3Solver::Solve() { return Solve(config_.delta0, config_.w0); }

C3StepResult C3Solver::Solve(const std::vector<VectorXd>& delta0,
                             const std::vector<VectorXd>& w0) {
  const int N = layout_.horizon;
  const int nz = layout_.block_size();
  C3StepResult result;

  // Contact-free problems reduce to one convex QP: the projection is the
  // identity and the consensus terms cancel at the fixed point, so the output
  // is independent of theta, rho and G.
  if (layout_.n_lambda == 0) {
    QuadraticProgram qp = AssembleMpcQp(spec_, {}, {}, {});
    QpSolution sol = spec_.has_inequalities() ? SolveQp(qp, config_.qp)
                                              : SolveEqQp(qp, config_.qp);
    if (sol.status != QpStatus::kOptimal) {
      throw SolveFailure("qp_infeasible", "contact-free MPC QP not solvable");
    }
    result.u0 = sol.v.segment(layout_.u_offset(0), layout_.n_u);
    for (int k = 0; k <= N; ++k) {
      result.x.push_back(sol.v.segment(layout_.x_offset(k), layout_.n_x));
    }
    for (int k = 0; k < N; ++k) {
      result.lambda.push_back(VectorXd::Zero(0));
      result.u.push_back(sol.v.segment(layout_.u_offset(k), layout_.n_u));
    }
    return result;
  }

  std::vector<VectorXd> delta =
      delta0.empty() ? std::vector<VectorXd>(N, VectorXd::Zero(nz)) : delta0;
  std::vector<VectorXd> w =
      w0.empty() ? std::vector<VectorXd>(N, VectorXd::Zero(nz)) : w0;
  if (static_cast<int>(delta.size()) != N || static_cast<int>(w.size()) != N) {
    throw std::invalid_argument("C3Solver: delta0/w0 must have N entries");
  }

  VectorXd z_full;
  for (int iter = 0; iter < config_.theta; ++iter) {
    C3IterationStats stats;
    auto t0 = std::chrono::steady_clock::now();
    z_full = SolveQuadraticStep(iter, delta, w, &stats.qp_objective);
    auto t1 = std::chrono::steady_clock::now();

    std::vector<VectorXd> z(N);
    for (int k = 0; k < N; ++k) {
      z[k] = z_full.segment(layout_.x_offset(k), nz);
    }

    std::vector<VectorXd> targets(N);
    for (int k = 0; k < N; ++k) targets[k] = z[k] + w[k];
    if (config_.parallel_projection && N > 1) {
      std::vector<std::future<VectorXd>> tasks;
      tasks.reserve(N);
      for (int k = 0; k < N; ++k) {
        tasks.push_back(std::async(std::launch::async, [this, &targets, k] {
          return ProjectOne(targets[k]);
        }));
      }
      for (int k = 0; k < N; ++k) {
        try {
          delta[k] = tasks[k].get();
        } catch (const SolveFailure& failure) {
          throw SolveFailure(failure.category(), failure.what(), k, iter);
        }
      }
    } else {
      for (int k = 0; k < N; ++k) {
        try {
          delta[k] = ProjectOne(targets[k]);
        } catch (const SolveFailure& failure) {
          throw SolveFailure(failure.category(), failure.what(), k, iter);
        }
      }
    }
    auto t2 = std::chrono::steady_clock::now();

    std::vector<VectorXd> w_before(config_.record_iterates ? N : 0);
    for (int k = 0; k < N; ++k) {
      w[k] = w[k] + z[k] - delta[k];
      if (config_.record_iterates) w_before[k] = w[k];
      w[k] = w[k] / rho_[k];
    }
    auto t3 = std::chrono::steady_clock::now();

    stats.qp_seconds = Seconds(t0, t1);
    stats.proj_seconds = Seconds(t1, t2);
    stats.dual_seconds = Seconds(t2, t3);
    double primal_sq = 0.0;
    double comp = 0.0;
    for (int k = 0; k < N; ++k) {
      primal_sq += (z[k] - delta[k]).squaredNorm();
      comp = std::max(comp, set_.Residual(delta[k]));
    }
    stats.primal_residual = std::sqrt(primal_sq);
    stats.comp_residual = comp;
    result.iterations.push_back(stats);
    result.qp_seconds += stats.qp_seconds;
    result.proj_seconds += stats.proj_seconds;
    result.dual_seconds += stats.dual_seconds;

    if (config_.record_iterates) {
      C3Iterate snap;
      snap.z = z;
      snap.delta = delta;
      snap.w_before_scaling = w_before;
      snap.w = w;
      snap.G_used = G_iter_[iter];
      snap.G_after_scaling = G_iter_[iter + 1];
      result.history.push_back(std::move(snap));
    }

    if (iter == config_.theta - 1) {
      result.u0 = z[0].tail(layout_.n_u);
      for (int k = 0; k < N; ++k) {
        result.x.push_back(z[k].head(layout_.n_x));
        result.lambda.push_back(z[k].segment(layout_.n_x, layout_.n_lambda));
        result.u.push_back(z[k].tail(layout_.n_u));
      }
      result.x.push_back(z_full.segment(layout_.x_offset(N), layout_.n_x));
      result.delta_final = delta;
      result.w_final = w;
    }
  }
  return result;
}

C3StepResult C3Solve(const McpProblemSpec& spec, const C3Config& config) {
  C3Solver solver(spec, config);
  return solver.Solve();
}

RecedingHorizonLog C3RecedingHorizon(const PlantStepFn& plant,
                                     const McpProblemSpec& spec_template,
                                     const C3Config& config, int t_steps,
                                     const RelinearizeFn& relinearize) {
  if (t_steps < 1) {
    throw std::invalid_argument("C3RecedingHorizon: t_steps must be >= 1");
  }
  RecedingHorizonLog log;
  C3Solver solver(spec_template, config);
  const int N = spec_template.horizon;
  const int nz = spec_template.layout().block_size();

  VectorXd x = spec_template.x0;
  VectorXd u_prev = VectorXd::Zero(spec_template.model.num_inputs());
  log.trajectory.states.push_back(x);

  std::vector<VectorXd> delta_init;
  std::vector<VectorXd> w_init;

  for (int t = 0; t < t_steps; ++t) {
    try {
      if (relinearize) solver.UpdateModel(relinearize(x, u_prev));
      solver.SetInitialState(x);
      C3StepResult step = solver.Solve(delta_init, w_init);
      const VectorXd u = step.u0;
      const VectorXd x_next = plant(x, u);

      log.trajectory.inputs.push_back(u);
      log.trajectory.stage_costs.push_back(
          x.dot(spec_template.Q[0] * x) + u.dot(spec_template.R[0] * u));
      log.trajectory.states.push_back(x_next);

      if (config.shift_warm_start && !step.delta_final.empty()) {
        delta_init.assign(N, VectorXd::Zero(nz));
        w_init.assign(N, VectorXd::Zero(nz));
        for (int k = 0; k + 1 < N; ++k) {
          delta_init[k] = step.delta_final[k + 1];
          w_init[k] = step.w_final[k + 1];
        }
        delta_init[N - 1] = step.delta_final[N - 1];
        w_init[N - 1] = step.w_final[N - 1];
      }

      log.steps.push_back(std::move(step));
      x = x_next;
      u_prev = u;
    } catch (const SolveFailure& failure) {
      log.completed = false;
      log.failed_step = t;
      log.failure = failure.what();
      break;
    }
  }
  return log;
}

double CostToGo(const McpProblemSpec& spec,
                const std::vector<VectorXd>& inputs,
                const LcpOptions& lcp_options) {
  const int N = spec.horizon;
  if (static_cast<int>(inputs.size()) < N) {
    throw std::invalid_argument("CostToGo: need at least N inputs");
  }
  double cost = 0.0;
  VectorXd x = spec.x0;
  for (int k = 0; k < N; ++k) {
    cost += x.dot(spec.Q[k] * x) + inputs[k].dot(spec.R[k] * inputs[k]);
    x = LcsStep(spec.model, x, inputs[k], lcp_options).x_next;
  }
  cost += x.dot(spec.Q[N] * x);
  return cost;
}

double TrajectoryCost(const McpProblemSpec& spec,
                      const std::vector<VectorXd>& states,
                      const std::vector<VectorXd>& inputs) {
  const int N = spec.horizon;
  if (static_cast<int>(states.size()) < N + 1 ||
      static_cast<int>(inputs.size()) < N) {
    throw std::invalid_argument("TrajectoryCost: trajectory shorter than N");
  }
  double cost = 0.0;
  for (int k = 0; k < N; ++k) {
    cost += states[k].dot(spec.Q[k] * states[k]) +
            inputs[k].dot(spec.R[k] * inputs[k]);
  }
  cost += states[N].dot(spec.Q[N] * states[N]);
  return cost;
}

}  // namespace c3
