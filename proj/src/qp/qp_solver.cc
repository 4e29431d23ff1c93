#include "qp/qp_solver.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-12;
}  // namespace

void QuadraticProgram::Validate() const {
  const int n = num_vars();
  if (P.cols() != n) throw std::invalid_argument("QP: P must be square");
  if (r.size() != n) throw std::invalid_argument("QP: r size mismatch");
  const double scale = 1.0 + P.cwiseAbs().maxCoeff();
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("QP: P must be symmetric within 1e-12");
  }
  if (Aeq.rows() > 0 && Aeq.cols() != n) {
    throw std::invalid_argument("QP: Aeq column count mismatch");
  }
  if (beq.size() != Aeq.rows()) {
    throw std::invalid_argument("QP: beq size mismatch");
  }
  if (Ain.rows() > 0 && Ain.cols() != n) {
    throw std::invalid_argument("QP: Ain column count mismatch");
  }
  if (bin.size() != Ain.rows()) {
    throw std::invalid_argument("QP: bin size mismatch");
  }
}

QpSolution SolveEqQp(const QuadraticProgram& qp, const QpOptions& options) {
  qp.Validate();
  const int n = qp.num_vars();
  const int me = static_cast<int>(qp.Aeq.rows());
  MatrixXd kkt = MatrixXd::Zero(n + me, n + me);
  kkt.topLeftCorner(n, n) = qp.P;
  if (me > 0) {
    kkt.topRightCorner(n, me) = qp.Aeq.transpose();
    kkt.bottomLeftCorner(me, n) = qp.Aeq;
  }
  VectorXd rhs(n + me);
  rhs.head(n) = -qp.r;
  rhs.tail(me) = qp.beq;

  QpSolution sol;
  Eigen::FullPivLU<MatrixXd> lu(kkt);
  VectorXd s;
  if (lu.isInvertible()) {
    s = lu.solve(rhs);
    sol.status = QpStatus::kOptimal;
  } else {
    s = kkt.colPivHouseholderQr().solve(rhs);
    const double residual = (kkt * s - rhs).lpNorm<Eigen::Infinity>();
    if (residual <= options.tolerance * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
      sol.status = QpStatus::kOptimal;
      sol.least_squares_fallback = true;
    } else {
      sol.status = QpStatus::kInfeasible;
      sol.v = s.head(n);
      return sol;
    }
  }
  sol.v = s.head(n);
  sol.eq_duals = s.tail(me);
  sol.ineq_duals.resize(0);
  sol.objective = qp.Objective(sol.v);
  return sol;
}

EqualityElimination EqualityElimination::Compute(const MatrixXd& Aeq,
                                                 const VectorXd& beq,
                                                 int num_vars,
                                                 double tolerance) {
  EqualityElimination out;
  const int me = static_cast<int>(Aeq.rows());
  if (me == 0) {
    out.rank = 0;
    out.particular = VectorXd::Zero(num_vars);
    out.null_basis = MatrixXd::Identity(num_vars, num_vars);
    return out;
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(Aeq.transpose());
  const int rank = static_cast<int>(qr.rank());
  out.rank = rank;
  MatrixXd Q = qr.householderQ();
  out.null_basis = Q.rightCols(num_vars - rank);

  // Aeq = Pi R' Q'; solve the leading triangle for the minimum-norm
  // particular solution and use the trailing rows as a consistency check.
  VectorXd pb = qr.colsPermutation().transpose() * beq;
  MatrixXd R = qr.matrixR().topRows(std::min(num_vars, me));
  VectorXd w1(rank);
  if (rank > 0) {
    w1 = R.topLeftCorner(rank, rank)
             .transpose()
             .triangularView<Eigen::Lower>()
             .solve(pb.head(rank));
  }
  if (me > rank) {
    VectorXd tail_residual =
        (rank > 0)
            ? VectorXd(pb.tail(me - rank) -
                       R.topRightCorner(rank, me - rank).transpose() * w1)
            : VectorXd(pb.tail(me - rank));
    if (tail_residual.lpNorm<Eigen::Infinity>() >
        tolerance * (1.0 + beq.lpNorm<Eigen::Infinity>()) + tolerance) {
      out.consistent = false;
    }
  }
  out.particular = (rank > 0) ? VectorXd(Q.leftCols(rank) * w1)
                              : VectorXd(VectorXd::Zero(num_vars));
  return out;
}

ReducedQp ReduceQp(const QuadraticProgram& qp, const EqualityElimination& elim) {
  ReducedQp red;
  const MatrixXd& Z = elim.null_basis;
  red.P = Z.transpose() * qp.P * Z;
  red.P = 0.5 * (red.P + red.P.transpose());
  red.r = Z.transpose() * (qp.P * elim.particular + qp.r);
  if (qp.Ain.rows() > 0) {
    red.A = qp.Ain * Z;
    red.b = qp.bin - qp.Ain * elim.particular;
  } else {
    red.A.resize(0, Z.cols());
    red.b.resize(0);
  }
  return red;
}

void DenseActiveSetQp::SetHessian(const MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  regularized_ = false;
  llt_.compute(P);
  if (llt_.info() != Eigen::Success) {
    double ridge = 1e-10 * (1.0 + P.diagonal().cwiseAbs().maxCoeff());
    MatrixXd Pr = P;
    for (int attempt = 0; attempt < 6; ++attempt) {
      Pr.diagonal().array() += ridge;
      llt_.compute(Pr);
      if (llt_.info() == Eigen::Success) break;
      ridge *= 100.0;
    }
    if (llt_.info() != Eigen::Success) {
      throw std::invalid_argument("DenseActiveSetQp: Hessian not PSD");
    }
    regularized_ = true;
  }
  inverse_cholesky_ = MatrixXd::Identity(n, n);
  llt_.matrixU().solveInPlace(inverse_cholesky_);  // J0 = L^{-T}
}

namespace {

// Givens rotation helpers for the dual active-set factor updates.
void AddConstraintUpdate(MatrixXd* R, MatrixXd* J, VectorXd* d, int q) {
  const int n = static_cast<int>(J->rows());
  for (int k = n - 1; k >= q + 1; --k) {
    const double a = (*d)[k - 1];
    const double b = (*d)[k];
    if (b == 0.0) continue;
    const double h = std::hypot(a, b);
    const double cc = a / h;
    const double ss = b / h;
    (*d)[k - 1] = h;
    (*d)[k] = 0.0;
    VectorXd col_prev = J->col(k - 1);
    J->col(k - 1) = cc * col_prev + ss * J->col(k);
    J->col(k) = -ss * col_prev + cc * J->col(k).eval();
  }
  R->col(q).head(q + 1) = d->head(q + 1);
}

void DeleteConstraintUpdate(MatrixXd* R, MatrixXd* J, std::vector<int>* active,
                            VectorXd* u, int* q, int l) {
  const int n = static_cast<int>(J->rows());
  for (int j = l; j < *q - 1; ++j) {
    (*active)[j] = (*active)[j + 1];
    (*u)[j] = (*u)[j + 1];
    R->col(j) = R->col(j + 1);
  }
  active->pop_back();
  --(*q);
  R->col(*q).setZero();
  for (int j = l; j < *q; ++j) {
    const double a = (*R)(j, j);
    const double b = (*R)(j + 1, j);
    if (b == 0.0) continue;
    const double h = std::hypot(a, b);
    const double cc = a / h;
    const double ss = b / h;
    // Rotate rows j, j+1 of R and columns j, j+1 of J.
    for (int k = j; k < *q; ++k) {
      const double t1 = (*R)(j, k);
      const double t2 = (*R)(j + 1, k);
      (*R)(j, k) = cc * t1 + ss * t2;
      (*R)(j + 1, k) = -ss * t1 + cc * t2;
    }
    (*R)(j + 1, j) = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t1 = (*J)(k, j);
      const double t2 = (*J)(k, j + 1);
      (*J)(k, j) = cc * t1 + ss * t2;
      (*J)(k, j + 1) = -ss * t1 + cc * t2;
    }
  }
}

}  // namespace

ActiveSetResult DenseActiveSetQp::Solve(const VectorXd& r, const MatrixXd& A,
                                        const VectorXd& b,
                                        const QpOptions& options,
                                        const std::vector<int>& hint) const {
  const int n = static_cast<int>(r.size());
  const int m = static_cast<int>(A.rows());
  const double tol = options.tolerance;
  ActiveSetResult res;

  VectorXd x = -llt_.solve(r);
  res.regularized = regularized_;

  if (m == 0) {
    res.x = x;
    res.status = QpStatus::kOptimal;
    res.duals.resize(0);
    return res;
  }

  // Row normalization keeps the feasibility tolerance meaningful across
  // differently scaled constraints.
  MatrixXd An(m, n);
  VectorXd bn(m);
  VectorXd row_scale(m);
  for (int i = 0; i < m; ++i) {
    const double norm = A.row(i).norm();
    if (norm < 1e-14) {
      if (b[i] < -tol) {
        res.status = QpStatus::kInfeasible;
        res.x = x;
        res.duals = VectorXd::Zero(m);
        return res;
      }
      // Vacuous row: never violated.
      An.row(i).setZero();
      bn[i] = std::abs(b[i]) + 1.0;
      row_scale[i] = 1.0;
      continue;
    }
    An.row(i) = A.row(i) / norm;
    bn[i] = b[i] / norm;
    row_scale[i] = norm;
  }

  MatrixXd J = inverse_cholesky_;
  MatrixXd R = MatrixXd::Zero(n, n);
  std::vector<int> active;
  active.reserve(n);
  VectorXd u = VectorXd::Zero(n);
  int q = 0;

  std::vector<char> in_active(m, 0);
  const int max_iter =
      options.max_iterations > 0 ? options.max_iterations : 50 * std::max(1, m);
  int iter = 0;

  while (true) {
    // Most violated inactive constraint; hint rows take priority so previous
    // active sets are rebuilt first when warm starting.
    int p = -1;
    double worst = tol;
    for (int idx : hint) {
      if (idx < 0 || idx >= m || in_active[idx]) continue;
      const double viol = An.row(idx).dot(x) - bn[idx];
      if (viol > worst) {
        worst = viol;
        p = idx;
      }
    }
    if (p < 0) {
      worst = tol;
      for (int i = 0; i < m; ++i) {
        if (in_active[i]) continue;
        const double viol = An.row(i).dot(x) - bn[i];
        if (viol > worst) {
          worst = viol;
          p = i;
        }
      }
    }
    if (p < 0) {
      res.status = QpStatus::kOptimal;
      break;
    }

    const VectorXd a = An.row(p).transpose();
    double u_p = 0.0;

    while (true) {
      if (++iter > max_iter) {
        res.status = QpStatus::kIterLimit;
        break;
      }
      VectorXd d = J.transpose() * (-a);
      VectorXd z = VectorXd::Zero(n);
      if (q < n) z = J.rightCols(n - q) * d.tail(n - q);
      VectorXd rvec(q);
      if (q > 0) {
        rvec = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(
            d.head(q));
      }

      double t1 = kInf;
      int l = -1;
      for (int j = 0; j < q; ++j) {
        if (rvec[j] > kPivotTol) {
          const double ratio = u[j] / rvec[j];
          if (ratio < t1) {
            t1 = ratio;
            l = j;
          }
        }
      }
      const double z_dot_np = z.dot(-a);
      const double viol = An.row(p).dot(x) - bn[p];
      const double t2 = (z_dot_np > kPivotTol) ? viol / z_dot_np : kInf;
      const double t = std::min(t1, t2);

      if (t >= kInf) {
        // Dual unbounded along (-rvec, 1): certificate of primal
        // infeasibility.
        res.status = QpStatus::kInfeasible;
        break;
      }

      if (t2 >= kInf) {
        // Dual-only step.
        u.head(q) -= t * rvec;
        u_p += t;
        DeleteConstraintUpdate(&R, &J, &active, &u, &q, l);
        std::fill(in_active.begin(), in_active.end(), 0);
        for (int idx : active) in_active[idx] = 1;
        continue;
      }

      x += t * z;
      u.head(q) -= t * rvec;
      u_p += t;

      if (t == t2) {
        AddConstraintUpdate(&R, &J, &d, q);
        if (std::abs(R(q, q)) < kPivotTol) {
          // Dependent normal slipped through; the step already satisfied the
          // constraint, so undo the bookkeeping and move on without adding.
          R.col(q).setZero();
          break;
        }
        active.push_back(p);
        in_active[p] = 1;
        u[q] = u_p;
        ++q;
        break;
      }

      // Partial step: drop the blocking constraint, stay on p.
      DeleteConstraintUpdate(&R, &J, &active, &u, &q, l);
      std::fill(in_active.begin(), in_active.end(), 0);
      for (int idx : active) in_active[idx] = 1;
    }

    if (res.status == QpStatus::kInfeasible ||
        res.status == QpStatus::kIterLimit) {
      break;
    }
  }

  res.x = x;
  res.iterations = iter;
  res.duals = VectorXd::Zero(m);
  for (int j = 0; j < q; ++j) {
    res.duals[active[j]] = u[j] / row_scale[active[j]];
  }
  res.active = active;
  if (res.status != QpStatus::kInfeasible &&
      res.status != QpStatus::kIterLimit) {
    res.status = QpStatus::kOptimal;
  }
  return res;
}

namespace {

// Re-solves the KKT system on the final active set with the exact Hessian and
// adopts the result when it verifies. Removes both active-set drift and any
// ridge regularization from the answer.
void PolishSolution(const QuadraticProgram& qp, const std::vector<int>& active,
                    double tol, QpSolution* sol) {
  const int n = qp.num_vars();
  const int me = static_cast<int>(qp.Aeq.rows());
  const int ma = static_cast<int>(active.size());
  MatrixXd A_act(me + ma, n);
  VectorXd b_act(me + ma);
  if (me > 0) {
    A_act.topRows(me) = qp.Aeq;
    b_act.head(me) = qp.beq;
  }
  for (int j = 0; j < ma; ++j) {
    A_act.row(me + j) = qp.Ain.row(active[j]);
    b_act[me + j] = qp.bin[active[j]];
  }
  MatrixXd kkt = MatrixXd::Zero(n + me + ma, n + me + ma);
  kkt.topLeftCorner(n, n) = qp.P;
  if (me + ma > 0) {
    kkt.topRightCorner(n, me + ma) = A_act.transpose();
    kkt.bottomLeftCorner(me + ma, n) = A_act;
  }
  VectorXd rhs(n + me + ma);
  rhs.head(n) = -qp.r;
  rhs.tail(me + ma) = b_act;
  VectorXd s = kkt.colPivHouseholderQr().solve(rhs);
  if ((kkt * s - rhs).lpNorm<Eigen::Infinity>() >
      tol * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
    return;
  }
  VectorXd v = s.head(n);
  VectorXd nu = s.segment(n, me);
  VectorXd mu_act = s.tail(ma);
  if ((mu_act.array() < -10 * tol).any()) return;
  for (int i = 0; i < qp.Ain.rows(); ++i) {
    const double slack = qp.bin[i] - qp.Ain.row(i).dot(v);
    if (slack < -10 * tol * (1.0 + std::abs(qp.bin[i]))) return;
  }
  // Compare stationarity against the current answer; adopt if no worse.
  VectorXd mu_full = VectorXd::Zero(qp.Ain.rows());
  for (int j = 0; j < ma; ++j) mu_full[active[j]] = std::max(0.0, mu_act[j]);
  auto stationarity = [&](const VectorXd& vv, const VectorXd& nn,
                          const VectorXd& mm) {
    VectorXd g = qp.P * vv + qp.r;
    if (me > 0) g += qp.Aeq.transpose() * nn;
    if (qp.Ain.rows() > 0) g += qp.Ain.transpose() * mm;
    return g.lpNorm<Eigen::Infinity>();
  };
  const double new_res = stationarity(v, nu, mu_full);
  const double old_res =
      (sol->eq_duals.size() == me && sol->ineq_duals.size() == qp.Ain.rows())
          ? stationarity(sol->v, sol->eq_duals, sol->ineq_duals)
          : kInf;
  if (new_res <= old_res + tol) {
    sol->v = v;
    sol->eq_duals = nu;
    sol->ineq_duals = mu_full;
    sol->objective = qp.Objective(v);
  }
}

}  // namespace

QpSolution SolveQp(const QuadraticProgram& qp, const QpOptions& options) {
  return SolveQp(qp, options, {});
}

QpSolution SolveQp(const QuadraticProgram& qp, const QpOptions& options,
                   const std::vector<int>& active_set_hint) {
  qp.Validate();
  if (qp.Ain.rows() == 0) return SolveEqQp(qp, options);

  const int n = qp.num_vars();
  const int me = static_cast<int>(qp.Aeq.rows());
  QpSolution sol;

  EqualityElimination elim =
      EqualityElimination::Compute(qp.Aeq, qp.beq, n, options.tolerance);
  if (!elim.consistent) {
    sol.status = QpStatus::kInfeasible;
    return sol;
  }
  ReducedQp red = ReduceQp(qp, elim);
  const int nr = static_cast<int>(red.P.rows());

  std::vector<int> active;
  if (nr == 0) {
    // Equalities pin every variable.
    if ((red.b.array() < -options.tolerance * 10).any()) {
      sol.status = QpStatus::kInfeasible;
      return sol;
    }
    sol.v = elim.particular;
    sol.ineq_duals = VectorXd::Zero(qp.Ain.rows());
    sol.status = QpStatus::kOptimal;
  } else {
    DenseActiveSetQp solver;
    solver.SetHessian(red.P);
    ActiveSetResult res =
        solver.Solve(red.r, red.A, red.b, options, active_set_hint);
    sol.status = res.status;
    sol.iterations = res.iterations;
    sol.regularized = res.regularized;
    sol.v = elim.particular + elim.null_basis * res.x;
    sol.ineq_duals = res.duals;
    active = res.active;
    if (sol.status == QpStatus::kInfeasible) return sol;
  }

  // Recover equality duals from stationarity.
  if (me > 0) {
    VectorXd g = qp.P * sol.v + qp.r;
    if (qp.Ain.rows() > 0) g += qp.Ain.transpose() * sol.ineq_duals;
    sol.eq_duals = qp.Aeq.transpose().colPivHouseholderQr().solve(-g);
  } else {
    sol.eq_duals.resize(0);
  }
  sol.objective = qp.Objective(sol.v);
  if (sol.status == QpStatus::kOptimal) {
    PolishSolution(qp, active, options.tolerance, &sol);
  }
  return sol;
}

}  // namespace c3
