#pragma once

#include <vector>

#include <Eigen/Dense>

namespace c3 {

// Convex quadratic program
//   min  0.5 v'Pv + r'v + c0
//   s.t. Aeq v = beq,  Ain v <= bin.
// P must be symmetric PSD. Empty (0-row) constraint blocks are allowed.
struct QuadraticProgram {
  Eigen::MatrixXd P;
  Eigen::VectorXd r;
  double c0 = 0.0;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;
  Eigen::MatrixXd Ain;
  Eigen::VectorXd bin;

  int num_vars() const { return static_cast<int>(P.rows()); }
  void Validate() const;
  double Objective(const Eigen::VectorXd& v) const {
    return 0.5 * v.dot(P * v) + r.dot(v) + c0;
  }
};

enum class QpStatus { kOptimal, kInfeasible, kIterLimit };

struct QpOptions {
  double tolerance = 1e-8;
  // Active-set iteration cap; 0 means 50 * (number of constraints).
  int max_iterations = 0;
};

struct QpSolution {
  Eigen::VectorXd v;
  QpStatus status = QpStatus::kInfeasible;
  double objective = 0.0;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;
  // Set when a rank-deficient KKT system was solved in the least-squares
  // sense (consistent but not uniquely determined).
  bool least_squares_fallback = false;
  // Set when the reduced Hessian needed a tiny ridge to factor (PSD-singular
  // cost); the returned point is polished against the exact problem when
  // possible.
  bool regularized = false;
  int iterations = 0;
};

// Equality-constrained QP via the KKT system. Optimal iff the system is
// consistent; rank-deficient but consistent systems are solved least-squares
// and flagged.
QpSolution SolveEqQp(const QuadraticProgram& qp, const QpOptions& options = {});

// General convex QP. Equalities are eliminated through a rank-revealing null
// space basis; inequalities are handled by a dual active-set method (Goldfarb
// & Idnani) warm-startable through an optional hint of active rows.
QpSolution SolveQp(const QuadraticProgram& qp, const QpOptions& options = {});
QpSolution SolveQp(const QuadraticProgram& qp, const QpOptions& options,
                   const std::vector<int>& active_set_hint);

// --- building blocks, exposed so callers with fixed structure can cache ---

// Null-space elimination of Aeq v = beq computed from one rank-revealing QR
// of Aeq'. `particular` is the minimum-norm solution; `null_basis` has
// orthonormal columns spanning ker(Aeq).
struct EqualityElimination {
  bool consistent = true;
  int rank = 0;
  Eigen::VectorXd particular;
  Eigen::MatrixXd null_basis;

  static EqualityElimination Compute(const Eigen::MatrixXd& Aeq,
                                     const Eigen::VectorXd& beq, int num_vars,
                                     double tolerance = 1e-10);
};

struct ReducedQp {
  Eigen::MatrixXd P;
  Eigen::VectorXd r;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

ReducedQp ReduceQp(const QuadraticProgram& qp, const EqualityElimination& elim);

struct ActiveSetResult {
  Eigen::VectorXd x;
  QpStatus status = QpStatus::kInfeasible;
  Eigen::VectorXd duals;         // one per inequality row, >= 0
  std::vector<int> active;       // indices of rows active at the solution
  int iterations = 0;
  bool regularized = false;
};

// Strictly convex inequality-only QP solver (dual active set). The Hessian is
// factored once by SetHessian and may be reused across many Solve calls.
class DenseActiveSetQp {
 public:
  // Factors P (with an automatic tiny ridge if PSD-singular).
  void SetHessian(const Eigen::MatrixXd& P);
  bool regularized() const { return regularized_; }

  ActiveSetResult Solve(const Eigen::VectorXd& r, const Eigen::MatrixXd& A,
                        const Eigen::VectorXd& b, const QpOptions& options,
                        const std::vector<int>& hint = {}) const;

 private:
  Eigen::MatrixXd inverse_cholesky_;  // J0 = L^{-T}, P = L L'
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool regularized_ = false;
};

}  // namespace c3
