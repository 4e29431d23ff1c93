#include "lcs/lcp_solver.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void LcpProblem::Validate() const {
  if (F.rows() != F.cols()) {
    throw std::invalid_argument("LcpProblem: F must be square");
  }
  if (q.size() != F.rows()) {
    throw std::invalid_argument("LcpProblem: q length must match F dimension");
  }
}

double ComplementarityResidual(const Eigen::VectorXd& lambda,
                               const Eigen::VectorXd& y) {
  if (lambda.size() != y.size()) {
    throw std::invalid_argument("ComplementarityResidual: length mismatch");
  }
  double res = 0.0;
  for (int i = 0; i < lambda.size(); ++i) {
    res = std::max(res, -std::min(lambda[i], 0.0));
    res = std::max(res, -std::min(y[i], 0.0));
    res = std::max(res, std::abs(lambda[i] * y[i]));
  }
  return res;
}

bool IsPMatrix(const Eigen::MatrixXd& F) {
  const int m = static_cast<int>(F.rows());
  if (m != F.cols()) throw std::invalid_argument("IsPMatrix: F must be square");
  if (m > 30) throw std::invalid_argument("IsPMatrix: matrix too large");
  for (uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const int k = static_cast<int>(idx.size());
    MatrixXd sub(k, k);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) sub(r, c) = F(idx[r], idx[c]);
    }
    if (sub.determinant() <= 0.0) return false;
  }
  return true;
}

namespace {

// Active-set enumeration: for each support S, solve F_SS lambda_S = -q_S and
// keep the first assignment that is complementarity-feasible. Used as a
// fallback when Lemke terminates on a secondary ray.
bool EnumerateLcp(const LcpProblem& problem, double tol, VectorXd* lambda_out) {
  const int m = problem.size();
  const MatrixXd& F = problem.F;
  const VectorXd& q = problem.q;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    const int k = static_cast<int>(active.size());
    VectorXd lambda = VectorXd::Zero(m);
    if (k > 0) {
      MatrixXd Fss(k, k);
      VectorXd qs(k);
      for (int r = 0; r < k; ++r) {
        qs[r] = q[active[r]];
        for (int c = 0; c < k; ++c) Fss(r, c) = F(active[r], active[c]);
      }
      VectorXd sol = Fss.colPivHouseholderQr().solve(-qs);
      if ((Fss * sol + qs).lpNorm<Eigen::Infinity>() > tol * (1.0 + qs.norm())) {
        continue;  // singular block, inconsistent
      }
      for (int r = 0; r < k; ++r) lambda[active[r]] = sol[r];
    }
    if ((lambda.array() < -tol).any()) continue;
    VectorXd y = F * lambda + q;
    if ((y.array() < -tol).any()) continue;
    bool complementary = true;
    for (int i = 0; i < m; ++i) {
      if (std::abs(lambda[i] * y[i]) > tol * (1.0 + std::abs(lambda[i] * y[i]))) {
        if (std::abs(lambda[i] * y[i]) > tol) complementary = false;
      }
    }
    if (!complementary) continue;
    *lambda_out = lambda.cwiseMax(0.0);
    return true;
  }
  return false;
}

// Tableau for Lemke's method. Equations: [I | -F | -e] [w; z; z0] = q, pivoted
// in place. Column layout: w_i = i, z_i = m + i, z0 = 2m, rhs = 2m + 1.
class LemkeTableau {
 public:
  LemkeTableau(const MatrixXd& F, const VectorXd& q)
      : m_(static_cast<int>(q.size())), T_(m_, 2 * m_ + 2), basis_(m_) {
    T_.setZero();
    for (int i = 0; i < m_; ++i) {
      T_(i, i) = 1.0;
      basis_[i] = i;  // w_i basic
    }
    T_.block(0, m_, m_, m_) = -F;
    T_.col(2 * m_).setConstant(-1.0);
    T_.col(2 * m_ + 1) = q;
  }

  int cols_z0() const { return 2 * m_; }
  int col_rhs() const { return 2 * m_ + 1; }

  void Pivot(int row, int col) {
    T_.row(row) /= T_(row, col);
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double factor = T_(i, col);
      if (factor != 0.0) T_.row(i) -= factor * T_.row(row);
    }
    basis_[row] = col;
  }

  // Lexicographic ratio test over rows with positive pivot entries. The
  // lexicographic vector of row i is (rhs_i, B^{-1} row i) where the w-columns
  // hold B^{-1}; exact comparisons, no tie tolerance needed because B^{-1}
  // rows are independent.
  int RatioTestRow(int col, double piv_tol) const {
    int best = -1;
    for (int i = 0; i < m_; ++i) {
      if (T_(i, col) <= piv_tol) continue;
      if (best < 0) {
        best = i;
        continue;
      }
      if (LexLess(i, best, col)) best = i;
    }
    return best;
  }

  int FindInitialRow(double tol) const {
    // Most negative rhs; ties go to the larger index, matching the
    // epsilon-perturbation q_i + eps^{i+1}.
    int row = -1;
    double qmin = -tol;
    for (int i = 0; i < m_; ++i) {
      const double qi = T_(i, col_rhs());
      if (qi < qmin || (row >= 0 && qi == qmin && i > row)) {
        qmin = qi;
        row = i;
      }
    }
    return row;
  }

  int basis(int row) const { return basis_[row]; }
  double rhs(int row) const { return T_(row, col_rhs()); }
  bool IsZ(int col) const { return col >= m_ && col < 2 * m_; }
  int VarIndex(int col) const { return IsZ(col) ? col - m_ : col; }
  int Complement(int col) const { return IsZ(col) ? col - m_ : col + m_; }

 private:
  bool LexLess(int a, int b, int col) const {
    const double pa = T_(a, col);
    const double pb = T_(b, col);
    double ra = T_(a, col_rhs()) / pa;
    double rb = T_(b, col_rhs()) / pb;
    if (ra != rb) return ra < rb;
    for (int j = 0; j < m_; ++j) {
      ra = T_(a, j) / pa;
      rb = T_(b, j) / pb;
      if (ra != rb) return ra < rb;
    }
    return a < b;
  }

  int m_;
  MatrixXd T_;
  std::vector<int> basis_;
};

}  // namespace

LcpSolution SolveLcp(const LcpProblem& problem, const LcpOptions& options) {
  problem.Validate();
  const int m = problem.size();
  const double tol = options.tolerance;
  LcpSolution sol;
  sol.lambda = VectorXd::Zero(m);
  sol.y = problem.q;

  if (m == 0) {
    sol.status = LcpStatus::kSolved;
    return sol;
  }

  auto finalize = [&](VectorXd lambda) {
    // Polish: re-solve on the detected support to cut accumulated pivot error.
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
      if (lambda[i] > tol) active.push_back(i);
    }
    if (!active.empty()) {
      const int k = static_cast<int>(active.size());
      MatrixXd Fss(k, k);
      VectorXd qs(k);
      for (int r = 0; r < k; ++r) {
        qs[r] = problem.q[active[r]];
        for (int c = 0; c < k; ++c) Fss(r, c) = problem.F(active[r], active[c]);
      }
      VectorXd refined = Fss.colPivHouseholderQr().solve(-qs);
      if ((Fss * refined + qs).lpNorm<Eigen::Infinity>() <=
          tol * (1.0 + qs.norm())) {
        VectorXd polished = VectorXd::Zero(m);
        for (int r = 0; r < k; ++r) polished[active[r]] = refined[r];
        VectorXd y_polished = problem.F * polished + problem.q;
        if (ComplementarityResidual(polished, y_polished) <=
            ComplementarityResidual(lambda, problem.F * lambda + problem.q)) {
          lambda = polished;
        }
      }
    }
    sol.lambda = lambda.cwiseMax(0.0);
    sol.y = problem.F * sol.lambda + problem.q;
    sol.status = LcpStatus::kSolved;
    if (options.check_uniqueness && m <= 12) {
      sol.multiple_solution_risk = !IsPMatrix(problem.F);
    }
  };

  // Trivial case: q >= 0.
  if ((problem.q.array() >= -tol).all()) {
    finalize(VectorXd::Zero(m));
    return sol;
  }

  LemkeTableau tableau(problem.F, problem.q);
  const int max_pivots = options.max_pivots > 0 ? options.max_pivots : 100 * m;
  const double piv_tol = 1e-12;

  int row = tableau.FindInitialRow(tol);
  int leaving_col = tableau.basis(row);
  tableau.Pivot(row, tableau.cols_z0());
  ++sol.pivots;

  bool ray = false;
  while (sol.pivots < max_pivots) {
    const int entering = tableau.Complement(leaving_col);
    const int pivot_row = tableau.RatioTestRow(entering, piv_tol);
    if (pivot_row < 0) {
      ray = true;
      break;
    }
    leaving_col = tableau.basis(pivot_row);
    tableau.Pivot(pivot_row, entering);
    ++sol.pivots;
    if (leaving_col == tableau.cols_z0()) {
      VectorXd lambda = VectorXd::Zero(m);
      for (int i = 0; i < m; ++i) {
        const int col = tableau.basis(i);
        if (tableau.IsZ(col)) lambda[tableau.VarIndex(col)] = tableau.rhs(i);
      }
      finalize(lambda);
      return sol;
    }
  }

  sol.status = ray ? LcpStatus::kRay : LcpStatus::kIterLimit;
  if (options.enumeration_fallback && m <= options.enumeration_max_size) {
    VectorXd lambda(m);
    if (EnumerateLcp(problem, tol, &lambda)) {
      finalize(lambda);
      sol.used_enumeration = true;
    }
  }
  return sol;
}

}  // namespace c3
