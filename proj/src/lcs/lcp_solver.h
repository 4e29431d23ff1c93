#pragma once

#include <Eigen/Dense>

namespace c3 {

// Linear complementarity problem: find lambda >= 0 with
//   y = F lambda + q >= 0  and  lambda' y = 0.
struct LcpProblem {
  Eigen::VectorXd q;
  Eigen::MatrixXd F;

  int size() const { return static_cast<int>(q.size()); }
  // Throws std::invalid_argument on shape mismatch.
  void Validate() const;
};

enum class LcpStatus {
  kSolved,
  kRay,        // secondary ray: no solution found on the pivot path
  kIterLimit,  // pivot budget exhausted
};

struct LcpOptions {
  double tolerance = 1e-9;
  // Pivot cap; 0 means 100 * m.
  int max_pivots = 0;
  // On ray termination, retry by enumerating active sets when m is at most
  // enumeration_max_size.
  bool enumeration_fallback = true;
  int enumeration_max_size = 12;
  // When true and m <= 12, flags solutions of non-P-matrix problems as
  // potentially non-unique. Costs up to 2^m small determinants.
  bool check_uniqueness = false;
};

struct LcpSolution {
  Eigen::VectorXd lambda;
  Eigen::VectorXd y;
  LcpStatus status = LcpStatus::kRay;
  int pivots = 0;
  bool used_enumeration = false;
  // Only set when LcpOptions::check_uniqueness is on.
  bool multiple_solution_risk = false;
};

// Lemke's complementary pivoting with lexicographic tie-breaking.
LcpSolution SolveLcp(const LcpProblem& problem, const LcpOptions& options = {});

// max(||min(lambda,0)||_inf, ||min(y,0)||_inf, max_i |lambda_i y_i|).
double ComplementarityResidual(const Eigen::VectorXd& lambda,
                               const Eigen::VectorXd& y);

// All principal minors positive. Intended for small matrices (m <= 12 or so);
// cost grows as 2^m.
bool IsPMatrix(const Eigen::MatrixXd& F);

}  // namespace c3
