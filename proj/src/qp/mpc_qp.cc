#include "qp/mpc_qp.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

bool IsPsd(const MatrixXd& M, double tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * (1.0 + std::abs(es.eigenvalues().maxCoeff()));
}

bool IsPd(const MatrixXd& M) {
  Eigen::LLT<MatrixXd> llt(0.5 * (M + M.transpose()));
  return llt.info() == Eigen::Success;
}

}  // namespace

void McpProblemSpec::Validate() const {
  model.Validate();
  if (horizon < 1) throw std::invalid_argument("McpProblemSpec: N must be >= 1");
  const int n_x = model.num_states();
  const int n_u = model.num_inputs();
  if (static_cast<int>(Q.size()) != horizon + 1) {
    throw std::invalid_argument("McpProblemSpec: need N+1 state cost matrices");
  }
  if (static_cast<int>(R.size()) != horizon) {
    throw std::invalid_argument("McpProblemSpec: need N input cost matrices");
  }
  for (const MatrixXd& Qk : Q) {
    if (Qk.rows() != n_x || Qk.cols() != n_x) {
      throw std::invalid_argument("McpProblemSpec: Q dimension mismatch");
    }
    if (!IsPsd(Qk, 1e-10)) {
      throw std::invalid_argument("McpProblemSpec: Q must be PSD");
    }
  }
  for (const MatrixXd& Rk : R) {
    if (Rk.rows() != n_u || Rk.cols() != n_u) {
      throw std::invalid_argument("McpProblemSpec: R dimension mismatch");
    }
    if (n_u > 0 && !IsPd(Rk)) {
      throw std::invalid_argument("McpProblemSpec: R must be PD");
    }
  }
  if (x0.size() != n_x) {
    throw std::invalid_argument("McpProblemSpec: x0 dimension mismatch");
  }
  if (C_ineq.rows() > 0 && C_ineq.cols() != layout().total()) {
    throw std::invalid_argument("McpProblemSpec: C_ineq column mismatch");
  }
  if (c_ineq.size() != C_ineq.rows()) {
    throw std::invalid_argument("McpProblemSpec: c_ineq size mismatch");
  }
}

McpProblemSpec McpProblemSpec::Uniform(const LcsModel& model, int horizon,
                                       const MatrixXd& Q, const MatrixXd& R,
                                       const MatrixXd& QN,
                                       const VectorXd& x0) {
  McpProblemSpec spec;
  spec.model = model;
  spec.horizon = horizon;
  spec.Q.assign(horizon, Q);
  spec.Q.push_back(QN);
  spec.R.assign(horizon, R);
  spec.x0 = x0;
  spec.C_ineq.resize(0, spec.layout().total());
  spec.c_ineq.resize(0);
  return spec;
}

namespace {

void AppendRow(McpProblemSpec* spec, const Eigen::RowVectorXd& row, double b) {
  const Eigen::Index rows = spec->C_ineq.rows();
  spec->C_ineq.conservativeResize(rows + 1, Eigen::NoChange);
  spec->C_ineq.row(rows) = row;
  spec->c_ineq.conservativeResize(rows + 1);
  spec->c_ineq[rows] = b;
}

}  // namespace

void McpProblemSpec::AddStateBound(int state_index, double lower,
                                   double upper) {
  const StackedLayout lay = layout();
  if (C_ineq.cols() != lay.total()) C_ineq.resize(0, lay.total());
  for (int k = 1; k <= horizon; ++k) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lay.total());
    row[lay.x_offset(k) + state_index] = 1.0;
    if (std::isfinite(upper)) AppendRow(this, row, upper);
    if (std::isfinite(lower)) AppendRow(this, -row, -lower);
  }
}

void McpProblemSpec::AddInputBound(int input_index, double lower,
                                   double upper) {
  const StackedLayout lay = layout();
  if (C_ineq.cols() != lay.total()) C_ineq.resize(0, lay.total());
  for (int k = 0; k < horizon; ++k) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lay.total());
    row[lay.u_offset(k) + input_index] = 1.0;
    if (std::isfinite(upper)) AppendRow(this, row, upper);
    if (std::isfinite(lower)) AppendRow(this, -row, -lower);
  }
}

QuadraticProgram AssembleMpcQp(const McpProblemSpec& spec,
                               const std::vector<VectorXd>& deltas,
                               const std::vector<VectorXd>& duals,
                               const std::vector<MatrixXd>& G) {
  spec.Validate();
  const StackedLayout lay = spec.layout();
  const int N = spec.horizon;
  const int nz = lay.block_size();
  const int total = lay.total();
  const bool consensus = !G.empty();
  if (consensus &&
      (static_cast<int>(G.size()) != N || static_cast<int>(deltas.size()) != N ||
       static_cast<int>(duals.size()) != N)) {
    throw std::invalid_argument("AssembleMpcQp: G/deltas/duals must have N entries");
  }

  QuadraticProgram qp;
  qp.P = MatrixXd::Zero(total, total);
  qp.r = VectorXd::Zero(total);
  qp.c0 = 0.0;

  for (int k = 0; k < N; ++k) {
    qp.P.block(lay.x_offset(k), lay.x_offset(k), lay.n_x, lay.n_x) +=
        2.0 * spec.Q[k];
    if (lay.n_u > 0) {
      qp.P.block(lay.u_offset(k), lay.u_offset(k), lay.n_u, lay.n_u) +=
          2.0 * spec.R[k];
    }
    if (consensus) {
      if (G[k].rows() != nz || G[k].cols() != nz ||
          deltas[k].size() != nz || duals[k].size() != nz) {
        throw std::invalid_argument("AssembleMpcQp: consensus block mismatch");
      }
      qp.P.block(lay.x_offset(k), lay.x_offset(k), nz, nz) += 2.0 * G[k];
      const VectorXd target = deltas[k] - duals[k];
      qp.r.segment(lay.x_offset(k), nz) += -2.0 * (G[k] * target);
      qp.c0 += target.dot(G[k] * target);
    }
  }
  qp.P.block(lay.x_offset(N), lay.x_offset(N), lay.n_x, lay.n_x) +=
      2.0 * spec.Q[N];

  // Equalities: initial-condition rows, then the N dynamics rows.
  qp.Aeq = MatrixXd::Zero(lay.n_x * (N + 1), total);
  qp.beq = VectorXd::Zero(lay.n_x * (N + 1));
  qp.Aeq.block(0, lay.x_offset(0), lay.n_x, lay.n_x) =
      MatrixXd::Identity(lay.n_x, lay.n_x);
  qp.beq.head(lay.n_x) = spec.x0;
  for (int k = 0; k < N; ++k) {
    const int row = lay.n_x * (k + 1);
    qp.Aeq.block(row, lay.x_offset(k + 1), lay.n_x, lay.n_x) =
        MatrixXd::Identity(lay.n_x, lay.n_x);
    qp.Aeq.block(row, lay.x_offset(k), lay.n_x, lay.n_x) = -spec.model.A;
    if (lay.n_lambda > 0) {
      qp.Aeq.block(row, lay.lambda_offset(k), lay.n_x, lay.n_lambda) =
          -spec.model.D;
    }
    if (lay.n_u > 0) {
      qp.Aeq.block(row, lay.u_offset(k), lay.n_x, lay.n_u) = -spec.model.B;
    }
    qp.beq.segment(row, lay.n_x) = spec.model.d;
  }

  qp.Ain = spec.C_ineq;
  qp.bin = spec.c_ineq;
  if (qp.Ain.rows() == 0) {
    qp.Ain.resize(0, total);
    qp.bin.resize(0);
  }
  return qp;
}

}  // namespace c3
