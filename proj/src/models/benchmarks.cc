#include "models/benchmarks.h"

#include <stdexcept>

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

LcsModel CartpoleLcs(const CartPoleParams& p) {
  if (p.cart_mass <= 0 || p.pole_mass <= 0 || p.pole_length <= 0 ||
      p.com_length <= 0 || p.stiffness1 <= 0 || p.stiffness2 <= 0 ||
      p.wall_distance <= 0 || p.time_step <= 0) {
    throw std::invalid_argument("CartPoleParams: all parameters must be positive");
  }
  const double mc = p.cart_mass;
  const double mp = p.pole_mass;
  const double lp = p.pole_length;
  const double lc = p.com_length;
  const double g = p.gravity;
  const double ts = p.time_step;

  // Linearized continuous dynamics about the upright pole; the pole is a
  // point mass at lc for gravity/inertia, the wall force acts at the tip lp.
  // The tip position is x1 - lp * x2, so a wall force produces both a cart
  // and an angular acceleration term.
  MatrixXd Ac = MatrixXd::Zero(4, 4);
  Ac(0, 2) = 1.0;
  Ac(1, 3) = 1.0;
  Ac(2, 1) = g * mp / mc;
  Ac(3, 1) = g * (mc + mp) / (lc * mc);

  MatrixXd Bc = MatrixXd::Zero(4, 1);
  Bc(2, 0) = 1.0 / mc;
  Bc(3, 0) = 1.0 / (lc * mc);

  MatrixXd Dc = MatrixXd::Zero(4, 2);
  Dc(2, 0) = -1.0 / mc + lp / (mc * lc);
  Dc(3, 0) = -1.0 / (mc * lc) + lp * (mc + mp) / (mc * mp * lc * lc);
  Dc.col(1) = -Dc.col(0);

  LcsModel model;
  model.A = MatrixXd::Identity(4, 4) + ts * Ac;
  model.B = ts * Bc;
  model.D = ts * Dc;
  model.d = VectorXd::Zero(4);

  // Wall gaps with the soft-wall compliance on the diagonal of F:
  //   right: d - (x1 - lp x2) + lambda1/k1 >= 0
  //   left:  (x1 - lp x2) + d + lambda2/k2 >= 0.
  model.E = MatrixXd(2, 4);
  model.E << -1.0, lp, 0.0, 0.0, 1.0, -lp, 0.0, 0.0;
  model.F = MatrixXd::Zero(2, 2);
  model.F(0, 0) = 1.0 / p.stiffness1;
  model.F(1, 1) = 1.0 / p.stiffness2;
  model.H = MatrixXd::Zero(2, 1);
  model.c = VectorXd::Constant(2, p.wall_distance);
  model.Validate();
  return model;
}

LcsModel FingerGaitingLcs(const FingerGaitingParams& p) {
  if (p.friction < 0 || p.time_step <= 0) {
    throw std::invalid_argument("FingerGaitingParams: invalid mu or time step");
  }
  const double h = p.time_step;
  const double g = p.gravity;
  const double mu = p.friction;

  // Semi-implicit update: positions advance with the k+1 velocities, so the
  // friction forces enter the position rows with h^2. Forces
  // lambda2 - lambda3 (gripper 1) and lambda5 - lambda6 (gripper 2) act
  // between object and gripper with opposite signs; lambda1, lambda4 are the
  // friction-cone slacks.
  LcsModel model;
  model.A = MatrixXd::Identity(6, 6);
  model.A(0, 1) = h;
  model.A(2, 3) = h;
  model.A(4, 5) = h;

  model.B = MatrixXd::Zero(6, 4);
  model.B(2, 0) = h * h;
  model.B(3, 0) = h;
  model.B(4, 1) = h * h;
  model.B(5, 1) = h;

  model.D = MatrixXd::Zero(6, 6);
  model.D.row(0) << 0, h * h, -h * h, 0, h * h, -h * h;
  model.D.row(1) << 0, h, -h, 0, h, -h;
  model.D.row(2) << 0, -h * h, h * h, 0, 0, 0;
  model.D.row(3) << 0, -h, h, 0, 0, 0;
  model.D.row(4) << 0, 0, 0, 0, -h * h, h * h;
  model.D.row(5) << 0, 0, 0, 0, -h, h;

  model.d = VectorXd::Zero(6);
  model.d[0] = -g * h * h;
  model.d[1] = -g * h;

  // Rows: friction cone 1, slip +/- of gripper 1, friction cone 2,
  // slip +/- of gripper 2, with the k+1 velocities substituted in.
  model.E = MatrixXd::Zero(6, 6);
  model.E.row(1) << 0, 1, 0, -1, 0, 0;
  model.E.row(2) << 0, -1, 0, 1, 0, 0;
  model.E.row(4) << 0, 1, 0, 0, 0, -1;
  model.E.row(5) << 0, -1, 0, 0, 0, 1;

  model.F = MatrixXd::Zero(6, 6);
  model.F.row(0) << 0, -1, -1, 0, 0, 0;
  model.F.row(1) << 1, 2 * h, -2 * h, 0, h, -h;
  model.F.row(2) << 1, -2 * h, 2 * h, 0, -h, h;
  model.F.row(3) << 0, 0, 0, 0, -1, -1;
  model.F.row(4) << 0, h, -h, 1, 2 * h, -2 * h;
  model.F.row(5) << 0, -h, h, 1, -2 * h, 2 * h;

  model.H = MatrixXd::Zero(6, 4);
  model.H(0, 2) = mu;
  model.H(1, 0) = -h;
  model.H(2, 0) = h;
  model.H(3, 3) = mu;
  model.H(4, 1) = -h;
  model.H(5, 1) = h;

  model.c = VectorXd::Zero(6);
  model.c[1] = -h * g;
  model.c[2] = h * g;
  model.c[4] = -h * g;
  model.c[5] = h * g;
  model.Validate();
  return model;
}

MatrixXd SolveDare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                   const MatrixXd& R, int max_iters, double tolerance) {
  MatrixXd P = Q;
  for (int i = 0; i < max_iters; ++i) {
    const MatrixXd BtP = B.transpose() * P;
    const MatrixXd K = (R + BtP * B).ldlt().solve(BtP * A);
    const MatrixXd P_next =
        Q + A.transpose() * P * (A - B * K);
    const double change = (P_next - P).cwiseAbs().maxCoeff();
    P = 0.5 * (P_next + P_next.transpose());
    if (change < tolerance * (1.0 + P.cwiseAbs().maxCoeff())) break;
  }
  return P;
}

LcsModel ModelPreset(const std::string& name) {
  if (name == "cartpole-sim") {
    return CartpoleLcs(CartPoleParams{});
  }
  if (name == "cartpole-hw") {
    CartPoleParams p;
    p.stiffness1 = 100.0;
    p.stiffness2 = 100.0;
    p.wall_distance = 0.39;
    return CartpoleLcs(p);
  }
  if (name == "finger-gaiting") {
    return FingerGaitingLcs(FingerGaitingParams{});
  }
  throw std::invalid_argument("unknown model preset: " + name);
}

}  // namespace c3
