#pragma once

#include <string>

#include <Eigen/Dense>

#include "lcs/lcs.h"

namespace c3 {

// Cart-pole between soft walls, linearized about the upright pole and
// discretized with explicit Euler. States: cart position, pole angle, cart
// velocity, pole angular velocity. The two contacts are the right and left
// wall forces on the pole tip; the soft wall enters as 1/k on F's diagonal.
struct CartPoleParams {
  double cart_mass = 0.978;
  double pole_mass = 0.411;  // pole plus rod
  double pole_length = 0.6;
  double com_length = 0.4267;
  double stiffness1 = 50.0;  // right wall
  double stiffness2 = 50.0;  // left wall
  double wall_distance = 0.35;
  double time_step = 0.01;
  double gravity = 9.81;
};

LcsModel CartpoleLcs(const CartPoleParams& params);

// Two grippers lifting an object through controllable normal forces and
// friction (Stewart-Trinkle time stepping: semi-implicit velocities in the
// gap rows, friction split into +/- components, one slack per contact).
// States: object position/velocity, gripper-1 position/velocity, gripper-2
// position/velocity. Inputs: two gripper accelerations, two normal forces.
// Six complementarity variables: slack, friction+, friction- per gripper.
struct FingerGaitingParams {
  double gravity = 9.81;
  double friction = 1.0;
  double time_step = 0.1;
  double g1_min = 1.0;
  double g1_max = 3.0;
  double g2_min = 3.0;
  double g2_max = 5.0;
};

LcsModel FingerGaitingLcs(const FingerGaitingParams& params);

// Infinite-horizon discrete Riccati fixed point, used as a terminal cost.
Eigen::MatrixXd SolveDare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                          int max_iters = 10000, double tolerance = 1e-12);

// Named model presets: "cartpole-sim" (k=50, d=0.35), "cartpole-hw" (k=100,
// d=0.39), "finger-gaiting". Throws std::invalid_argument on unknown names.
LcsModel ModelPreset(const std::string& name);

}  // namespace c3
