#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lcs/lcp_solver.h"

namespace c3 {

// Discrete-time linear complementarity system
//   x_{k+1} = A x_k + B u_k + D lambda_k + d
//   0 <= lambda_k  perp  E x_k + F lambda_k + H u_k + c >= 0.
// Immutable after construction; safe to share across threads.
struct LcsModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd D;
  Eigen::VectorXd d;
  Eigen::MatrixXd E;
  Eigen::MatrixXd F;
  Eigen::MatrixXd H;
  Eigen::VectorXd c;

  int num_states() const { return static_cast<int>(A.rows()); }
  int num_contacts() const { return static_cast<int>(F.rows()); }
  int num_inputs() const { return static_cast<int>(B.cols()); }

  // Throws std::invalid_argument if any dimension is inconsistent.
  void Validate() const;
};

// Time-indexed rollout. `states` has T+1 entries; `forces`, `inputs` and
// `gaps` have T. `stage_costs` is filled by cost-aware callers and may be
// empty.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> forces;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> gaps;
  std::vector<double> stage_costs;

  int length() const { return static_cast<int>(inputs.size()); }
};

struct LcsStepResult {
  Eigen::VectorXd x_next;
  Eigen::VectorXd lambda;
  Eigen::VectorXd y;
};

// One step of the LCS: solves LCP(E x + H u + c, F) for the contact forces,
// then advances the state. Throws SolveFailure (category "lcp") when the LCP
// cannot be solved.
LcsStepResult LcsStep(const LcsModel& model, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u, const LcpOptions& options = {});

// Additive state disturbance, evaluated once per step (applied to x_{k+1}
// after the step).
using NoiseGenerator = std::function<Eigen::VectorXd(int step)>;

// Rolls the model forward under the given input sequence. Deterministic for
// a fixed noise generator. LCP failure at step k throws SolveFailure with
// that step index.
Trajectory Simulate(const LcsModel& model, const Eigen::VectorXd& x0,
                    const std::vector<Eigen::VectorXd>& inputs,
                    const NoiseGenerator& noise = nullptr,
                    const LcpOptions& options = {});

}  // namespace c3
