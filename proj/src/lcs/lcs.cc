#include "lcs/lcs.h"

#include <stdexcept>
#include <string>

#include "common/failure.h"

namespace c3 {

using Eigen::VectorXd;

void LcsModel::Validate() const {
  const int n_x = num_states();
  const int n_lambda = num_contacts();
  const int n_u = num_inputs();
  auto check = [](bool ok, const char* what) {
    if (!ok) {
      throw std::invalid_argument(std::string("LcsModel: bad shape for ") +
                                  what);
    }
  };
  check(A.rows() == n_x && A.cols() == n_x, "A");
  check(B.rows() == n_x, "B");
  check(D.rows() == n_x && D.cols() == n_lambda, "D");
  check(d.size() == n_x, "d");
  check(E.rows() == n_lambda && E.cols() == n_x, "E");
  check(F.rows() == n_lambda && F.cols() == n_lambda, "F");
  check(H.rows() == n_lambda && H.cols() == n_u, "H");
  check(c.size() == n_lambda, "c");
}

LcsStepResult LcsStep(const LcsModel& model, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u, const LcpOptions& options) {
  if (x.size() != model.num_states() || u.size() != model.num_inputs()) {
    throw std::invalid_argument("LcsStep: state/input dimension mismatch");
  }
  LcsStepResult out;
  if (model.num_contacts() == 0) {
    out.lambda.resize(0);
    out.y.resize(0);
    out.x_next = model.A * x + model.B * u + model.d;
    return out;
  }
  LcpProblem lcp{model.E * x + model.H * u + model.c, model.F};
  LcpSolution sol = SolveLcp(lcp, options);
  if (sol.status != LcpStatus::kSolved) {
    throw SolveFailure("lcp",
                       sol.status == LcpStatus::kRay
                           ? "LCP terminated on a secondary ray"
                           : "LCP pivot budget exhausted");
  }
  out.lambda = sol.lambda;
  out.y = sol.y;
  out.x_next = model.A * x + model.B * u + model.D * sol.lambda + model.d;
  return out;
}

Trajectory Simulate(const LcsModel& model, const Eigen::VectorXd& x0,
                    const std::vector<Eigen::VectorXd>& inputs,
                    const NoiseGenerator& noise, const LcpOptions& options) {
  if (inputs.empty()) {
    throw std::invalid_argument("Simulate: need at least one input");
  }
  Trajectory traj;
  traj.states.reserve(inputs.size() + 1);
  traj.states.push_back(x0);
  for (int k = 0; k < static_cast<int>(inputs.size()); ++k) {
    LcsStepResult step;
    try {
      step = LcsStep(model, traj.states.back(), inputs[k], options);
    } catch (const SolveFailure& failure) {
      throw SolveFailure(failure.category(), failure.what(), k);
    }
    if (noise) step.x_next += noise(k);
    traj.states.push_back(step.x_next);
    traj.forces.push_back(step.lambda);
    traj.gaps.push_back(step.y);
    traj.inputs.push_back(inputs[k]);
  }
  return traj;
}

}  // namespace c3
