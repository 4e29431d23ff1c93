#include <iostream>

#include "harness/presets.h"
#include "models/benchmarks.h"
#include "solvers/c3.h"

using Eigen::MatrixXd;
using Eigen::VectorXd;

int main() {
  using namespace c3;
  ExperimentConfig cfg = PresetConfig("cartpole-sim");
  McpProblemSpec spec = cfg.BuildSpec();

  spec.x0 = VectorXd{{0.01, 0.005, 0.0, 0.0}};
  C3Config c = cfg.c3;
  c.record_iterates = true;
  C3Solver solver(spec, c);
  C3StepResult step = solver.Solve();
  for (size_t i = 0; i < step.history.size(); ++i) {
    const C3Iterate& it = step.history[i];
    std::cout << "i=" << i << "  z0_lam=" << it.z[0].segment(4, 2).transpose()
              << "  d0_lam=" << it.delta[0].segment(4, 2).transpose()
              << "  w0_lam=" << it.w[0].segment(4, 2).transpose()
              << "  z0_u=" << it.z[0][6] << "  d0_x=" << it.delta[0].head(2).transpose()
              << "\n";
  }
  std::cout << "u0=" << step.u0[0] << " (lqr would be -0.168)\n";
  return 0;
}
