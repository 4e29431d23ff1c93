#pragma once

#include <string>

#include <json.hpp>

#include "solvers/c3.h"

namespace c3 {

// Everything needed to reproduce an experiment from a seed: model, horizon
// problem, controller settings, disturbances and the success criterion.
// Parsed from JSON (docs/schemas.md) or built from a named preset.
struct ExperimentConfig {
  std::string name = "experiment";

  std::string model_preset;  // empty when the model is inline
  LcsModel model;
  double model_dt = 0.01;  // plant step, seconds

  int horizon = 10;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd QN;          // ignored when riccati_terminal
  bool riccati_terminal = false;

  struct Bound {
    int index = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
  };
  std::vector<Bound> state_bounds;
  std::vector<Bound> input_bounds;

  Eigen::VectorXd x0;
  // Per-coordinate uniform sampling range for random trials; empty rows mean
  // the fixed x0 is used for every trial.
  Eigen::VectorXd x0_lower;
  Eigen::VectorXd x0_upper;

  C3Config c3;

  int trials = 1;
  uint64_t seed = 0;
  double run_seconds = 10.0;
  double control_rate_hz = 100.0;
  bool parallel_trials = false;

  // Disturbances: Gaussian process noise on the dynamics and/or a timed
  // input push u_d ~ U[push_low, push_high] added to the applied input.
  double noise_sigma = 0.0;
  bool push_enabled = false;
  double push_low = 10.0;
  double push_high = 15.0;
  double push_start_s = 0.0;
  double push_duration_s = 0.25;
  int push_input_index = 0;

  enum class SuccessKind { kInfNormBelow, kCoordBand };
  SuccessKind success_kind = SuccessKind::kInfNormBelow;
  double success_value = 0.05;
  double success_within_s = 10.0;
  double success_hold_s = 0.0;
  bool success_after_push = false;  // measure the deadline from the push end
  int success_coord = 0;
  double success_band_low = -0.5;
  double success_band_high = 0.5;

  // Derived quantities.
  int control_stride() const;        // plant steps per control step
  int total_plant_steps() const;
  McpProblemSpec BuildSpec() const;  // applies bounds and the terminal cost
};

// Named experiment presets: "cartpole-sim" (100 random starts), "cartpole-hw"
// (hardware model constants), "cartpole-hw-push" (input-push protocol),
// "finger-gaiting".
ExperimentConfig PresetConfig(const std::string& name);

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);
ExperimentConfig LoadExperimentConfig(const std::string& path);

}  // namespace c3
