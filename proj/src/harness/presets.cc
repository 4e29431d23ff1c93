#include "harness/presets.h"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "lcs/lcs_io.h"
#include "models/benchmarks.h"

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

int ExperimentConfig::control_stride() const {
  if (control_rate_hz <= 0 || model_dt <= 0) {
    throw std::invalid_argument("ExperimentConfig: rate and dt must be positive");
  }
  return std::max(1, static_cast<int>(std::ceil((1.0 / control_rate_hz) / model_dt)));
}

int ExperimentConfig::total_plant_steps() const {
  return std::max(1, static_cast<int>(std::ceil(run_seconds / model_dt)));
}

McpProblemSpec ExperimentConfig::BuildSpec() const {
  MatrixXd terminal = riccati_terminal ? SolveDare(model.A, model.B, Q, R) : QN;
  McpProblemSpec spec = McpProblemSpec::Uniform(model, horizon, Q, R, terminal, x0);
  for (const Bound& b : state_bounds) spec.AddStateBound(b.index, b.lower, b.upper);
  for (const Bound& b : input_bounds) spec.AddInputBound(b.index, b.lower, b.upper);
  spec.Validate();
  return spec;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExperimentConfig CartpoleSimPreset() {
  ExperimentConfig cfg;
  cfg.name = "cartpole-sim";
  cfg.model_preset = "cartpole-sim";
  cfg.model = ModelPreset(cfg.model_preset);
  cfg.model_dt = 0.01;
  cfg.horizon = 10;
  cfg.Q = VectorXd{{10.0, 3.0, 1.0, 1.0}}.asDiagonal();
  cfg.R = MatrixXd::Constant(1, 1, 1.0);
  cfg.riccati_terminal = true;
  cfg.x0 = VectorXd::Zero(4);
  // Initial-condition distribution: 2.86 x1, 100 x2, x3, x4 ~ U[-1, 1].
  cfg.x0_lower = VectorXd{{-1.0 / 2.86, -0.01, -1.0, -1.0}};
  cfg.x0_upper = VectorXd{{1.0 / 2.86, 0.01, 1.0, 1.0}};

  cfg.c3.theta = 10;
  cfg.c3.G = 0.1 * MatrixXd::Identity(7, 7);
  cfg.c3.rho = 2.0;
  cfg.c3.projection = ProjectionMethod::kLcp;
  cfg.c3.U = BlockDiagonalWeight(4, 2, 1, 1000.0, 1.0, 0.0);

  cfg.trials = 100;
  cfg.seed = 1;
  cfg.run_seconds = 10.0;
  cfg.control_rate_hz = 100.0;
  cfg.success_kind = ExperimentConfig::SuccessKind::kInfNormBelow;
  cfg.success_value = 0.05;
  cfg.success_within_s = 10.0;
  return cfg;
}

ExperimentConfig CartpoleHwPreset() {
  ExperimentConfig cfg = CartpoleSimPreset();
  cfg.name = "cartpole-hw";
  cfg.model_preset = "cartpole-hw";
  cfg.model = ModelPreset(cfg.model_preset);
  cfg.c3.G = 0.5 * MatrixXd::Identity(7, 7);
  cfg.c3.rho = 2.3;
  cfg.x0_lower.resize(0);
  cfg.x0_upper.resize(0);
  cfg.trials = 10;
  return cfg;
}

ExperimentConfig CartpoleHwPushPreset() {
  ExperimentConfig cfg = CartpoleHwPreset();
  cfg.name = "cartpole-hw-push";
  cfg.push_enabled = true;
  cfg.push_low = 10.0;
  cfg.push_high = 15.0;
  cfg.push_start_s = 0.0;
  cfg.push_duration_s = 0.25;
  cfg.push_input_index = 0;
  cfg.run_seconds = 10.25;
  cfg.success_after_push = true;
  cfg.success_within_s = 10.0;
  return cfg;
}

ExperimentConfig FingerGaitingPreset() {
  ExperimentConfig cfg;
  cfg.name = "finger-gaiting";
  cfg.model_preset = "finger-gaiting";
  cfg.model = ModelPreset(cfg.model_preset);
  cfg.model_dt = 0.1;
  cfg.horizon = 10;
  cfg.Q = VectorXd{{5000.0, 10.0, 10.0, 10.0, 10.0, 10.0}}.asDiagonal();
  cfg.R = MatrixXd::Identity(4, 4);
  cfg.QN = cfg.Q;
  cfg.state_bounds = {{2, 1.0, 3.0}, {4, 3.0, 5.0}};
  cfg.input_bounds = {{2, 0.0, kInf}, {3, 0.0, kInf}};
  cfg.x0 = VectorXd{{-7.0, 0.0, 3.0, 0.0, 4.0, 0.0}};
  cfg.x0_lower = VectorXd{{-8.0, 0.0, 2.0, 0.0, 3.0, 0.0}};
  cfg.x0_upper = VectorXd{{-6.0, 0.0, 3.0, 0.0, 4.0, 0.0}};

  cfg.c3.theta = 10;
  cfg.c3.G = MatrixXd::Identity(16, 16);
  cfg.c3.rho = 1.2;
  cfg.c3.projection = ProjectionMethod::kMiqp;
  cfg.c3.U = BlockDiagonalWeight(6, 6, 4, 1000.0, 1.0, 1.0);

  cfg.trials = 100;
  cfg.seed = 1;
  cfg.run_seconds = 15.0;
  cfg.control_rate_hz = 10.0;
  cfg.success_kind = ExperimentConfig::SuccessKind::kCoordBand;
  cfg.success_coord = 0;
  cfg.success_band_low = -0.5;
  cfg.success_band_high = 0.5;
  cfg.success_hold_s = 1.0;
  cfg.success_within_s = 15.0;
  return cfg;
}

MatrixXd CostMatrixFromJson(const json& j, int dim) {
  if (j.is_array()) return MatrixFromJson(j);
  if (j.is_object() && j.contains("diag")) {
    VectorXd diag = VectorFromJson(j["diag"]);
    return MatrixXd(diag.asDiagonal());
  }
  if (j.is_number()) {
    return j.get<double>() * MatrixXd::Identity(dim, dim);
  }
  throw std::invalid_argument("cost matrix: expected array, {diag}, or scalar");
}

void ParseBounds(const json& j, std::vector<ExperimentConfig::Bound>* out) {
  for (const json& item : j) {
    ExperimentConfig::Bound b;
    b.index = item.at("index").get<int>();
    if (item.contains("lower")) b.lower = item["lower"].get<double>();
    if (item.contains("upper")) b.upper = item["upper"].get<double>();
    out->push_back(b);
  }
}

}  // namespace

ExperimentConfig PresetConfig(const std::string& name) {
  if (name == "cartpole-sim") return CartpoleSimPreset();
  if (name == "cartpole-hw") return CartpoleHwPreset();
  if (name == "cartpole-hw-push") return CartpoleHwPushPreset();
  if (name == "finger-gaiting") return FingerGaitingPreset();
  throw std::invalid_argument("unknown experiment preset: " + name);
}

ExperimentConfig ExperimentConfigFromJson(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("preset")) {
    cfg = PresetConfig(j["preset"].get<std::string>());
  }
  if (j.contains("name")) cfg.name = j["name"].get<std::string>();

  if (j.contains("model")) {
    if (j["model"].is_string()) {
      cfg.model_preset = j["model"].get<std::string>();
      cfg.model = ModelPreset(cfg.model_preset);
    } else {
      cfg.model_preset.clear();
      cfg.model = LcsModelFromJson(j["model"]);
      if (!j.contains("model_dt") && !j.contains("preset")) {
        throw std::invalid_argument("inline model requires model_dt");
      }
    }
  }
  if (j.contains("model_dt")) cfg.model_dt = j["model_dt"].get<double>();
  if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();

  const int n_x = cfg.model.num_states();
  const int n_u = cfg.model.num_inputs();
  const int nz = n_x + cfg.model.num_contacts() + n_u;
  if (j.contains("Q")) cfg.Q = CostMatrixFromJson(j["Q"], n_x);
  if (j.contains("R")) cfg.R = CostMatrixFromJson(j["R"], n_u);
  if (j.contains("QN")) {
    if (j["QN"].is_string() && j["QN"] == "riccati") {
      cfg.riccati_terminal = true;
    } else {
      cfg.riccati_terminal = false;
      cfg.QN = CostMatrixFromJson(j["QN"], n_x);
    }
  }
  if (j.contains("state_bounds")) {
    cfg.state_bounds.clear();
    ParseBounds(j["state_bounds"], &cfg.state_bounds);
  }
  if (j.contains("input_bounds")) {
    cfg.input_bounds.clear();
    ParseBounds(j["input_bounds"], &cfg.input_bounds);
  }
  if (j.contains("x0")) cfg.x0 = VectorFromJson(j["x0"]);
  if (cfg.x0.size() == 0) cfg.x0 = VectorXd::Zero(n_x);
  if (j.contains("x0_range")) {
    cfg.x0_lower = VectorFromJson(j["x0_range"].at("lower"));
    cfg.x0_upper = VectorFromJson(j["x0_range"].at("upper"));
  }

  if (j.contains("c3")) {
    const json& jc = j["c3"];
    if (jc.contains("theta")) cfg.c3.theta = jc["theta"].get<int>();
    if (jc.contains("rho")) cfg.c3.rho = jc["rho"].get<double>();
    if (jc.contains("g_scale")) {
      cfg.c3.G = jc["g_scale"].get<double>() * MatrixXd::Identity(nz, nz);
    }
    if (jc.contains("G")) cfg.c3.G = MatrixFromJson(jc["G"]);
    if (jc.contains("projection")) {
      const std::string p = jc["projection"].get<std::string>();
      if (p == "miqp") {
        cfg.c3.projection = ProjectionMethod::kMiqp;
      } else if (p == "lcp") {
        cfg.c3.projection = ProjectionMethod::kLcp;
      } else if (p == "admm") {
        cfg.c3.projection = ProjectionMethod::kNestedAdmm;
      } else {
        throw std::invalid_argument("projection must be miqp, lcp or admm");
      }
    }
    if (jc.contains("U")) {
      if (jc["U"].is_object()) {
        cfg.c3.U = BlockDiagonalWeight(
            n_x, cfg.model.num_contacts(), n_u, jc["U"].value("x", 1.0),
            jc["U"].value("lambda", 0.01), jc["U"].value("u", 1.0));
      } else {
        cfg.c3.U = MatrixFromJson(jc["U"]);
      }
    }
    if (jc.contains("big_m")) cfg.c3.miqp.big_m = jc["big_m"].get<double>();
    if (jc.contains("admm_iters")) {
      cfg.c3.admm.inner_iters = jc["admm_iters"].get<int>();
    }
    if (jc.contains("admm_rho")) {
      cfg.c3.admm.inner_rho = jc["admm_rho"].get<double>();
    }
    if (jc.contains("parallel_projection")) {
      cfg.c3.parallel_projection = jc["parallel_projection"].get<bool>();
    }
    if (jc.contains("shift_warm_start")) {
      cfg.c3.shift_warm_start = jc["shift_warm_start"].get<bool>();
    }
  }
  if (cfg.c3.G.size() == 0) cfg.c3.G = 0.1 * MatrixXd::Identity(nz, nz);

  if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("run_seconds")) cfg.run_seconds = j["run_seconds"].get<double>();
  if (j.contains("control_rate_hz")) {
    cfg.control_rate_hz = j["control_rate_hz"].get<double>();
  }
  if (j.contains("parallel_trials")) {
    cfg.parallel_trials = j["parallel_trials"].get<bool>();
  }

  if (j.contains("disturbance")) {
    const json& jd = j["disturbance"];
    if (jd.contains("sigma")) cfg.noise_sigma = jd["sigma"].get<double>();
    if (jd.contains("push")) {
      const json& jp = jd["push"];
      cfg.push_enabled = true;
      cfg.push_low = jp.value("low", 10.0);
      cfg.push_high = jp.value("high", 15.0);
      cfg.push_start_s = jp.value("start_s", 0.0);
      cfg.push_duration_s = jp.value("duration_s", 0.25);
      cfg.push_input_index = jp.value("input_index", 0);
    }
  }

  if (j.contains("success")) {
    const json& js = j["success"];
    const std::string type = js.value("type", "inf_norm");
    if (type == "inf_norm") {
      cfg.success_kind = ExperimentConfig::SuccessKind::kInfNormBelow;
      cfg.success_value = js.value("value", 0.05);
    } else if (type == "band") {
      cfg.success_kind = ExperimentConfig::SuccessKind::kCoordBand;
      cfg.success_coord = js.value("coord", 0);
      cfg.success_band_low = js.value("low", -0.5);
      cfg.success_band_high = js.value("high", 0.5);
    } else {
      throw std::invalid_argument("success.type must be inf_norm or band");
    }
    cfg.success_within_s = js.value("within_s", cfg.success_within_s);
    cfg.success_hold_s = js.value("hold_s", cfg.success_hold_s);
    cfg.success_after_push = js.value("after_push", cfg.success_after_push);
  }
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return ExperimentConfigFromJson(j);
}

}  // namespace c3
