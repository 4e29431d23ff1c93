#include "harness/experiment.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "common/failure.h"
#include "common/rng.h"

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string FormatDouble(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return std::string(buffer);
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd Stats(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / xs.size();
  double sq = 0.0;
  for (double x : xs) sq += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(sq / xs.size());
  return out;
}

struct PlantRow {
  double time = 0.0;
  VectorXd x;
  VectorXd lambda;
  VectorXd u;
  double stage_cost = 0.0;
  double qp_ms = 0.0;    // attributed to the control solve on its first substep
  double proj_ms = 0.0;
};

struct TrialRun {
  TrialRecord record;
  std::vector<PlantRow> rows;
  std::vector<VectorXd> control_states;  // state at each control step
  std::vector<C3StepResult> steps;
};

VectorXd SampleInitialState(const ExperimentConfig& config, Rng* rng) {
  if (config.x0_lower.size() == 0) return config.x0;
  return rng->UniformVector(config.x0_lower, config.x0_upper);
}

bool EvaluateSuccess(const ExperimentConfig& config,
                     const std::vector<PlantRow>& rows, double final_time,
                     const VectorXd& final_state, double* success_time) {
  const double start =
      config.success_after_push && config.push_enabled
          ? config.push_start_s + config.push_duration_s
          : 0.0;
  const double deadline = start + config.success_within_s;
  auto in_condition = [&](const VectorXd& x) {
    if (config.success_kind == ExperimentConfig::SuccessKind::kInfNormBelow) {
      return x.lpNorm<Eigen::Infinity>() < config.success_value;
    }
    const double v = x[config.success_coord];
    return v >= config.success_band_low && v <= config.success_band_high;
  };

  double hold_begin = -1.0;
  auto scan = [&](double t, const VectorXd& x) -> bool {
    if (t < start) return false;
    if (!in_condition(x)) {
      hold_begin = -1.0;
      return false;
    }
    if (hold_begin < 0.0) hold_begin = t;
    if (t - hold_begin >= config.success_hold_s && hold_begin <= deadline) {
      *success_time = hold_begin;
      return true;
    }
    return false;
  };
  for (const PlantRow& row : rows) {
    if (scan(row.time, row.x)) return true;
  }
  return scan(final_time, final_state);
}

TrialRun RunTrial(const ExperimentConfig& config, int trial_index) {
  TrialRun run;
  run.record.trial = trial_index;
  run.record.seed = config.seed;
  Rng rng = Rng::ForTrial(config.seed, static_cast<uint64_t>(trial_index));

  McpProblemSpec spec = config.BuildSpec();
  spec.x0 = SampleInitialState(config, &rng);
  const double push_u =
      config.push_enabled ? rng.Uniform(config.push_low, config.push_high) : 0.0;

  const int stride = config.control_stride();
  const int plant_steps = config.total_plant_steps();
  const int control_steps = (plant_steps + stride - 1) / stride;
  const double dt = config.model_dt;

  int plant_step = 0;
  VectorXd final_state = spec.x0;

  PlantStepFn plant = [&](const VectorXd& x, const VectorXd& u) -> VectorXd {
    VectorXd state = x;
    for (int s = 0; s < stride && plant_step < plant_steps; ++s, ++plant_step) {
      const double t = plant_step * dt;
      VectorXd u_applied = u;
      if (config.push_enabled && t >= config.push_start_s &&
          t < config.push_start_s + config.push_duration_s) {
        u_applied[config.push_input_index] += push_u;
      }
      LcsStepResult step = LcsStep(config.model, state, u_applied, {});
      if (config.noise_sigma > 0.0) {
        step.x_next += rng.GaussianVector(config.model.num_states(),
                                          config.noise_sigma);
      }
      PlantRow row;
      row.time = t;
      row.x = state;
      row.lambda = step.lambda;
      row.u = u_applied;
      row.stage_cost = state.dot(spec.Q[0] * state) +
                       u_applied.dot(spec.R[0] * u_applied);
      run.rows.push_back(std::move(row));
      state = step.x_next;
    }
    final_state = state;
    return state;
  };

  RecedingHorizonLog log =
      C3RecedingHorizon(plant, spec, config.c3, control_steps);
  run.record.solver_ok = log.completed;
  run.record.failure = log.failure;
  run.steps = std::move(log.steps);
  run.control_states = log.trajectory.states;

  // Attribute solver timings to the first plant row of each control step.
  std::vector<double> qp_ms;
  std::vector<double> proj_ms_per_call;
  for (size_t t = 0; t < run.steps.size(); ++t) {
    const size_t row = t * stride;
    const double qp = run.steps[t].qp_seconds * 1e3;
    const double proj = run.steps[t].proj_seconds * 1e3;
    if (row < run.rows.size()) {
      run.rows[row].qp_ms = qp;
      run.rows[row].proj_ms = proj;
    }
    qp_ms.push_back(qp);
    for (const C3IterationStats& it : run.steps[t].iterations) {
      const int N = spec.horizon;
      proj_ms_per_call.push_back(it.proj_seconds * 1e3 / std::max(1, N));
    }
  }
  run.record.qp_ms_mean = Stats(qp_ms).mean;
  MeanStd proj = Stats(proj_ms_per_call);
  run.record.proj_ms_mean = proj.mean;
  run.record.proj_ms_std = proj.std;

  double accumulated = 0.0;
  for (const PlantRow& row : run.rows) accumulated += row.stage_cost;
  run.record.accumulated_cost = accumulated;
  run.record.steps = static_cast<int>(run.rows.size());
  run.record.final_state_inf_norm = final_state.lpNorm<Eigen::Infinity>();
  run.record.stabilized =
      run.record.solver_ok &&
      EvaluateSuccess(config, run.rows, plant_step * dt, final_state,
                      &run.record.success_time_s);
  return run;
}

void WriteTrialCsv(const ExperimentConfig& config, const TrialRun& run,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int n_x = config.model.num_states();
  const int m = config.model.num_contacts();
  const int n_u = config.model.num_inputs();
  out << "t";
  for (int i = 0; i < n_x; ++i) out << ",x" << i;
  for (int i = 0; i < m; ++i) out << ",lam" << i;
  for (int i = 0; i < n_u; ++i) out << ",u" << i;
  out << ",stage_cost,qp_ms,proj_ms\n";
  for (const PlantRow& row : run.rows) {
    out << FormatDouble(row.time);
    for (int i = 0; i < n_x; ++i) out << "," << FormatDouble(row.x[i]);
    for (int i = 0; i < m; ++i) out << "," << FormatDouble(row.lambda[i]);
    for (int i = 0; i < n_u; ++i) out << "," << FormatDouble(row.u[i]);
    out << "," << FormatDouble(row.stage_cost) << ","
        << FormatDouble(row.qp_ms) << "," << FormatDouble(row.proj_ms) << "\n";
  }
}

void WriteSummaryCsv(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "trial,seed,solver_ok,stabilized,success_time_s,final_state_inf_norm,"
         "accumulated_cost,steps,qp_ms_mean,proj_ms_mean,proj_ms_std,failure\n";
  for (const TrialRecord& r : table.trials) {
    out << r.trial << "," << r.seed << "," << (r.solver_ok ? 1 : 0) << ","
        << (r.stabilized ? 1 : 0) << "," << FormatDouble(r.success_time_s)
        << "," << FormatDouble(r.final_state_inf_norm) << ","
        << FormatDouble(r.accumulated_cost) << "," << r.steps << ","
        << FormatDouble(r.qp_ms_mean) << "," << FormatDouble(r.proj_ms_mean)
        << "," << FormatDouble(r.proj_ms_std) << "," << r.failure << "\n";
  }
}

}  // namespace

ResultsTable RunExperiment(const ExperimentConfig& config,
                           const std::string& out_dir) {
  ResultsTable table;
  std::vector<TrialRun> runs(config.trials);

  if (config.parallel_trials && config.trials > 1) {
    std::vector<std::future<TrialRun>> futures;
    futures.reserve(config.trials);
    for (int i = 0; i < config.trials; ++i) {
      futures.push_back(std::async(std::launch::async,
                                   [&config, i] { return RunTrial(config, i); }));
    }
    for (int i = 0; i < config.trials; ++i) runs[i] = futures[i].get();
  } else {
    for (int i = 0; i < config.trials; ++i) runs[i] = RunTrial(config, i);
  }

  std::vector<double> proj_all;
  for (int i = 0; i < config.trials; ++i) {
    table.trials.push_back(runs[i].record);
    if (runs[i].record.stabilized) ++table.num_success;
    for (const C3StepResult& step : runs[i].steps) {
      for (const C3IterationStats& it : step.iterations) {
        proj_all.push_back(it.proj_seconds * 1e3 /
                           std::max(1, config.horizon));
      }
    }
  }
  MeanStd proj = Stats(proj_all);
  table.proj_ms_mean = proj.mean;
  table.proj_ms_std = proj.std;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (int i = 0; i < config.trials; ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "trial_%03d.csv", i);
      WriteTrialCsv(config, runs[i], out_dir + "/" + name);
    }
    WriteSummaryCsv(table, out_dir + "/summary.csv");
  }
  return table;
}

CostToGoSeries CompareCostToGo(const ExperimentConfig& config,
                               const MiqpOptions& miqp_options,
                               const std::string& out_csv) {
  if (config.control_stride() != 1) {
    throw std::invalid_argument(
        "CompareCostToGo: control rate must match the model step");
  }
  CostToGoSeries series;
  ExperimentConfig single = config;
  single.trials = 1;

  Rng rng = Rng::ForTrial(single.seed, 0);
  McpProblemSpec spec = single.BuildSpec();
  spec.x0 = SampleInitialState(single, &rng);
  const double push_u =
      single.push_enabled ? rng.Uniform(single.push_low, single.push_high) : 0.0;
  const int steps = single.total_plant_steps();
  const double dt = single.model_dt;

  // Closed-loop rollout, logging states, applied inputs and the C3 plans.
  std::vector<VectorXd> states;
  std::vector<VectorXd> inputs;
  std::vector<C3StepResult> plans;
  {
    int plant_step = 0;
    PlantStepFn plant = [&](const VectorXd& x, const VectorXd& u) {
      const double t = plant_step * dt;
      VectorXd u_applied = u;
      if (single.push_enabled && t >= single.push_start_s &&
          t < single.push_start_s + single.push_duration_s) {
        u_applied[single.push_input_index] += push_u;
      }
      LcsStepResult step = LcsStep(single.model, x, u_applied, {});
      if (single.noise_sigma > 0.0) {
        step.x_next +=
            rng.GaussianVector(single.model.num_states(), single.noise_sigma);
      }
      ++plant_step;
      inputs.push_back(u_applied);
      return step.x_next;
    };
    RecedingHorizonLog log = C3RecedingHorizon(plant, spec, single.c3, steps);
    series.completed = log.completed;
    series.failure = log.failure;
    states = log.trajectory.states;
    plans = std::move(log.steps);
  }

  const int N = spec.horizon;
  for (int t = 0; t + N < static_cast<int>(states.size()); ++t) {
    CostToGoSample sample;
    sample.step = t;
    sample.time_s = t * dt;
    McpProblemSpec spec_t = spec;
    spec_t.x0 = states[t];

    sample.c3_cost = CostToGo(spec_t, plans[t].u);
    sample.c3_comp_residual =
        plans[t].iterations.empty()
            ? 0.0
            : plans[t].iterations.back().comp_residual;

    MiqpResult baseline = SolveFullMiqp(spec_t, miqp_options);
    sample.miqp_ok = baseline.found && baseline.optimal;
    sample.miqp_cost = baseline.found ? CostToGo(spec_t, baseline.u) : 0.0;

    std::vector<VectorXd> future_states(states.begin() + t,
                                        states.begin() + t + N + 1);
    std::vector<VectorXd> future_inputs(inputs.begin() + t,
                                        inputs.begin() + t + N);
    sample.realized_cost = TrajectoryCost(spec_t, future_states, future_inputs);
    series.samples.push_back(sample);
  }

  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error("cannot write " + out_csv);
    out << "step,t,cost_c3,cost_miqp,cost_realized,c3_comp_residual,miqp_ok\n";
    for (const CostToGoSample& s : series.samples) {
      out << s.step << "," << FormatDouble(s.time_s) << ","
          << FormatDouble(s.c3_cost) << "," << FormatDouble(s.miqp_cost) << ","
          << FormatDouble(s.realized_cost) << ","
          << FormatDouble(s.c3_comp_residual) << "," << (s.miqp_ok ? 1 : 0)
          << "\n";
    }
  }
  return series;
}

ProjectionBench BenchProjections(const ExperimentConfig& config, int calls,
                                 const std::string& out_csv) {
  using Clock = std::chrono::steady_clock;
  ProjectionBench bench;

  // Harvest targets z_k + w_k from a seeded closed-loop run.
  ExperimentConfig harvest = config;
  harvest.c3.record_iterates = true;
  Rng rng = Rng::ForTrial(harvest.seed, 0);
  McpProblemSpec spec = harvest.BuildSpec();
  spec.x0 = SampleInitialState(harvest, &rng);
  const int N = spec.horizon;
  const int nz = spec.layout().block_size();

  std::vector<VectorXd> targets;
  targets.reserve(calls);
  {
    PlantStepFn plant = [&](const VectorXd& x, const VectorXd& u) {
      return LcsStep(harvest.model, x, u, {}).x_next;
    };
    const int max_steps =
        (calls + harvest.c3.theta * N - 1) / (harvest.c3.theta * N) + 1;
    RecedingHorizonLog log = C3RecedingHorizon(plant, spec, harvest.c3, max_steps);
    for (const C3StepResult& step : log.steps) {
      for (size_t i = 0; i < step.history.size(); ++i) {
        for (int k = 0; k < N; ++k) {
          if (static_cast<int>(targets.size()) >= calls) break;
          VectorXd w_prev = (i == 0) ? VectorXd::Zero(nz)
                                     : step.history[i - 1].w[k];
          targets.push_back(step.history[i].z[k] + w_prev);
        }
      }
    }
  }
  bench.calls = static_cast<int>(targets.size());

  const ComplementaritySet set = ComplementaritySet::FromModel(config.model);
  const MatrixXd U = config.c3.U.size() > 0
                         ? config.c3.U
                         : BlockDiagonalWeight(set.n_x(), set.n_lambda(),
                                               set.n_u());

  std::vector<double> lcp_s, admm_s, miqp_s;
  lcp_s.reserve(targets.size());
  admm_s.reserve(targets.size());
  miqp_s.reserve(targets.size());
  for (const VectorXd& point : targets) {
    ProjectionTarget target{point, U};
    auto t0 = Clock::now();
    ProjectLcp(target, set, config.c3.lcp);
    auto t1 = Clock::now();
    ProjectNestedAdmm(target, set, config.c3.admm);
    auto t2 = Clock::now();
    ProjectMiqp(target, set, config.c3.miqp);
    auto t3 = Clock::now();
    lcp_s.push_back(std::chrono::duration<double>(t1 - t0).count());
    admm_s.push_back(std::chrono::duration<double>(t2 - t1).count());
    miqp_s.push_back(std::chrono::duration<double>(t3 - t2).count());
  }
  MeanStd s;
  s = Stats(lcp_s);
  bench.lcp_mean_s = s.mean;
  bench.lcp_std_s = s.std;
  s = Stats(admm_s);
  bench.admm_mean_s = s.mean;
  bench.admm_std_s = s.std;
  s = Stats(miqp_s);
  bench.miqp_mean_s = s.mean;
  bench.miqp_std_s = s.std;

  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error("cannot write " + out_csv);
    out << "method,calls,mean_s,std_s\n";
    out << "lcp," << bench.calls << "," << FormatDouble(bench.lcp_mean_s) << ","
        << FormatDouble(bench.lcp_std_s) << "\n";
    out << "admm," << bench.calls << "," << FormatDouble(bench.admm_mean_s)
        << "," << FormatDouble(bench.admm_std_s) << "\n";
    out << "miqp," << bench.calls << "," << FormatDouble(bench.miqp_mean_s)
        << "," << FormatDouble(bench.miqp_std_s) << "\n";
  }
  return bench;
}

}  // namespace c3
