// Command-line front end for the C3 library: open-loop simulation,
// closed-loop control runs, the full mixed-integer baseline, projection
// benchmarking and cost-to-go comparison. Exit codes: 0 success, 2 bad
// usage/config, 3 solver failure, 4 I/O failure. Failures print a
// machine-readable JSON line to stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "common/failure.h"
#include "common/rng.h"
#include "harness/experiment.h"
#include "lcs/lcs_io.h"

namespace {

using c3::ExperimentConfig;

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::string projection;
  int64_t seed = -1;
  int trials = -1;
};

void AddCommonFlags(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "experiment config JSON file");
  cmd->add_option("--preset", args->preset,
                  "built-in preset (cartpole-sim, cartpole-hw, "
                  "cartpole-hw-push, finger-gaiting)");
  cmd->add_option("--out", args->out_dir, "output directory");
  cmd->add_option("--seed", args->seed, "master seed override");
  cmd->add_option("--trials", args->trials, "trial count override");
  cmd->add_option("--projection", args->projection,
                  "projection method override (miqp, lcp, admm)")
      ->check(CLI::IsMember({"miqp", "lcp", "admm"}));
}

ExperimentConfig ResolveConfig(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    cfg = c3::LoadExperimentConfig(args.config_path);
  } else if (!args.preset.empty()) {
    cfg = c3::PresetConfig(args.preset);
  } else {
    throw std::invalid_argument("pass --config <file> or --preset <name>");
  }
  if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
  if (args.trials > 0) cfg.trials = args.trials;
  if (!args.projection.empty()) {
    if (args.projection == "miqp") {
      cfg.c3.projection = c3::ProjectionMethod::kMiqp;
    } else if (args.projection == "lcp") {
      cfg.c3.projection = c3::ProjectionMethod::kLcp;
    } else {
      cfg.c3.projection = c3::ProjectionMethod::kNestedAdmm;
    }
  }
  return cfg;
}

int RunSimulate(const CommonArgs& args) {
  ExperimentConfig cfg = ResolveConfig(args);
  const int steps = cfg.total_plant_steps();
  c3::Rng rng = c3::Rng::ForTrial(cfg.seed, 0);
  Eigen::VectorXd x0 = cfg.x0_lower.size() > 0
                           ? rng.UniformVector(cfg.x0_lower, cfg.x0_upper)
                           : cfg.x0;

  if (cfg.model.num_contacts() > 0 && cfg.model.num_contacts() <= 12 &&
      !c3::IsPMatrix(cfg.model.F)) {
    std::cerr << "note: F is not a P-matrix; the LCP may admit multiple "
                 "solutions (trajectory may be non-unique)\n";
  }

  std::vector<Eigen::VectorXd> inputs(
      steps, Eigen::VectorXd::Zero(cfg.model.num_inputs()));
  c3::NoiseGenerator noise = nullptr;
  if (cfg.noise_sigma > 0.0) {
    noise = [&rng, &cfg](int) {
      return rng.GaussianVector(cfg.model.num_states(), cfg.noise_sigma);
    };
  }
  c3::Trajectory traj = c3::Simulate(cfg.model, x0, inputs, noise);

  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    std::ofstream out(args.out_dir + "/rollout.csv");
    if (!out) throw std::runtime_error("cannot write rollout.csv");
    out << "t";
    for (int i = 0; i < cfg.model.num_states(); ++i) out << ",x" << i;
    for (int i = 0; i < cfg.model.num_contacts(); ++i) out << ",lam" << i;
    out << "\n";
    for (int k = 0; k < traj.length(); ++k) {
      out << c3::FormatDouble(k * cfg.model_dt);
      for (int i = 0; i < cfg.model.num_states(); ++i) {
        out << "," << c3::FormatDouble(traj.states[k][i]);
      }
      for (int i = 0; i < cfg.model.num_contacts(); ++i) {
        out << "," << c3::FormatDouble(traj.forces[k][i]);
      }
      out << "\n";
    }
  }
  std::cout << "simulated " << traj.length() << " steps; final state ["
            << traj.states.back().transpose() << "]\n";
  return 0;
}

int RunControl(const CommonArgs& args) {
  ExperimentConfig cfg = ResolveConfig(args);
  c3::ResultsTable table = c3::RunExperiment(cfg, args.out_dir);
  std::cout << "trials: " << table.trials.size()
            << "  stabilized: " << table.num_success << "\n";
  for (const c3::TrialRecord& r : table.trials) {
    std::cout << "  trial " << r.trial << ": "
              << (r.stabilized ? "stabilized" : "not stabilized")
              << " (final |x|_inf = " << r.final_state_inf_norm << ")";
    if (!r.solver_ok) std::cout << " [solver failure: " << r.failure << "]";
    std::cout << "\n";
  }
  return table.num_success == static_cast<int>(table.trials.size()) ? 0 : 0;
}

int RunBaseline(const CommonArgs& args) {
  ExperimentConfig cfg = ResolveConfig(args);
  c3::McpProblemSpec spec = cfg.BuildSpec();
  c3::Rng rng = c3::Rng::ForTrial(cfg.seed, 0);
  if (cfg.x0_lower.size() > 0) {
    spec.x0 = rng.UniformVector(cfg.x0_lower, cfg.x0_upper);
  }
  c3::MiqpOptions options;
  options.big_m = cfg.c3.miqp.big_m;
  c3::MiqpResult result = c3::SolveFullMiqp(spec, options);
  if (!result.found) {
    throw c3::SolveFailure("miqp_infeasible", "full MIQP found no solution");
  }
  std::cout << "objective: " << result.objective << "  nodes: " << result.nodes
            << (result.optimal ? "" : "  (budget exhausted, incumbent only)")
            << "\n";
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    std::ofstream out(args.out_dir + "/baseline.csv");
    out << "k";
    for (int i = 0; i < cfg.model.num_states(); ++i) out << ",x" << i;
    for (int i = 0; i < cfg.model.num_contacts(); ++i) out << ",lam" << i;
    for (int i = 0; i < cfg.model.num_inputs(); ++i) out << ",u" << i;
    out << "\n";
    for (int k = 0; k < spec.horizon; ++k) {
      out << k;
      for (int i = 0; i < cfg.model.num_states(); ++i) {
        out << "," << c3::FormatDouble(result.x[k][i]);
      }
      for (int i = 0; i < cfg.model.num_contacts(); ++i) {
        out << "," << c3::FormatDouble(result.lambda[k][i]);
      }
      for (int i = 0; i < cfg.model.num_inputs(); ++i) {
        out << "," << c3::FormatDouble(result.u[k][i]);
      }
      out << "\n";
    }
  }
  return 0;
}

int RunBenchProj(const CommonArgs& args, int calls) {
  ExperimentConfig cfg = ResolveConfig(args);
  std::string csv;
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    csv = args.out_dir + "/bench_proj.csv";
  }
  c3::ProjectionBench bench = c3::BenchProjections(cfg, calls, csv);
  std::cout << "projection timings over " << bench.calls << " calls:\n"
            << "  lcp  : " << bench.lcp_mean_s << " +- " << bench.lcp_std_s
            << " s\n"
            << "  admm : " << bench.admm_mean_s << " +- " << bench.admm_std_s
            << " s\n"
            << "  miqp : " << bench.miqp_mean_s << " +- " << bench.miqp_std_s
            << " s\n";
  return 0;
}

int RunCompare(const CommonArgs& args) {
  ExperimentConfig cfg = ResolveConfig(args);
  std::string csv;
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    csv = args.out_dir + "/cost_to_go.csv";
  }
  c3::CostToGoSeries series = c3::CompareCostToGo(cfg, {}, csv);
  int below = 0;
  for (const c3::CostToGoSample& s : series.samples) {
    if (s.miqp_ok && s.miqp_cost <= s.c3_cost * (1.0 + 1e-6) + 1e-9) ++below;
  }
  std::cout << "samples: " << series.samples.size()
            << "  baseline <= C3 at " << below << " samples\n";
  if (!series.completed) {
    std::cerr << "run stopped early: " << series.failure << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus complementarity control for multi-contact systems"};
  app.require_subcommand(1);

  CommonArgs args;
  int bench_calls = 1000;

  CLI::App* simulate = app.add_subcommand("simulate", "open-loop LCS rollout");
  AddCommonFlags(simulate, &args);
  CLI::App* control = app.add_subcommand("control", "closed-loop C3 run");
  AddCommonFlags(control, &args);
  CLI::App* baseline = app.add_subcommand("baseline", "full MIQP solve");
  AddCommonFlags(baseline, &args);
  CLI::App* bench = app.add_subcommand("bench-proj", "projection benchmark");
  AddCommonFlags(bench, &args);
  bench->add_option("--calls", bench_calls, "number of projection calls");
  CLI::App* compare = app.add_subcommand("compare", "cost-to-go comparison");
  AddCommonFlags(compare, &args);

  CLI11_PARSE(app, argc, argv);

  auto fail = [](const std::string& category, const std::string& message,
                 int code) {
    nlohmann::json err{{"category", category}, {"message", message}};
    std::cerr << err.dump() << "\n";
    return code;
  };

  try {
    if (simulate->parsed()) return RunSimulate(args);
    if (control->parsed()) return RunControl(args);
    if (baseline->parsed()) return RunBaseline(args);
    if (bench->parsed()) return RunBenchProj(args, bench_calls);
    if (compare->parsed()) return RunCompare(args);
  } catch (const c3::SolveFailure& e) {
    return fail(e.category(), e.what(), 3);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), 2);
  } catch (const std::runtime_error& e) {
    return fail("io", e.what(), 4);
  }
  return 2;
}
