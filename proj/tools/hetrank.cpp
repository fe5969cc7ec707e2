// hetrank: fit rankings from comparison logs, simulate heterogeneous users,
// and regenerate the synthetic benchmark tables.
//
//   hetrank fit --method hbtl --data log.csv [--truth truth.csv] [--lambda0 1]
//   hetrank simulate --gamma-a 10 --gamma-b 0.25 --alpha 0.8 --seed 1
//   hetrank grid --noise gumbel --setting both --trials 100 --jobs 4
//   hetrank tables regularization --data log.csv --truth truth.csv
//   hetrank tables trajectory --alphas 0.2,0.8 --seeds 10
//
// Every command accepts --config FILE (key=value lines named after the flags)
// and writes manifest.ini next to its outputs; feeding that manifest back via
// --config reproduces the run. Exit codes: 0 ok, 2 bad arguments, 3 bad input
// data, 4 solver divergence.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "hetrank/hetrank.hpp"

namespace fs = std::filesystem;
using namespace hetrank;

namespace {

constexpr int kExitArgs = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

// Input problems found by the CLI itself (as opposed to the library).
struct DataProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFlags {
  SolverConfig cfg;
  bool no_line_search = false;

  void add_to(CLI::App* app) {
    app->add_option("--step-s", cfg.step_scores, "score step size eta1")->capture_default_str();
    app->add_option("--step-gamma", cfg.step_params, "accuracy step size eta2")->capture_default_str();
    app->add_option("--iters", cfg.max_iters, "iteration budget T")->capture_default_str();
    app->add_option("--tol", cfg.grad_tol, "gradient-norm stopping tolerance")->capture_default_str();
    app->add_flag("--no-line-search", no_line_search, "use fixed steps");
  }

  SolverConfig resolved() const {
    SolverConfig out = cfg;
    out.line_search = !no_line_search;
    return out;
  }
};

const std::map<std::string, Method> kMethodNames = {
    {"btl", Method::BTL},         {"tcv", Method::TCV},   {"crowdbt", Method::CrowdBT},
    {"crowdtcv", Method::CrowdTCV}, {"hbtl", Method::HBTL}, {"htcv", Method::HTCV}};
const std::map<std::string, NoiseKind> kNoiseNames = {{"gumbel", NoiseKind::Gumbel}, {"normal", NoiseKind::Normal}};
const std::map<std::string, Setting> kSettingNames = {{"benign", Setting::Benign},
                                                       {"adversarial", Setting::Adversarial}};

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const std::string& name : names) {
    auto m = parse_method(name);
    if (!m) throw InvalidArgument("unknown method '" + name + "'");
    out.push_back(*m);
  }
  return out;
}

// --seed on the command line wins; otherwise HETRANK_SEED overrides the config
// file and the default. The resolved value is written back so the manifest
// records what actually ran.
void resolve_seed(CLI::Option* opt, std::uint64_t& seed, int argc, char** argv) {
  for (int k = 1; k < argc; ++k) {
    const std::string_view arg = argv[k];
    if (arg == "--seed" || arg.rfind("--seed=", 0) == 0) return;
  }
  const char* env = std::getenv("HETRANK_SEED");
  if (!env || !*env) return;
  const std::string text(env);
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.front() == '-') throw InvalidArgument("HETRANK_SEED is not an unsigned integer: " + text);
  seed = value;
  opt->clear();
  opt->add_result(text);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  return out;
}

void write_manifest(const CLI::App* app, const std::string& command, const std::string& dir) {
  auto out = open_out(dir, "manifest.ini");
  out << "# hetrank " << command << "\n";
  out << "# rerun: hetrank " << command << " --config " << (fs::path(dir) / "manifest.ini").string() << "\n";
  // Keys sit under a section named after the subcommand path so the root
  // --config reader routes them back to the same subcommand.
  std::string section = command;
  std::replace(section.begin(), section.end(), ' ', '.');
  out << "[" << section << "]\n";
  out << app->config_to_str(true, false);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void report_ingestion(const std::string& path, const IngestionReport& r) {
  std::cerr << "read " << path << ": " << r.rows << " rows, " << r.accepted << " accepted, " << r.duplicates
            << " duplicates, " << r.self_comparisons << " self-comparisons, " << r.rejected.size() << " rejected\n";
  for (std::size_t k = 0; k < r.rejected.size() && k < 5; ++k) {
    std::cerr << "  line " << r.rejected[k].line << ": " << r.rejected[k].reason << "\n";
  }
}

ComparisonDataset load_for_fit(const std::string& path) {
  LoadedDataset loaded = load_csv(path);
  report_ingestion(path, loaded.report);
  if (loaded.data.n_active_users() == 0) throw DataProblem("no usable comparisons in " + path);
  return std::move(loaded.data);
}

// Strips virtual records so a sweep can add its own virtual node.
ComparisonDataset real_part(const ComparisonDataset& data) {
  if (!data.has_virtual_node()) return data;
  std::vector<Comparison> records;
  for (const Comparison& c : data.records()) {
    if (!c.is_virtual) records.push_back(c);
  }
  auto drop_last = [](const std::vector<std::string>& labels) {
    return labels.empty() ? labels : std::vector<std::string>(labels.begin(), labels.end() - 1);
  };
  std::vector<std::string> items = drop_last(data.item_labels());
  std::vector<std::string> users = drop_last(data.user_labels());
  return ComparisonDataset(data.n_real_items(), data.n_real_users(), std::move(records), std::move(items),
                           std::move(users));
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string method = "hbtl";
  std::string data;
  std::string truth;
  std::string out = "out";
  double lambda0 = 0.0;
  double initial_eta = 0.9;
  SolverFlags solver;
};

int run_fit(const CLI::App* app, const FitArgs& a) {
  const Method method = *parse_method(a.method);
  ComparisonDataset data = load_for_fit(a.data);
  if (a.lambda0 > 0.0 && !data.has_virtual_node()) data = add_virtual_node(data);
  std::optional<GroundTruth> truth;
  if (!a.truth.empty()) truth = align_truth(data, load_truth_csv(a.truth));

  EstimatorSpec spec;
  spec.method = method;
  spec.solver = a.solver.resolved();
  spec.solver.lambda0 = a.lambda0;
  spec.initial_eta = a.initial_eta;
  const FitResult r = run_estimator(spec, data, truth ? &*truth : nullptr);

  ensure_dir(a.out);
  {
    auto out = open_out(a.out, "ranking.tsv");
    out << "rank\titem\tscore\n";
    for (std::size_t k = 0; k < r.ranking.size(); ++k) {
      const ItemId i = r.ranking[k];
      out << (k + 1) << '\t' << data.item_label(i) << '\t' << fmt("%.10g", r.state.scores[i]) << '\n';
    }
  }
  {
    auto out = open_out(a.out, "accuracies.tsv");
    out << "user\t" << (is_mistake_model(method) ? "eta" : "gamma") << "\tcomparisons\n";
    for (UserId u = 0; u < data.n_users(); ++u) {
      if (!data.is_real_user(u)) continue;
      out << data.user_label(u) << '\t' << fmt("%.10g", r.state.accuracies[u]) << '\t' << data.user_count(u)
          << '\n';
    }
  }
  {
    auto out = open_out(a.out, "trajectory.tsv");
    write_trajectory_tsv(r.trajectory, out);
  }
  write_manifest(app, "fit", a.out);

  std::cout << "method\t" << to_string(method) << "\n";
  std::cout << "iterations\t" << r.iterations << "\n";
  std::cout << "converged\t" << (r.converged ? "yes" : "no") << "\n";
  std::cout << "loss\t" << fmt("%.10g", r.final_loss) << "\n";
  if (r.line_search_failures > 0) std::cout << "line_search_failures\t" << r.line_search_failures << "\n";
  if (!r.inactive_users.empty()) std::cout << "inactive_users\t" << r.inactive_users.size() << "\n";
  if (truth) {
    const std::span<const double> fitted(r.state.scores.data(), data.n_real_items());
    std::cout << "tau\t" << fmt("%.4f", kendall_tau(fitted, *truth->scores).tau) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  SimConfig cfg;
  std::string noise = "gumbel";
  std::string setting = "benign";
  std::string out = "out";
};

int run_simulate(const CLI::App* app, SimulateArgs a) {
  a.cfg.noise = kNoiseNames.at(a.noise);
  a.cfg.setting = kSettingNames.at(a.setting);
  const SimOutput sim = generate(a.cfg);
  ensure_dir(a.out);
  write_csv(sim.data, (fs::path(a.out) / "comparisons.csv").string());
  std::vector<TruthEntry> truth;
  for (ItemId i = 0; i < sim.data.n_items(); ++i) truth.push_back({sim.data.item_label(i), sim.raw_scores[i]});
  write_truth_csv(truth, (fs::path(a.out) / "truth.csv").string());
  {
    auto out = open_out(a.out, "users.csv");
    out << "user,gamma\n";
    for (UserId u = 0; u < sim.data.n_users(); ++u) {
      out << sim.data.user_label(u) << ',' << fmt("%.17g", sim.accuracies[u]) << '\n';
    }
  }
  write_manifest(app, "simulate", a.out);
  std::cout << "records\t" << sim.data.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------- grid

struct GridArgs {
  std::string noise = "gumbel";
  std::string setting = "benign";
  std::vector<double> alphas = {0.8, 0.6, 0.4, 0.2};
  std::vector<double> gamma_as = {2.5, 5.0, 10.0};
  std::vector<double> gamma_bs = {0.25, 1.0, 2.5};
  std::vector<std::string> methods;
  std::size_t n = 20;
  std::size_t m = 9;
  int trials = 100;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double lambda0 = 0.0;
  std::string out = "out";
  SolverFlags solver;
};

int run_grid_command(const CLI::App* app, const GridArgs& a) {
  GridSpec spec;
  spec.noise = kNoiseNames.at(a.noise);
  spec.settings = a.setting == "both" ? std::vector<Setting>{Setting::Benign, Setting::Adversarial}
                                      : std::vector<Setting>{kSettingNames.at(a.setting)};
  spec.alphas = a.alphas;
  spec.gamma_as = a.gamma_as;
  spec.gamma_bs = a.gamma_bs;
  spec.n = a.n;
  spec.m = a.m;
  spec.trials = a.trials;
  spec.base_seed = a.seed;
  spec.jobs = a.jobs;
  std::vector<Method> methods;
  if (a.methods.empty()) {
    const auto defaults = methods_for(spec.noise);
    methods.assign(defaults.begin(), defaults.end());
  } else {
    methods = parse_methods(a.methods);
  }
  for (Method method : methods) {
    EstimatorSpec es;
    es.method = method;
    es.solver = a.solver.resolved();
    es.solver.lambda0 = a.lambda0;
    spec.methods.push_back(es);
  }
  const GridResult grid = run_grid(spec);

  ensure_dir(a.out);
  const std::string noise(to_string(spec.noise));
  for (Setting setting : spec.settings) {
    auto out = open_out(a.out, "grid_" + noise + "_" + std::string(to_string(setting)) + ".tsv");
    write_grid_table(grid, setting, spec.gamma_as, out);
  }
  {
    auto out = open_out(a.out, "grid_" + noise + "_long.tsv");
    write_grid_long(grid, out);
  }
  write_manifest(app, "grid", a.out);

  int failures = 0;
  for (const CellMethodStats& st : grid.stats) {
    failures += st.failures;
    for (const std::string& msg : st.failure_messages) {
      std::cerr << "warning: " << to_string(st.method) << " alpha=" << st.cell.alpha << " gamma_B=" << st.cell.gamma_b
                << " gamma_A=" << st.cell.gamma_a << " " << msg << "\n";
    }
  }
  std::cout << "cells\t" << grid.cells.size() << "\n";
  std::cout << "fits\t" << grid.cells.size() * methods.size() * static_cast<std::size_t>(spec.trials) << "\n";
  std::cout << "failures\t" << failures << "\n";
  return 0;
}

// ---------------------------------------------------------------- tables

struct SweepArgs {
  std::string data;
  std::string truth;
  std::vector<double> lambdas = {0.0, 1.0, 5.0, 10.0};
  std::vector<std::string> methods = {"btl", "tcv", "crowdbt", "crowdtcv", "hbtl", "htcv"};
  std::string out = "out";
  SolverFlags solver;
};

int run_sweep(const CLI::App* app, const SweepArgs& a) {
  const std::vector<Method> methods = parse_methods(a.methods);
  const ComparisonDataset data = real_part(load_for_fit(a.data));
  const GroundTruth truth = align_truth(data, load_truth_csv(a.truth));
  const auto sweep = regularization_sweep(data, truth, methods, a.lambdas, a.solver.resolved());
  ensure_dir(a.out);
  {
    auto out = open_out(a.out, "regularization.tsv");
    write_sweep_table(sweep, methods, out);
  }
  {
    auto out = open_out(a.out, "regularization_best.tsv");
    write_sweep_best(sweep, methods, out);
  }
  write_manifest(app, "tables regularization", a.out);
  write_sweep_table(sweep, methods, std::cout);
  for (const SweepEntry& e : sweep) {
    if (!e.tau) std::cerr << "warning: " << to_string(e.method) << " lambda0=" << e.lambda0 << ": " << e.error << "\n";
  }
  return 0;
}

struct TrajectoryArgs {
  TrajectorySpec spec;
  std::string noise = "gumbel";
  std::string setting = "benign";
  std::string out = "out";
};

int run_trajectory(const CLI::App* app, TrajectoryArgs a) {
  a.spec.noise = kNoiseNames.at(a.noise);
  a.spec.setting = kSettingNames.at(a.setting);
  const auto runs = run_trajectories(a.spec);
  ensure_dir(a.out);
  {
    auto out = open_out(a.out, "trajectory_runs.tsv");
    write_trajectory_runs(runs, out);
  }
  {
    auto out = open_out(a.out, "trajectory_mean.tsv");
    out << "alpha\titer\tlogSqErr\tlogSqErrAligned\n";
    for (double alpha : a.spec.alphas) {
      for (int t = 0; t <= a.spec.iters; ++t) {
        double raw = 0.0;
        double aligned = 0.0;
        int count = 0;
        for (const TrajectoryRun& run : runs) {
          if (run.alpha != alpha || static_cast<std::size_t>(t) >= run.points.size()) continue;
          raw += log_squared_error(run.points[t], ErrorMode::Raw);
          aligned += log_squared_error(run.points[t], ErrorMode::ScaleAligned);
          ++count;
        }
        if (count == 0) continue;
        out << fmt("%g", alpha) << '\t' << t << '\t' << fmt("%.10g", raw / count) << '\t'
            << fmt("%.10g", aligned / count) << '\n';
      }
    }
  }
  write_manifest(app, "tables trajectory", a.out);
  const std::size_t tail = static_cast<std::size_t>(std::max(1, a.spec.iters / 10));
  for (double alpha : a.spec.alphas) {
    std::cout << "plateau\talpha=" << fmt("%g", alpha) << '\t'
              << fmt("%.6f", trajectory_plateau(runs, alpha, tail, ErrorMode::Raw)) << "\n";
  }
  return 0;
}

template <class Body>
int guarded(Body&& body) {
  try {
    return body();
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataProblem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank aggregation with heterogeneous users"};
  app.require_subcommand(1);

  auto names = [](const auto& table) {
    std::vector<std::string> out;
    for (const auto& [name, value] : table) out.push_back(name);
    return out;
  };
  // CLI11 reads config files on the root app only; fallthrough lets --config
  // appear after the subcommand name.
  app.set_config("--config", "", "read flags from a manifest or key=value file");
  app.fallthrough();
  auto add_config = [](CLI::App* sub) { sub->configurable(); };

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one method on a comparison CSV");
  add_config(fit_cmd);
  fit_cmd->add_option("--method", fit_args.method, "btl, tcv, crowdbt, crowdtcv, hbtl, htcv")
      ->check(CLI::IsMember(names(kMethodNames), CLI::ignore_case))
      ->capture_default_str();
  fit_cmd->add_option("--data", fit_args.data, "comparison CSV (user,winner,loser[,virtual])")->required();
  fit_cmd->add_option("--truth", fit_args.truth, "ground-truth CSV/TSV with item,score columns");
  fit_cmd->add_option("--lambda0", fit_args.lambda0, "virtual-node weight")->capture_default_str();
  fit_cmd->add_option("--initial-eta", fit_args.initial_eta, "starting eta for crowd models")->capture_default_str();
  fit_cmd->add_option("--out", fit_args.out, "output directory")->capture_default_str();
  fit_args.solver.add_to(fit_cmd);

  SimulateArgs sim_args;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "write a synthetic comparison log and its truth");
  add_config(sim_cmd);
  sim_cmd->add_option("--n", sim_args.cfg.n, "items")->capture_default_str();
  sim_cmd->add_option("--m", sim_args.cfg.m, "users")->capture_default_str();
  sim_cmd->add_option("--gamma-a", sim_args.cfg.gamma_a, "accuracy of group A")->capture_default_str();
  sim_cmd->add_option("--gamma-b", sim_args.cfg.gamma_b, "accuracy of group B")->capture_default_str();
  sim_cmd->add_option("--alpha", sim_args.cfg.alpha, "observation ratio")->capture_default_str();
  sim_cmd->add_option("--setting", sim_args.setting, "benign or adversarial")
      ->check(CLI::IsMember(names(kSettingNames)))
      ->capture_default_str();
  sim_cmd->add_option("--noise", sim_args.noise, "gumbel or normal")
      ->check(CLI::IsMember(names(kNoiseNames)))
      ->capture_default_str();
  CLI::Option* sim_seed = sim_cmd->add_option("--seed", sim_args.cfg.seed, "random seed")->capture_default_str();
  sim_cmd->add_flag("--variates", sim_args.cfg.draw_variates, "sample outcomes from perturbed scores");
  sim_cmd->add_option("--out", sim_args.out, "output directory")->capture_default_str();

  GridArgs grid_args;
  CLI::App* grid_cmd = app.add_subcommand("grid", "repeated synthetic trials over the benchmark grid");
  add_config(grid_cmd);
  grid_cmd->add_option("--noise", grid_args.noise, "gumbel or normal")
      ->check(CLI::IsMember(names(kNoiseNames)))
      ->capture_default_str();
  grid_cmd->add_option("--setting", grid_args.setting, "benign, adversarial or both")
      ->check(CLI::IsMember({"benign", "adversarial", "both"}))
      ->capture_default_str();
  grid_cmd->add_option("--alphas", grid_args.alphas, "observation ratios")->delimiter(',')->capture_default_str();
  grid_cmd->add_option("--gamma-a", grid_args.gamma_as, "group A accuracies")->delimiter(',')->capture_default_str();
  grid_cmd->add_option("--gamma-b", grid_args.gamma_bs, "group B accuracies")->delimiter(',')->capture_default_str();
  grid_cmd->add_option("--methods", grid_args.methods, "methods (default: the three for the noise family)")
      ->delimiter(',');
  grid_cmd->add_option("--n", grid_args.n, "items")->capture_default_str();
  grid_cmd->add_option("--m", grid_args.m, "users")->capture_default_str();
  grid_cmd->add_option("--trials", grid_args.trials, "trials per cell")->check(CLI::PositiveNumber)->capture_default_str();
  CLI::Option* grid_seed = grid_cmd->add_option("--seed", grid_args.seed, "base seed")->capture_default_str();
  grid_cmd->add_option("--jobs", grid_args.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  grid_cmd->add_option("--lambda0", grid_args.lambda0, "virtual-node weight")->capture_default_str();
  grid_cmd->add_option("--out", grid_args.out, "output directory")->capture_default_str();
  grid_args.solver.add_to(grid_cmd);

  CLI::App* tables_cmd = app.add_subcommand("tables", "regularization sweeps and error trajectories");
  tables_cmd->require_subcommand(1);

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = tables_cmd->add_subcommand("regularization", "tau of every method at each lambda0");
  add_config(sweep_cmd);
  sweep_cmd->add_option("--data", sweep_args.data, "comparison CSV")->required();
  sweep_cmd->add_option("--truth", sweep_args.truth, "ground-truth CSV/TSV")->required();
  sweep_cmd->add_option("--lambda0", sweep_args.lambdas, "lambda0 values")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--methods", sweep_args.methods, "methods")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--out", sweep_args.out, "output directory")->capture_default_str();
  sweep_args.solver.add_to(sweep_cmd);

  TrajectoryArgs traj_args;
  traj_args.spec.iters = 2000;
  traj_args.spec.warm_start = 0.5;
  CLI::App* traj_cmd = tables_cmd->add_subcommand("trajectory", "fixed-step estimation error trajectories");
  add_config(traj_cmd);
  traj_cmd->add_option("--noise", traj_args.noise, "gumbel or normal")
      ->check(CLI::IsMember(names(kNoiseNames)))
      ->capture_default_str();
  traj_cmd->add_option("--setting", traj_args.setting, "benign or adversarial")
      ->check(CLI::IsMember(names(kSettingNames)))
      ->capture_default_str();
  traj_cmd->add_option("--alphas", traj_args.spec.alphas, "observation ratios")->delimiter(',')->capture_default_str();
  traj_cmd->add_option("--gamma-a", traj_args.spec.gamma_a, "group A accuracy")->capture_default_str();
  traj_cmd->add_option("--gamma-b", traj_args.spec.gamma_b, "group B accuracy")->capture_default_str();
  traj_cmd->add_option("--n", traj_args.spec.n, "items")->capture_default_str();
  traj_cmd->add_option("--m", traj_args.spec.m, "users")->capture_default_str();
  traj_cmd->add_option("--seeds", traj_args.spec.seeds, "runs per alpha")->check(CLI::PositiveNumber)->capture_default_str();
  CLI::Option* traj_seed = traj_cmd->add_option("--seed", traj_args.spec.base_seed, "base seed")->capture_default_str();
  traj_cmd->add_option("--iters", traj_args.spec.iters, "iterations")->check(CLI::PositiveNumber)->capture_default_str();
  traj_cmd->add_option("--step", traj_args.spec.step, "fixed step for scores and accuracies")->capture_default_str();
  traj_cmd->add_option("--warm-start", traj_args.spec.warm_start, "perturbation radius around the truth; 0 starts at 1")
      ->capture_default_str();
  traj_cmd->add_option("--out", traj_args.out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitArgs;
  }

  return guarded([&] {
    if (*fit_cmd) return run_fit(fit_cmd, fit_args);
    if (*sim_cmd) {
      resolve_seed(sim_seed, sim_args.cfg.seed, argc, argv);
      return run_simulate(sim_cmd, sim_args);
    }
    if (*grid_cmd) {
      resolve_seed(grid_seed, grid_args.seed, argc, argv);
      return run_grid_command(grid_cmd, grid_args);
    }
    if (*sweep_cmd) return run_sweep(sweep_cmd, sweep_args);
    resolve_seed(traj_seed, traj_args.spec.base_seed, argc, argv);
    return run_trajectory(traj_cmd, traj_args);
  });
}
