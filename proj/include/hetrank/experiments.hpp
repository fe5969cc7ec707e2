#pragma once

// Canned experiments shared by the CLI and the acceptance suite: estimation
// error trajectories of the fixed-step solver, and lambda0 sweeps on a fixed
// dataset.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hetrank/csv_io.hpp"
#include "hetrank/estimators.hpp"
#include "hetrank/metrics.hpp"
#include "hetrank/simulator.hpp"

namespace hetrank {

struct TrajectorySpec {
  NoiseKind noise = NoiseKind::Gumbel;
  std::size_t n = 20;
  std::size_t m = 9;
  double gamma_a = 2.5;
  double gamma_b = 1.0;
  Setting setting = Setting::Benign;
  std::vector<double> alphas = {0.2, 0.8};
  int seeds = 10;
  std::uint64_t base_seed = 0;
  int iters = 300;
  double step = 1.0;  // eta1 = eta2, line search off
  // > 0: start at the truth plus uniform(-r, r) perturbations instead of at
  // s = 1, gamma = 1. Local convergence is only expected near the truth, and
  // the loss is flat along (c s, gamma / c), so a cold start drifts in scale.
  double warm_start = 0.0;
};

struct TrajectoryRun {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::vector<TrajectoryPoint> points;
};

/// log(errS^2 + errGamma^2) of one trajectory point.
inline double log_squared_error(const TrajectoryPoint& pt, ErrorMode mode) {
  const double es = mode == ErrorMode::Raw ? pt.err_scores.value_or(NAN) : pt.err_scores_aligned.value_or(NAN);
  const double eg = mode == ErrorMode::Raw ? pt.err_params.value_or(NAN) : pt.err_params_aligned.value_or(NAN);
  return std::log(es * es + eg * eg);
}

inline std::vector<TrajectoryRun> run_trajectories(const TrajectorySpec& spec) {
  if (spec.seeds < 1) throw InvalidArgument("seeds must be >= 1");
  std::vector<TrajectoryRun> runs;
  for (double alpha : spec.alphas) {
    for (int k = 0; k < spec.seeds; ++k) {
      SimConfig sim;
      sim.n = spec.n;
      sim.m = spec.m;
      sim.gamma_a = spec.gamma_a;
      sim.gamma_b = spec.gamma_b;
      sim.setting = spec.setting;
      sim.alpha = alpha;
      sim.noise = spec.noise;
      sim.seed = spec.base_seed + static_cast<std::uint64_t>(k);
      const SimOutput generated = generate(sim);
      SolverConfig cfg;
      cfg.step_scores = spec.step;
      cfg.step_params = spec.step;
      cfg.max_iters = spec.iters;
      cfg.grad_tol = 0.0;
      cfg.line_search = false;
      AlternatingOptions opts;
      if (spec.warm_start > 0.0) {
        auto jitter = [&](std::uint64_t user, std::uint64_t index) {
          const double u = rng::to_unit(rng::draw(sim.seed, rng::Purpose::Variate, user, index, 7));
          return spec.warm_start * (2.0 * u - 1.0);
        };
        opts.initial_scores = *generated.truth.scores;
        for (std::size_t i = 0; i < spec.n; ++i) opts.initial_scores[i] += jitter(spec.m, i);
        opts.initial_params = generated.accuracies;
        for (std::size_t u = 0; u < spec.m; ++u) opts.initial_params[u] += jitter(u, spec.n);
      }
      const FitResult fit_result = fit(generated.data, spec.noise, cfg, &generated.truth, std::move(opts));
      runs.push_back({alpha, sim.seed, fit_result.trajectory});
    }
  }
  return runs;
}

/// Mean of log squared error over the last `tail` points of every run at
/// `alpha`.
inline double trajectory_plateau(const std::vector<TrajectoryRun>& runs, double alpha, std::size_t tail,
                                 ErrorMode mode) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const TrajectoryRun& run : runs) {
    if (run.alpha != alpha) continue;
    const std::size_t from = run.points.size() > tail ? run.points.size() - tail : 0;
    for (std::size_t t = from; t < run.points.size(); ++t) {
      sum += log_squared_error(run.points[t], mode);
      ++count;
    }
  }
  if (count == 0) throw InvalidArgument("no trajectory points for the requested alpha");
  return sum / static_cast<double>(count);
}

/// alpha, seed, then the trajectory columns plus both log squared errors.
inline void write_trajectory_runs(const std::vector<TrajectoryRun>& runs, std::ostream& out) {
  out << "alpha\tseed\titer\tloss\terrS\terrGamma\terrSAligned\terrGammaAligned\tlogSqErr\tlogSqErrAligned\n";
  char buf[256];
  for (const TrajectoryRun& run : runs) {
    for (const TrajectoryPoint& pt : run.points) {
      std::snprintf(buf, sizeof buf, "%g\t%llu\t%d\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\n", run.alpha,
                    static_cast<unsigned long long>(run.seed), pt.iter, pt.loss, pt.err_scores.value_or(NAN),
                    pt.err_params.value_or(NAN), pt.err_scores_aligned.value_or(NAN),
                    pt.err_params_aligned.value_or(NAN), log_squared_error(pt, ErrorMode::Raw),
                    log_squared_error(pt, ErrorMode::ScaleAligned));
      out << buf;
    }
  }
}

struct SweepEntry {
  Method method = Method::HBTL;
  double lambda0 = 0.0;
  std::optional<double> tau;  // empty when the fit failed
  std::string error;
};

/// Fits every method at every lambda0 on `data` (real records only; the
/// virtual node is added for lambda0 > 0) and scores each ranking against
/// `truth`. Rows are lambda0-major.
inline std::vector<SweepEntry> regularization_sweep(const ComparisonDataset& data, const GroundTruth& truth,
                                                    const std::vector<Method>& methods,
                                                    const std::vector<double>& lambdas,
                                                    const SolverConfig& base) {
  if (data.has_virtual_node()) throw InvalidArgument("sweep expects a dataset without a virtual node");
  if (!truth.scores) throw InvalidArgument("sweep needs ground-truth scores");
  std::optional<ComparisonDataset> augmented;
  std::vector<SweepEntry> out;
  for (double lambda0 : lambdas) {
    for (Method method : methods) {
      SweepEntry entry{method, lambda0, std::nullopt, {}};
      try {
        if (lambda0 > 0.0 && !augmented) augmented = add_virtual_node(data);
        EstimatorSpec spec;
        spec.method = method;
        spec.solver = base;
        spec.solver.lambda0 = lambda0;
        spec.solver.record_trajectory = false;
        const ComparisonDataset& fitted_on = lambda0 > 0.0 ? *augmented : data;
        const FitResult r = run_estimator(spec, fitted_on);
        entry.tau = kendall_tau(std::span<const double>(r.state.scores.data(), data.n_real_items()), *truth.scores)
                        .tau;
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
      out.push_back(std::move(entry));
    }
  }
  return out;
}

/// lambda0 rows, one tau column per method (4 decimals, NA on failure).
inline void write_sweep_table(const std::vector<SweepEntry>& sweep, const std::vector<Method>& methods,
                              std::ostream& out) {
  out << "lambda0";
  for (Method m : methods) out << '\t' << to_string(m);
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r + methods.size() <= sweep.size(); r += methods.size()) {
    std::snprintf(buf, sizeof buf, "%g", sweep[r].lambda0);
    out << buf;
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const SweepEntry& e = sweep[r + k];
      if (e.tau) {
        std::snprintf(buf, sizeof buf, "%.4f", *e.tau);
        out << '\t' << buf;
      } else {
        out << "\tNA";
      }
    }
    out << '\n';
  }
}

/// Best tau per method across the sweep and the lambda0 that reached it.
inline void write_sweep_best(const std::vector<SweepEntry>& sweep, const std::vector<Method>& methods,
                             std::ostream& out) {
  out << "method\ttau\tlambda0\n";
  char buf[96];
  for (Method m : methods) {
    const SweepEntry* best = nullptr;
    for (const SweepEntry& e : sweep) {
      if (e.method == m && e.tau && (!best || *e.tau > *best->tau)) best = &e;
    }
    if (best) {
      std::snprintf(buf, sizeof buf, "\t%.4f\t%g\n", *best->tau, best->lambda0);
      out << to_string(m) << buf;
    } else {
      out << to_string(m) << "\tNA\tNA\n";
    }
  }
}

}  // namespace hetrank
