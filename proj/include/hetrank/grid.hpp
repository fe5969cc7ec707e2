#pragma once

// Repeated synthetic experiments over a grid of (alpha, gamma_B, gamma_A,
// setting) cells. Trial t of every cell uses seed base_seed + t. Work items
// may run on several threads; each result lands in a fixed slot and the
// reduction walks slots in order, so output does not depend on the job count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "hetrank/estimators.hpp"
#include "hetrank/metrics.hpp"
#include "hetrank/simulator.hpp"

namespace hetrank {

struct GridSpec {
  NoiseKind noise = NoiseKind::Gumbel;
  std::vector<Setting> settings = {Setting::Benign};
  std::vector<double> alphas = {0.8, 0.6, 0.4, 0.2};
  std::vector<double> gamma_bs = {0.25, 1.0, 2.5};
  std::vector<double> gamma_as = {2.5, 5.0, 10.0};
  std::vector<EstimatorSpec> methods;
  std::size_t n = 20;
  std::size_t m = 9;
  int trials = 100;
  std::uint64_t base_seed = 0;
  unsigned jobs = 1;

  void validate() const {
    if (trials < 1) throw InvalidArgument("trials must be >= 1");
    if (methods.empty()) throw InvalidArgument("grid needs at least one method");
    if (settings.empty() || alphas.empty() || gamma_bs.empty() || gamma_as.empty()) {
      throw InvalidArgument("grid axes must be non-empty");
    }
  }
};

struct GridCell {
  double alpha = 0.0;
  double gamma_b = 0.0;
  double gamma_a = 0.0;
  Setting setting = Setting::Benign;
};

struct CellMethodStats {
  GridCell cell;
  Method method = Method::HBTL;
  double mean_tau = std::nan("");
  double std_tau = 0.0;  // sample standard deviation
  int trials = 0;        // successful trials
  int failures = 0;
  bool single_trial = false;  // std is reported as 0
  std::vector<std::string> failure_messages;
};

struct GridResult {
  NoiseKind noise = NoiseKind::Gumbel;
  std::vector<GridCell> cells;
  std::vector<Method> methods;
  std::vector<CellMethodStats> stats;  // cell-major, then method

  const CellMethodStats& at(std::size_t cell, std::size_t method) const {
    return stats.at(cell * methods.size() + method);
  }
};

inline std::vector<GridCell> enumerate_cells(const GridSpec& spec) {
  std::vector<GridCell> cells;
  for (Setting setting : spec.settings)
    for (double alpha : spec.alphas)
      for (double gb : spec.gamma_bs)
        for (double ga : spec.gamma_as) cells.push_back({alpha, gb, ga, setting});
  return cells;
}

/// Per-trial taus for one cell, one entry per method (NaN on failure).
struct TrialOutcome {
  std::vector<double> tau;
  std::vector<std::string> error;
};

inline TrialOutcome run_trial(const GridSpec& spec, const GridCell& cell, int trial) {
  SimConfig sim;
  sim.n = spec.n;
  sim.m = spec.m;
  sim.gamma_a = cell.gamma_a;
  sim.gamma_b = cell.gamma_b;
  sim.setting = cell.setting;
  sim.alpha = cell.alpha;
  sim.noise = spec.noise;
  sim.seed = spec.base_seed + static_cast<std::uint64_t>(trial);
  TrialOutcome out;
  out.tau.assign(spec.methods.size(), std::nan(""));
  out.error.assign(spec.methods.size(), {});
  const SimOutput generated = generate(sim);
  std::optional<ComparisonDataset> augmented;
  for (std::size_t k = 0; k < spec.methods.size(); ++k) {
    try {
      EstimatorSpec es = spec.methods[k];
      es.solver.record_trajectory = false;
      const bool regularized = es.solver.lambda0 > 0.0;
      if (regularized && !augmented) augmented = add_virtual_node(generated.data);
      const FitResult fit = run_estimator(es, regularized ? *augmented : generated.data);
      const std::span<const double> s_hat(fit.state.scores.data(), generated.data.n_real_items());
      out.tau[k] = kendall_tau(s_hat, *generated.truth.scores).tau;
    } catch (const std::exception& e) {
      out.error[k] = e.what();
    }
  }
  return out;
}

inline GridResult run_grid(const GridSpec& spec) {
  spec.validate();
  GridResult result;
  result.noise = spec.noise;
  result.cells = enumerate_cells(spec);
  for (const EstimatorSpec& es : spec.methods) result.methods.push_back(es.method);

  const std::size_t n_cells = result.cells.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  std::vector<TrialOutcome> slots(n_cells * n_trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t w = next++; w < slots.size(); w = next++) {
      const std::size_t cell = w / n_trials;
      const int trial = static_cast<int>(w % n_trials);
      try {
        slots[w] = run_trial(spec, result.cells[cell], trial);
      } catch (const std::exception& e) {
        slots[w].tau.assign(spec.methods.size(), std::nan(""));
        slots[w].error.assign(spec.methods.size(), std::string("simulation failed: ") + e.what());
      }
    }
  };
  const unsigned jobs = std::max(1u, spec.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t c = 0; c < n_cells; ++c) {
    for (std::size_t k = 0; k < spec.methods.size(); ++k) {
      CellMethodStats st;
      st.cell = result.cells[c];
      st.method = spec.methods[k].method;
      double sum = 0.0;
      std::vector<double> taus;
      for (std::size_t t = 0; t < n_trials; ++t) {
        const TrialOutcome& o = slots[c * n_trials + t];
        if (std::isnan(o.tau[k])) {
          ++st.failures;
          st.failure_messages.push_back("trial " + std::to_string(t) + ": " + o.error[k]);
        } else {
          taus.push_back(o.tau[k]);
          sum += o.tau[k];
        }
      }
      st.trials = static_cast<int>(taus.size());
      if (!taus.empty()) {
        st.mean_tau = sum / static_cast<double>(taus.size());
        if (taus.size() >= 2) {
          double ss = 0.0;
          for (double v : taus) ss += (v - st.mean_tau) * (v - st.mean_tau);
          st.std_tau = std::sqrt(ss / static_cast<double>(taus.size() - 1));
        } else {
          st.single_trial = true;
        }
      }
      result.stats.push_back(std::move(st));
    }
  }
  return result;
}

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string format_cell(const CellMethodStats& st) {
  if (st.trials == 0) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f\xC2\xB1%.3f", st.mean_tau, st.std_tau);
  return buf;
}

}  // namespace detail

/// Table layout: one row per (alpha, gamma_B, method), one column per gamma_A,
/// cells "mean±std" with three decimals. Writes only cells of `setting`.
inline void write_grid_table(const GridResult& grid, Setting setting, const std::vector<double>& gamma_as,
                             std::ostream& out) {
  out << "alpha\tgamma_B\tmethod";
  for (double ga : gamma_as) out << "\tgamma_A=" << detail::format_number(ga);
  out << '\n';
  // Rows follow cell order, which is alpha-major then gamma_B then gamma_A.
  for (std::size_t c = 0; c < grid.cells.size(); c += gamma_as.size()) {
    if (grid.cells[c].setting != setting) continue;
    for (std::size_t k = 0; k < grid.methods.size(); ++k) {
      out << detail::format_number(grid.cells[c].alpha) << '\t' << detail::format_number(grid.cells[c].gamma_b)
          << '\t' << to_string(grid.methods[k]);
      for (std::size_t a = 0; a < gamma_as.size(); ++a) out << '\t' << detail::format_cell(grid.at(c + a, k));
      out << '\n';
    }
  }
}

/// Long format: one row per cell and method.
inline void write_grid_long(const GridResult& grid, std::ostream& out) {
  out << "noise\tsetting\talpha\tgamma_B\tgamma_A\tmethod\tmean_tau\tstd_tau\ttrials\tfailures\n";
  char buf[64];
  for (const CellMethodStats& st : grid.stats) {
    out << to_string(grid.noise) << '\t' << to_string(st.cell.setting) << '\t'
        << detail::format_number(st.cell.alpha) << '\t' << detail::format_number(st.cell.gamma_b) << '\t'
        << detail::format_number(st.cell.gamma_a) << '\t' << to_string(st.method) << '\t';
    std::snprintf(buf, sizeof buf, "%.6f\t%.6f", st.mean_tau, st.std_tau);
    out << buf << '\t' << st.trials << '\t' << st.failures << '\n';
  }
}

}  // namespace hetrank
