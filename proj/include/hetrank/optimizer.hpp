#pragma once

// Alternating gradient descent over (scores, per-user parameters) with the
// centering projection after every score step.
//
//   s~      = s_t - eta1 * grad_s L(s_t, p_t)
//   s_{t+1} = (I - 11^T / n) s~
//   p_{t+1} = p_t - eta2 * grad_p L(s_t, p_t)
//
// Both gradients are taken at the iteration-t point. The optional backtracking
// line search scales both steps by a common factor 2^-k.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hetrank/dataset.hpp"
#include "hetrank/errors.hpp"
#include "hetrank/loss.hpp"
#include "hetrank/metrics.hpp"
#include "hetrank/noise.hpp"

namespace hetrank {

struct SolverConfig {
  double step_scores = 1.0;    // eta1
  double step_params = 1.0;    // eta2
  int max_iters = 500;         // T
  double grad_tol = 1e-8;
  bool line_search = true;
  bool freeze_params = false;  // gamma == 1: homogeneous BTL / TCV
  bool record_trajectory = true;
  double lambda0 = 0.0;

  void validate() const {
    if (!(step_scores > 0.0) || !std::isfinite(step_scores)) throw InvalidArgument("step_scores must be > 0");
    if (!(step_params > 0.0) || !std::isfinite(step_params)) throw InvalidArgument("step_params must be > 0");
    if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    if (!(grad_tol >= 0.0)) throw InvalidArgument("grad_tol must be >= 0");
    if (!(lambda0 >= 0.0) || !std::isfinite(lambda0)) throw InvalidArgument("lambda0 must be finite and >= 0");
  }
};

struct TrajectoryPoint {
  int iter = 0;
  double loss = 0.0;
  double grad_norm_scores = 0.0;  // norm of the centered score gradient
  double grad_norm_params = 0.0;
  std::optional<double> err_scores;
  std::optional<double> err_params;
  std::optional<double> err_scores_aligned;
  std::optional<double> err_params_aligned;
};

struct FitResult {
  ModelState state;  // scores over all items; accuracies hold gamma, or eta for mistake models
  Ranking ranking;   // real items only
  int iterations = 0;
  bool converged = false;
  int line_search_failures = 0;
  double final_loss = 0.0;
  std::vector<UserId> inactive_users;  // k_u = 0; parameter left at its initial value
  std::vector<TrajectoryPoint> trajectory;
};

template <class O>
concept AlternatingObjective = requires(const O& obj, std::span<const double> s, std::span<const double> p) {
  { obj.data() } -> std::convertible_to<const ComparisonDataset&>;
  { obj.loss(s, p) } -> std::convertible_to<double>;
  { obj.evaluate(s, p) } -> std::same_as<Evaluation>;
};

/// s - mean(s) * 1.
inline std::vector<double> center(std::span<const double> s) {
  std::vector<double> out(s.begin(), s.end());
  if (out.empty()) return out;
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  for (double& v : out) v -= mean;
  return out;
}

struct StepResult {
  double step = 0.0;
  int trials = 0;
  bool exhausted = false;  // no decrease after every halving; step forced to 0
};

/// Backtracking on step * direction: tries initial_step, halving it until
/// loss_at(step) < current_loss. After max_halvings failed halvings the step is
/// 0 and `exhausted` is set. A zero direction is accepted immediately.
template <class LossAt>
StepResult backtrack_step(double current_loss, std::span<const double> direction, LossAt&& loss_at,
                          double initial_step = 1.0, int max_halvings = 30) {
  const bool zero = std::all_of(direction.begin(), direction.end(), [](double d) { return d == 0.0; });
  if (zero) return {initial_step, 0, false};
  double step = initial_step;
  for (int k = 0; k <= max_halvings; ++k) {
    const double trial = loss_at(step);
    if (std::isfinite(trial) && trial < current_loss) return {step, k + 1, false};
    step *= 0.5;
  }
  return {0.0, max_halvings + 1, true};
}

namespace detail {

inline bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

inline double norm2(std::span<const double> xs) { return std::sqrt(dot(xs, xs)); }

// Centers the real-item prefix and pins the virtual item (if any) to 0.
inline void project_scores(const ComparisonDataset& data, std::vector<double>& s) {
  const std::size_t n_real = data.n_real_items();
  auto real = center(std::span<const double>(s.data(), n_real));
  std::copy(real.begin(), real.end(), s.begin());
  for (std::size_t i = n_real; i < s.size(); ++i) s[i] = 0.0;
}

// lambda0 weights the virtual-node records; without them it would be ignored.
inline void require_virtual_node(const ComparisonDataset& data, double lambda0) {
  if (lambda0 > 0.0 && !data.has_virtual_node()) {
    throw InvalidArgument("lambda0 > 0 needs a dataset with a virtual node (see add_virtual_node)");
  }
}

inline std::vector<double> projected_gradient(const ComparisonDataset& data, std::span<const double> g) {
  std::vector<double> out(g.begin(), g.end());
  project_scores(data, out);
  return out;
}

struct TruthView {
  std::vector<double> scores;     // centered, real items
  std::vector<double> params;     // real users, empty when not comparable
};

inline std::optional<TruthView> make_truth_view(const ComparisonDataset& data, const GroundTruth* truth,
                                                bool params_are_accuracies) {
  if (!truth || !truth->scores) return std::nullopt;
  if (truth->scores->size() != data.n_real_items()) {
    throw InvalidArgument("ground truth score length differs from real item count");
  }
  TruthView view;
  view.scores = center(*truth->scores);
  if (params_are_accuracies && truth->accuracies) {
    if (truth->accuracies->size() != data.n_real_users()) {
      throw InvalidArgument("ground truth accuracy length differs from real user count");
    }
    view.params = *truth->accuracies;
  }
  return view;
}

}  // namespace detail

struct AlternatingOptions {
  std::vector<double> initial_params;
  bool params_are_accuracies = true;  // enables the gamma error columns
  std::vector<double> initial_scores;  // empty: 1 on real items
};

/// Runs alternating gradient descent on any objective over (scores, params).
/// Scores start at 1 on real items (0 on the virtual item) unless given; the
/// first projection centers them.
template <AlternatingObjective Objective>
FitResult fit_alternating(const Objective& objective, const SolverConfig& cfg, AlternatingOptions opts,
                          const GroundTruth* truth = nullptr) {
  cfg.validate();
  const ComparisonDataset& data = objective.data();
  if (data.n_active_users() == 0) throw InvalidArgument("dataset has no real comparisons");
  if (opts.initial_params.size() != data.n_users()) {
    throw InvalidArgument("initial parameter length differs from user count");
  }
  const auto truth_view = detail::make_truth_view(data, truth, opts.params_are_accuracies);
  const std::size_t n_real = data.n_real_items();
  const std::size_t m_real = data.n_real_users();

  if (!opts.initial_scores.empty() && opts.initial_scores.size() != data.n_items()) {
    throw InvalidArgument("initial score length differs from item count");
  }
  std::vector<double> s = opts.initial_scores.empty() ? std::vector<double>(data.n_items(), 1.0)
                                                      : std::move(opts.initial_scores);
  for (std::size_t i = n_real; i < s.size(); ++i) s[i] = 0.0;
  std::vector<double> p = std::move(opts.initial_params);

  FitResult result;
  for (UserId u : data.empty_users()) result.inactive_users.push_back(u);

  auto record = [&](int iter, double loss, double gs_norm, double gp_norm) {
    if (!cfg.record_trajectory) return;
    TrajectoryPoint pt;
    pt.iter = iter;
    pt.loss = loss;
    pt.grad_norm_scores = gs_norm;
    pt.grad_norm_params = gp_norm;
    if (truth_view) {
      const std::span<const double> s_real(s.data(), n_real);
      const std::span<const double> p_real(p.data(), truth_view->params.empty() ? 0 : m_real);
      const auto raw = estimation_error(s_real, p_real, truth_view->scores, truth_view->params, ErrorMode::Raw);
      const auto aligned =
          estimation_error(s_real, p_real, truth_view->scores, truth_view->params, ErrorMode::ScaleAligned);
      pt.err_scores = raw.scores;
      pt.err_scores_aligned = aligned.scores;
      if (!truth_view->params.empty()) {
        pt.err_params = raw.accuracies;
        pt.err_params_aligned = aligned.accuracies;
      }
    }
    result.trajectory.push_back(pt);
  };

  std::vector<double> trial_s(s.size());
  std::vector<double> trial_p(p.size());
  auto make_trial = [&](double step, std::span<const double> gs, std::span<const double> gp) {
    for (std::size_t i = 0; i < s.size(); ++i) trial_s[i] = s[i] - step * cfg.step_scores * gs[i];
    detail::project_scores(data, trial_s);
    for (std::size_t u = 0; u < p.size(); ++u) {
      trial_p[u] = cfg.freeze_params ? p[u] : p[u] - step * cfg.step_params * gp[u];
    }
  };

  int t = 0;
  for (;; ++t) {
    if (!detail::all_finite(s) || !detail::all_finite(p)) throw DivergenceError(t, "non-finite iterate");
    Evaluation ev = objective.evaluate(s, p);
    const double loss = ev.loss.total;
    if (!std::isfinite(loss)) throw DivergenceError(t, "non-finite loss");
    if (!detail::all_finite(ev.grad_scores) || !detail::all_finite(ev.grad_params)) {
      throw DivergenceError(t, "non-finite gradient");
    }
    const auto gs = detail::projected_gradient(data, ev.grad_scores);
    const double gs_norm = detail::norm2(gs);
    const double gp_norm = detail::norm2(ev.grad_params);
    record(t, loss, gs_norm, gp_norm);
    result.final_loss = loss;
    const double stop_norm = cfg.freeze_params ? gs_norm : std::max(gs_norm, gp_norm);
    if (stop_norm <= cfg.grad_tol) {
      result.converged = true;
      break;
    }
    if (t == cfg.max_iters) break;

    double step = 1.0;
    if (cfg.line_search) {
      std::vector<double> direction(gs.begin(), gs.end());
      if (!cfg.freeze_params) direction.insert(direction.end(), ev.grad_params.begin(), ev.grad_params.end());
      const StepResult sr = backtrack_step(loss, direction, [&](double trial_step) {
        make_trial(trial_step, ev.grad_scores, ev.grad_params);
        if (!detail::all_finite(trial_s) || !detail::all_finite(trial_p)) {
          return std::numeric_limits<double>::infinity();
        }
        return objective.loss(trial_s, trial_p);
      });
      step = sr.step;
      if (sr.exhausted) ++result.line_search_failures;
    }
    make_trial(step, ev.grad_scores, ev.grad_params);
    s.swap(trial_s);
    p.swap(trial_p);
  }
  result.iterations = t;
  detail::project_scores(data, s);
  result.ranking = ground_truth_ranking(std::span<const double>(s.data(), n_real));
  result.state.scores = std::move(s);
  result.state.accuracies = std::move(p);
  return result;
}

/// Heterogeneous Thurstone fit, by default from s = 1, gamma = 1. With
/// cfg.freeze_params this is the homogeneous BTL (Gumbel) or TCV (normal) fit.
inline FitResult fit(const ComparisonDataset& data, NoiseKind kind, const SolverConfig& cfg,
                     const GroundTruth* truth = nullptr, AlternatingOptions opts = {}) {
  if (data.empty()) throw InvalidArgument("dataset is empty");
  detail::require_virtual_node(data, cfg.lambda0);
  if (opts.initial_params.empty()) opts.initial_params.assign(data.n_users(), 1.0);
  opts.params_are_accuracies = true;
  return with_htm_objective(kind, data, cfg.lambda0, [&](const auto& obj) {
    return fit_alternating(obj, cfg, opts, truth);
  });
}

/// Trajectory TSV: iter, loss, gradNormS, gradNormGamma, errS, errGamma, then
/// the scale-aligned errors. Missing values are written as `nan`.
inline void write_trajectory_tsv(const std::vector<TrajectoryPoint>& trajectory, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) { return v ? *v : std::nan(""); };
  const auto old_precision = out.precision(12);
  out << "iter\tloss\tgradNormS\tgradNormGamma\terrS\terrGamma\terrSAligned\terrGammaAligned\n";
  for (const TrajectoryPoint& pt : trajectory) {
    out << pt.iter << '\t' << pt.loss << '\t' << pt.grad_norm_scores << '\t' << pt.grad_norm_params << '\t'
        << opt(pt.err_scores) << '\t' << opt(pt.err_params) << '\t' << opt(pt.err_scores_aligned) << '\t'
        << opt(pt.err_params_aligned) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace hetrank
