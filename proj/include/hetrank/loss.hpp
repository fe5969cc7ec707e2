#pragma once

// Negative log-likelihood of the heterogeneous Thurstone model and its exact
// gradients.
//
//   L(s, gamma) = (1/m) sum_u L_u + lambda0 * L_0
//   L_u         = (1/k_u) sum_{(i,j) in D_u} g(c * gamma_u * (s_i - s_j); Y = 1)
//   L_0         = sum_i g(c * (0 - s_i)) + g(c * (s_i - 0))
//
// where c is the family's argument scale (1 for Gumbel, 1/sqrt(2) for normal),
// m counts real users with k_u >= 1, and L_0 is the virtual-node term: the
// virtual item is pinned at score 0 and the virtual user at unit accuracy.

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hetrank/dataset.hpp"
#include "hetrank/errors.hpp"
#include "hetrank/noise.hpp"

namespace hetrank {

/// Scores and per-user accuracies. Entries for the virtual item/user are
/// carried for shape but never read (pinned at 0 and 1).
struct ModelState {
  ScoreVector scores;
  AccuracyVector accuracies;
};

struct UserLoss {
  UserId user = 0;
  double loss = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  std::vector<UserLoss> per_user;  // active real users, ascending id
  double regularizer = 0.0;        // raw L_0, before the lambda0 weight
};

/// Loss and both gradients at one point.
struct Evaluation {
  LossBreakdown loss;
  std::vector<double> grad_scores;
  std::vector<double> grad_params;
};

namespace detail {

inline void check_shapes(const ComparisonDataset& data, std::span<const double> scores,
                         std::span<const double> params, double lambda0) {
  if (data.n_active_users() == 0) throw InvalidArgument("dataset has no real comparisons");
  if (scores.size() != data.n_items()) throw InvalidArgument("score vector length differs from item count");
  if (params.size() != data.n_users()) throw InvalidArgument("user parameter length differs from user count");
  if (!(lambda0 >= 0.0) || !std::isfinite(lambda0)) throw InvalidArgument("lambda0 must be finite and >= 0");
  require_finite(scores, "scores");
  require_finite(params, "user parameters");
}

// Score used for item i; the virtual item is always 0.
inline double score_of(const ComparisonDataset& data, std::span<const double> scores, ItemId i) {
  return data.is_real_item(i) ? scores[i] : 0.0;
}

}  // namespace detail

/// Heterogeneous Thurstone objective for one noise family. Holds a reference
/// to the dataset, which must outlive the objective.
template <NoiseFamily Noise>
class HtmObjective {
 public:
  HtmObjective(const ComparisonDataset& data, double lambda0) : data_(&data), lambda0_(lambda0) {}

  const ComparisonDataset& data() const noexcept { return *data_; }
  double lambda0() const noexcept { return lambda0_; }

  double loss(std::span<const double> scores, std::span<const double> gamma) const {
    return compute(scores, gamma, false).loss.total;
  }

  LossBreakdown breakdown(std::span<const double> scores, std::span<const double> gamma) const {
    return compute(scores, gamma, false).loss;
  }

  Evaluation evaluate(std::span<const double> scores, std::span<const double> gamma) const {
    return compute(scores, gamma, true);
  }

  /// Dense Hessian in s for small diagnostic instances.
  std::vector<std::vector<double>> hessian_scores(std::span<const double> scores,
                                                  std::span<const double> gamma) const {
    const ComparisonDataset& data = *data_;
    detail::check_shapes(data, scores, gamma, lambda0_);
    const std::size_t n = data.n_items();
    std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
    const double m = static_cast<double>(data.n_active_users());
    for (const Comparison& c : data.records()) {
      const double s_w = detail::score_of(data, scores, c.winner);
      const double s_l = detail::score_of(data, scores, c.loser);
      double coef_scale = 0.0;
      double slope = 0.0;
      if (c.is_virtual) {
        coef_scale = lambda0_;
        slope = Noise::argument_scale;
      } else {
        coef_scale = 1.0 / (m * static_cast<double>(data.user_count(c.user)));
        slope = Noise::argument_scale * gamma[c.user];
      }
      const double curv = Noise::evaluate(slope * (s_w - s_l), 1).d2 * slope * slope * coef_scale;
      const bool w_real = data.is_real_item(c.winner);
      const bool l_real = data.is_real_item(c.loser);
      if (w_real) h[c.winner][c.winner] += curv;
      if (l_real) h[c.loser][c.loser] += curv;
      if (w_real && l_real) {
        h[c.winner][c.loser] -= curv;
        h[c.loser][c.winner] -= curv;
      }
    }
    return h;
  }

  /// Diagonal of the (diagonal) Hessian in gamma.
  std::vector<double> hessian_accuracy_diagonal(std::span<const double> scores,
                                                std::span<const double> gamma) const {
    const ComparisonDataset& data = *data_;
    detail::check_shapes(data, scores, gamma, lambda0_);
    std::vector<double> h(data.n_users(), 0.0);
    const double m = static_cast<double>(data.n_active_users());
    for (const Comparison& c : data.records()) {
      if (c.is_virtual) continue;
      const double d = Noise::argument_scale * (scores[c.winner] - scores[c.loser]);
      const double k = static_cast<double>(data.user_count(c.user));
      h[c.user] += Noise::evaluate(gamma[c.user] * d, 1).d2 * d * d / (m * k);
    }
    return h;
  }

 private:
  Evaluation compute(std::span<const double> scores, std::span<const double> gamma,
                     bool want_gradient) const {
    const ComparisonDataset& data = *data_;
    detail::check_shapes(data, scores, gamma, lambda0_);
    constexpr double c = Noise::argument_scale;
    const double m = static_cast<double>(data.n_active_users());

    Evaluation out;
    if (want_gradient) {
      out.grad_scores.assign(data.n_items(), 0.0);
      out.grad_params.assign(data.n_users(), 0.0);
    }
    double user_sum = 0.0;
    for (UserId u = 0; u < data.n_users(); ++u) {
      const auto idx = data.user_records(u);
      if (!data.is_real_user(u) || idx.empty()) continue;
      const double k = static_cast<double>(idx.size());
      const double slope = c * gamma[u];
      const double weight = 1.0 / (m * k);
      double sum = 0.0;
      double grad_gamma = 0.0;
      for (std::size_t r : idx) {
        const Comparison& rec = data.records()[r];
        const double diff = scores[rec.winner] - scores[rec.loser];
        const GValues gv = Noise::evaluate(slope * diff, 1);
        sum += gv.g;
        if (want_gradient) {
          const double coef = gv.d1 * slope * weight;
          out.grad_scores[rec.winner] += coef;
          out.grad_scores[rec.loser] -= coef;
          grad_gamma += gv.d1 * c * diff;
        }
      }
      const double user_loss = sum / k;
      out.loss.per_user.push_back({u, user_loss});
      user_sum += user_loss;
      if (want_gradient) out.grad_params[u] = grad_gamma * weight;
    }

    double reg = 0.0;
    if (data.has_virtual_node()) {
      for (const Comparison& rec : data.records()) {
        if (!rec.is_virtual) continue;
        const double diff = detail::score_of(data, scores, rec.winner) -
                            detail::score_of(data, scores, rec.loser);
        const GValues gv = Noise::evaluate(c * diff, 1);
        reg += gv.g;
        if (want_gradient && lambda0_ != 0.0) {
          const double coef = lambda0_ * gv.d1 * c;
          if (data.is_real_item(rec.winner)) out.grad_scores[rec.winner] += coef;
          if (data.is_real_item(rec.loser)) out.grad_scores[rec.loser] -= coef;
        }
      }
    }
    out.loss.regularizer = reg;
    out.loss.total = user_sum / m + lambda0_ * reg;
    return out;
  }

  const ComparisonDataset* data_;
  double lambda0_;
};

template <class Fn>
decltype(auto) with_htm_objective(NoiseKind kind, const ComparisonDataset& data, double lambda0, Fn&& fn) {
  return with_noise(kind, [&](auto noise) {
    return std::forward<Fn>(fn)(HtmObjective<decltype(noise)>(data, lambda0));
  });
}

inline LossBreakdown loss(const ModelState& state, const ComparisonDataset& data, NoiseKind kind,
                          double lambda0) {
  return with_htm_objective(kind, data, lambda0,
                            [&](const auto& obj) { return obj.breakdown(state.scores, state.accuracies); });
}

inline std::vector<double> grad_scores(const ModelState& state, const ComparisonDataset& data,
                                       NoiseKind kind, double lambda0) {
  return with_htm_objective(kind, data, lambda0, [&](const auto& obj) {
    return obj.evaluate(state.scores, state.accuracies).grad_scores;
  });
}

inline std::vector<double> grad_accuracy(const ModelState& state, const ComparisonDataset& data,
                                         NoiseKind kind, double lambda0) {
  return with_htm_objective(kind, data, lambda0, [&](const auto& obj) {
    return obj.evaluate(state.scores, state.accuracies).grad_params;
  });
}

}  // namespace hetrank
