#pragma once

// Mistake-probability (CrowdBT-style) comparison model used as a baseline:
//
//   Pr(Y = 1) = eta_u F(c (s_i - s_j)) + (1 - eta_u) F(c (s_j - s_i))
//
// with eta_u = sigmoid(theta_u) so the optimizer works on an unconstrained
// logit. Per-user weighting, the virtual-node term and the argument scale c
// match HtmObjective; the virtual user never flips (eta = 1).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hetrank/dataset.hpp"
#include "hetrank/loss.hpp"
#include "hetrank/noise.hpp"

namespace hetrank {

inline double eta_from_logit(double theta) { return detail::sigmoid(theta); }

inline double logit(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("eta must lie in (0, 1)");
  return std::log(eta) - std::log1p(-eta);
}

template <NoiseFamily Noise>
class CrowdObjective {
 public:
  CrowdObjective(const ComparisonDataset& data, double lambda0) : data_(&data), lambda0_(lambda0) {}

  const ComparisonDataset& data() const noexcept { return *data_; }

  double loss(std::span<const double> scores, std::span<const double> theta) const {
    return compute(scores, theta, false).loss.total;
  }

  LossBreakdown breakdown(std::span<const double> scores, std::span<const double> theta) const {
    return compute(scores, theta, false).loss;
  }

  Evaluation evaluate(std::span<const double> scores, std::span<const double> theta) const {
    return compute(scores, theta, true);
  }

  /// -log Pr(winner beats loser) for a user with flip logit theta, and its
  /// derivatives in the scaled difference a and in theta.
  struct RecordTerm {
    double loss;
    double d_arg;
    double d_theta;
  };

  static RecordTerm record_term(double arg, double theta) {
    const double log_eta = -detail::softplus(-theta);
    const double log_flip = -detail::softplus(theta);
    const GValues agree = Noise::evaluate(arg, 1);
    const GValues flip = Noise::evaluate(arg, 0);
    const double a = log_eta - agree.g;
    const double b = log_flip - flip.g;
    const double hi = std::max(a, b);
    const double log_p = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    const double w_agree = std::exp(a - log_p);
    const double w_flip = std::exp(b - log_p);
    const double eta = std::exp(log_eta);
    const double one_minus_eta = std::exp(log_flip);
    return {-log_p, w_agree * agree.d1 + w_flip * flip.d1, -(one_minus_eta * w_agree - eta * w_flip)};
  }

 private:
  Evaluation compute(std::span<const double> scores, std::span<const double> theta,
                     bool want_gradient) const {
    const ComparisonDataset& data = *data_;
    detail::check_shapes(data, scores, theta, lambda0_);
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
      const double weight = 1.0 / (m * k);
      double sum = 0.0;
      double grad_theta = 0.0;
      for (std::size_t r : idx) {
        const Comparison& rec = data.records()[r];
        const RecordTerm t = record_term(c * (scores[rec.winner] - scores[rec.loser]), theta[u]);
        sum += t.loss;
        if (want_gradient) {
          const double coef = t.d_arg * c * weight;
          out.grad_scores[rec.winner] += coef;
          out.grad_scores[rec.loser] -= coef;
          grad_theta += t.d_theta;
        }
      }
      const double user_loss = sum / k;
      out.loss.per_user.push_back({u, user_loss});
      user_sum += user_loss;
      if (want_gradient) out.grad_params[u] = grad_theta * weight;
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

}  // namespace hetrank
