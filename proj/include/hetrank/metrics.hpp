#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>

#include "hetrank/errors.hpp"

namespace hetrank {

struct TauResult {
  double tau = 0.0;
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t tied_pairs = 0;  // tied in at least one of the two inputs
};

/// Kendall's tau between two score (or rank) vectors:
///   tau = 2 (c - d) / (n (n - 1)).
/// Pairs tied in either input count toward neither c nor d, but the
/// denominator stays n (n - 1). Quadratic in n.
inline TauResult kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("kendall_tau: length mismatch");
  if (a.size() < 2) throw InvalidArgument("kendall_tau: need at least two entries");
  detail::require_finite(a, "a");
  detail::require_finite(b, "b");
  TauResult r;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 || db == 0.0) {
        ++r.tied_pairs;
      } else if ((da > 0.0) == (db > 0.0)) {
        ++r.concordant;
      } else {
        ++r.discordant;
      }
    }
  }
  r.tau = 2.0 * static_cast<double>(r.concordant - r.discordant) /
          (static_cast<double>(n) * static_cast<double>(n - 1));
  return r;
}

enum class ErrorMode { Raw, ScaleAligned };

struct EstimationError {
  double scores = 0.0;
  double accuracies = 0.0;
};

namespace detail {

inline double dot(std::span<const double> x, std::span<const double> y) {
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

inline double distance(std::span<const double> x, std::span<const double> y, double x_scale = 1.0) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x_scale * x[k] - y[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace detail

/// Distances of (s_hat, gamma_hat) to the truth. ScaleAligned first rescales
/// s_hat by the least-squares c = <s_hat, s*> / <s_hat, s_hat> and gamma_hat by
/// 1/c, which leaves the loss unchanged. An empty true accuracy vector skips
/// the accuracy error.
inline EstimationError estimation_error(std::span<const double> scores, std::span<const double> accuracies,
                                        std::span<const double> true_scores,
                                        std::span<const double> true_accuracies, ErrorMode mode) {
  if (scores.size() != true_scores.size()) throw InvalidArgument("estimation_error: score length mismatch");
  if (!true_accuracies.empty() && accuracies.size() != true_accuracies.size()) {
    throw InvalidArgument("estimation_error: accuracy length mismatch");
  }
  double sum = 0.0;
  double norm = 0.0;
  for (double v : true_scores) {
    sum += v;
    norm += std::abs(v);
  }
  if (std::abs(sum) > 1e-9 * std::max(1.0, norm)) {
    throw InvalidArgument("estimation_error: true scores must be centered");
  }
  double c = 1.0;
  if (mode == ErrorMode::ScaleAligned) {
    const double ss = detail::dot(scores, scores);
    if (ss > 0.0) c = detail::dot(scores, true_scores) / ss;
  }
  EstimationError out;
  out.scores = detail::distance(scores, true_scores, c);
  if (!true_accuracies.empty()) {
    const double inv = (c != 0.0) ? 1.0 / c : 1.0;
    out.accuracies = detail::distance(accuracies, true_accuracies, inv);
  }
  return out;
}

}  // namespace hetrank
