#pragma once

// Noise families for heterogeneous Thurstone comparisons.
//
// A family supplies the per-comparison negative log-likelihood
//   g(x; y) = -log F(x)       if y == 1
//   g(x; y) = -log F(-x)      if y == 0
// with F the CDF of eps_j - eps_i, together with its first two derivatives
// in x. Families also fix how the raw quantity gamma * (s_i - s_j) is turned
// into the argument x (see argument_scale). Everything the loss engine needs
// goes through the NoiseFamily concept, so new log-concave families plug in
// without touching the engine.

#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "hetrank/errors.hpp"

namespace hetrank {

// g and its first two derivatives with respect to x.
struct GValues {
  double g = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

template <class N>
concept NoiseFamily = requires(double x, int y) {
  { N::argument_scale } -> std::convertible_to<double>;
  { N::name } -> std::convertible_to<std::string_view>;
  { N::evaluate(x, y) } -> std::same_as<GValues>;
  { N::cdf(x) } -> std::convertible_to<double>;
};

namespace detail {

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))
inline constexpr double kMillsSwitch = -5.0;

// Inverse Mills ratio phi(-t) / Phi(-t) for t >= 5, by the classical continued
// fraction 1/R(t) = t + 1/(t + 2/(t + 3/(t + ...))) evaluated with modified Lentz.
inline double inverse_mills_tail(double t) {
  constexpr double tiny = 1e-300;
  double f = t;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 1000; ++k) {
    d = t + k * d;
    if (d == 0.0) d = tiny;
    c = t + k / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

// Returns (log Phi(w), phi(w) / Phi(w)), accurate deep into the lower tail.
inline std::pair<double, double> log_ncdf_and_ratio(double w) {
  if (w < kMillsSwitch) {
    const double t = -w;
    const double ratio = inverse_mills_tail(t);
    return {-0.5 * t * t - kLogSqrt2Pi - std::log(ratio), ratio};
  }
  const double pdf = std::exp(-0.5 * w * w - kLogSqrt2Pi);
  double cdf = 0.0;
  double log_cdf = 0.0;
  if (w > 0.0) {
    const double upper = 0.5 * std::erfc(w / std::numbers::sqrt2);
    cdf = 1.0 - upper;
    log_cdf = std::log1p(-upper);
  } else {
    cdf = 0.5 * std::erfc(-w / std::numbers::sqrt2);
    log_cdf = std::log(cdf);
  }
  return {log_cdf, pdf / cdf};
}

}  // namespace detail

/// Gumbel item noise: eps_j - eps_i is standard logistic, giving the
/// (heterogeneous) Bradley-Terry-Luce likelihood.
struct GumbelNoise {
  static constexpr double argument_scale = 1.0;
  static constexpr std::string_view name = "gumbel";

  static GValues evaluate(double x, int y) {
    detail::require_finite(x, "x");
    const double p = detail::sigmoid(x);
    const double q = detail::sigmoid(-x);
    GValues out;
    // log(1 + e^x) - y x, split by label so neither branch overflows.
    out.g = (y == 1) ? detail::softplus(-x) : detail::softplus(x);
    out.d1 = (y == 1) ? -q : p;
    out.d2 = p * q;
    return out;
  }

  static double cdf(double x) { return detail::sigmoid(x); }
};

/// Standard normal item noise: Thurstone Case V. eps_j - eps_i has variance 2,
/// so the raw difference is divided by sqrt(2) before it reaches Phi.
struct NormalNoise {
  static constexpr double argument_scale = 1.0 / std::numbers::sqrt2;
  static constexpr std::string_view name = "normal";

  static GValues evaluate(double x, int y) {
    detail::require_finite(x, "x");
    const double sign = (y == 1) ? 1.0 : -1.0;
    const double w = sign * x;
    const auto [log_cdf, ratio] = detail::log_ncdf_and_ratio(w);
    GValues out;
    out.g = -log_cdf;
    out.d1 = -sign * ratio;
    out.d2 = ratio * (ratio + w);
    return out;
  }

  static double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
};

static_assert(NoiseFamily<GumbelNoise>);
static_assert(NoiseFamily<NormalNoise>);

enum class NoiseKind { Gumbel, Normal };

inline std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::Gumbel ? GumbelNoise::name : NormalNoise::name;
}

inline std::optional<NoiseKind> parse_noise_kind(std::string_view text) {
  if (text == "gumbel") return NoiseKind::Gumbel;
  if (text == "normal") return NoiseKind::Normal;
  return std::nullopt;
}

// Calls fn with a default-constructed family object matching kind.
template <class Fn>
decltype(auto) with_noise(NoiseKind kind, Fn&& fn) {
  if (kind == NoiseKind::Gumbel) return std::forward<Fn>(fn)(GumbelNoise{});
  return std::forward<Fn>(fn)(NormalNoise{});
}

/// The argument x handed to a family: gamma * (s_i - s_j) times the family's
/// scale. This is the only place the sqrt(2) of the normal model is applied.
template <NoiseFamily Noise>
double scaled_argument(double s_i, double s_j, double gamma) {
  return Noise::argument_scale * gamma * (s_i - s_j);
}

/// Pr(i beats j) for a user with accuracy gamma.
template <NoiseFamily Noise>
double pairwise_probability(double s_i, double s_j, double gamma) {
  detail::require_finite(s_i, "s_i");
  detail::require_finite(s_j, "s_j");
  detail::require_finite(gamma, "gamma");
  return Noise::cdf(scaled_argument<Noise>(s_i, s_j, gamma));
}

inline double pairwise_probability(NoiseKind kind, double s_i, double s_j, double gamma) {
  return with_noise(kind, [&](auto noise) {
    return pairwise_probability<decltype(noise)>(s_i, s_j, gamma);
  });
}

inline GValues evaluate_noise(NoiseKind kind, double x, int y) {
  return with_noise(kind, [&](auto noise) { return decltype(noise)::evaluate(x, y); });
}

}  // namespace hetrank
