#pragma once

// Synthetic heterogeneous comparison data.
//
// Scores are drawn uniform on [0, 1]. Every one of the n(n-1) ordered pairs is
// offered to every user, and each (user, pair) response is kept with
// probability alpha. A kept response says i beats j with probability
// F(c * gamma_u * (s_i - s_j)).
//
// Randomness is counter based: every draw is a hash of
// (seed, purpose, user, ordered-pair index, slot), so the stream layout
// trial -> user -> ordered pair is fixed and independent of evaluation order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetrank/dataset.hpp"
#include "hetrank/errors.hpp"
#include "hetrank/noise.hpp"
#include "hetrank/optimizer.hpp"

namespace hetrank {

enum class Setting { Benign, Adversarial };

inline std::string_view to_string(Setting s) { return s == Setting::Benign ? "benign" : "adversarial"; }

inline std::optional<Setting> parse_setting(std::string_view text) {
  if (text == "benign") return Setting::Benign;
  if (text == "adversarial") return Setting::Adversarial;
  return std::nullopt;
}

namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum class Purpose : std::uint64_t { Score = 1, Include = 2, Outcome = 3, Variate = 4 };

inline std::uint64_t draw(std::uint64_t seed, Purpose purpose, std::uint64_t user, std::uint64_t index,
                          std::uint64_t slot = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ user);
  h = mix64(h ^ index);
  return mix64(h ^ slot);
}

// Uniform on the open interval (0, 1).
inline double to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace rng

/// Standard normal quantile: rational approximation refined by one Halley step.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x = 0.0;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p > 1.0 - low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double e = NormalNoise::cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

struct SimConfig {
  std::size_t n = 20;
  std::size_t m = 9;
  double gamma_a = 2.5;
  double gamma_b = 1.0;
  Setting setting = Setting::Benign;
  double alpha = 0.8;
  NoiseKind noise = NoiseKind::Gumbel;
  std::uint64_t seed = 1;
  // Sample outcomes by drawing item noise and comparing perturbed scores
  // instead of thresholding F directly. Same distribution, different stream.
  bool draw_variates = false;
  // Overrides the group A / group B layout when non-empty (length m).
  std::vector<double> accuracies;

  void validate() const {
    if (n < 2) throw InvalidArgument("simulation needs at least 2 items");
    if (m < 1) throw InvalidArgument("simulation needs at least 1 user");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
    if (!accuracies.empty() && accuracies.size() != m) throw InvalidArgument("accuracy override length must be m");
    if (!std::isfinite(gamma_a) || !std::isfinite(gamma_b)) throw InvalidArgument("gamma values must be finite");
  }
};

/// Group A is the first m/3 users (rounded down, at least 1) with accuracy
/// gamma_a; the rest form group B with gamma_b. In the adversarial setting the
/// first ceil(|A|/3) users of A and the first ceil(|B|/3) users of B are
/// negated; for m = 9 this gives (-a, a, a, -b, -b, b, b, b, b).
inline AccuracyVector group_accuracies(std::size_t m, double gamma_a, double gamma_b, Setting setting) {
  const std::size_t size_a = std::max<std::size_t>(1, m / 3);
  const std::size_t size_b = m > size_a ? m - size_a : 0;
  AccuracyVector gamma(m);
  for (std::size_t u = 0; u < m; ++u) gamma[u] = u < size_a ? gamma_a : gamma_b;
  if (setting == Setting::Adversarial) {
    const std::size_t flip_a = (size_a + 2) / 3;
    const std::size_t flip_b = (size_b + 2) / 3;
    for (std::size_t u = 0; u < flip_a; ++u) gamma[u] = -gamma[u];
    for (std::size_t u = 0; u < flip_b; ++u) gamma[size_a + u] = -gamma[size_a + u];
  }
  return gamma;
}

struct SimOutput {
  ComparisonDataset data;
  ScoreVector raw_scores;  // uniform [0, 1]
  GroundTruth truth;       // centered scores and the accuracies used
  AccuracyVector accuracies;
};

inline std::size_t ordered_pair_count(std::size_t n) { return n * (n - 1); }

inline SimOutput generate(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n;
  const std::size_t m = cfg.m;
  AccuracyVector gamma =
      cfg.accuracies.empty() ? group_accuracies(m, cfg.gamma_a, cfg.gamma_b, cfg.setting) : cfg.accuracies;

  ScoreVector raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = rng::to_unit(rng::draw(cfg.seed, rng::Purpose::Score, 0, i));
  }

  const double scale = with_noise(cfg.noise, [](auto noise) { return decltype(noise)::argument_scale; });
  auto variate = [&](std::uint64_t bits) {
    const double u = rng::to_unit(bits);
    return cfg.noise == NoiseKind::Gumbel ? -std::log(-std::log(u)) : normal_quantile(u);
  };

  std::vector<Comparison> records;
  records.reserve(static_cast<std::size_t>(cfg.alpha * static_cast<double>(m * ordered_pair_count(n))) + 16);
  for (std::size_t u = 0; u < m; ++u) {
    std::size_t pair = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const std::size_t p = pair++;
        if (rng::to_unit(rng::draw(cfg.seed, rng::Purpose::Include, u, p)) >= cfg.alpha) continue;
        bool i_wins = false;
        if (cfg.draw_variates) {
          // Adversarial users perceive C - s; the noise magnitude is 1/|gamma|.
          const double sign = gamma[u] < 0.0 ? -1.0 : 1.0;
          const double mag = std::abs(gamma[u]);
          const double z_i = sign * raw[i] + variate(rng::draw(cfg.seed, rng::Purpose::Variate, u, p, 0)) / mag;
          const double z_j = sign * raw[j] + variate(rng::draw(cfg.seed, rng::Purpose::Variate, u, p, 1)) / mag;
          i_wins = z_i > z_j;
        } else {
          const double prob = with_noise(cfg.noise, [&](auto noise) {
            return decltype(noise)::cdf(scale * gamma[u] * (raw[i] - raw[j]));
          });
          i_wins = rng::to_unit(rng::draw(cfg.seed, rng::Purpose::Outcome, u, p)) < prob;
        }
        const auto ui = static_cast<UserId>(u);
        const auto ii = static_cast<ItemId>(i);
        const auto jj = static_cast<ItemId>(j);
        records.push_back(i_wins ? Comparison{ui, ii, jj} : Comparison{ui, jj, ii});
      }
    }
  }

  SimOutput out;
  out.data = ComparisonDataset(n, m, std::move(records));
  out.raw_scores = raw;
  out.truth = GroundTruth::from_scores(center(raw), gamma);
  out.accuracies = std::move(gamma);
  return out;
}

}  // namespace hetrank
