#pragma once

// One entry point for the six ranking methods:
//   BTL / TCV         homogeneous fits (gamma frozen at 1)
//   HBTL / HTCV       heterogeneous accuracies, fitted by alternating descent
//   CrowdBT / CrowdTCV per-user mistake probabilities eta, fitted the same way
// Mistake models report eta in FitResult::state.accuracies.

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetrank/crowd.hpp"
#include "hetrank/dataset.hpp"
#include "hetrank/noise.hpp"
#include "hetrank/optimizer.hpp"

namespace hetrank {

enum class Method { BTL, TCV, CrowdBT, CrowdTCV, HBTL, HTCV };

inline constexpr std::array<Method, 6> kAllMethods = {Method::BTL,  Method::TCV,  Method::CrowdBT,
                                                      Method::CrowdTCV, Method::HBTL, Method::HTCV};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::BTL: return "BTL";
    case Method::TCV: return "TCV";
    case Method::CrowdBT: return "CrowdBT";
    case Method::CrowdTCV: return "CrowdTCV";
    case Method::HBTL: return "HBTL";
    case Method::HTCV: return "HTCV";
  }
  return "?";
}

/// Accepts the lower-case CLI spelling as well as the display name.
inline std::optional<Method> parse_method(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (Method m : kAllMethods) {
    std::string name(to_string(m));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (name == lower) return m;
  }
  return std::nullopt;
}

inline NoiseKind noise_of(Method m) {
  return (m == Method::BTL || m == Method::CrowdBT || m == Method::HBTL) ? NoiseKind::Gumbel : NoiseKind::Normal;
}

inline bool is_mistake_model(Method m) { return m == Method::CrowdBT || m == Method::CrowdTCV; }
inline bool is_homogeneous(Method m) { return m == Method::BTL || m == Method::TCV; }

/// The three methods compared under one noise family, in table order.
inline std::array<Method, 3> methods_for(NoiseKind kind) {
  if (kind == NoiseKind::Gumbel) return {Method::BTL, Method::CrowdBT, Method::HBTL};
  return {Method::TCV, Method::CrowdTCV, Method::HTCV};
}

struct EstimatorSpec {
  Method method = Method::HBTL;
  SolverConfig solver;
  // Starting eta for mistake models. Values >= 1 are represented by a logit of
  // 40, where eta rounds to exactly 1 in double precision.
  double initial_eta = 0.9;
};

namespace detail {

inline constexpr double kMaxLogit = 40.0;

inline double initial_logit(double eta) {
  if (eta >= 1.0) return kMaxLogit;
  if (eta <= 0.0) return -kMaxLogit;
  return std::clamp(logit(eta), -kMaxLogit, kMaxLogit);
}

}  // namespace detail

inline FitResult run_estimator(const EstimatorSpec& spec, const ComparisonDataset& data,
                               const GroundTruth* truth = nullptr) {
  if (data.empty()) throw InvalidArgument("dataset is empty");
  detail::require_virtual_node(data, spec.solver.lambda0);
  SolverConfig cfg = spec.solver;
  if (is_homogeneous(spec.method)) cfg.freeze_params = true;
  const NoiseKind kind = noise_of(spec.method);

  if (!is_mistake_model(spec.method)) return fit(data, kind, cfg, truth);

  AlternatingOptions opts;
  opts.initial_params.assign(data.n_users(), detail::initial_logit(spec.initial_eta));
  opts.params_are_accuracies = false;
  FitResult result = with_noise(kind, [&](auto noise) {
    CrowdObjective<decltype(noise)> objective(data, cfg.lambda0);
    return fit_alternating(objective, cfg, opts, truth);
  });
  for (std::size_t u = 0; u < result.state.accuracies.size(); ++u) {
    result.state.accuracies[u] = data.is_real_user(static_cast<UserId>(u))
                                     ? eta_from_logit(result.state.accuracies[u])
                                     : 1.0;
  }
  return result;
}

}  // namespace hetrank
