#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "game.hpp"
#include "numeric.hpp"

namespace infoshare {

/// PoI counts on the six central-LA corridors (Sunset, Santa Monica, Melrose,
/// Beverly, W 3rd, Wilshire).
inline const std::vector<int>& la_poi_counts() {
  static const std::vector<int> n{3875, 3426, 2933, 2116, 3258, 2116};
  return n;
}

namespace detail {

inline double aggregate(const std::vector<double>& eta, const std::vector<std::vector<double>>& w, std::size_t j) {
  double a = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) a += eta[i] * w[i][j];
  return a;
}

/// Multiplies column j by f and renormalizes every row.
inline std::vector<std::vector<double>> scale_column(const std::vector<std::vector<double>>& w, std::size_t j,
                                                     double f) {
  auto out = w;
  for (auto& row : out) {
    row[j] *= f;
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
  }
  return out;
}

/// Rescales column j so its aggregate weight equals target (bisection on log f).
inline std::vector<std::vector<double>> target_column(const std::vector<double>& eta,
                                                      const std::vector<std::vector<double>>& w, std::size_t j,
                                                      double target) {
  double lo = -60.0;
  double hi = 60.0;
  for (int it = 0; it < 400 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (aggregate(eta, scale_column(w, j, std::exp(mid)), j) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return scale_column(w, j, std::exp(0.5 * (lo + hi)));
}

/// Rows of W renormalized so each sums to exactly 1 up to rounding.
inline void renormalize_rows(std::vector<std::vector<double>>& w) {
  for (auto& row : w) {
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
  }
}

}  // namespace detail

struct SampleSpec {
  std::size_t k = 6;
  std::size_t m = 6;
  double max_cost = 10.0;
  std::vector<int> capacities = la_poi_counts();
  int population = 2000;
};

/// Raw draw: proportions and preference rows uniform on (0,1), normalized;
/// costs uniform on [0, max_cost]. Costs are normalized by GameInstance.
struct RawSample {
  std::vector<double> eta;
  std::vector<std::vector<double>> w;
  std::vector<double> costs;
};

inline RawSample draw_raw(std::uint64_t seed, const SampleSpec& spec) {
  if (spec.k < 2 || spec.m < 1) throw std::invalid_argument("need k >= 2 and m >= 1");
  if (!(spec.max_cost > 0.0)) throw std::invalid_argument("max_cost must be positive");
  if (spec.capacities.size() != spec.k) throw std::invalid_argument("need one PoI capacity per path");
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto positive = [&] {
    double v = 0.0;
    while (v == 0.0) v = unit(rng);
    return v;
  };
  RawSample s;
  s.eta.resize(spec.m);
  double es = 0.0;
  for (double& e : s.eta) es += (e = positive());
  for (double& e : s.eta) e /= es;
  s.w.assign(spec.m, std::vector<double>(spec.k));
  for (auto& row : s.w)
    for (double& v : row) v = positive();
  detail::renormalize_rows(s.w);
  s.costs.resize(spec.k);
  std::uniform_real_distribution<double> cost(0.0, spec.max_cost);
  for (double& c : s.costs) c = cost(rng);
  return s;
}

inline GameInstance build_instance(const RawSample& s, const SampleSpec& spec) {
  std::vector<PathSpec> paths;
  for (std::size_t j = 0; j < spec.k; ++j) {
    paths.push_back({static_cast<int>(j + 1), s.costs[j], spec.capacities[j]});
  }
  std::vector<UserType> types;
  for (std::size_t i = 0; i < spec.m; ++i) types.push_back({static_cast<int>(i + 1), s.eta[i], s.w[i]});
  auto u = UtilityModel::per_path(spec.capacities, spec.population);
  return GameInstance(std::move(paths), std::move(types), std::move(u));
}

/// Seeded instance whose largest social utility weight equals
/// target_max_weight. Above the drawn maximum, the heaviest column is scaled
/// up; below it, every row is blended toward the uniform row.
inline GameInstance sample_instance(std::uint64_t seed, const SampleSpec& spec, double target_max_weight) {
  const double floor = 1.0 / static_cast<double>(spec.k);
  if (!(target_max_weight >= floor - kStructuralTol && target_max_weight < 1.0)) {
    throw std::invalid_argument("target max weight must lie in [1/k, 1)");
  }
  auto s = draw_raw(seed, spec);
  std::vector<double> alpha(spec.k);
  for (std::size_t j = 0; j < spec.k; ++j) alpha[j] = detail::aggregate(s.eta, s.w, j);
  const std::size_t top = static_cast<std::size_t>(std::max_element(alpha.begin(), alpha.end()) - alpha.begin());
  if (alpha[top] < target_max_weight) {
    s.w = detail::target_column(s.eta, s.w, top, target_max_weight);
  } else if (alpha[top] > target_max_weight) {
    const double t = (alpha[top] - target_max_weight) / (alpha[top] - floor);
    for (auto& row : s.w)
      for (double& v : row) v = (1.0 - t) * v + t * floor;
    detail::renormalize_rows(s.w);
  }
  return build_instance(s, spec);
}

/// Seeded instance whose cheapest path carries social utility weight
/// `weight` (remaining columns keep their relative shape).
inline GameInstance sample_instance_min_cost_weight(std::uint64_t seed, const SampleSpec& spec, double weight) {
  if (!(weight > 0.0 && weight < 1.0)) throw std::invalid_argument("weight must lie in (0,1)");
  auto s = draw_raw(seed, spec);
  const std::size_t cheap =
      static_cast<std::size_t>(std::min_element(s.costs.begin(), s.costs.end()) - s.costs.begin());
  s.w = detail::target_column(s.eta, s.w, cheap, weight);
  return build_instance(s, spec);
}

/// Max social utility weight of an instance.
inline double max_utility_weight(const GameInstance& g) {
  const auto& a = g.utility_weights();
  return *std::max_element(a.begin(), a.end());
}

}  // namespace infoshare
