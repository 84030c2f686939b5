#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "equilibrium.hpp"
#include "errors.hpp"
#include "game.hpp"
#include "numeric.hpp"
#include "payoff.hpp"

namespace infoshare {

struct OptimumReport {
  double sw_star = 0.0;
  FlowVector argmax_flow;
  double grid_step = 0.0;
  double certified_gap = 0.0;  // bound on (true optimum - sw_star)
};

/// Exhaustive maximization of social welfare over the simplex grid with the
/// given step. Ties keep the first point in lexicographic order.
inline OptimumReport social_optimum_grid(const GameInstance& g, double grid_step,
                                         std::size_t limit = kGridPointLimit) {
  const std::size_t n = grid_divisions(grid_step);
  const std::size_t k = g.k();
  std::vector<double> x(k);
  std::vector<double> best_x(k);
  double best = -std::numeric_limits<double>::infinity();
  for_each_composition(
      k, n,
      [&](std::span<const int> c) {
        for (std::size_t j = 0; j < k; ++j) x[j] = c[j] / static_cast<double>(n);
        const double v = social_welfare(g, x);
        if (v > best) {
          best = v;
          best_x = x;
        }
      },
      limit);
  OptimumReport r;
  r.sw_star = best;
  r.argmax_flow = FlowVector(best_x);
  r.grid_step = 1.0 / static_cast<double>(n);
  // Concavity: SW(x*) - SW(x_g) <= max |dSW/dx_j| * |x* - x_g|_1, and the
  // nearest grid point is within k*step/2 in L1.
  double slope = 0.0;
  for (std::size_t j = 0; j < k; ++j) slope = std::max(slope, g.utility_weight(j));
  slope = slope * g.utility().max_slope() + g.max_cost();
  r.certified_gap = 0.5 * static_cast<double>(k) * r.grid_step * slope;
  return r;
}

struct PoaReport {
  double poa = 0.0;
  double worst_welfare = 0.0;
  double sw_star = 0.0;
  double certified_gap = 0.0;
  std::size_t equilibria = 0;
  EquilibriumResult worst;
};

/// Worst enumerated equilibrium welfare over the grid optimum.
inline PoaReport price_of_anarchy(const GameInstance& g, const Mechanism& mech, double grid_step) {
  PoaReport r;
  const auto opt = social_optimum_grid(g, grid_step);
  r.sw_star = opt.sw_star;
  r.certified_gap = opt.certified_gap;
  auto all = enumerate_equilibria(g, mech, grid_step);
  if (all.empty()) throw std::runtime_error("no equilibrium found on the grid");
  r.equilibria = all.size();
  r.worst = std::move(all.front());
  r.worst_welfare = r.worst.welfare;
  r.poa = r.worst_welfare / r.sw_star;
  return r;
}

struct UpperBoundReport {
  double ub = 0.0;
  int n_max = 0;
  std::size_t k = 0;
  int population = 0;
  double max_weight = 0.0;
  double cost_sum = 0.0;
};

/// k * max_j alpha_j * N_max [1 - (1 - 1/N_max)^(M/k)] - sum_j c_j / k.
inline UpperBoundReport upper_bound_formula(std::size_t k, int n_max, int population, double max_weight,
                                            double cost_sum) {
  UpperBoundReport r;
  r.k = k;
  r.n_max = n_max;
  r.population = population;
  r.max_weight = max_weight;
  r.cost_sum = cost_sum;
  const double kk = static_cast<double>(k);
  const double per_path =
      -static_cast<double>(n_max) * std::expm1(population / kk * std::log1p(-1.0 / n_max));
  r.ub = kk * max_weight * per_path - cost_sum / kk;
  return r;
}

/// Closed-form welfare bound for per-path coverage instances.
inline UpperBoundReport welfare_upper_bound(const GameInstance& g) {
  if (g.utility().mode() != UtilityModel::Mode::per_path) {
    throw UnsupportedModeError("upper bound needs per-path PoI capacities");
  }
  const auto caps = g.utility().capacities();
  const int n_max = *std::max_element(caps.begin(), caps.end());
  double max_weight = 0.0;
  double cost_sum = 0.0;
  for (std::size_t j = 0; j < g.k(); ++j) {
    max_weight = std::max(max_weight, g.utility_weight(j));
    cost_sum += g.cost(j);
  }
  return upper_bound_formula(g.k(), n_max, g.utility().population(), max_weight, cost_sum);
}

}  // namespace infoshare
