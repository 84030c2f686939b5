#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "equilibrium.hpp"
#include "fraction_plan.hpp"
#include "game.hpp"
#include "indifference.hpp"
#include "payoff.hpp"

namespace infoshare {

/// Single-type two-path design. Path 0 is P1 (the costlier path, weight w0),
/// path 1 is P2. Below w0 = 1 the fractions follow the flow; at w0 = 1 they
/// are fixed and tilted toward P1 by (c1 - c2) / (2 U(1)).
inline PenaltyFractionPlan two_path_single_type_fractions(double w0, double c1, double c2,
                                                          const UtilityModel& utility) {
  if (!(w0 >= 0.0 && w0 <= 1.0)) throw std::invalid_argument("w0 must lie in [0,1]");
  const double u1 = utility.scale();
  MatryoshkaRound r;
  r.lambda = 1;
  r.path = 0;
  r.remaining = {1};
  if (c2 <= c1) {
    r.low = {1};
    r.psi = 1;
  } else {
    r.high = {1};
  }
  r.normalized_weight = w0;
  if (w0 == 1.0) {
    r.rule = RoundRule::static_split;
    r.cost_gap = c1 - c2;
    r.shift = r.cost_gap / (2.0 * u1);
  }
  return PenaltyFractionPlan(PlanKind::two_path_single_type, 2, {0, 1}, {r}, u1);
}

namespace detail {

/// Builds round `pos` of the nested design over `order` for dominant type mu.
inline MatryoshkaRound build_round(const GameInstance& g, const std::vector<std::size_t>& order,
                                   std::size_t pos, std::size_t mu, double u1) {
  MatryoshkaRound r;
  r.lambda = pos + 1;
  r.path = order[pos];
  const double c_lambda = g.cost(r.path);
  for (std::size_t p = pos + 1; p < order.size(); ++p) {
    const std::size_t j = order[p];
    r.remaining.push_back(j);
    (g.cost(j) <= c_lambda ? r.low : r.high).push_back(j);
  }
  for (std::size_t j : r.low) {
    if (!r.psi || g.cost(j) < g.cost(*r.psi) || (g.cost(j) == g.cost(*r.psi) && j < *r.psi)) r.psi = j;
  }
  if (!r.psi) return r;

  r.cost_gap = c_lambda - g.cost(*r.psi);
  const double wl = g.weight(mu, r.path);
  const double wp = g.weight(mu, *r.psi);
  if (wl + wp <= 0.0) return r;
  r.normalized_weight = wl / (wl + wp);
  const IndifferenceFunction fn(*r.normalized_weight, g.utility(), r.path, *r.psi);
  double root = 0.0;
  const double lo = std::max(0.0, 1.0 - g.eta(mu));
  if (has_root_in(fn, r.cost_gap, lo, 0.25, &root)) {
    r.rule = RoundRule::static_split;
    r.root = root;
    r.shift = r.cost_gap / (2.0 * u1);
  }
  return r;
}

}  // namespace detail

/// Two-type two-path design. The majority type (relabelled when the listed
/// first type holds at most half the population) decides between the fixed
/// and the flow-dependent fractions. P1 is the costlier path.
inline PenaltyFractionPlan two_path_two_type_fractions(const GameInstance& g) {
  if (g.k() != 2 || g.m() != 2) throw std::invalid_argument("two-path two-type design needs k = 2 and m = 2");
  const std::size_t mu = g.eta(0) > 0.5 ? 0 : 1;
  const std::size_t p1 = g.cost(1) > g.cost(0) ? 1 : 0;
  const std::vector<std::size_t> order{p1, 1 - p1};
  const double u1 = g.utility_scale();
  return PenaltyFractionPlan(PlanKind::two_path_two_type, 2, order,
                             {detail::build_round(g, order, 0, mu, u1)}, u1);
}

/// Paths sorted by social utility weight, descending; ties by index.
inline std::vector<std::size_t> utility_weight_order(const GameInstance& g) {
  std::vector<std::size_t> order(g.k());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.utility_weight(a) > g.utility_weight(b);
  });
  return order;
}

/// Index of the most populous type; ties by index.
inline std::size_t dominant_type(const GameInstance& g) {
  std::size_t mu = 0;
  for (std::size_t i = 1; i < g.m(); ++i)
    if (g.eta(i) > g.eta(mu)) mu = i;
  return mu;
}

/// Nested design for k paths: each round splits the remaining paths into the
/// current path (plus costlier ones) against the cheaper ones, stopping at the
/// first round whose indifference equation has a root in [1 - eta_mu, 1/4].
inline PenaltyFractionPlan matryoshka_fractions(const GameInstance& g) {
  const auto order = utility_weight_order(g);
  const std::size_t mu = dominant_type(g);
  const double u1 = g.utility_scale();
  std::vector<MatryoshkaRound> rounds;
  for (std::size_t pos = 0; pos + 1 < g.k(); ++pos) {
    rounds.push_back(detail::build_round(g, order, pos, mu, u1));
    if (rounds.back().rule == RoundRule::static_split) break;
  }
  return PenaltyFractionPlan(PlanKind::matryoshka, g.k(), order, std::move(rounds), u1);
}

struct AirOutcome {
  EquilibriumResult equilibrium;
  double welfare = 0.0;           // unrestricted welfare of the equilibrium flow
  double realized_welfare = 0.0;  // sum of fraction-reduced payoffs
};

/// Equilibrium reached by damped dynamics from the uniform split, with both
/// welfare accountings.
inline AirOutcome air_equilibrium_welfare(const GameInstance& g, const PenaltyFractionPlan& plan,
                                          DynamicsOptions opt = {}) {
  const Mechanism mech = plan;
  AirOutcome out;
  out.equilibrium = best_response_dynamics(g, mech, uniform_assignment(g), opt);
  out.welfare = out.equilibrium.welfare;
  out.realized_welfare = realized_welfare(g, out.equilibrium.assignment, mech);
  return out;
}

}  // namespace infoshare
