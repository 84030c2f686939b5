#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "fraction_plan.hpp"
#include "game.hpp"
#include "side_payment.hpp"

namespace infoshare {

struct NoMechanism {};

/// Payoff adjustment applied on top of the base game.
using Mechanism = std::variant<NoMechanism, PenaltyFractionPlan, SidePaymentSchedule>;

inline const char* mechanism_name(const Mechanism& mech) {
  switch (mech.index()) {
    case 0: return "none";
    case 1: return "air";
    default: return "asp";
  }
}

inline void check_mechanism(const GameInstance& g, const Mechanism& mech) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (!std::is_same_v<T, NoMechanism>) {
          if (m.k() != g.k()) throw std::invalid_argument("mechanism references unknown paths");
        }
      },
      mech);
}

/// Row-major m x k payoff table at a fixed flow.
struct PayoffMatrix {
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * k + j]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * k, k}; }
};

/// Payoffs of every (type, path) pair at flow x.
inline PayoffMatrix payoff_matrix(const GameInstance& g, std::span<const double> x,
                                  const Mechanism& mech) {
  check_dimension(g, x.size());
  check_mechanism(g, mech);
  std::vector<double> u_path(g.k());
  for (std::size_t j = 0; j < g.k(); ++j) u_path[j] = g.U(j, x[j]);

  std::vector<double> scale(g.k(), 1.0);
  std::vector<double> cost = g.costs();
  if (const auto* plan = std::get_if<PenaltyFractionPlan>(&mech)) {
    scale = plan->evaluate(x);
  } else if (const auto* sched = std::get_if<SidePaymentSchedule>(&mech)) {
    cost = sched->effective_costs(x);
  }

  PayoffMatrix p{g.m(), g.k(), std::vector<double>(g.m() * g.k())};
  for (std::size_t i = 0; i < g.m(); ++i) {
    double u = 0.0;
    for (std::size_t j = 0; j < g.k(); ++j) u += g.weight(i, j) * u_path[j];
    for (std::size_t j = 0; j < g.k(); ++j) p.values[i * g.k() + j] = scale[j] * u - cost[j];
  }
  return p;
}

/// Payoff of a type-i user choosing path j at flow x under the mechanism.
inline double type_payoff(const GameInstance& g, std::size_t type, std::size_t path,
                          std::span<const double> x, const Mechanism& mech = NoMechanism{}) {
  if (type >= g.m()) throw std::invalid_argument("type index out of range");
  if (path >= g.k()) throw std::invalid_argument("path index out of range");
  check_mechanism(g, mech);
  const double u = type_utility(g, type, x);
  if (const auto* plan = std::get_if<PenaltyFractionPlan>(&mech)) {
    return plan->evaluate(x)[path] * u - g.cost(path);
  }
  if (const auto* sched = std::get_if<SidePaymentSchedule>(&mech)) {
    return u - sched->effective_costs(x)[path];
  }
  return u - g.cost(path);
}

/// Sum of payoffs users actually receive: sum_ij y_ij * payoff(i, j). Under
/// AIR this is the fraction-weighted welfare; with no mechanism it equals the
/// social welfare of the induced flow.
inline double realized_welfare(const GameInstance& g, const TypeAssignment& y,
                               const Mechanism& mech) {
  validate_assignment(g, y);
  const auto x = y.flow_values();
  const auto p = payoff_matrix(g, x, mech);
  double total = 0.0;
  for (std::size_t i = 0; i < g.m(); ++i)
    for (std::size_t j = 0; j < g.k(); ++j)
      if (y(i, j) > 0.0) total += y(i, j) * p(i, j);
  return total;
}

}  // namespace infoshare
