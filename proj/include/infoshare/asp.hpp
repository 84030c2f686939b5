#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "air.hpp"
#include "equilibrium.hpp"
#include "game.hpp"
#include "numeric.hpp"
#include "payoff.hpp"
#include "side_payment.hpp"

namespace infoshare {

struct TierOneResult {
  std::vector<std::size_t> order;          // paths by utility weight, descending
  std::vector<double> rearranged_costs;    // c'_j by original index
  std::vector<double> transfers;           // c'_j - c_j by original index
};

/// Reassigns the multiset of costs so that the j-th heaviest path (by social
/// utility weight) carries the j-th largest cost.
inline TierOneResult tier_one_rearrange(const GameInstance& g) {
  TierOneResult r;
  r.order = utility_weight_order(g);
  auto sorted = g.costs();
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  r.rearranged_costs.assign(g.k(), 0.0);
  r.transfers.assign(g.k(), 0.0);
  for (std::size_t p = 0; p < g.k(); ++p) {
    const std::size_t j = r.order[p];
    r.rearranged_costs[j] = sorted[p];
    r.transfers[j] = sorted[p] - g.cost(j);
  }
  return r;
}

/// Sum of t_j = c'_j - c_j evaluated without rounding the individual
/// differences; zero exactly because both sides are the same multiset.
inline double tier_one_net(std::span<const double> rearranged, std::span<const double> original) {
  std::vector<double> terms(rearranged.begin(), rearranged.end());
  for (double c : original) terms.push_back(-c);
  return exact_sum(terms);
}

/// Same game with the tier-one effective costs.
inline GameInstance rearranged_instance(const GameInstance& g, const TierOneResult& t) {
  return g.with_costs(t.rearranged_costs);
}

struct Thresholds {
  double theta = 0.0;
  double tau = 0.0;
};

/// theta* = (c1 + c2) / 2 and tau* = max(0, (c1 + c3) / 2 - c2) for costs
/// listed in non-increasing order.
inline Thresholds closed_form_thresholds(std::span<const double> costs) {
  if (costs.size() < 3) {
    throw std::invalid_argument("thresholds need k >= 3; use two_path_optimal_tau for two paths");
  }
  for (std::size_t j = 1; j < costs.size(); ++j) {
    if (costs[j] > costs[j - 1]) throw std::invalid_argument("costs must be non-increasing");
  }
  Thresholds t;
  t.theta = 0.5 * (costs[0] + costs[1]);
  t.tau = costs[0] + costs[2] - 2.0 * costs[1] <= 0.0 ? 0.0 : 0.5 * (costs[0] + costs[2]) - costs[1];
  return t;
}

/// Rearranged costs listed in tier-one rank order.
inline std::vector<double> ranked_costs(const TierOneResult& t) {
  std::vector<double> c;
  for (std::size_t j : t.order) c.push_back(t.rearranged_costs[j]);
  return c;
}

/// Number of ranked costs strictly above theta; nullopt if theta coincides
/// with a cost (no strict separation).
inline std::optional<std::size_t> omega_for(std::span<const double> ranked, double theta) {
  std::size_t omega = 0;
  for (double c : ranked) {
    if (c == theta) return std::nullopt;
    if (c > theta) ++omega;
  }
  return omega;
}

/// Full two-tier schedule for k >= 3.
inline SidePaymentSchedule make_schedule(const GameInstance& g, double theta, double tau) {
  if (g.k() < 3) throw std::invalid_argument("two-tier schedule needs k >= 3");
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");
  const auto t = tier_one_rearrange(g);
  const auto ranked = ranked_costs(t);
  const auto omega = omega_for(ranked, theta);
  if (!omega) throw std::invalid_argument("theta must strictly separate two costs");
  SidePaymentSchedule s;
  s.order = t.order;
  s.original_costs = g.costs();
  s.rearranged_costs = t.rearranged_costs;
  s.transfers = t.transfers;
  s.omega = *omega;
  s.theta = theta;
  s.tau = tau;
  return s;
}

/// Schedule with the closed-form thresholds.
inline SidePaymentSchedule closed_form_schedule(const GameInstance& g) {
  const auto t = tier_one_rearrange(g);
  const auto th = closed_form_thresholds(ranked_costs(t));
  return make_schedule(g, th.theta, th.tau);
}

/// Single-tier two-path schedule: users on the cheaper path pay tau, which is
/// shared evenly by users on the costlier path.
inline SidePaymentSchedule two_path_schedule(const GameInstance& g, double tau) {
  if (g.k() != 2) throw std::invalid_argument("two-path schedule needs k = 2");
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");
  SidePaymentSchedule s;
  const std::size_t p1 = g.cost(1) > g.cost(0) ? 1 : 0;
  s.order = {p1, 1 - p1};
  s.original_costs = g.costs();
  s.rearranged_costs = g.costs();
  s.transfers = {0.0, 0.0};
  s.omega = 1;
  s.theta = 0.5 * (g.cost(0) + g.cost(1));
  s.tau = tau;
  s.two_path = true;
  return s;
}

struct TwoPathAspProblem {
  std::size_t high_path = 0;  // P1, the costlier path
  std::size_t low_path = 1;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double cost_gap = 0.0;      // c1 - c2
  double tau_star = 0.0;
  double x_low = 0.0;         // xL at tau_star
  double x_high = 1.0;        // xH at tau_star
  double objective = 0.0;
  bool fallback = false;      // tau = c1/2 won
  std::size_t feasible_candidates = 0;

  /// Equilibrium flow (tau/c1, 1 - tau/c1) in original path order.
  std::vector<double> flow() const {
    std::vector<double> x(2);
    const double x1 = cost_gap > 0.0 ? tau_star / cost_gap : 0.5;
    x[high_path] = x1;
    x[low_path] = 1.0 - x1;
    return x;
  }
};

struct TwoPathOptions {
  std::size_t grid_points = 10'000;
  bool refine = true;
  std::vector<double> tau_grid;             // explicit candidates replace the uniform grid
  std::optional<double> alpha1, alpha2;     // override the aggregate utility weights
};

/// Threshold optimization for two paths: maximize
/// alpha1 U(tau/c1) + alpha2 U(1 - tau/c1) - tau over tau such that
/// c1 xL <= tau <= c1 xH, where xL and xH solve U_1(x, 1-x) = tau and
/// U_2(x, 1-x) = tau for the types with the largest and smallest weight on P1.
inline TwoPathAspProblem two_path_optimal_tau(const GameInstance& g, TwoPathOptions opt = {}) {
  if (g.k() != 2) throw std::invalid_argument("two-path threshold problem needs k = 2");
  TwoPathAspProblem pr;
  pr.high_path = g.cost(1) > g.cost(0) ? 1 : 0;
  pr.low_path = 1 - pr.high_path;
  const std::size_t a = pr.high_path;
  const std::size_t b = pr.low_path;
  pr.alpha1 = opt.alpha1.value_or(g.utility_weight(a));
  pr.alpha2 = opt.alpha2.value_or(g.utility_weight(b));
  pr.cost_gap = g.cost(a) - g.cost(b);
  const double c1 = pr.cost_gap;

  std::size_t hi_type = 0;
  std::size_t lo_type = 0;
  for (std::size_t i = 1; i < g.m(); ++i) {
    if (g.weight(i, a) > g.weight(hi_type, a)) hi_type = i;
    if (g.weight(i, a) < g.weight(lo_type, a)) lo_type = i;
  }
  auto curve = [&](std::size_t type, double x) {
    return g.weight(type, a) * g.U(a, x) + g.weight(type, b) * g.U(b, 1.0 - x);
  };
  auto solve_low = [&](double tau) {
    const double f0 = curve(hi_type, 0.0) - tau;
    const double fh = curve(hi_type, 0.5) - tau;
    if (f0 >= 0.0) return 0.0;
    if (fh <= 0.0) return 0.5;
    return bisect([&](double x) { return curve(hi_type, x); }, 0.0, 0.5, tau);
  };
  auto solve_high = [&](double tau) {
    const double fh = curve(lo_type, 0.5) - tau;
    const double f1 = curve(lo_type, 1.0) - tau;
    if (f1 >= 0.0) return 1.0;
    if (fh <= 0.0) return 0.5;
    return bisect([&](double x) { return curve(lo_type, x); }, 0.5, 1.0, tau);
  };
  auto objective = [&](double tau) {
    return pr.alpha1 * g.U(a, tau / c1) + pr.alpha2 * g.U(b, 1.0 - tau / c1) - tau;
  };
  auto feasible = [&](double tau, double& xl, double& xh) {
    if (tau < 0.0 || tau > c1) return false;
    xl = solve_low(tau);
    xh = solve_high(tau);
    return c1 * xl <= tau && tau <= c1 * xh;
  };

  if (!(c1 > 0.0)) {
    // Equal costs: no payment is needed and every flow is an equilibrium.
    pr.tau_star = 0.0;
    pr.objective = pr.alpha1 * g.U(a, 0.5) + pr.alpha2 * g.U(b, 0.5);
    return pr;
  }

  const double cap = std::min(g.U(a, 0.5), g.U(b, 0.5));
  std::vector<double> grid = opt.tau_grid;
  if (grid.empty()) {
    // tau <= c1 xH <= c1, so candidates above min(c1, cap) are never feasible.
    const double top = std::min(c1, cap);
    const std::size_t n = std::max<std::size_t>(opt.grid_points, 2);
    for (std::size_t t = 0; t < n; ++t) grid.push_back(top * static_cast<double>(t) / static_cast<double>(n - 1));
  }

  double best = -std::numeric_limits<double>::infinity();
  double best_tau = 0.0;
  for (double tau : grid) {
    double xl = 0.0;
    double xh = 0.0;
    if (tau > cap || !feasible(tau, xl, xh)) continue;
    ++pr.feasible_candidates;
    const double v = objective(tau);
    if (v > best) {
      best = v;
      best_tau = tau;
      pr.x_low = xl;
      pr.x_high = xh;
    }
  }

  if (opt.refine && pr.feasible_candidates > 0 && grid.size() > 1) {
    const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    const double lo = std::max(0.0, best_tau - h);
    const double hi = std::min(std::min(c1, cap), best_tau + h);
    const double t = golden_section_max(objective, lo, hi, 1e-12 * std::max(1.0, c1));
    double xl = 0.0;
    double xh = 0.0;
    if (feasible(t, xl, xh) && objective(t) > best) {
      best = objective(t);
      best_tau = t;
      pr.x_low = xl;
      pr.x_high = xh;
    }
  }

  pr.fallback = false;
  const double half = 0.5 * c1;
  const double v_half = objective(half);
  if (pr.feasible_candidates == 0 || v_half > best) {
    best = v_half;
    best_tau = half;
    pr.fallback = true;
    pr.x_low = solve_low(half);
    pr.x_high = solve_high(half);
  }
  pr.tau_star = best_tau;
  pr.objective = best;
  return pr;
}

/// Equilibrium flow when charged mass is split as `split` over charged ranks
/// (omega+1..k). Returns nullopt when a rewarded path has
/// c'_i <= c'_{omega+1} + tau, where the closed form does not apply.
inline std::optional<std::vector<double>> family_flow(const SidePaymentSchedule& s,
                                                      std::span<const double> split) {
  const std::size_t k = s.k();
  const std::size_t w = s.omega;
  if (split.size() != k - w) throw std::invalid_argument("split length must equal charged path count");
  const double pivot = s.pivot_cost();
  const double ctot = s.rewarded_cost_total();
  double gsum = 0.0;
  for (std::size_t r = w; r < k; ++r) gsum += split[r - w] * s.charge(s.order[r]);
  double ratio = 0.0;
  for (std::size_t r = 0; r < w; ++r) {
    const double c = s.rearranged_costs[s.order[r]];
    const double d = c - pivot - s.tau;
    if (!(d > 0.0)) return std::nullopt;
    ratio += c / (ctot * d);
  }
  const double charged_mass = 1.0 / (1.0 + gsum * ratio);
  std::vector<double> x(k, 0.0);
  for (std::size_t r = 0; r < w; ++r) {
    const double c = s.rearranged_costs[s.order[r]];
    x[s.order[r]] = charged_mass * gsum * c / (ctot * (c - pivot - s.tau));
  }
  for (std::size_t r = w; r < k; ++r) x[s.order[r]] = charged_mass * split[r - w];
  return x;
}

struct AspEquilibria {
  EquilibriumResult representative;
  EquilibriumResult worst;
  std::vector<EquilibriumResult> family;   // every checked equilibrium of the charged-split grid
  double min_top_flow = 1.0;               // smallest flow on the top-ranked path over `family`
  bool closed_form = true;                 // false when the family formula did not apply
};

/// Splits aggregate flow evenly within each type (all types rank paths the
/// same way under side payments).
inline TypeAssignment proportional_assignment(const GameInstance& g, std::span<const double> x) {
  TypeAssignment y(g.m(), g.k());
  for (std::size_t i = 0; i < g.m(); ++i)
    for (std::size_t j = 0; j < g.k(); ++j) y(i, j) = g.eta(i) * x[j];
  return y;
}

/// Default charged-simplex grid step: 0.02 up to five paths, 0.05 beyond.
inline double default_charged_step(std::size_t k) { return k <= 5 ? 0.02 : 0.05; }

/// Equilibria induced by a schedule. Two paths: the closed form
/// (tau/c1, 1 - tau/c1). More paths: every charged split gives an equilibrium
/// with rewarded flows fixed by the split; the uniform split is the
/// representative and the charged-simplex grid supplies the worst case.
inline AspEquilibria asp_equilibrium(const GameInstance& g, const SidePaymentSchedule& s,
                                     double charged_step = 0.0, double epsilon = 1e-9) {
  if (s.k() != g.k()) throw std::invalid_argument("schedule does not match instance");
  const Mechanism mech = s;
  AspEquilibria out;
  auto finish = [&](std::vector<double> x) {
    auto y = proportional_assignment(g, x);
    return make_result(g, std::move(y), mech, epsilon * std::max(1.0, g.max_cost()));
  };

  if (s.two_path) {
    const std::size_t a = s.order[0];
    const std::size_t b = s.order[1];
    const double gap = s.rearranged_costs[a] - s.rearranged_costs[b];
    if (!(gap > 0.0) || s.tau > gap) throw std::invalid_argument("two-path schedule needs 0 <= tau <= c1 - c2");
    std::vector<double> x(2);
    x[a] = s.tau / gap;
    x[b] = 1.0 - x[a];
    out.representative = finish(x);
    out.worst = out.representative;
    out.family.push_back(out.representative);
    out.min_top_flow = x[a];
    return out;
  }

  if (!s.tier_two_active()) {
    out.closed_form = false;
    auto all = enumerate_equilibria(g, mech, 1.0 / static_cast<double>(enumeration_step_points(g.k())));
    out.representative = best_response_dynamics(g, mech, uniform_assignment(g));
    if (!all.empty()) {
      out.worst = all.front();
      for (const auto& r : all) out.min_top_flow = std::min(out.min_top_flow, r.flow[s.order[0]]);
      out.family = std::move(all);
    } else {
      out.worst = out.representative;
    }
    return out;
  }

  const std::size_t charged = s.k() - s.omega;
  std::vector<double> uniform(charged, 1.0 / static_cast<double>(charged));
  auto rep = family_flow(s, uniform);
  if (!rep) {
    out.closed_form = false;
    auto all = enumerate_equilibria(g, mech, 1.0 / static_cast<double>(enumeration_step_points(g.k())));
    out.representative = best_response_dynamics(g, mech, uniform_assignment(g));
    if (!all.empty()) {
      out.worst = all.front();
      for (const auto& r : all) out.min_top_flow = std::min(out.min_top_flow, r.flow[s.order[0]]);
      out.family = std::move(all);
    } else {
      out.worst = out.representative;
    }
    return out;
  }
  out.representative = finish(*rep);

  const double step = charged_step > 0.0 ? charged_step : default_charged_step(g.k());
  const std::size_t n = grid_divisions(step);
  std::optional<EquilibriumResult> worst;
  for_each_composition(charged, n, [&](std::span<const int> c) {
    std::vector<double> split(charged);
    for (std::size_t t = 0; t < charged; ++t) split[t] = c[t] / static_cast<double>(n);
    auto x = family_flow(s, split);
    auto r = finish(*x);
    out.min_top_flow = std::min(out.min_top_flow, r.flow[s.order[0]]);
    if (!worst || r.welfare < worst->welfare) worst = r;
    out.family.push_back(std::move(r));
  });
  out.worst = *worst;
  return out;
}

/// Worst-case welfare over the charged-split family, or nullopt when the
/// closed form does not apply for this schedule.
inline std::optional<double> family_worst_welfare(const GameInstance& g, const SidePaymentSchedule& s,
                                                  double charged_step) {
  if (!s.tier_two_active()) return std::nullopt;
  const std::size_t charged = s.k() - s.omega;
  const std::size_t n = grid_divisions(charged_step);
  double worst = std::numeric_limits<double>::infinity();
  bool ok = true;
  std::vector<double> split(charged);
  for_each_composition(charged, n, [&](std::span<const int> c) {
    if (!ok) return;
    for (std::size_t t = 0; t < charged; ++t) split[t] = c[t] / static_cast<double>(n);
    auto x = family_flow(s, split);
    if (!x) {
      ok = false;
      return;
    }
    worst = std::min(worst, social_welfare(g, *x));
  });
  if (!ok) return std::nullopt;
  return worst;
}

struct ThresholdSearchOptions {
  std::vector<double> theta_grid;   // empty: midpoints between consecutive distinct costs
  std::vector<double> tau_grid;     // empty: tau_points values on [0, c'_omega - c'_{omega+1})
  std::size_t tau_points = 40;
  double charged_step = 0.0;        // 0: default_charged_step(k)
};

struct ThresholdSearchResult {
  double tau = 0.0;
  double theta = 0.0;
  std::size_t omega = 0;
  double worst_welfare = -std::numeric_limits<double>::infinity();
  double closed_form_worst_welfare = -std::numeric_limits<double>::infinity();
  std::size_t candidates = 0;
  SidePaymentSchedule schedule;
};

/// Max over (tau, theta) candidates of the worst-case welfare over the
/// induced equilibrium family. The closed-form thresholds are always a
/// candidate; candidates whose family is undefined are skipped. For two paths
/// this reduces to the two-path threshold problem on the tau grid.
inline ThresholdSearchResult optimize_thresholds(const GameInstance& g, ThresholdSearchOptions opt = {}) {
  ThresholdSearchResult best;
  if (g.k() == 2) {
    TwoPathOptions t;
    t.refine = false;
    t.tau_grid = opt.tau_grid;
    if (t.tau_grid.empty()) t.grid_points = std::max<std::size_t>(opt.tau_points, 2);
    const auto pr = two_path_optimal_tau(g, t);
    best.tau = pr.tau_star;
    best.schedule = two_path_schedule(g, pr.tau_star);
    best.theta = best.schedule.theta;
    best.omega = 1;
    best.worst_welfare = social_welfare(g, pr.flow());
    best.candidates = pr.feasible_candidates;
    return best;
  }

  const double step = opt.charged_step > 0.0 ? opt.charged_step : default_charged_step(g.k());
  const auto tier = tier_one_rearrange(g);
  const auto ranked = ranked_costs(tier);
  const auto th = closed_form_thresholds(ranked);

  auto consider = [&](double theta, double tau, bool is_closed_form) {
    const auto omega = omega_for(ranked, theta);
    if (!omega || *omega == 0 || *omega >= g.k()) return;
    const auto s = make_schedule(g, theta, tau);
    const auto w = family_worst_welfare(g, s, step);
    if (!w) return;
    ++best.candidates;
    if (is_closed_form) best.closed_form_worst_welfare = *w;
    if (*w > best.worst_welfare) {
      best.worst_welfare = *w;
      best.tau = tau;
      best.theta = theta;
      best.omega = *omega;
      best.schedule = s;
    }
  };

  consider(th.theta, th.tau, true);
  std::vector<double> thetas = opt.theta_grid;
  if (thetas.empty()) {
    for (std::size_t r = 0; r + 1 < ranked.size(); ++r)
      if (ranked[r] > ranked[r + 1]) thetas.push_back(0.5 * (ranked[r] + ranked[r + 1]));
  }
  for (double theta : thetas) {
    const auto omega = omega_for(ranked, theta);
    if (!omega || *omega == 0 || *omega >= g.k()) continue;
    std::vector<double> taus = opt.tau_grid;
    if (taus.empty()) {
      const double span = ranked[*omega - 1] - ranked[*omega];
      for (std::size_t t = 0; t < opt.tau_points; ++t)
        taus.push_back(span * static_cast<double>(t) / static_cast<double>(opt.tau_points));
    }
    for (double tau : taus) consider(theta, tau, false);
  }
  if (best.candidates == 0) best.schedule = make_schedule(g, th.theta, th.tau);
  return best;
}

struct LedgerEntry {
  std::size_t path = 0;
  double mass = 0.0;
  double tier1_per_user = 0.0;     // t_j, positive = user pays
  double tier1_total = 0.0;        // x_j t_j
  double tier2_charge_per_user = 0.0;
  double tier2_reward_per_user = 0.0;
  double tier2_charged = 0.0;      // x_j * charge
  double tier2_rewarded = 0.0;     // x_j * reward
};

struct BudgetLedger {
  std::vector<LedgerEntry> entries;      // paths with any non-zero item
  double tier1_per_capita_net = 0.0;     // sum_j t_j, exact
  double tier1_mass_weighted_net = 0.0;  // sum_j x_j t_j
  double tier2_charged_total = 0.0;
  double tier2_rewarded_total = 0.0;
  double gamma = 0.0;

  double tier2_net() const { return tier2_charged_total - tier2_rewarded_total; }
};

/// Itemized side payments at flow x.
inline BudgetLedger budget_ledger(const SidePaymentSchedule& s, std::span<const double> x) {
  if (x.size() != s.k()) throw std::invalid_argument("flow length does not match schedule");
  BudgetLedger led;
  led.tier1_per_capita_net = tier_one_net(s.rearranged_costs, s.original_costs);
  led.gamma = s.gamma_pool(x);
  std::vector<double> weighted;
  std::vector<double> charged;
  std::vector<double> rewarded;
  for (std::size_t j = 0; j < s.k(); ++j) {
    LedgerEntry e;
    e.path = j;
    e.mass = x[j];
    e.tier1_per_user = s.transfers[j];
    e.tier1_total = x[j] * s.transfers[j];
    e.tier2_charge_per_user = s.charge(j);
    e.tier2_charged = x[j] * e.tier2_charge_per_user;
    if (x[j] > 0.0) {
      e.tier2_reward_per_user = s.reward(j, x);
      e.tier2_rewarded = x[j] * e.tier2_reward_per_user;
    }
    weighted.push_back(e.tier1_total);
    charged.push_back(e.tier2_charged);
    rewarded.push_back(e.tier2_rewarded);
    if (e.tier1_per_user != 0.0 || e.tier2_charged != 0.0 || e.tier2_rewarded != 0.0) {
      led.entries.push_back(e);
    }
  }
  led.tier1_mass_weighted_net = exact_sum(weighted);
  led.tier2_charged_total = exact_sum(charged);
  led.tier2_rewarded_total = exact_sum(rewarded);
  return led;
}

}  // namespace infoshare
