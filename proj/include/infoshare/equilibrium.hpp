#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "game.hpp"
#include "numeric.hpp"
#include "payoff.hpp"

namespace infoshare {

/// Mass below this level is treated as absent when checking equilibrium.
inline constexpr double kMassTol = 1e-9;

struct EquilibriumWitness {
  std::size_t type = 0;
  std::size_t current_path = 0;
  std::size_t better_path = 0;
  double gain = 0.0;
};

struct EquilibriumCheck {
  bool ok = true;
  double max_gain = 0.0;
  std::optional<EquilibriumWitness> witness;  // largest violation when !ok
  explicit operator bool() const noexcept { return ok; }
};

struct EquilibriumResult {
  TypeAssignment assignment;
  FlowVector flow;
  double epsilon = 0.0;     // largest gain any used (type, path) could get by switching
  double tolerance = 0.0;   // acceptance threshold used by the producing solver
  std::size_t iterations = 0;
  bool converged = false;
  bool heuristic = false;   // produced by multi-start dynamics rather than enumeration
  double welfare = 0.0;     // unrestricted social welfare of `flow`
  std::vector<double> epsilon_trace;
};

namespace detail {

inline double gain_of(double best, double current) {
  if (best == current) return 0.0;
  return best - current;
}

struct Profile {
  double epsilon = 0.0;
  double regret = 0.0;
};

inline Profile profile(const TypeAssignment& y, const PayoffMatrix& p) {
  Profile out;
  for (std::size_t i = 0; i < y.types(); ++i) {
    const auto row = p.row(i);
    const double best = *std::max_element(row.begin(), row.end());
    for (std::size_t j = 0; j < y.paths(); ++j) {
      if (y(i, j) <= 0.0) continue;
      const double gap = gain_of(best, row[j]);
      if (y(i, j) > kMassTol) out.epsilon = std::max(out.epsilon, gap);
      out.regret += y(i, j) * gap;
    }
  }
  return out;
}

inline std::size_t best_path(std::span<const double> row) {
  std::size_t b = 0;
  for (std::size_t j = 1; j < row.size(); ++j)
    if (row[j] > row[b]) b = j;
  return b;
}

}  // namespace detail

/// Checks that no type with mass above 1e-9 on a path can gain more than
/// `epsilon` by switching. Reports the largest violation as the witness.
inline EquilibriumCheck is_equilibrium(const GameInstance& g, const TypeAssignment& y,
                                       const Mechanism& mech, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  validate_assignment(g, y);
  const auto p = payoff_matrix(g, y.flow_values(), mech);
  EquilibriumCheck check;
  for (std::size_t i = 0; i < g.m(); ++i) {
    const auto row = p.row(i);
    const std::size_t b = detail::best_path(row);
    for (std::size_t j = 0; j < g.k(); ++j) {
      if (y(i, j) <= kMassTol) continue;
      const double gain = detail::gain_of(row[b], row[j]);
      check.max_gain = std::max(check.max_gain, gain);
      if (gain > epsilon && (!check.witness || gain > check.witness->gain)) {
        check.ok = false;
        check.witness = EquilibriumWitness{i, j, b, gain};
      }
    }
  }
  return check;
}

/// Assignment that places every type on a single path.
inline TypeAssignment corner_assignment(const GameInstance& g, std::size_t path) {
  TypeAssignment y(g.m(), g.k());
  for (std::size_t i = 0; i < g.m(); ++i) y(i, path) = g.eta(i);
  return y;
}

inline EquilibriumResult make_result(const GameInstance& g, TypeAssignment y, const Mechanism& mech,
                                     double tolerance) {
  EquilibriumResult r;
  const auto x = y.flow_values();
  r.epsilon = is_equilibrium(g, y, mech, 0.0).max_gain;
  r.tolerance = tolerance;
  r.converged = r.epsilon <= tolerance;
  r.welfare = social_welfare(g, x);
  r.flow = FlowVector(x);
  r.assignment = std::move(y);
  return r;
}

/// Without a mechanism every user picks the cheapest path; ties go to the
/// smallest index.
inline EquilibriumResult no_incentive_equilibrium(const GameInstance& g) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < g.k(); ++j)
    if (g.cost(j) < g.cost(best)) best = j;
  return make_result(g, corner_assignment(g, best), NoMechanism{}, kSolverTol);
}

struct DynamicsOptions {
  double step = 0.2;
  double decay = 0.999;
  std::size_t max_iters = 10'000;
  std::size_t polish_iters = 300'000;  // projected extragradient iterations after the damped phase
  double tolerance = kSolverTol;
};

namespace detail {

/// Euclidean projection of v onto {y >= 0, sum y = total}.
inline void project_simplex(std::span<double> v, double total) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - total) / static_cast<double>(j + 1);
    if (j + 1 == u.size() || u[j + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

inline bool all_finite(const PayoffMatrix& p) {
  return std::all_of(p.values.begin(), p.values.end(), [](double v) { return std::isfinite(v); });
}

/// y_i <- projection of (y_i + tau * payoff_i) onto the simplex of mass eta_i.
inline TypeAssignment projected_step(const GameInstance& g, const TypeAssignment& y, const PayoffMatrix& p,
                                     double tau) {
  TypeAssignment out(g.m(), g.k());
  std::vector<double> v(g.k());
  for (std::size_t i = 0; i < g.m(); ++i) {
    for (std::size_t j = 0; j < g.k(); ++j) v[j] = y(i, j) + tau * p(i, j);
    project_simplex(v, g.eta(i));
    for (std::size_t j = 0; j < g.k(); ++j) out(i, j) = v[j];
  }
  return out;
}

inline double distance(const TypeAssignment& a, const TypeAssignment& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.types(); ++i)
    for (std::size_t j = 0; j < a.paths(); ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  return std::sqrt(s);
}

inline double distance(const PayoffMatrix& a, const PayoffMatrix& b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.values.size(); ++t) s += (a.values[t] - b.values[t]) * (a.values[t] - b.values[t]);
  return std::sqrt(s);
}

}  // namespace detail

/// Damped best-response dynamics followed by a projected extragradient
/// polish.
///
/// Damped phase: each type moves a fraction `step` of its mass on every
/// non-best path to its current best path; the step decays geometrically.
/// Polish phase (only while payoffs are finite): extragradient steps on the
/// per-type simplexes with the step length cut until
/// tau * |P(y) - P(y')| <= 0.9 |y - y'|.
/// The iterate with the smallest epsilon is returned; `epsilon_trace` records
/// that incumbent's epsilon after every iteration.
inline EquilibriumResult best_response_dynamics(const GameInstance& g, const Mechanism& mech,
                                                TypeAssignment y, DynamicsOptions opt = {}) {
  if (!(opt.step > 0.0 && opt.step <= 1.0)) throw std::invalid_argument("step must lie in (0,1]");
  if (!(opt.decay > 0.0 && opt.decay <= 1.0)) throw std::invalid_argument("decay must lie in (0,1]");
  validate_assignment(g, y);
  auto p = payoff_matrix(g, y.flow_values(), mech);
  auto cur = detail::profile(y, p);
  TypeAssignment best = y;
  double best_eps = cur.epsilon;
  std::vector<double> trace;
  std::size_t it = 0;
  auto record = [&] {
    if (cur.epsilon < best_eps) {
      best_eps = cur.epsilon;
      best = y;
    }
    trace.push_back(best_eps);
  };

  double s = opt.step;
  for (; it < opt.max_iters && best_eps > opt.tolerance; ++it, s *= opt.decay) {
    for (std::size_t i = 0; i < g.m(); ++i) {
      const std::size_t b = detail::best_path(p.row(i));
      for (std::size_t j = 0; j < g.k(); ++j) {
        if (j == b || y(i, j) <= 0.0 || detail::gain_of(p(i, b), p(i, j)) <= 0.0) continue;
        const double move = s * y(i, j);
        y(i, j) -= move;
        y(i, b) += move;
      }
    }
    p = payoff_matrix(g, y.flow_values(), mech);
    cur = detail::profile(y, p);
    record();
  }

  double tau = 1e-3 / std::max(1.0, g.utility_scale());
  for (std::size_t polish = 0; polish < opt.polish_iters && best_eps > opt.tolerance; ++polish, ++it) {
    if (!detail::all_finite(p)) break;
    TypeAssignment next;
    while (true) {
      const auto mid = detail::projected_step(g, y, p, tau);
      const auto pm = payoff_matrix(g, mid.flow_values(), mech);
      const double dy = detail::distance(y, mid);
      if (!detail::all_finite(pm) || (dy > 0.0 && tau * detail::distance(p, pm) > 0.9 * dy)) {
        tau *= 0.5;
        if (tau < 1e-300) break;
        continue;
      }
      next = detail::projected_step(g, y, pm, tau);
      tau *= 1.1;
      break;
    }
    if (next.types() == 0) break;
    y = std::move(next);
    p = payoff_matrix(g, y.flow_values(), mech);
    cur = detail::profile(y, p);
    record();
  }

  auto r = make_result(g, std::move(best), mech, opt.tolerance);
  r.iterations = it;
  r.epsilon_trace = std::move(trace);
  return r;
}

namespace detail {

/// Max-flow split of flow x among types, using only allowed (type, path)
/// pairs. Returns nullopt when no split routes all mass.
inline std::optional<TypeAssignment> split_flow(const GameInstance& g, std::span<const double> x,
                                                const std::vector<char>& allowed) {
  const std::size_t m = g.m();
  const std::size_t k = g.k();
  const std::size_t n = m + k + 2;
  const std::size_t src = m + k;
  const std::size_t dst = m + k + 1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cap(n * n, 0.0);
  std::vector<double> flow(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) cap[src * n + i] = g.eta(i);
  for (std::size_t j = 0; j < k; ++j) cap[(m + j) * n + dst] = x[j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (allowed[i * k + j]) cap[i * n + m + j] = inf;

  double total = 0.0;
  std::vector<std::size_t> parent(n);
  while (true) {
    std::fill(parent.begin(), parent.end(), n);
    parent[src] = src;
    std::vector<std::size_t> queue{src};
    for (std::size_t q = 0; q < queue.size() && parent[dst] == n; ++q) {
      const std::size_t u = queue[q];
      for (std::size_t v = 0; v < n; ++v) {
        if (parent[v] == n && cap[u * n + v] - flow[u * n + v] > 1e-15) {
          parent[v] = u;
          queue.push_back(v);
        }
      }
    }
    if (parent[dst] == n) break;
    double push = inf;
    for (std::size_t v = dst; v != src; v = parent[v])
      push = std::min(push, cap[parent[v] * n + v] - flow[parent[v] * n + v]);
    for (std::size_t v = dst; v != src; v = parent[v]) {
      flow[parent[v] * n + v] += push;
      flow[v * n + parent[v]] -= push;
    }
    total += push;
  }
  if (total < 1.0 - kIdentityTol) return std::nullopt;
  TypeAssignment y(m, k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) y(i, j) = std::max(0.0, flow[i * n + m + j]);
  // Absorb rounding so each row sums to its proportion.
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    std::size_t big = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += y(i, j);
      if (y(i, j) > y(i, big)) big = j;
    }
    y(i, big) += g.eta(i) - row;
  }
  return y;
}

}  // namespace detail

/// Every grid flow that some per-type split turns into an approximate
/// equilibrium, sorted by social welfare ascending (worst first).
///
/// A type may use a path at a grid point when its payoff gap there is at most
/// twice the largest decrease of that same gap towards a one-step grid
/// neighbour (floored at 1e-9). The reported tolerance is the largest accepted
/// gap.
inline std::vector<EquilibriumResult> enumerate_equilibria(const GameInstance& g, const Mechanism& mech,
                                                           double grid_step,
                                                           std::size_t limit = kGridPointLimit) {
  check_mechanism(g, mech);
  const std::size_t n = grid_divisions(grid_step);
  const std::size_t k = g.k();
  const std::size_t m = g.m();
  const std::size_t total = simplex_grid_size(k, n);
  if (total > limit) throw ResourceLimitError(total, limit);
  const std::size_t width = m * k;
  const double unit = 1.0 / static_cast<double>(n);

  auto gaps_at_x = [&](std::span<const double> x, double* out) {
    const auto p = payoff_matrix(g, x, mech);
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = p.row(i);
      const double best = *std::max_element(row.begin(), row.end());
      for (std::size_t j = 0; j < k; ++j) out[i * k + j] = detail::gain_of(best, row[j]);
    }
  };
  auto gaps_at = [&](std::span<const int> c, double* out) {
    std::vector<double> x(k);
    for (std::size_t j = 0; j < k; ++j) x[j] = c[j] * unit;
    gaps_at_x(x, out);
  };
  // A positive accepted gain must also vanish somewhere on a finer sampling
  // of the edges leaving the point; this drops points where the gain only
  // flattens out near a corner.
  constexpr int kSubSteps = 64;
  std::vector<char> allowed(width);
  std::vector<double> xb(k), gb(width);
  std::vector<char> reached(width);
  auto confirm = [&](std::span<const int> c, const double* gap) {
    std::fill(reached.begin(), reached.end(), 0);
    for (std::size_t t = 0; t < width; ++t)
      if (!allowed[t] || gap[t] <= kMassTol) reached[t] = 1;
    for (std::size_t a = 0; a < k; ++a) {
      if (c[a] == 0) continue;
      for (std::size_t b = 0; b < k; ++b) {
        if (a == b) continue;
        if (std::all_of(reached.begin(), reached.end(), [](char r) { return r != 0; })) return;
        for (int s = 1; s <= kSubSteps; ++s) {
          const double shift = unit * s / kSubSteps;
          for (std::size_t j = 0; j < k; ++j) xb[j] = c[j] * unit;
          xb[a] -= shift;
          xb[b] += shift;
          xb[a] = std::max(0.0, xb[a]);
          gaps_at_x(xb, gb.data());
          for (std::size_t t = 0; t < width; ++t) {
            if (reached[t]) continue;
            if (gb[t] <= kMassTol) reached[t] = 1;
          }
        }
      }
    }
  };

  constexpr std::size_t kCacheDoubles = std::size_t{1} << 24;
  const bool cached = total * width <= kCacheDoubles;
  std::vector<double> cache;
  if (cached) {
    cache.resize(total * width);
    std::size_t idx = 0;
    for_each_composition(k, n, [&](std::span<const int> c) { gaps_at(c, &cache[width * idx++]); }, limit);
  }
  const CompositionIndexer indexer(k, n);

  std::vector<EquilibriumResult> out;
  std::vector<double> here(width), there(width);
  std::vector<int> nb(k);
  std::vector<double> swing(width);
  std::size_t idx = 0;
  for_each_composition(
      k, n,
      [&](std::span<const int> c) {
        const double* gap = nullptr;
        if (cached) {
          gap = &cache[width * idx];
        } else {
          gaps_at(c, here.data());
          gap = here.data();
        }
        ++idx;
        std::fill(swing.begin(), swing.end(), 0.0);
        for (std::size_t a = 0; a < k; ++a) {
          if (c[a] == 0) continue;
          for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            std::copy(c.begin(), c.end(), nb.begin());
            --nb[a];
            ++nb[b];
            const double* other = nullptr;
            if (cached) {
              other = &cache[width * indexer.rank(nb)];
            } else {
              gaps_at(nb, there.data());
              other = there.data();
            }
            for (std::size_t t = 0; t < width; ++t) {
              const double d = gap[t] - other[t];
              if (std::isfinite(d)) swing[t] = std::max(swing[t], d);
            }
          }
        }
        // A gain may be accepted as zero when it drops by at least half its
        // value towards some neighbour: linear extrapolation then reaches
        // zero within the cell.
        bool loose = false;
        for (std::size_t t = 0; t < width; ++t) {
          allowed[t] = gap[t] <= std::max(kMassTol, 2.0 * swing[t]) ? 1 : 0;
          loose = loose || (allowed[t] && gap[t] > kMassTol);
        }
        if (loose) {
          confirm(c, gap);
          for (std::size_t t = 0; t < width; ++t) allowed[t] = allowed[t] && reached[t];
        }
        double tol = kMassTol;
        for (std::size_t t = 0; t < width; ++t)
          if (allowed[t]) tol = std::max(tol, gap[t]);
        std::vector<double> x(k);
        for (std::size_t j = 0; j < k; ++j) x[j] = c[j] * unit;
        auto y = detail::split_flow(g, x, allowed);
        if (!y) return;
        auto r = make_result(g, std::move(*y), mech, tol);
        if (!r.converged) return;
        out.push_back(std::move(r));
      },
      limit);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.welfare < b.welfare; });
  return out;
}

/// Random assignment with each type's mass split by a flat Dirichlet draw.
inline TypeAssignment random_assignment(const GameInstance& g, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  TypeAssignment y(g.m(), g.k());
  for (std::size_t i = 0; i < g.m(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.k(); ++j) s += (y(i, j) = e(rng));
    for (std::size_t j = 0; j < g.k(); ++j) y(i, j) *= g.eta(i) / s;
  }
  return y;
}

/// Lowest-welfare converged point over seeded multi-start dynamics; flagged
/// heuristic. Falls back to the lowest-welfare iterate if none converges.
inline EquilibriumResult multi_start_worst(const GameInstance& g, const Mechanism& mech,
                                           std::uint64_t seed, std::size_t starts = 20,
                                           DynamicsOptions opt = {}) {
  std::mt19937_64 rng(splitmix64(seed));
  std::optional<EquilibriumResult> worst;
  for (std::size_t s = 0; s < starts; ++s) {
    auto y0 = s == 0 ? uniform_assignment(g) : random_assignment(g, rng);
    auto r = best_response_dynamics(g, mech, std::move(y0), opt);
    const bool better = !worst || (r.converged && !worst->converged) ||
                        (r.converged == worst->converged && r.welfare < worst->welfare);
    if (better) worst = std::move(r);
  }
  worst->heuristic = true;
  return *worst;
}

/// Grid divisions used for worst-case enumeration at a given path count.
inline std::size_t enumeration_step_points(std::size_t k) { return k <= 4 ? 100 : 20; }

/// Worst-case equilibrium: grid enumeration (step 0.01 for k <= 4, 0.05 for
/// k <= 6), multi-start dynamics beyond that.
inline EquilibriumResult worst_case_equilibrium(const GameInstance& g, const Mechanism& mech,
                                                std::uint64_t seed = 0) {
  if (g.k() <= 6) {
    const double step = 1.0 / static_cast<double>(enumeration_step_points(g.k()));
    auto all = enumerate_equilibria(g, mech, step);
    if (!all.empty()) return std::move(all.front());
  }
  return multi_start_worst(g, mech, seed);
}

}  // namespace infoshare
