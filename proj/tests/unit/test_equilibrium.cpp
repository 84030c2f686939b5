#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "generators.hpp"
#include "infoshare/air.hpp"
#include "infoshare/asp.hpp"
#include "infoshare/equilibrium.hpp"
#include "infoshare/indifference.hpp"

using namespace infoshare;

namespace {

GameInstance two_path(double c1, double c2, std::vector<std::vector<double>> w, std::vector<double> eta,
                      UtilityModel u = UtilityModel::common_coverage(3875, 2000)) {
  std::vector<UserType> types;
  for (std::size_t i = 0; i < w.size(); ++i) types.push_back({static_cast<int>(i + 1), eta[i], w[i]});
  return GameInstance({{1, c1, std::nullopt}, {2, c2, std::nullopt}}, std::move(types), std::move(u));
}

TypeAssignment flow_assignment(const GameInstance& g, std::vector<double> x) {
  TypeAssignment y(g.m(), g.k());
  for (std::size_t i = 0; i < g.m(); ++i)
    for (std::size_t j = 0; j < g.k(); ++j) y(i, j) = g.eta(i) * x[j];
  return y;
}

}  // namespace

TEST(IsEquilibrium, ZeroCostCornerWithoutMechanism) {
  gen::Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = gen::coverage_instance(rng, gen::pick(rng, 2, 5), gen::pick(rng, 1, 4), 10.0);
    std::size_t zero = 0;
    for (std::size_t j = 0; j < g.k(); ++j)
      if (g.cost(j) == 0.0) zero = j;
    EXPECT_TRUE(is_equilibrium(g, corner_assignment(g, zero), NoMechanism{}, 0.0));
  }
}

TEST(IsEquilibrium, TwoPathSidePaymentClosedFormAndPerturbation) {
  const auto g = two_path(4.0, 0.0, {{0.6, 0.4}}, {1.0});
  const auto s = two_path_schedule(g, 1.0);
  const auto y = flow_assignment(g, {0.25, 0.75});
  const auto ok = is_equilibrium(g, y, s, 1e-9);
  EXPECT_TRUE(ok.ok);
  EXPECT_FALSE(ok.witness.has_value());
  const auto bad = is_equilibrium(g, flow_assignment(g, {0.30, 0.70}), s, 1e-9);
  ASSERT_FALSE(bad.ok);
  ASSERT_TRUE(bad.witness.has_value());
  EXPECT_GT(bad.witness->gain, 0.0);
  EXPECT_EQ(bad.witness->current_path, 0u);
  EXPECT_EQ(bad.witness->better_path, 1u);
}

TEST(IsEquilibrium, RejectsNegativeEpsilon) {
  const auto g = two_path(1.0, 0.0, {{0.5, 0.5}}, {1.0});
  EXPECT_THROW(is_equilibrium(g, corner_assignment(g, 1), NoMechanism{}, -1.0), std::invalid_argument);
}

TEST(NoIncentive, CornerOnCheapestPathWithTieBreak) {
  const auto u = UtilityModel::common_coverage(3875, 2000);
  const auto g = two_path(0.0, 5.0, {{0.3, 0.7}}, {1.0});
  const auto r = no_incentive_equilibrium(g);
  EXPECT_EQ(r.flow[0], 1.0);
  EXPECT_NEAR(r.welfare, 0.3 * u(0, 1.0), 1e-9);
  const GameInstance h({{1, 0.0, std::nullopt}, {2, 0.0, std::nullopt}, {3, 7.0, std::nullopt}},
                       {{1, 1.0, {0.2, 0.3, 0.5}}}, u);
  EXPECT_EQ(no_incentive_equilibrium(h).flow[0], 1.0);
}

TEST(Dynamics, NoMechanismConvergesToCheapestCorner) {
  gen::Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = gen::coverage_instance(rng, gen::pick(rng, 2, 5), gen::pick(rng, 1, 4), 10.0);
    const auto r = best_response_dynamics(g, NoMechanism{}, gen::assignment(rng, g));
    ASSERT_TRUE(r.converged);
    const auto base = no_incentive_equilibrium(g);
    for (std::size_t j = 0; j < g.k(); ++j) EXPECT_NEAR(r.flow[j], base.flow[j], 1e-6);
  }
}

TEST(Dynamics, TwoPathSidePaymentAtHalfCostConvergesToEvenSplit) {
  const auto g = two_path(6.0, 0.0, {{0.7, 0.3}, {0.2, 0.8}}, {0.5, 0.5});
  const auto s = two_path_schedule(g, 3.0);
  const auto r = best_response_dynamics(g, s, corner_assignment(g, 1));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.flow[0], 0.5, 1e-6);
}

TEST(Dynamics, FlowFractionsConvergeToIndifferenceRoot) {
  // One type, w0 < 1: the equilibrium makes the type indifferent, which is
  // the upper root of G(x) = c1 with G built on the normalized weight.
  const auto u = UtilityModel::common_coverage(3875, 2000);
  for (double w0 : {0.55, 0.7, 0.9}) {
    const double c1 = 0.01 * u.scale();
    const auto g = two_path(c1, 0.0, {{w0, 1.0 - w0}}, {1.0}, u);
    const auto plan = two_path_single_type_fractions(w0, g.cost(0), g.cost(1), u);
    const auto r = best_response_dynamics(g, plan, uniform_assignment(g));
    ASSERT_TRUE(r.converged) << r.epsilon;
    // Indifference at flow (x, 1-x): (1 - 2x) U_type(x, 1-x) = c1 with x the flow on path 1.
    const IndifferenceFunction fn(w0, u);
    const auto roots = solve_indifference(fn, c1);
    bool near = std::abs(r.flow[0] - roots.high) <= 1e-4 || (roots.low && std::abs(r.flow[0] - *roots.low) <= 1e-4);
    EXPECT_TRUE(near) << "w0=" << w0 << " x1=" << r.flow[0] << " root=" << roots.high;
  }
}

TEST(Dynamics, ResultPassesCheckAtReportedEpsilonAndTraceIsMonotone) {
  gen::Rng rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = gen::coverage_instance(rng, gen::pick(rng, 2, 4), gen::pick(rng, 1, 3), 3.0);
    const auto plan = matryoshka_fractions(g);
    const auto r = best_response_dynamics(g, plan, uniform_assignment(g));
    EXPECT_TRUE(is_equilibrium(g, r.assignment, plan, r.epsilon).ok);
    if (r.converged) {
      const std::size_t n = r.epsilon_trace.size();
      for (std::size_t t = n > 100 ? n - 100 : 1; t < n; ++t) {
        EXPECT_LE(r.epsilon_trace[t], r.epsilon_trace[t - 1]);
      }
    }
  }
}

TEST(Dynamics, RejectsBadStep) {
  const auto g = two_path(1.0, 0.0, {{0.5, 0.5}}, {1.0});
  DynamicsOptions opt;
  opt.step = 0.0;
  EXPECT_THROW(best_response_dynamics(g, NoMechanism{}, uniform_assignment(g), opt), std::invalid_argument);
}

TEST(Enumeration, UniqueCheapPathGivesSingleCorner) {
  const auto g = two_path(0.0, 5.0, {{0.3, 0.7}}, {1.0});
  const auto all = enumerate_equilibria(g, NoMechanism{}, 0.01);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].flow[0], 1.0);
}

TEST(Enumeration, SortedByWelfareAndSelfConsistent) {
  gen::Rng rng(59);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = gen::coverage_instance(rng, 3, 2, 20.0);
    const auto plan = matryoshka_fractions(g);
    const auto all = enumerate_equilibria(g, plan, 0.05);
    for (std::size_t t = 1; t < all.size(); ++t) EXPECT_LE(all[t - 1].welfare, all[t].welfare);
    for (const auto& r : all) EXPECT_TRUE(is_equilibrium(g, r.assignment, plan, r.tolerance).ok);
  }
}

TEST(Enumeration, StaticFractionsMatchPayoffGapScan) {
  // w0 = 1, static fractions: payoffs (1/2 + s) U(x1) - c1 and (1/2 - s) U(x1),
  // so the gap g(x1) = 2 s U(x1) - c1 with s = c1 / (2 U(1)) vanishes only at x1 = 1.
  // Corners (0,1) (all on the cheap path, gap -c1 < 0) and (1,0) (gap 0) are equilibria.
  const auto u = UtilityModel::common_coverage(3875, 2000);
  const double c1 = 0.05 * u.scale();
  const auto g = two_path(c1, 0.0, {{1.0, 0.0}}, {1.0}, u);
  const auto plan = two_path_single_type_fractions(1.0, g.cost(0), g.cost(1), u);
  const auto all = enumerate_equilibria(g, plan, 0.01);
  // Oracle: 1-D scan with the same one-sided tolerance as the grid search,
  // including the 64-step resampling of each edge for positive gains.
  auto gains_x = [&](double x) {
    const double d = 2.0 * (c1 / (2.0 * u.scale())) * u(0, x) - c1;
    return std::array<double, 2>{std::max(0.0, -d), std::max(0.0, d)};
  };
  auto gains = [&](int t) { return gains_x(t / 100.0); };
  auto edge_reaches = [&](int t, int dir, int e) {
    for (int s = 1; s <= 64; ++s)
      if (gains_x((t + dir * s / 64.0) / 100.0)[e] <= kMassTol) return true;
    return false;
  };
  std::vector<double> expected;
  for (int t = 0; t <= 100; ++t) {
    const auto here = gains(t);
    bool ok = true;
    for (int e = 0; e < 2; ++e) {
      if ((e == 0 && t == 0) || (e == 1 && t == 100)) continue;  // path unused
      double drop = 0.0;
      for (int nb : {t - 1, t + 1})
        if (nb >= 0 && nb <= 100) drop = std::max(drop, here[e] - gains(nb)[e]);
      if (here[e] <= kMassTol) continue;
      if (here[e] > 2.0 * drop) {
        ok = false;
        continue;
      }
      // Edges leave along directions that move mass off a used path.
      const bool reached = (t > 0 && edge_reaches(t, -1, e)) || (t < 100 && edge_reaches(t, 1, e));
      ok = ok && reached;
    }
    if (ok) expected.push_back(t / 100.0);
  }
  EXPECT_NE(std::find(expected.begin(), expected.end(), 0.0), expected.end());
  EXPECT_NE(std::find(expected.begin(), expected.end(), 1.0), expected.end());
  std::vector<double> got;
  for (const auto& r : all) got.push_back(r.flow[0]);
  std::sort(got.begin(), got.end());
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t t = 0; t < got.size(); ++t) EXPECT_NEAR(got[t], expected[t], 1e-12);
}

TEST(Enumeration, GridLimitThrows) {
  gen::Rng rng(61);
  const auto g = gen::coverage_instance(rng, 6, 2, 1.0);
  EXPECT_THROW(enumerate_equilibria(g, NoMechanism{}, 0.01, 1000), ResourceLimitError);
}

TEST(WorstCase, MultiStartIsFlaggedHeuristic) {
  gen::Rng rng(67);
  const auto g = gen::coverage_instance(rng, 3, 2, 1.0);
  const auto r = multi_start_worst(g, NoMechanism{}, 5, 4);
  EXPECT_TRUE(r.heuristic);
  const auto e = worst_case_equilibrium(g, NoMechanism{});
  EXPECT_FALSE(e.heuristic);
}
