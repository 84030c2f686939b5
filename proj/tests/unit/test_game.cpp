#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "generators.hpp"
#include "infoshare/game.hpp"
#include "infoshare/payoff.hpp"
#include "infoshare/sampling.hpp"

using namespace infoshare;

namespace {

GameInstance two_path(double c1, double c2, std::vector<double> w, UtilityModel u) {
  return GameInstance({{1, c1, std::nullopt}, {2, c2, std::nullopt}}, {{1, 1.0, std::move(w)}}, std::move(u));
}

// Average number of distinct PoIs hit when `users` users each pick one of
// `n` PoIs uniformly at random.
double simulate_coverage(int n, int users, int trials, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> stamp(n, -1);
  long long total = 0;
  for (int t = 0; t < trials; ++t) {
    int distinct = 0;
    for (int u = 0; u < users; ++u) {
      int& s = stamp[pick(rng)];
      if (s != t) {
        s = t;
        ++distinct;
      }
    }
    total += distinct;
  }
  return static_cast<double>(total) / trials;
}

}  // namespace

TEST(Utility, CoverageClosedFormMatchesDirectPower) {
  const auto u = UtilityModel::common_coverage(3875, 2000);
  for (double x : {0.0, 0.1, 0.25, 0.5, 1.0}) {
    const double direct = 3875.0 * (1.0 - std::pow(1.0 - 1.0 / 3875.0, 2000.0 * x));
    EXPECT_NEAR(u(0, x), direct, 1e-9 * 3875.0);
  }
}

TEST(Utility, ShapeChecksPassForBuiltInFamilies) {
  EXPECT_EQ(UtilityModel::common_coverage(3875, 2000).check_shape(), "");
  EXPECT_EQ(UtilityModel::common_power(10.0, 0.5).check_shape(), "");
  EXPECT_EQ(UtilityModel::common_log(5.0, 3.0).check_shape(), "");
  EXPECT_EQ(UtilityModel::per_path(la_poi_counts(), 2000).check_shape(), "");
  EXPECT_EQ(UtilityModel::common([](double x) { return x * x; }, "convex").check_shape(), "not concave");
  EXPECT_EQ(UtilityModel::common([](double x) { return 1.0 + x; }, "shifted").check_shape(), "U(0) != 0");
}

TEST(Utility, RejectsInvalidParameters) {
  EXPECT_THROW(UtilityModel::common_coverage(0, 2000), std::invalid_argument);
  EXPECT_THROW(UtilityModel::common_coverage(10, 0), std::invalid_argument);
  EXPECT_THROW(UtilityModel::common_power(1.0, 1.5), std::invalid_argument);
  EXPECT_THROW(UtilityModel::per_path({}, 2000), std::invalid_argument);
}

TEST(Utility, ScaleIsLargestValueAtOne) {
  const auto u = UtilityModel::per_path({100, 4000, 50}, 2000);
  const double expect = -4000.0 * std::expm1(2000.0 * std::log1p(-1.0 / 4000.0));
  EXPECT_NEAR(u.scale(), expect, 1e-9);
}

TEST(Instance, CostsAreShiftedToZeroMinimum) {
  const auto g = two_path(7.0, 3.0, {0.5, 0.5}, UtilityModel::common_log(1.0, 1.0));
  EXPECT_EQ(g.cost(0), 4.0);
  EXPECT_EQ(g.cost(1), 0.0);
  EXPECT_EQ(g.cost_shift(), 3.0);
}

TEST(Instance, ValidatesStructure) {
  const auto u = UtilityModel::common_log(1.0, 1.0);
  EXPECT_THROW(GameInstance({{1, 0.0, std::nullopt}}, {{1, 1.0, {1.0}}}, u), std::invalid_argument);
  EXPECT_THROW(two_path(1.0, 0.0, {0.6, 0.6}, u), std::invalid_argument);
  EXPECT_THROW(two_path(-1.0, 0.0, {0.5, 0.5}, u), std::invalid_argument);
  EXPECT_THROW(two_path(1.0, 0.0, {0.5, 0.5, 0.0}, u), std::invalid_argument);
  EXPECT_THROW(GameInstance({{1, 0.0, std::nullopt}, {2, 1.0, std::nullopt}},
                            {{1, 0.5, {0.5, 0.5}}, {2, 0.4, {0.5, 0.5}}}, u),
               std::invalid_argument);
  EXPECT_THROW(GameInstance({{1, 0.0, 10}, {2, 1.0, 10}}, {{1, 1.0, {0.5, 0.5}}},
                            UtilityModel::per_path({10, 10, 10}, 100)),
               std::invalid_argument);
}

TEST(Instance, CostScaleRatioIsRecorded) {
  const auto u = UtilityModel::common_coverage(3875, 2000);
  const auto g = two_path(1.0, 0.0, {0.5, 0.5}, u);
  EXPECT_NEAR(g.cost_scale_ratio(), 1.0 / u.scale(), 1e-15);
}

TEST(Flow, ValidatesEntriesAndSum) {
  EXPECT_NO_THROW(FlowVector({0.25, 0.75}));
  EXPECT_THROW(FlowVector({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(FlowVector({-0.1, 1.1}), std::invalid_argument);
}

TEST(TypeUtility, FixedPointAndDegenerateWeight) {
  const auto u = UtilityModel::common_coverage(3875, 2000);
  const auto g = two_path(0.0, 0.0, {0.5, 0.5}, u);
  const std::vector<double> half{0.5, 0.5};
  EXPECT_NEAR(type_utility(g, 0, half), u(0, 0.5), 1e-12);
  const auto h = two_path(0.0, 0.0, {1.0, 0.0}, u);
  const std::vector<double> corner{1.0, 0.0};
  EXPECT_EQ(type_utility(h, 0, corner), u(0, 1.0));
  const std::vector<double> wrong{1.0};
  EXPECT_THROW(type_utility(g, 0, wrong), std::invalid_argument);
}

TEST(TypeUtility, PaperCorridorsMatchMonteCarloCoverage) {
  const auto& n = la_poi_counts();
  const auto u = UtilityModel::per_path(n, 2000);
  std::mt19937_64 rng(2024);
  const int users = 2000 / 6;  // M x_j with uniform flow
  const double x = static_cast<double>(users) / 2000.0;
  double analytic = 0.0;
  double simulated = 0.0;
  for (std::size_t j = 0; j < n.size(); ++j) {
    analytic += u(j, x) / 6.0;
    simulated += simulate_coverage(n[j], users, 10'000, rng) / 6.0;
  }
  EXPECT_NEAR(analytic, simulated, 0.01 * simulated);
}

TEST(TypeUtility, SinglePathCoverageMatchesMonteCarlo) {
  std::mt19937_64 rng(7);
  const auto u = UtilityModel::common_coverage(500, 2000);
  for (int users : {50, 400, 2000}) {
    const double sim = simulate_coverage(500, users, 10'000, rng);
    EXPECT_NEAR(u(0, users / 2000.0), sim, 0.01 * sim) << users;
  }
}

TEST(Payoff, AdjustmentsReduceToPlainPayoff) {
  gen::Rng rng(9);
  const auto g = gen::coverage_instance(rng, 3, 2, 5.0);
  const std::vector<double> x{0.2, 0.3, 0.5};
  const std::size_t zero = g.cost(0) == 0.0 ? 0 : (g.cost(1) == 0.0 ? 1 : 2);
  EXPECT_NEAR(type_payoff(g, 0, zero, x), type_utility(g, 0, x), 1e-12);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(type_payoff(g, 1, j, x, PenaltyFractionPlan::identity(3)), type_payoff(g, 1, j, x));
  }
  EXPECT_THROW(type_payoff(g, 0, 0, x, PenaltyFractionPlan::identity(4)), std::invalid_argument);
  EXPECT_THROW(type_payoff(g, 0, 3, x), std::invalid_argument);
}

TEST(Payoff, TwoPathFlowFractionsHalveUtilityAtEvenSplit) {
  const auto u = UtilityModel::common_coverage(3875, 2000);
  const auto g = two_path(4.0, 0.0, {0.7, 0.3}, u);
  MatryoshkaRound r;
  r.lambda = 1;
  r.path = 0;
  r.remaining = {1};
  r.low = {1};
  r.psi = 1;
  const PenaltyFractionPlan plan(PlanKind::two_path_single_type, 2, {0, 1}, {r}, u.scale());
  const std::vector<double> x{0.5, 0.5};
  const double util = type_utility(g, 0, x);
  EXPECT_NEAR(type_payoff(g, 0, 0, x, plan), 0.5 * util - 4.0, 1e-12);
  EXPECT_NEAR(type_payoff(g, 0, 1, x, plan), 0.5 * util, 1e-12);
}

TEST(Welfare, CornerAndSymmetricExamples) {
  const auto u = UtilityModel::common_coverage(3875, 2000);
  const GameInstance g({{1, 0.0, std::nullopt}, {2, 0.0, std::nullopt}, {3, 0.0, std::nullopt}},
                       {{1, 0.4, {0.5, 0.25, 0.25}}, {2, 0.6, {0.1, 0.6, 0.3}}}, u);
  const std::vector<double> corner{1.0, 0.0, 0.0};
  EXPECT_NEAR(social_welfare(g, corner), (0.4 * 0.5 + 0.6 * 0.1) * u(0, 1.0), 1e-9);
  const GameInstance s({{1, 0.0, std::nullopt}, {2, 0.0, std::nullopt}, {3, 0.0, std::nullopt}},
                       {{1, 1.0, {1.0 / 3, 1.0 / 3, 1.0 / 3}}}, u);
  const std::vector<double> even{1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_NEAR(social_welfare(s, even), u(0, 1.0 / 3), 1e-9);
}

TEST(Welfare, GroupedAndPerTypeFormsAgree) {
  gen::Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = gen::pick(rng, 2, 6);
    const std::size_t m = gen::pick(rng, 1, 5);
    const auto g = trial % 2 ? gen::coverage_instance(rng, k, m, 50.0)
                             : gen::per_path_instance(rng, std::vector<int>(la_poi_counts().begin(),
                                                                            la_poi_counts().begin() + k),
                                                      m, 50.0);
    const auto x = gen::simplex(rng, k);
    // Per-type sum written out independently of the library.
    double per_type = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double util = 0.0;
      for (std::size_t j = 0; j < k; ++j) util += g.weight(i, j) * g.U(j, x[j]);
      per_type += g.eta(i) * util;
    }
    for (std::size_t j = 0; j < k; ++j) per_type -= x[j] * g.cost(j);
    ASSERT_NEAR(social_welfare(g, x), per_type, 1e-9 * std::max(1.0, std::abs(per_type)));
    ASSERT_NEAR(social_welfare(g, x), social_welfare_by_type(g, x), 1e-9 * std::max(1.0, std::abs(per_type)));
  }
}

TEST(UtilityWeight, ExamplesAndSumToOne) {
  const auto u = UtilityModel::common_log(1.0, 1.0);
  const auto g = two_path(0.0, 1.0, {0.7, 0.3}, u);
  EXPECT_DOUBLE_EQ(utility_weight(g, 0), 0.7);
  EXPECT_DOUBLE_EQ(utility_weight(g, 1), 0.3);
  const GameInstance h({{1, 0.0, std::nullopt}, {2, 0.0, std::nullopt}},
                       {{1, 0.5, {1.0, 0.0}}, {2, 0.5, {0.0, 1.0}}}, u);
  EXPECT_DOUBLE_EQ(utility_weight(h, 0), 0.5);
  EXPECT_DOUBLE_EQ(utility_weight(h, 1), 0.5);
  gen::Rng rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const auto r = gen::coverage_instance(rng, gen::pick(rng, 2, 8), gen::pick(rng, 1, 6), 1.0);
    double s = 0.0;
    for (std::size_t j = 0; j < r.k(); ++j) s += utility_weight(r, j);
    ASSERT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(TwoPathIdentities, ComplementSumAndMonotonicity) {
  gen::Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const double w = gen::uniform(rng, 0.0, 1.0);
    const auto u = trial % 2 ? UtilityModel::common_coverage(static_cast<int>(gen::pick(rng, 50, 5000)), 2000)
                             : UtilityModel::common_power(gen::uniform(rng, 1.0, 100.0), gen::uniform(rng, 0.2, 1.0));
    const auto g = two_path(0.0, 0.0, {w, 1.0 - w}, u);
    const std::vector<double> half{0.5, 0.5};
    ASSERT_NEAR(type_utility(g, 0, half), u(0, 0.5), 1e-12 * std::max(1.0, u.scale()));
    double prev_low = type_utility(g, 0, std::vector<double>{0.0, 1.0});
    double prev_high = type_utility(g, 0, std::vector<double>{0.5, 0.5});
    for (int t = 0; t <= 1000; ++t) {
      const double x = t / 1000.0;
      const std::vector<double> a{x, 1.0 - x};
      const std::vector<double> b{1.0 - x, x};
      ASSERT_NEAR(type_utility(g, 0, a) + type_utility(g, 0, b), u(0, x) + u(0, 1.0 - x),
                  1e-9 * std::max(1.0, u.scale()));
      if (w > 0.5 && x <= 0.5) {
        const double v = type_utility(g, 0, a);
        ASSERT_GE(v, prev_low - 1e-9 * u.scale());
        prev_low = v;
      }
      if (w <= 0.5 && x >= 0.5) {
        const double v = type_utility(g, 0, a);
        ASSERT_LE(v, prev_high + 1e-9 * u.scale());
        prev_high = v;
      }
    }
  }
}
