#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "infoshare/evaluation.hpp"
#include "infoshare/sampling.hpp"

using namespace infoshare;

namespace {

GameInstance single_type(std::vector<double> w, std::vector<double> costs) {
  std::vector<PathSpec> paths;
  for (std::size_t j = 0; j < costs.size(); ++j) paths.push_back({static_cast<int>(j + 1), costs[j], std::nullopt});
  return GameInstance(std::move(paths), {{1, 1.0, std::move(w)}}, UtilityModel::common_coverage(3875, 2000));
}

}  // namespace

TEST(Optimum, SymmetricTwoPath) {
  const auto g = single_type({0.5, 0.5}, {0, 0});
  const auto r = social_optimum_grid(g, 0.01);
  EXPECT_DOUBLE_EQ(r.argmax_flow[0], 0.5);
  EXPECT_NEAR(r.sw_star, g.U(0, 0.5), 1e-9);
  EXPECT_GE(r.certified_gap, 0.0);
}

TEST(Optimum, CornerWhenOnePathHasAllWeight) {
  const auto g = single_type({1.0, 0.0}, {0, 0});
  const auto r = social_optimum_grid(g, 0.01);
  EXPECT_EQ(r.argmax_flow[0], 1.0);
  EXPECT_NEAR(r.sw_star, g.U(0, 1.0), 1e-9);
}

TEST(Optimum, DominatesEveryCorner) {
  gen::Rng rng(157);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = gen::coverage_instance(rng, gen::pick(rng, 2, 5), gen::pick(rng, 1, 4), 100.0);
    const auto r = social_optimum_grid(g, 0.05);
    for (std::size_t j = 0; j < g.k(); ++j) {
      std::vector<double> x(g.k(), 0.0);
      x[j] = 1.0;
      EXPECT_GE(r.sw_star, social_welfare(g, x));
    }
  }
}

TEST(Optimum, FinerGridNeverSmallerAndWithinCertifiedGap) {
  gen::Rng rng(163);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = gen::coverage_instance(rng, 3, gen::pick(rng, 1, 4), 100.0);
    const auto coarse = social_optimum_grid(g, 0.05);
    const auto mid = social_optimum_grid(g, 0.025);
    const auto fine = social_optimum_grid(g, 0.01);
    EXPECT_GE(mid.sw_star, coarse.sw_star - 1e-12);
    EXPECT_GE(fine.sw_star, coarse.sw_star - 1e-12);
    EXPECT_LE(fine.sw_star - coarse.sw_star, coarse.certified_gap);
  }
}

TEST(Optimum, ResourceLimit) {
  gen::Rng rng(167);
  const auto g = gen::coverage_instance(rng, 8, 2, 1.0);
  EXPECT_THROW(social_optimum_grid(g, 0.01), ResourceLimitError);
}

TEST(UpperBound, ReferenceValue) {
  const auto r = upper_bound_formula(6, 3875, 2000, 0.3, 60.0);
  const double oracle = 6 * 0.3 * 3875 * (1.0 - std::pow(1.0 - 1.0 / 3875, 2000.0 / 6)) - 60.0 / 6;
  EXPECT_NEAR(r.ub, oracle, 1e-9);
  EXPECT_NEAR(r.ub, 565.0, 0.05);
}

TEST(UpperBound, UniformCaseSimplifies) {
  const auto caps = std::vector<int>(6, 3875);
  std::vector<PathSpec> paths;
  for (int j = 0; j < 6; ++j) paths.push_back({j + 1, 0.0, 3875});
  const GameInstance g(paths, {{1, 1.0, std::vector<double>(6, 1.0 / 6)}}, UtilityModel::per_path(caps, 2000));
  const auto r = welfare_upper_bound(g);
  EXPECT_NEAR(r.ub, 3875 * (1.0 - std::pow(1.0 - 1.0 / 3875, 2000.0 / 6)), 1e-9);
  EXPECT_EQ(r.n_max, 3875);
}

TEST(UpperBound, CommonModeUnsupported) {
  const auto g = single_type({0.5, 0.5}, {0, 0});
  EXPECT_THROW(welfare_upper_bound(g), UnsupportedModeError);
}

TEST(UpperBound, DominatesGridOptimum) {
  gen::Rng rng(173);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = gen::per_path_instance(rng, la_poi_counts(), 6, 100.0);
    const auto opt = social_optimum_grid(g, 0.1);
    EXPECT_GE(welfare_upper_bound(g).ub, opt.sw_star);
  }
}

TEST(PriceOfAnarchy, InUnitIntervalUpToGap) {
  gen::Rng rng(179);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = gen::coverage_instance(rng, gen::pick(rng, 2, 3), gen::pick(rng, 1, 3), 50.0);
    const auto r = price_of_anarchy(g, NoMechanism{}, 0.05);
    EXPECT_GT(r.poa, 0.0);
    EXPECT_LE(r.worst_welfare, r.sw_star + r.certified_gap);
    EXPECT_GE(r.equilibria, 1u);
  }
}

TEST(PriceOfAnarchy, CollapsesWhenCheapPathIsUnwanted) {
  double prev = 1.0;
  for (double w : {0.1, 0.01, 0.001}) {
    const auto g = single_type({w, 1.0 - w}, {0.0, 1.0});
    const auto r = price_of_anarchy(g, NoMechanism{}, 0.01);
    EXPECT_LT(r.poa, prev);
    prev = r.poa;
  }
  EXPECT_LT(prev, 0.05);
}
