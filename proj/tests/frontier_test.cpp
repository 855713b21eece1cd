#include <gtest/gtest.h>

#include <cmath>

#include "negotiate/frontier.hpp"
#include "test_support.hpp"

namespace negotiate {
namespace {

using testing::make_contract;
using testing::price_only_profile;

struct PricePair {
  UtilityProfile buyer = price_only_profile(Role::buyer);
  UtilityProfile seller = price_only_profile(Role::seller);
};

// 1-D grid oracle over the joint price interval for the price-only pair.
double grid_argmax_price() {
  double best_p = 25, best = -1;
  for (int i = 0; i <= 20000; ++i) {
    const double p = 25 + i * 0.001;
    const double v = (1 - (p - 20) / 25) * ((p - 25) / 30);
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  return best_p;
}

TEST(Frontier, PriceOnlyNbsMatchesGridOracle) {
  EXPECT_NEAR(grid_argmax_price(), 35.0, 1e-3);
  PricePair pp;
  const FrontierCurve f = compute_frontier(pp.buyer, pp.seller);
  EXPECT_NEAR(f.nbs.buyer, 0.4, 1e-6);
  EXPECT_NEAR(f.nbs.seller, 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(f.nbs_contract.number(Term::price), 35.0, 1e-6);
}

TEST(Frontier, PriceOnlyDealDistances) {
  PricePair pp;
  const FrontierCurve f = compute_frontier(pp.buyer, pp.seller);
  const Contract deal = make_contract(40, 10, 20, 7);
  const EfficiencyReport r = efficiency_distances(f, deal, pp.buyer, pp.seller);
  // affine maps: Ub = 1 - (p-20)/25, Us = (p-25)/30
  const double ub = 1 - (40.0 - 20) / 25, us = (40.0 - 25) / 30;
  EXPECT_NEAR(r.deal_point.buyer, 0.2, 1e-12);
  EXPECT_NEAR(r.deal_point.seller, 0.5, 1e-12);
  EXPECT_NEAR(r.d_nbs, std::hypot(ub - 0.4, us - 1.0 / 3.0), 1e-9);
  EXPECT_NEAR(r.d_nbs, 0.2603, 1e-4);
  EXPECT_NEAR(r.d_pareto, 0.0, 1e-12);
}

TEST(Frontier, NbsDealHasZeroDistances) {
  Rng rng(17);
  const UtilityProfile b = sample_profile(Role::buyer, rng), s = sample_profile(Role::seller, rng);
  const FrontierCurve f = compute_frontier(b, s);
  const EfficiencyReport r = efficiency_distances(f, f.nbs_contract, b, s);
  EXPECT_NEAR(r.d_nbs, 0.0, 1e-9);
  EXPECT_NEAR(r.d_pareto, 0.0, 1e-9);
}

TEST(Frontier, DominatedDealHasPositiveParetoDistance) {
  Rng rng(23);
  const UtilityProfile b = sample_profile(Role::buyer, rng), s = sample_profile(Role::seller, rng);
  const FrontierCurve f = compute_frontier(b, s);
  // Move every term of a frontier contract against both parties where possible: use the
  // NBS contract but switch each categorical to an option both like less.
  Contract worse = f.nbs_contract;
  bool changed = false;
  for (Term t : kCategoricalTerms) {
    const std::size_t cur = worse.choice(t);
    for (std::size_t o = 0; o < schema(t).width(); ++o) {
      if (b.weight(t, o) < b.weight(t, cur) && s.weight(t, o) < s.weight(t, cur)) {
        worse.set(t, Choice{o});
        changed = true;
        break;
      }
    }
  }
  ASSERT_TRUE(changed);
  EXPECT_GT(efficiency_distances(f, worse, b, s).d_pareto, 0.0);
}

TEST(Frontier, IdenticalInterestsCollapseToPoint) {
  Rng rng(8);
  const UtilityProfile b = sample_profile(Role::buyer, rng);
  const UtilityProfile s = make_profile(Role::seller, b.weights);
  const FrontierCurve f = compute_frontier(b, s);
  ASSERT_EQ(f.vertices.size(), 1u);
  EXPECT_EQ(f.nbs, f.vertices[0].point);
}

TEST(Frontier, VerticesAreOrderedAndAchievable) {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const UtilityProfile b = sample_profile(Role::buyer, rng), s = sample_profile(Role::seller, rng);
    const FrontierCurve f = compute_frontier(b, s);
    ASSERT_FALSE(f.vertices.empty());
    for (std::size_t k = 0; k < f.vertices.size(); ++k) {
      const auto& v = f.vertices[k];
      EXPECT_TRUE(within_joint_bounds(v.contract));
      const UtilityPoint actual = utility_point(b, s, v.contract);
      EXPECT_NEAR(actual.buyer, v.point.buyer, 1e-9);
      EXPECT_NEAR(actual.seller, v.point.seller, 1e-9);
      EXPECT_GE(v.point.product(), -1e-12);
      EXPECT_LE(v.point.product(), f.nbs.product() + 1e-12);
      if (k + 1 < f.vertices.size()) {
        const auto& w = f.vertices[k + 1];
        EXPECT_LE(v.point.buyer, w.point.buyer + 1e-12);
        EXPECT_GE(v.point.seller, w.point.seller - 1e-12);
        if (v.connected_to_next) {
          EXPECT_LT(v.point.buyer, w.point.buyer);
          EXPECT_GT(v.point.seller, w.point.seller);
        }
      }
    }
    EXPECT_NEAR(f.distance_to(f.nbs), 0.0, 1e-12);
    const UtilityPoint nbs_actual = utility_point(b, s, f.nbs_contract);
    EXPECT_NEAR(nbs_actual.buyer, f.nbs.buyer, 1e-9);
    EXPECT_NEAR(nbs_actual.seller, f.nbs.seller, 1e-9);
  }
}

TEST(Frontier, SupportedSweepPointsLieOnFrontier) {
  Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    const UtilityProfile b = sample_profile(Role::buyer, rng), s = sample_profile(Role::seller, rng);
    const FrontierCurve f = compute_frontier(b, s);
    const auto sweep = scalarized_sweep(b, s, 200);
    for (const auto& sp : sweep) EXPECT_NEAR(f.distance_to(sp.point), 0.0, 1e-9) << "lambda " << sp.lambda;
    // lambda = 1 is the buyer's best contract within the joint bounds
    double best_b = -1;
    for (const auto& v : f.vertices) best_b = std::max(best_b, v.point.buyer);
    EXPECT_NEAR(sweep.back().point.buyer, best_b, 1e-12);
  }
}

TEST(Oracle, CountsGridContracts) {
  PricePair pp;
  EXPECT_EQ(brute_force_oracle(pp.buyer, pp.seller, 2).contracts_evaluated, 12960u);
}

TEST(Oracle, FrontierIsDominationFree) {
  Rng rng(4);
  const UtilityProfile b = sample_profile(Role::buyer, rng), s = sample_profile(Role::seller, rng);
  const OracleResult o = brute_force_oracle(b, s, 5);
  for (const auto& p : o.frontier)
    for (const auto& q : o.frontier) EXPECT_FALSE(dominates(p, q));
}

TEST(Oracle, AgreesWithSolver) {
  Rng rng(1234);
  for (int i = 0; i < 5; ++i) {
    const UtilityProfile b = sample_profile(Role::buyer, rng), s = sample_profile(Role::seller, rng);
    const FrontierCurve f = compute_frontier(b, s);
    const OracleResult o = brute_force_oracle(b, s, 11);
    EXPECT_GE(f.nbs.product(), o.nbs_product - 1e-3);
    EXPECT_LE(one_sided_hausdorff(o.frontier, f), 0.02);
    // the grid is a subset of the continuum the solver covers exactly
    EXPECT_LE(o.nbs_product, f.nbs.product() + 1e-9);
  }
}

TEST(Frontier, DenserSweepNeverIncreasesParetoDistance) {
  Rng rng(77);
  const UtilityProfile b = sample_profile(Role::buyer, rng), s = sample_profile(Role::seller, rng);
  const FrontierCurve f = compute_frontier(b, s);
  const Contract deal = testing::midpoint_contract();
  const double exact = efficiency_distances(f, deal, b, s).d_pareto;
  EXPECT_GE(exact, 0.0);
  // distances to the supported (sweep) subset are never smaller than to the full frontier
  const auto sweep = scalarized_sweep(b, s, 400);
  double to_sweep = 1e9;
  const UtilityPoint dp = utility_point(b, s, deal);
  for (const auto& sp : sweep) to_sweep = std::min(to_sweep, distance(dp, sp.point));
  EXPECT_LE(exact, to_sweep + 1e-6);
}

}  // namespace
}  // namespace negotiate
