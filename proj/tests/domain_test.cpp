#include <gtest/gtest.h>

#include <random>

#include "negotiate/domain.hpp"
#include "test_support.hpp"

namespace negotiate {
namespace {

using testing::make_contract;

TEST(Schema, MatchesCarPurchaseTable) {
  ASSERT_EQ(schema().size(), 10u);
  EXPECT_EQ(schema(Term::price).buyer_range, (Interval{20, 45}));
  EXPECT_EQ(schema(Term::price).seller_range, (Interval{25, 55}));
  EXPECT_EQ(schema(Term::delivery_day).buyer_range, (Interval{1, 30}));
  EXPECT_EQ(schema(Term::delivery_day).seller_range, (Interval{7, 60}));
  EXPECT_EQ(schema(Term::down_payment).buyer_range, (Interval{0, 30}));
  EXPECT_EQ(schema(Term::down_payment).seller_range, (Interval{15, 40}));
  EXPECT_EQ(schema(Term::trade_in).buyer_range, (Interval{5, 15}));
  EXPECT_EQ(schema(Term::trade_in).seller_range, (Interval{0, 10}));
  EXPECT_EQ(schema(Term::color).options.size(), 5u);
  EXPECT_EQ(option_name(Term::model, 2), "Truck");
  EXPECT_EQ(option_name(Term::warranty, 0), "none");
  EXPECT_EQ(option_name(Term::service, 2), "comprehensive");
  std::size_t width = 0;
  for (const auto& t : schema()) width += t.width();
  EXPECT_EQ(width, kFeatureDim);
}

TEST(JointBounds, IntersectsRoleRanges) {
  EXPECT_EQ(joint_bounds(Term::price), (Interval{25, 45}));
  EXPECT_EQ(joint_bounds(Term::delivery_day), (Interval{7, 30}));
  EXPECT_EQ(joint_bounds(Term::down_payment), (Interval{15, 30}));
  EXPECT_EQ(joint_bounds(Term::trade_in), (Interval{5, 10}));
}

TEST(JointBounds, RejectsDisjointAndNonContinuous) {
  TermSchema disjoint = schema(Term::price);
  disjoint.buyer_range = {1, 2};
  disjoint.seller_range = {3, 4};
  try {
    joint_bounds(disjoint);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_intersection);
  }
  EXPECT_THROW(joint_bounds(Term::model), Error);
}

TEST(Encode, BuyerPriceNormalization) {
  auto at = [](double price) { return encode(make_contract(price, 10, 10, 10), Role::buyer)[0]; };
  EXPECT_DOUBLE_EQ(at(20), 0.0);
  EXPECT_DOUBLE_EQ(at(32.5), 0.5);
  EXPECT_DOUBLE_EQ(at(45), 1.0);
}

TEST(Encode, OneHotBlocks) {
  const auto f = encode(make_contract(30, 10, 20, 8, /*model=*/0, /*color=*/3, 2, 1, 2, true), Role::seller);
  EXPECT_EQ(f[4], 1.0);
  EXPECT_EQ(f[5], 0.0);
  EXPECT_EQ(f[6], 0.0);
  EXPECT_EQ(f[7 + 3], 1.0);
  EXPECT_EQ(f[12 + 2], 1.0);
  EXPECT_EQ(f[15 + 1], 1.0);
  EXPECT_EQ(f[18 + 2], 1.0);
  EXPECT_EQ(f[21], 1.0);
  for (const auto& t : schema()) {
    if (t.kind != TermKind::categorical) continue;
    double sum = 0;
    for (std::size_t o = 0; o < t.width(); ++o) sum += f[t.feature_offset + o];
    EXPECT_EQ(sum, 1.0) << t.name;
  }
}

TEST(Encode, OutOfRangeStrictThrowsClampReports) {
  const Contract c = make_contract(22, 10, 20, 8);  // price 22 < seller min 25
  try {
    encode(c, Role::seller, RangePolicy::strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::value_out_of_range);
  }
  const Encoding e = encode_checked(c, Role::seller);
  EXPECT_EQ(e.features[0], 0.0);
  ASSERT_EQ(e.clamped.size(), 1u);
  EXPECT_EQ(e.clamped[0], Term::price);
}

TEST(Encode, MonotoneAndInvertibleOverRandomContracts) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    for (Role role : {Role::buyer, Role::seller}) {
      Contract c = make_contract(0, 0, 0, 0, trial % 3, trial % 5, trial % 3, 1, 2, trial % 2 == 0);
      for (Term t : kContinuousTerms) {
        const Interval r = schema(t).range(role);
        c.set(t, r.lo + u(rng) * r.width());
      }
      const FeatureVector f = encode(c, role);
      for (double x : f.values) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
      for (Term t : kContinuousTerms) {
        const std::size_t i = feature_index(t);
        EXPECT_NEAR(denormalize_value(t, role, f[i]), c.number(t), 1e-9);
        const Interval r = schema(t).range(role);
        const double lower = r.lo + 0.5 * (c.number(t) - r.lo);
        if (lower < c.number(t)) {
          Contract below = c;
          below.set(t, lower);
          EXPECT_LT(encode(below, role, RangePolicy::strict)[i], f[i]);
        }
      }
      EXPECT_EQ(encode(Contract::from_partial(c.to_partial()), role), f);
    }
  }
}

TEST(FeatureNames, RoundTrip) {
  EXPECT_EQ(feature_name(0), "price");
  EXPECT_EQ(feature_name(4), "model:Sedan");
  EXPECT_EQ(feature_name(21), "has_accessories");
  for (std::size_t f = 0; f < kFeatureDim; ++f) EXPECT_EQ(feature_from_name(feature_name(f)), f);
  EXPECT_FALSE(feature_from_name("model:Minivan").has_value());
}

TEST(MergeAutofill, InheritsUnmentionedTerms) {
  const Contract last = make_contract(38, 14, 20, 7, 2, 1, 0, 1, 1, true);
  PartialOffer p;
  p.set(Term::price, 35.0);
  const auto merged = merge_autofill(p, last);
  ASSERT_TRUE(std::holds_alternative<Contract>(merged));
  Contract expected = last;
  expected.set(Term::price, 35.0);
  EXPECT_EQ(std::get<Contract>(merged), expected);

  EXPECT_EQ(std::get<Contract>(merge_autofill(PartialOffer{}, last)), last);

  PartialOffer truck;
  truck.set(Term::model, Choice{2});
  const auto alone = merge_autofill(truck, std::nullopt);
  ASSERT_TRUE(std::holds_alternative<PartialOffer>(alone));
  EXPECT_EQ(std::get<PartialOffer>(alone), truck);
}

TEST(Contract, FromPartialRequiresAllTerms) {
  PartialOffer p;
  p.set(Term::price, 30.0);
  EXPECT_THROW(Contract::from_partial(p), Error);
}

TEST(FeatureValue, PartialOfferLookup) {
  PartialOffer p;
  p.set(Term::price, 32.5);
  p.set(Term::color, Choice{3});
  EXPECT_DOUBLE_EQ(*feature_value(p, Role::buyer, 0), 0.5);
  EXPECT_EQ(*feature_value(p, Role::buyer, feature_index(Term::color, 3)), 1.0);
  EXPECT_EQ(*feature_value(p, Role::buyer, feature_index(Term::color, 0)), 0.0);
  EXPECT_FALSE(feature_value(p, Role::buyer, feature_index(Term::trade_in)).has_value());
}

}  // namespace
}  // namespace negotiate
