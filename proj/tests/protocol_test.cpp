#include <gtest/gtest.h>

#include "negotiate/protocol.hpp"
#include "test_support.hpp"

using namespace negotiate;
using namespace negotiate::testing;

namespace {

Turn make_turn(const NegotiationState& s, ActionKind kind, PartialOffer terms = {}) {
  Turn t;
  t.index = s.next_index();
  t.role = s.to_move();
  t.action = Action{kind, std::move(terms), ""};
  return t;
}

NegotiationState price_state() {
  return NegotiationState(price_only_profile(Role::buyer), price_only_profile(Role::seller));
}

PartialOffer full_offer(double price) { return make_contract(price, 14, 20, 7).to_partial(); }

}  // namespace

TEST(Phase, Schedule) {
  EXPECT_EQ(phase_for(1, false), Phase::opening);
  EXPECT_EQ(phase_for(1, true), Phase::opening);
  EXPECT_EQ(phase_for(2, false), Phase::exploratory);
  EXPECT_EQ(phase_for(5, false), Phase::exploratory);
  EXPECT_EQ(phase_for(6, false), Phase::propose_complete);
  EXPECT_EQ(phase_for(40, false), Phase::propose_complete);
  EXPECT_EQ(phase_for(3, true), Phase::active_bargaining);
  EXPECT_EQ(phase_for(10, true), Phase::active_bargaining);
  EXPECT_EQ(phase_for(15, true), Phase::active_bargaining);
  EXPECT_EQ(phase_for(16, true), Phase::convergence);
  EXPECT_EQ(phase_for(30, true), Phase::convergence);
  EXPECT_EQ(phase_for(31, true), Phase::final_round);
}

TEST(Protocol, AcceptInsideBothReservationsDeals) {
  NegotiationState s = price_state();
  apply_action(s, make_turn(s, ActionKind::counter, full_offer(35)));
  ASSERT_TRUE(s.offer_on_table.has_value());
  apply_action(s, make_turn(s, ActionKind::accept));
  ASSERT_TRUE(std::holds_alternative<DealReached>(s.status));
  const auto d = std::get<DealOutcome>(outcome(s));
  EXPECT_NEAR(d.buyer_utility, 0.4, 1e-12);
  EXPECT_NEAR(d.seller_utility, 1.0 / 3.0, 1e-12);
}

TEST(Protocol, AcceptBelowReservationRejected) {
  // Price 25 is the seller's own worst value, Ũ_s = 0: not strictly above.
  NegotiationState s = price_state();
  apply_action(s, make_turn(s, ActionKind::counter, full_offer(25)));
  apply_action(s, make_turn(s, ActionKind::accept));
  EXPECT_TRUE(s.running());
  ASSERT_EQ(s.transcript.back().events.size(), 1u);
  EXPECT_EQ(s.transcript.back().events[0].kind, events::kRejectedAccept);
  EXPECT_EQ(s.transcript.back().events[0].detail, "below_reservation");
  EXPECT_TRUE(s.transcript.back().has_complete_offer());
}

TEST(Protocol, OutsideJointRangeRejected) {
  // 23.75 is inside the buyer's range but below the seller's floor of 25; the seller's view clamps to its floor.
  NegotiationState s = price_state();
  apply_action(s, make_turn(s, ActionKind::counter, full_offer(23.75)));
  EXPECT_FALSE(s.offer_feasible);
  EXPECT_EQ(s.transcript.back().events[0].kind, events::kInfeasibleForAcceptance);
  const double us = normalized_utility(s.seller, *s.offer_on_table);
  EXPECT_EQ(us, 0.0);
  apply_action(s, make_turn(s, ActionKind::accept));
  EXPECT_TRUE(s.running());
  EXPECT_EQ(s.transcript.back().events[0].kind, events::kRejectedAccept);
  EXPECT_EQ(s.transcript.back().events[0].detail, "outside_joint_range");
}

TEST(Protocol, AcceptWithoutOfferRejected) {
  NegotiationState s = price_state();
  apply_action(s, make_turn(s, ActionKind::accept));
  EXPECT_TRUE(s.running());
  EXPECT_EQ(s.transcript.back().events[0].detail, "no_offer_to_accept");
  EXPECT_FALSE(s.offer_on_table.has_value());
}

TEST(Protocol, AcceptOwnOfferRejected) {
  NegotiationState s = price_state();
  apply_action(s, make_turn(s, ActionKind::counter, full_offer(35)));
  apply_action(s, make_turn(s, ActionKind::counter));  // seller: empty counter keeps buyer's offer
  apply_action(s, make_turn(s, ActionKind::accept));   // buyer accepts its own
  EXPECT_TRUE(s.running());
  EXPECT_EQ(s.transcript.back().events[0].detail, "own_offer");
}

TEST(Protocol, CounterClampsToOwnRange) {
  NegotiationState s = price_state();
  apply_action(s, make_turn(s, ActionKind::counter, full_offer(50)));
  ASSERT_TRUE(s.offer_on_table.has_value());
  EXPECT_DOUBLE_EQ(s.offer_on_table->number(Term::price), 45.0);
  EXPECT_EQ(s.transcript.back().events[0].kind, events::kClampedToOwnRange);
}

TEST(Protocol, PartialCounterAutofills) {
  NegotiationState s = price_state();
  apply_action(s, make_turn(s, ActionKind::counter, full_offer(30)));
  PartialOffer p;
  p.set(Term::price, 40.0);
  apply_action(s, make_turn(s, ActionKind::counter, p));
  EXPECT_DOUBLE_EQ(s.offer_on_table->number(Term::price), 40.0);
  EXPECT_DOUBLE_EQ(s.offer_on_table->number(Term::delivery_day), 14.0);
  EXPECT_EQ(s.offer_proposer, Role::seller);
}

TEST(Protocol, PartialWithoutTableLeavesNoOffer) {
  NegotiationState s = price_state();
  PartialOffer p;
  p.set(Term::price, 40.0);
  apply_action(s, make_turn(s, ActionKind::counter, p));
  EXPECT_FALSE(s.offer_on_table.has_value());
  EXPECT_FALSE(s.transcript.back().has_complete_offer());
}

TEST(Protocol, TurnCapEndsInNoDeal) {
  NegotiationState s = price_state();
  while (s.running()) apply_action(s, make_turn(s, ActionKind::counter));
  EXPECT_EQ(s.transcript.size(), static_cast<std::size_t>(kDefaultTurnCap));
  const auto o = outcome(s);
  ASSERT_TRUE(std::holds_alternative<NoDeal>(o));
  EXPECT_EQ(std::get<NoDeal>(o).reason, NoDealReason::turn_cap);
}

TEST(Protocol, OutOfTurnAndFinishedThrow) {
  NegotiationState s = price_state();
  Turn t = make_turn(s, ActionKind::counter);
  t.role = Role::seller;
  EXPECT_THROW(apply_action(s, t), Error);
  Turn skip = make_turn(s, ActionKind::counter);
  skip.index = 3;
  EXPECT_THROW(apply_action(s, skip), Error);
  fail_backend(s);
  EXPECT_THROW(apply_action(s, make_turn(s, ActionKind::counter)), Error);
  EXPECT_EQ(std::get<NoDeal>(outcome(s)).reason, NoDealReason::backend_failure);
}

TEST(Protocol, OutcomeWhileRunningThrows) {
  NegotiationState s = price_state();
  try {
    (void)outcome(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::still_running);
  }
}

TEST(Protocol, RolesAlternateBuyerFirst) {
  NegotiationState s = price_state();
  for (int i = 0; i < 6; ++i) apply_action(s, make_turn(s, ActionKind::counter));
  for (std::size_t i = 0; i < s.transcript.size(); ++i) {
    EXPECT_EQ(s.transcript[i].index, static_cast<int>(i) + 1);
    EXPECT_EQ(s.transcript[i].role, i % 2 == 0 ? Role::buyer : Role::seller);
  }
}
