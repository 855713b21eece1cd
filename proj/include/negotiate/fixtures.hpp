#pragma once

// Reference profiles and the prompt fixtures rendered from them. The golden
// files under tests/golden are exactly prompt_fixtures() written to disk.

#include <cmath>
#include <initializer_list>
#include <map>
#include <string>

#include "negotiate/extraction.hpp"
#include "negotiate/prompts.hpp"

namespace negotiate::fixtures {

/// Group magnitudes keyed by term; categorical entries name the preferred option.
struct GroupWeight {
  Term term;
  double weight;
  std::size_t option = 0;
};

inline UtilityProfile profile_from_groups(Role role, std::initializer_list<GroupWeight> groups) {
  FeatureVector w{};
  for (const GroupWeight& g : groups) {
    const auto& t = schema(g.term);
    if (t.kind == TermKind::categorical) {
      for (std::size_t o = 0; o < t.width(); ++o)
        w[t.feature_offset + o] = o == g.option ? g.weight : -g.weight / static_cast<double>(t.width() - 1);
    } else {
      w[t.feature_offset] = g.weight;
    }
  }
  double l1 = 0.0;
  for (double x : w) l1 += std::abs(x);
  for (double& x : w) x /= l1;
  return make_profile(role, w);
}

/// Seller with the tier layout of the published preference-block sample.
inline UtilityProfile seller_sample_profile() {
  return profile_from_groups(Role::seller, {{Term::price, 1.0},
                                            {Term::trade_in, -0.5},
                                            {Term::delivery_day, 0.4},
                                            {Term::has_accessories, -0.28},
                                            {Term::model, 0.26, 2},
                                            {Term::color, 0.24, 3},
                                            {Term::interior, 0.22, 2},
                                            {Term::warranty, 0.2, 1},
                                            {Term::service, 0.18, 1},
                                            {Term::down_payment, 0.1}});
}

/// Buyer with the tier layout of the published intelligence-block sample.
inline UtilityProfile buyer_sample_profile() {
  return profile_from_groups(Role::buyer, {{Term::price, -1.0},
                                           {Term::model, 0.8, 0},
                                           {Term::interior, 0.5, 2},
                                           {Term::delivery_day, -0.45},
                                           {Term::color, 0.25, 0},
                                           {Term::trade_in, 0.2},
                                           {Term::down_payment, -0.15},
                                           {Term::warranty, 0.12, 2},
                                           {Term::service, 0.1, 2},
                                           {Term::has_accessories, 0.08}});
}

/// File name -> rendered prompt text.
inline std::map<std::string, std::string> prompt_fixtures() {
  std::map<std::string, std::string> out;
  const UtilityProfile buyer = buyer_sample_profile();
  const UtilityProfile seller = seller_sample_profile();
  out["c1_system_seller.txt"] = system_prompt(Role::seller, seller);
  out["c2_preferences_seller.txt"] = preference_block(Role::seller, seller.tiers);
  out["c4_intel_buyer_opponent.txt"] = intel_block(buyer.tiers);
  out["c5_trade_plan.txt"] = trade_plan_block();
  out["c3_phase_propose_complete.txt"] = std::string(phase_instruction(Phase::propose_complete));
  out["c3_phase_active_bargaining.txt"] = std::string(phase_instruction(Phase::active_bargaining));
  out["c3_phase_convergence.txt"] = std::string(phase_instruction(Phase::convergence));
  out["c3_phase_final_round.txt"] = std::string(phase_instruction(Phase::final_round));
  NegotiationState s(buyer, seller);
  out["c3_turn1_buyer.txt"] = turn_prompt(s, {}, nullptr);
  Turn opening;
  opening.index = 1;
  opening.role = Role::buyer;
  opening.dialogue = "Hi, I'm here for a Sedan.";
  PartialOffer sedan;
  sedan.set(Term::model, Choice{0});
  opening.action = Action{ActionKind::counter, sedan, ""};
  apply_action(s, opening);
  out["c3_turn2_seller_informed_plan.txt"] = build_prompts(s, Role::seller, {true, true}).turn_prompt;
  out["extractor_prompt.txt"] = extractor_system_prompt();
  return out;
}

}  // namespace negotiate::fixtures
