#pragma once

// Prompt texts: the per-trial system prompt (strategy, domain ranges,
// preference tiers) and the per-turn prompt (history, offer on table, phase
// instructions, optional opponent intelligence and trade-plan scaffold).
//
// The original prompts carry emoji markers; they are written here as the
// ASCII placeholders [!] [>>] [?] [P].

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "negotiate/domain.hpp"
#include "negotiate/protocol.hpp"
#include "negotiate/utility.hpp"

namespace negotiate {

struct PromptCondition {
  bool informed = false;    // receives the opponent's tier summary
  bool trade_plan = false;  // receives the trade-plan scaffold
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct PromptBundle {
  std::string system_prompt;
  std::string turn_prompt;

  std::vector<ChatMessage> messages() const { return {{"system", system_prompt}, {"user", turn_prompt}}; }
};

/// Up to two decimals, trailing zeros dropped.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

inline std::string format_term_value(Term term, const TermValue& value) {
  switch (term) {
    case Term::price:
    case Term::trade_in: return "$" + format_number(std::get<double>(value)) + "k";
    case Term::delivery_day: return format_number(std::get<double>(value)) + " days";
    case Term::down_payment: return format_number(std::get<double>(value)) + "%";
    case Term::has_accessories: return std::get<bool>(value) ? "true" : "false";
    default: return std::string(option_name(term, std::get<Choice>(value).index));
  }
}

inline std::string format_offer(const PartialOffer& offer) {
  std::string out;
  for (Term t : kAllTerms) {
    const auto& v = offer.get(t);
    if (!v) continue;
    if (!out.empty()) out += ", ";
    out += std::string(to_string(t)) + ": " + format_term_value(t, *v);
  }
  return out;
}

inline std::string format_offer(const Contract& offer) { return format_offer(offer.to_partial()); }

namespace detail {

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::string capitalized(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

inline std::string_view option_of(const TierEntry& e) { return option_name(e.group, e.option.value_or(0)); }

inline std::string own_preference_line(const TierEntry& e) {
  const bool up = e.direction > 0;
  switch (e.group) {
    case Term::price:
      return up ? "Price: increase price (higher price -> higher utility)"
                : "Price: decrease price (lower price -> higher utility)";
    case Term::delivery_day:
      return up ? "Delivery Day: increase delivery time (later delivery -> higher utility)"
                : "Delivery Day: decrease delivery time (faster delivery -> higher utility)";
    case Term::down_payment:
      return up ? "Down Payment: increase down payment (higher down payment -> higher utility)"
                : "Down Payment: decrease down payment (lower down payment -> higher utility)";
    case Term::trade_in:
      return up ? "Trade In: increase trade-in value (higher value -> higher utility)"
                : "Trade In: decrease trade-in value (lower value -> higher utility)";
    case Term::has_accessories:
      return up ? "Has Accessories: include accessories (accessories=true -> higher utility)"
                : "Has Accessories: exclude accessories (accessories=false -> higher utility)";
    case Term::model: {
      const std::string o(option_of(e));
      return "Is " + o + ": choose " + o + " (selecting " + o + " -> higher utility)";
    }
    case Term::color: {
      const std::string o(option_of(e));
      return "Color " + o + ": choose " + o + " color (" + o + " -> higher utility)";
    }
    case Term::interior: {
      const std::string o(option_of(e));
      return "Interior " + o + ": choose " + o + " interior (" + o + " -> higher utility)";
    }
    case Term::warranty: {
      const std::string o(option_of(e));
      return "Warranty " + capitalized(o) + ": choose " + o + " warranty (" + o + " -> higher utility)";
    }
    case Term::service: {
      const std::string o(option_of(e));
      return "Service " + capitalized(o) + ": choose " + o + " service (" + o + " -> higher utility)";
    }
  }
  return "";
}

inline std::string intel_line(const TierEntry& e) {
  const bool up = e.direction > 0;
  switch (e.group) {
    case Term::price:
      return up ? "Price: increase price (higher price -> higher utility for them)"
                : "Price: decrease price (lower price -> higher utility for them)";
    case Term::delivery_day:
      return up ? "Delivery Day: increase delivery time (later -> higher utility for them)"
                : "Delivery Day: decrease delivery time (faster -> higher utility for them)";
    case Term::down_payment:
      return up ? "Down Payment: increase down payment (higher down payment -> higher utility for them)"
                : "Down Payment: decrease down payment (lower down payment -> higher utility for them)";
    case Term::trade_in:
      return up ? "Trade In: increase trade-in value (higher value -> higher utility for them)"
                : "Trade In: decrease trade-in value (lower value -> higher utility for them)";
    case Term::has_accessories:
      return up ? "Has Accessories: include accessories (accessories=true -> higher utility for them)"
                : "Has Accessories: exclude accessories (accessories=false -> higher utility for them)";
    case Term::model: {
      const std::string o(option_of(e));
      return "Model: choose " + o + " (selecting " + o + " -> higher utility for them)";
    }
    case Term::color: {
      const std::string o(option_of(e));
      return "Color: choose " + o + " color (" + o + " -> higher utility for them)";
    }
    case Term::interior: {
      const std::string o(option_of(e));
      return "Interior: choose " + o + " (" + o + " -> higher utility for them)";
    }
    case Term::warranty: {
      const std::string o(option_of(e));
      return "Warranty: choose " + o + " warranty (" + o + " -> higher utility for them)";
    }
    case Term::service: {
      const std::string o(option_of(e));
      return "Service: choose " + o + " service (" + o + " -> higher utility for them)";
    }
  }
  return "";
}

inline std::string tier_items(const std::vector<TierEntry>& tiers, Tier tier, bool intel) {
  std::string out;
  for (const auto& e : tiers) {
    if (e.tier != tier) continue;
    out += "  - " + (intel ? intel_line(e) : own_preference_line(e)) + "\n";
  }
  return out;
}

inline constexpr std::string_view kStrategy = R"(## NEGOTIATION STRATEGY:

1. **FOLLOW YOUR PREFERENCES**: You have specific preferences listed below.
   - PRIORITIZE items marked CRITICAL (most important)
   - PUSH FOR items marked IMPORTANT (but can compromise)
   - USE flexible items as bargaining chips
   - Your goal: get outcomes that match your preferences

2. **TRADE STRATEGICALLY**: Exchange things you care less about.
   - Concede on FLEXIBLE items to win on CRITICAL items
   - Don't give away things you want without getting something back
   - Propose deals that maximize YOUR outcome

3. **REACH AGREEMENT**: Making a deal is important!
   - Any deal above your reservation value is better than no deal
   - If opponent offers seem reasonable, seriously consider accepting
   - Don't let perfect be the enemy of good
   - Converge toward mutually beneficial terms

4. **UNDERSTAND CONSTRAINTS**: The other party has HARD LIMITS too!
   - They have minimum/maximum bounds they CANNOT violate
   - If they keep rejecting certain terms, you may be outside their feasible range
   - EXPLORE different combinations - don't get stuck demanding impossible terms
   - A successful deal requires finding terms that work for BOTH parties

## RESPONSE FORMAT:

Respond with: natural dialogue (2-3 sentences), then JSON. BE CONCISE.

[!] CRITICAL: Your JSON should ONLY contain terms you explicitly mentioned
in your dialogue.

For early conversation (exploring):
  {"action": "COUNTER", "terms": [], "notes": "exploring"}

For proposing specific terms you mentioned:
  {"action": "COUNTER",
   "terms": [{"name": "model", "type": "categorical", "value": "Truck"},
             {"name": "price", "type": "money", "value": 35}],
   "notes": "interested in truck around $35k"}

DO NOT include terms you haven't discussed (like color, warranty, etc.)
- let them come up naturally.
)";

inline constexpr std::string_view kHowToNegotiate = R"(## HOW TO NEGOTIATE:
1. FOLLOW YOUR PREFERENCES - they determine your utility
2. PUSH for high-weight features (critical/important)
3. TRADE AWAY flexible items to get what you need
4. Express your preferences naturally through offers and reactions
5. Maximize utility = weighted sum of normalized features
)";

inline constexpr std::string_view kClosing = "NEVER mention JSON, technical details, or utility scores in your dialogue.\n";

inline constexpr std::string_view kOpening = R"(START CONVERSATIONALLY - introduce yourself and express interest.

[>>] FOR YOUR JSON:
- Just exploring? -> Use empty terms: {"action": "COUNTER", "terms": []}
- Mentioned specific things? -> Include ONLY what you said
  Example: "I'm interested in a truck" ->
    {"action": "COUNTER", "terms": [{"name": "model",
     "type": "categorical", "value": "Truck"}]}

[!] DO NOT make up values for terms you haven't mentioned yet
(like color, warranty, etc.)
)";

inline constexpr std::string_view kExploratory = R"(DISCUSS what matters to you. Mention specific preferences.

Your JSON should include ONLY terms you explicitly mention in your dialogue.
- Example: "I'm looking at around $35k for a truck" -> Include model + price only
- Missing terms will auto-fill from their previous offer (if any)

[!] DO NOT specify terms you haven't discussed - let them emerge naturally
)";

inline constexpr std::string_view kProposeComplete = R"(Time to PROPOSE A COMPLETE DEAL. State all major terms explicitly in your dialogue.

When making a complete proposal:
1. SAY all the terms in your dialogue (model, price, delivery, etc.)
2. THEN include them in your JSON
3. Don't include anything you didn't explicitly mention
)";

inline constexpr std::string_view kActiveBargaining = R"(REACT to their offer. Push for better terms or accept if good enough.

For your JSON:
- Accept their offer? -> {"action": "ACCEPT"}
- Change specific terms? -> Include ONLY the terms you want to change
- Their offer auto-fills unchanged terms

[!] IMPORTANT: The other party has HARD CONSTRAINTS they cannot violate.
If they keep rejecting certain values, try different combinations -
find the overlap zone!
)";

inline constexpr std::string_view kConvergence = R"(CONVERGE toward a deal! Find mutually acceptable terms.

[!] If they keep rejecting your proposals, you may be outside their
feasible range.
TRY DIFFERENT TERMS - don't keep demanding impossible values.
Any deal above your reservation value is better than no deal.
)";

inline constexpr std::string_view kFinalRound = R"(FINAL ROUND! Accept their offer or make your final counter.

If their offer gives you positive utility (above reservation), ACCEPT IT.
Otherwise, make ONE FINAL counter and prepare to accept their response.
)";

inline constexpr std::string_view kStrategicGuidelines = R"(**STRATEGIC GUIDELINES - use this to MAXIMIZE YOUR OWN utility:**
- Their CRITICAL items = YOUR leverage. They need these badly ->
  demand concessions on YOUR priorities in exchange.
- Items YOU value but THEY don't care about -> Push hard here -
  giving you what you want costs them almost nothing.
- Items THEY value but YOU don't -> Only concede these in exchange for
  something YOU care about. Never give them away for free.
- Know their walk-away point: propose terms that give them JUST ENOUGH
  to accept, keeping maximum surplus for yourself.
)";

inline constexpr std::string_view kTradePlan = R"(## [P] TRADE PLAN - complete this BEFORE writing your dialogue:

Based on what you know (opponent preferences if available, conversation
history otherwise), package a concrete trade before acting:

  STEP 1 - Feature to CONCEDE (they seem to want it, and giving it
    costs you little):
    -> Feature: ___   Direction: ___
    -> Why it's cheap for you: ___

  STEP 2 - Feature to DEMAND in return (you want it - don't give it
    away for free):
    -> Feature: ___   Direction: ___
    -> Why you should extract this now: ___

  STEP 3 - Your package: "I'll give them ___ IF they give me ___"

  (If no trade makes sense this turn, state why in one sentence.)

Only AFTER completing the plan above, write your dialogue and JSON.
)";

inline constexpr std::string_view kTurnFooter = R"(Respond with: dialogue (2-3 sentences) + JSON action.

[!] REQUIRED: After any thinking, you MUST output your dialogue text and
JSON code block. Complete your full response.
)";

}  // namespace detail

inline std::string_view phase_instruction(Phase phase) {
  switch (phase) {
    case Phase::opening: return detail::kOpening;
    case Phase::exploratory: return detail::kExploratory;
    case Phase::propose_complete: return detail::kProposeComplete;
    case Phase::active_bargaining: return detail::kActiveBargaining;
    case Phase::convergence: return detail::kConvergence;
    case Phase::final_round: return detail::kFinalRound;
  }
  return {};
}

/// Role-side terms and ranges.
inline std::string domain_context(Role role) {
  std::string out = "## DOMAIN:\nAvailable car models: Sedan, SUV, Truck\nNegotiable terms and your valid ranges:\n";
  for (const auto& t : schema()) {
    if (t.term == Term::model) continue;
    out += "  - " + std::string(t.name) + ": ";
    switch (t.kind) {
      case TermKind::continuous: {
        const Interval r = t.range(role);
        const std::string lo = format_number(r.lo), hi = format_number(r.hi);
        if (t.term == Term::delivery_day) out += lo + " to " + hi + " days";
        else if (t.term == Term::down_payment) out += lo + "% to " + hi + "%";
        else out += "$" + lo + "k to $" + hi + "k";
        break;
      }
      case TermKind::categorical:
        for (std::size_t i = 0; i < t.options.size(); ++i) out += (i ? ", " : "") + std::string(t.options[i]);
        break;
      case TermKind::binary: out += "true / false"; break;
    }
    out += "\n";
  }
  return out;
}

/// Own tiered preferences, appended to the system prompt.
inline std::string preference_block(Role role, const std::vector<TierEntry>& tiers) {
  std::string out = "## YOUR PREFERENCES (follow these strictly to maximize your utility):\n";
  out += "Role: " + detail::upper(to_string(role)) + "\n\n";
  out += "**CRITICAL** (fight hard, don't easily concede):\n" + detail::tier_items(tiers, Tier::critical, false) + "\n";
  out += "**IMPORTANT** (push for):\n" + detail::tier_items(tiers, Tier::important, false) + "\n";
  out += "**FLEXIBLE** (use as bargaining chips):\n" + detail::tier_items(tiers, Tier::flexible, false) + "\n";
  out += detail::kHowToNegotiate;
  return out;
}

/// Opponent tiers with directions only; weights are never rendered.
inline std::string intel_block(const std::vector<TierEntry>& opponent_tiers) {
  std::string out = "## [?] INTELLIGENCE ON OPPONENT'S PREFERENCES:\n\n";
  out += "**CRITICAL** (very important to them):\n" + detail::tier_items(opponent_tiers, Tier::critical, true) + "\n";
  out += "**IMPORTANT** (moderately important to them):\n" + detail::tier_items(opponent_tiers, Tier::important, true) +
         "\n";
  out += "**FLEXIBLE** (they don't care much):\n" + detail::tier_items(opponent_tiers, Tier::flexible, true) + "\n";
  out += detail::kStrategicGuidelines;
  return out;
}

inline std::string trade_plan_block() { return std::string(detail::kTradePlan); }

inline std::string system_prompt(Role role, const UtilityProfile& profile) {
  std::string out = role == Role::buyer ? "You are a BUYER negotiating to purchase a car.\n\n"
                                        : "You are a SELLER negotiating to sell a car.\n\n";
  out += detail::kStrategy;
  out += "\n" + domain_context(role);
  out += "\n" + preference_block(role, profile.tiers);
  out += "\n" + std::string(detail::kClosing);
  return out;
}

/// Dialogue lines only; reasoning and raw JSON never leak into the history.
inline std::string conversation_history(const std::vector<Turn>& transcript) {
  std::string out;
  for (const Turn& t : transcript) out += detail::upper(to_string(t.role)) + ": " + t.dialogue + "\n";
  return out;
}

/// Per-turn prompt for the role to move. `opponent_tiers` is rendered only when the role is informed.
inline std::string turn_prompt(const NegotiationState& state, PromptCondition condition,
                               const std::vector<TierEntry>* opponent_tiers) {
  const int index = state.next_index();
  std::string out = "## CONVERSATION:\n" + conversation_history(state.transcript) + "\n";
  out += "## CURRENT OFFER ON TABLE: ";
  out += state.offer_on_table ? format_offer(*state.offer_on_table) : std::string("None (you go first)");
  out += "\n\n";
  out += "## YOUR TURN (Turn " + std::to_string(index) + "):\n";
  out += phase_instruction(state.phase());
  if (condition.informed && opponent_tiers) out += "\n" + intel_block(*opponent_tiers);
  if (condition.trade_plan) out += "\n" + trade_plan_block();
  out += "\n" + std::string(detail::kTurnFooter);
  return out;
}

inline PromptBundle build_prompts(const NegotiationState& state, Role role, PromptCondition condition) {
  const auto& opp_tiers = state.profile(opponent(role)).tiers;
  return {system_prompt(role, state.profile(role)), turn_prompt(state, condition, &opp_tiers)};
}

}  // namespace negotiate
