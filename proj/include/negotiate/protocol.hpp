#pragma once

// Alternating-offers state machine: offer resolution, phase schedule,
// acceptance rules and outcomes.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "negotiate/beliefs.hpp"
#include "negotiate/domain.hpp"
#include "negotiate/error.hpp"
#include "negotiate/turn_metrics.hpp"
#include "negotiate/utility.hpp"

namespace negotiate {

inline constexpr int kDefaultTurnCap = 40;

enum class ActionKind : std::uint8_t { accept, counter };

constexpr std::string_view to_string(ActionKind k) { return k == ActionKind::accept ? "ACCEPT" : "COUNTER"; }

struct Action {
  ActionKind kind = ActionKind::counter;
  PartialOffer terms;  // empty for ACCEPT
  std::string notes;

  bool operator==(const Action&) const = default;
};

enum class Phase : std::uint8_t { opening, exploratory, propose_complete, active_bargaining, convergence, final_round };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::opening: return "opening";
    case Phase::exploratory: return "exploratory";
    case Phase::propose_complete: return "propose_complete";
    case Phase::active_bargaining: return "active_bargaining";
    case Phase::convergence: return "convergence";
    case Phase::final_round: return "final_round";
  }
  return "";
}

/// Phase from the global turn counter and whether a complete offer is on the table.
inline Phase phase_for(int turn_index, bool has_complete_offer) {
  if (turn_index <= 1) return Phase::opening;
  if (!has_complete_offer) return turn_index <= 5 ? Phase::exploratory : Phase::propose_complete;
  if (turn_index <= 15) return Phase::active_bargaining;
  if (turn_index <= 30) return Phase::convergence;
  return Phase::final_round;
}

// Protocol event tags recorded on a turn.
namespace events {
inline constexpr std::string_view kClampedToOwnRange = "clamped_to_own_range";
inline constexpr std::string_view kInfeasibleForAcceptance = "infeasible_for_acceptance";
inline constexpr std::string_view kRejectedAccept = "rejected_accept";
inline constexpr std::string_view kParseRetry = "parse_retry";
inline constexpr std::string_view kParse = "parse";
inline constexpr std::string_view kExtractorUnavailable = "extractor_unavailable";
}  // namespace events

struct TurnEvent {
  std::string kind;
  std::string detail;

  bool operator==(const TurnEvent&) const = default;
};

struct Turn {
  int index = 0;
  Role role = Role::buyer;
  std::string dialogue;
  std::string think;
  std::string raw_action;  // verbatim agent output
  std::string reasoning;   // separate reasoning field from the backend, if any
  Action action;
  std::optional<ResolvedOffer> resolved_offer;
  std::vector<TurnEvent> events;
  std::vector<Belief> beliefs;
  bool beliefs_available = true;
  TurnMetrics metrics;

  bool has_complete_offer() const {
    return resolved_offer && std::holds_alternative<Contract>(*resolved_offer);
  }
  const Contract* complete_offer() const {
    return resolved_offer ? std::get_if<Contract>(&*resolved_offer) : nullptr;
  }
};

enum class NoDealReason : std::uint8_t { turn_cap, backend_failure };

constexpr std::string_view to_string(NoDealReason r) {
  return r == NoDealReason::turn_cap ? "turn_cap" : "backend_failure";
}

struct Running {};
struct DealReached {
  Contract contract;
};
struct NoDeal {
  NoDealReason reason;
};
using Status = std::variant<Running, DealReached, NoDeal>;

struct NegotiationState {
  UtilityProfile buyer;
  UtilityProfile seller;
  int turn_cap = kDefaultTurnCap;
  std::vector<Turn> transcript;
  std::optional<Contract> offer_on_table;
  std::optional<Role> offer_proposer;
  bool offer_feasible = false;  // offer_on_table lies inside both roles' ranges
  Status status = Running{};

  NegotiationState() = default;
  NegotiationState(UtilityProfile b, UtilityProfile s, int cap = kDefaultTurnCap)
      : buyer(std::move(b)), seller(std::move(s)), turn_cap(cap) {}

  bool running() const { return std::holds_alternative<Running>(status); }
  int next_index() const { return static_cast<int>(transcript.size()) + 1; }
  Role to_move() const { return transcript.size() % 2 == 0 ? Role::buyer : Role::seller; }
  const UtilityProfile& profile(Role r) const { return r == Role::buyer ? buyer : seller; }
  Phase phase() const { return phase_for(next_index(), offer_on_table.has_value()); }
};

namespace detail {

inline void clamp_to_own_range(Turn& turn) {
  for (Term t : kContinuousTerms) {
    const auto& v = turn.action.terms.get(t);
    if (!v) continue;
    const Interval r = schema(t).range(turn.role);
    const double x = std::get<double>(*v);
    if (!r.contains(x)) {
      turn.action.terms.set(t, r.clamp(x));
      turn.events.push_back({std::string(events::kClampedToOwnRange), std::string(to_string(t))});
    }
  }
}

}  // namespace detail

/// Apply one turn: resolves the offer, evaluates acceptance and enforces the turn cap.
/// The turn (with resolved offer and protocol events filled in) is appended to the transcript.
inline void apply_action(NegotiationState& state, Turn turn) {
  if (!state.running()) throw Error(ErrorKind::out_of_turn, "negotiation already finished");
  if (turn.role != state.to_move() || turn.index != state.next_index()) {
    throw Error(ErrorKind::out_of_turn, "turn " + std::to_string(turn.index) + " by " + std::string(to_string(turn.role)));
  }

  auto reject_accept = [&](std::string_view why) {
    turn.events.push_back({std::string(events::kRejectedAccept), std::string(why)});
    turn.resolved_offer = state.offer_on_table ? ResolvedOffer{*state.offer_on_table} : ResolvedOffer{PartialOffer{}};
  };

  if (turn.action.kind == ActionKind::accept) {
    if (!state.offer_on_table) {
      reject_accept("no_offer_to_accept");
    } else if (state.offer_proposer == turn.role) {
      reject_accept("own_offer");
    } else if (!state.offer_feasible) {
      reject_accept("outside_joint_range");
    } else if (normalized_utility(state.buyer, *state.offer_on_table) <= 0.0 ||
               normalized_utility(state.seller, *state.offer_on_table) <= 0.0) {
      reject_accept("below_reservation");
    } else {
      turn.resolved_offer = *state.offer_on_table;
      state.status = DealReached{*state.offer_on_table};
    }
  } else if (turn.action.terms.size() == 0) {
    // No change: the table offer keeps its proposer.
    turn.resolved_offer = state.offer_on_table ? ResolvedOffer{*state.offer_on_table} : ResolvedOffer{PartialOffer{}};
  } else {
    detail::clamp_to_own_range(turn);
    ResolvedOffer resolved = merge_autofill(turn.action.terms, state.offer_on_table);
    if (const Contract* c = std::get_if<Contract>(&resolved)) {
      state.offer_on_table = *c;
      state.offer_proposer = turn.role;
      state.offer_feasible = within_joint_bounds(*c);
      if (!state.offer_feasible) turn.events.push_back({std::string(events::kInfeasibleForAcceptance), ""});
    }
    turn.resolved_offer = std::move(resolved);
  }

  state.transcript.push_back(std::move(turn));
  if (state.running() && static_cast<int>(state.transcript.size()) >= state.turn_cap) {
    state.status = NoDeal{NoDealReason::turn_cap};
  }
}

/// Terminate because an agent backend could not produce a usable response.
inline void fail_backend(NegotiationState& state) {
  if (state.running()) state.status = NoDeal{NoDealReason::backend_failure};
}

struct DealOutcome {
  Contract contract;
  double buyer_utility;  // normalized
  double seller_utility;
};
using Outcome = std::variant<DealOutcome, NoDeal>;

inline Outcome outcome(const NegotiationState& state) {
  if (state.running()) throw Error(ErrorKind::still_running, "negotiation has not finished");
  if (const auto* d = std::get_if<DealReached>(&state.status)) {
    return DealOutcome{d->contract, normalized_utility(state.buyer, d->contract),
                       normalized_utility(state.seller, d->contract)};
  }
  return std::get<NoDeal>(state.status);
}

}  // namespace negotiate
