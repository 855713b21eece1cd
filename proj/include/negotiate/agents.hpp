#pragma once

// Agent policies. Every policy answers with raw text that goes through
// parse_response, so a persisted transcript replays the same way for all kinds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "negotiate/chat.hpp"
#include "negotiate/domain.hpp"
#include "negotiate/prompts.hpp"
#include "negotiate/protocol.hpp"
#include "negotiate/response.hpp"
#include "negotiate/utility.hpp"

namespace negotiate {

enum class AgentKind : std::uint8_t { llm, scripted_conceder, scripted_accommodator };

constexpr std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::llm: return "llm";
    case AgentKind::scripted_conceder: return "scripted_conceder";
    case AgentKind::scripted_accommodator: return "scripted_accommodator";
  }
  return "";
}

inline AgentKind agent_kind_from_string(std::string_view s) {
  for (AgentKind k : {AgentKind::llm, AgentKind::scripted_conceder, AgentKind::scripted_accommodator}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::invalid_config, "unknown agent kind '" + std::string(s) + "'");
}

struct AgentContext {
  const NegotiationState& state;
  Role role;
  const PromptBundle& prompts;
  std::uint64_t seed = 0;
};

struct AgentReply {
  std::string raw;  // verbatim output of the accepted attempt
  std::string reasoning;
  ParsedResponse parsed;
  std::vector<TurnEvent> events;
  bool backend_failure = false;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentKind kind() const = 0;
  virtual AgentReply act(const AgentContext& ctx) = 0;
};

inline constexpr int kParseAttempts = 3;

/// Remote chat model; re-asks up to three times when no JSON action can be parsed.
class LlmAgent : public Agent {
 public:
  LlmAgent(ChatBackend& backend, std::string model, double temperature)
      : backend_(backend), model_(std::move(model)), temperature_(temperature) {}

  AgentKind kind() const override { return AgentKind::llm; }

  AgentReply act(const AgentContext& ctx) override {
    AgentReply reply;
    const ChatRequest request{model_, ctx.prompts.messages(), temperature_};
    for (int attempt = 1; attempt <= kParseAttempts; ++attempt) {
      ChatCompletion c;
      try {
        c = backend_.complete(request);
      } catch (const Error& e) {
        reply.backend_failure = true;
        reply.events.push_back({"backend_unavailable", e.what()});
        return reply;
      }
      reply.raw = c.content;
      reply.reasoning = c.reasoning;
      reply.parsed = parse_response(c.content, c.reasoning);
      if (!reply.parsed.failed()) return reply;
      reply.events.push_back({std::string(events::kParseRetry), "attempt " + std::to_string(attempt)});
    }
    reply.backend_failure = true;
    return reply;
  }

 private:
  ChatBackend& backend_;
  std::string model_;
  double temperature_;
};

struct ConcessionSchedule {
  double exponent = 1.0;  // 4 tough, 1 linear, 0.5 eager
  double floor = 0.1;
};

/// 1 - (1 - floor) t^e.
inline double concession_target(const ConcessionSchedule& s, double t) {
  t = std::clamp(t, 0.0, 1.0);
  return 1.0 - (1.0 - s.floor) * std::pow(t, s.exponent);
}

/// Conversation progress in [0, 1] for the turn about to be played.
inline double progress(const NegotiationState& state) {
  if (state.turn_cap <= 1) return 1.0;
  return static_cast<double>(state.next_index() - 1) / static_cast<double>(state.turn_cap - 1);
}

namespace detail {

/// The opponent's most recently offered option per categorical term.
inline std::array<std::optional<std::size_t>, kTermCount> learned_options(const NegotiationState& state, Role self) {
  std::array<std::optional<std::size_t>, kTermCount> out{};
  for (const Turn& t : state.transcript) {
    if (t.role == self || t.action.kind != ActionKind::counter) continue;
    for (Term term : kCategoricalTerms) {
      if (const auto& v = t.action.terms.get(term)) out[index_of(term)] = std::get<Choice>(*v).index;
    }
  }
  return out;
}

struct ConcessionItem {
  Term term;
  double cost;  // own normalized utility given up by the full move
  double gain;  // estimated opponent gain under uniform group weights
  std::optional<std::size_t> option;
};

}  // namespace detail

struct ConcessionPlan {
  Contract contract;
  std::vector<Belief> conceded;  // opponent-preferred directions moved toward
  double own_utility = 0.0;
};

/// Own-best contract inside the joint bounds, then greedy concessions by
/// cost/gain ratio until own normalized utility reaches `target`.
inline ConcessionPlan plan_concession(const UtilityProfile& own, const NegotiationState& state, double target,
                                      int turn_index) {
  const Role self = own.role, opp = opponent(self);
  Contract c = own.best_contract;
  for (Term t : kContinuousTerms) {
    const Interval jb = joint_bounds(t);
    c.set(t, weight_sign(self, t) > 0 ? jb.hi : jb.lo);
  }
  const double scale = own.best_utility - own.reservation;
  ConcessionPlan plan;
  const double start = normalized_utility(own, c);
  double budget = start - target;
  const double gain = 1.0 / static_cast<double>(kTermCount);

  std::vector<detail::ConcessionItem> items;
  for (Term t : kContinuousTerms) {
    const Interval jb = joint_bounds(t), own_r = schema(t).range(self);
    const double w = std::abs(own.weights[feature_index(t)]);
    items.push_back({t, w * jb.width() / own_r.width() / scale, gain, std::nullopt});
  }
  {
    const double w = std::abs(own.weights[feature_index(Term::has_accessories)]);
    items.push_back({Term::has_accessories, w / scale, gain, std::nullopt});
  }
  const auto learned = detail::learned_options(state, self);
  for (Term t : kCategoricalTerms) {
    const auto& o = learned[index_of(t)];
    const std::size_t mine = std::get<Choice>(c.get(t)).index;
    if (!o || *o == mine) continue;
    const double cost = (own.weights[feature_index(t, mine)] - own.weights[feature_index(t, *o)]) / scale;
    items.push_back({t, std::max(cost, 0.0), gain, o});
  }
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.cost / a.gain < b.cost / b.gain; });

  for (const auto& it : items) {
    if (budget <= 0.0) break;
    const auto& sch = schema(it.term);
    if (sch.kind == TermKind::continuous) {
      const double frac = it.cost <= budget ? 1.0 : budget / it.cost;
      const Interval jb = joint_bounds(it.term);
      const double from = c.number(it.term);
      const double to = from == jb.hi ? jb.lo : jb.hi;
      c.set(it.term, from + frac * (to - from));
      budget -= frac * it.cost;
      plan.conceded.push_back({feature_index(it.term), weight_sign(opp, it.term) > 0 ? 1 : -1, turn_index,
                               BeliefSource::annotation});
    } else if (it.cost <= budget) {
      if (sch.kind == TermKind::binary) {
        c.set(it.term, !c.flag(it.term));
        plan.conceded.push_back({feature_index(it.term), weight_sign(opp, it.term) > 0 ? 1 : -1, turn_index,
                                 BeliefSource::annotation});
      } else {
        c.set(it.term, Choice{*it.option});
        plan.conceded.push_back({feature_index(it.term, *it.option), +1, turn_index, BeliefSource::annotation});
      }
      budget -= it.cost;
    }
  }
  plan.contract = c;
  plan.own_utility = normalized_utility(own, c);
  return plan;
}

namespace detail {

inline bool within_own_range(const Contract& c, Role role) {
  for (Term t : kContinuousTerms) {
    if (!schema(t).range(role).contains(c.number(t))) return false;
  }
  return true;
}

inline std::string beliefs_sidecar_text(const std::vector<Belief>& beliefs) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const Belief& b : beliefs) {
    nlohmann::ordered_json item;
    item["feature"] = feature_name(b.feature);
    item["direction"] = b.direction;
    list.push_back(item);
  }
  return "<beliefs>" + list.dump() + "</beliefs>";
}

inline std::string render_reply(const std::string& think, const std::string& dialogue, const Action& action) {
  return "<think>" + think + "</think>\n" + dialogue + "\n```json\n" + action_to_json(action).dump() + "\n```";
}

}  // namespace detail

/// Time-dependent concession baseline (deterministic).
class ScriptedConceder : public Agent {
 public:
  explicit ScriptedConceder(ConcessionSchedule schedule = {}) : schedule_(schedule) {}

  AgentKind kind() const override { return AgentKind::scripted_conceder; }

  AgentReply act(const AgentContext& ctx) override {
    const double target = concession_target(schedule_, progress(ctx.state));
    return respond(ctx, target, target);
  }

 protected:
  /// Accept an opponent offer worth at least `accept_at`; otherwise propose at `propose_at`.
  static AgentReply respond(const AgentContext& ctx, double accept_at, double propose_at) {
    const NegotiationState& s = ctx.state;
    const UtilityProfile& own = s.profile(ctx.role);
    const int index = s.next_index();
    char buf[96];
    if (s.offer_on_table && s.offer_proposer == opponent(ctx.role) &&
        detail::within_own_range(*s.offer_on_table, ctx.role)) {
      const double u = normalized_utility(own, *s.offer_on_table);
      if (u >= accept_at) {
        std::snprintf(buf, sizeof buf, "offer clears my target (turn %d)", index);
        Action a{ActionKind::accept, {}, "accept"};
        AgentReply r;
        r.raw = detail::render_reply(buf, "That works for me. Let's close the deal.", a);
        r.parsed = parse_response(r.raw);
        return r;
      }
    }
    const ConcessionPlan plan = plan_concession(own, s, propose_at, index);
    std::string think = "conceding on:";
    for (const Belief& b : plan.conceded) think += " " + feature_name(b.feature);
    if (plan.conceded.empty()) think += " nothing";
    think += "\n" + detail::beliefs_sidecar_text(plan.conceded);
    Action a{ActionKind::counter, plan.contract.to_partial(), "scripted"};
    AgentReply r;
    r.raw = detail::render_reply(think, "I propose " + format_offer(plan.contract) + ".", a);
    r.parsed = parse_response(r.raw);
    return r;
  }

  ConcessionSchedule schedule_;
};

/// Proposes a fixed mid-utility package and takes anything above its floor.
class ScriptedAccommodator : public ScriptedConceder {
 public:
  explicit ScriptedAccommodator(double propose_at = 0.5, ConcessionSchedule schedule = {})
      : ScriptedConceder(schedule), propose_at_(propose_at) {}

  AgentKind kind() const override { return AgentKind::scripted_accommodator; }

  AgentReply act(const AgentContext& ctx) override { return respond(ctx, schedule_.floor, propose_at_); }

 private:
  double propose_at_;
};

}  // namespace negotiate
