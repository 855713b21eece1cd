#pragma once

// JSON forms of offers, turns, profiles and trial records. Doubles are written
// shortest-round-trip, so a loaded record reproduces every number bit for bit.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "negotiate/beliefs.hpp"
#include "negotiate/domain.hpp"
#include "negotiate/frontier.hpp"
#include "negotiate/protocol.hpp"
#include "negotiate/utility.hpp"

namespace negotiate {

using ojson = nlohmann::ordered_json;

/// Everything needed to interpret one trial without its config.
struct TrialRecord {
  int trial_index = 0;
  std::string experiment;
  std::string condition;
  bool buyer_informed = false;
  bool seller_informed = false;
  bool trade_plan = false;
  std::uint64_t seed = 0;
  std::string buyer_agent;
  std::string seller_agent;
  int turn_cap = kDefaultTurnCap;
  std::size_t K = 5;
  BeliefSource belief_source = BeliefSource::annotation;
  UtilityProfile buyer;
  UtilityProfile seller;
  std::vector<Turn> turns;
  Outcome outcome = NoDeal{NoDealReason::turn_cap};
  std::optional<EfficiencyReport> efficiency;
  UtilityPoint nbs;
  Contract nbs_contract;
  std::size_t frontier_vertices = 0;
  std::vector<TurnEvent> failure_events;  // backend errors that ended the trial

  const UtilityProfile& profile(Role r) const { return r == Role::buyer ? buyer : seller; }
  bool deal() const { return std::holds_alternative<DealOutcome>(outcome); }
  bool backend_failure() const {
    const auto* n = std::get_if<NoDeal>(&outcome);
    return n && n->reason == NoDealReason::backend_failure;
  }
};

namespace detail {

inline Error bad_record(const std::string& what) { return Error(ErrorKind::io_failure, "malformed record: " + what); }

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw bad_record("missing '" + std::string(key) + "'");
  return j.at(key);
}

}  // namespace detail

inline ojson term_value_to_json(Term t, const TermValue& v) {
  switch (schema(t).kind) {
    case TermKind::continuous: return std::get<double>(v);
    case TermKind::categorical: return std::string(option_name(t, std::get<Choice>(v).index));
    case TermKind::binary: return std::get<bool>(v);
  }
  return nullptr;
}

inline TermValue term_value_from_json(Term t, const nlohmann::json& j) {
  switch (schema(t).kind) {
    case TermKind::continuous:
      if (!j.is_number()) break;
      return j.get<double>();
    case TermKind::categorical:
      if (!j.is_string()) break;
      if (auto o = option_index(t, j.get<std::string>())) return Choice{*o};
      break;
    case TermKind::binary:
      if (!j.is_boolean()) break;
      return j.get<bool>();
  }
  throw detail::bad_record("bad value for " + std::string(to_string(t)));
}

inline ojson offer_to_json(const PartialOffer& offer) {
  ojson j = ojson::object();
  for (Term t : kAllTerms) {
    if (const auto& v = offer.get(t)) j[std::string(to_string(t))] = term_value_to_json(t, *v);
  }
  return j;
}

inline ojson offer_to_json(const Contract& c) { return offer_to_json(c.to_partial()); }

inline PartialOffer offer_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw detail::bad_record("offer is not an object");
  PartialOffer p;
  for (const auto& [k, v] : j.items()) {
    const auto t = term_from_name(k);
    if (!t) throw detail::bad_record("unknown term " + k);
    p.set(*t, term_value_from_json(*t, v));
  }
  return p;
}

inline Contract contract_from_json(const nlohmann::json& j) { return Contract::from_partial(offer_from_json(j)); }

inline ojson action_record(const Action& a) {
  ojson j;
  j["kind"] = std::string(to_string(a.kind));
  j["terms"] = offer_to_json(a.terms);
  j["notes"] = a.notes;
  return j;
}

inline Action action_from_record(const nlohmann::json& j) {
  Action a;
  const std::string kind = detail::field(j, "kind").get<std::string>();
  if (kind == "ACCEPT") a.kind = ActionKind::accept;
  else if (kind == "COUNTER") a.kind = ActionKind::counter;
  else throw detail::bad_record("action kind " + kind);
  a.terms = offer_from_json(detail::field(j, "terms"));
  a.notes = detail::field(j, "notes").get<std::string>();
  return a;
}

inline ojson beliefs_to_json(const std::vector<Belief>& beliefs) {
  ojson list = ojson::array();
  for (const Belief& b : beliefs) {
    ojson item;
    item["feature"] = feature_name(b.feature);
    item["direction"] = b.direction;
    item["turn_index"] = b.turn_index;
    item["source"] = std::string(to_string(b.source));
    list.push_back(item);
  }
  return list;
}

inline std::vector<Belief> beliefs_from_record(const nlohmann::json& j) {
  std::vector<Belief> out;
  for (const auto& item : j) {
    const auto f = feature_from_name(detail::field(item, "feature").get<std::string>());
    if (!f) throw detail::bad_record("unknown feature in beliefs");
    out.push_back({*f, detail::field(item, "direction").get<int>(), detail::field(item, "turn_index").get<int>(),
                   belief_source_from_string(detail::field(item, "source").get<std::string>())});
  }
  return out;
}

template <class T>
ojson optional_to_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

inline std::optional<double> optional_double(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline ojson metrics_to_json(const TurnMetrics& m) {
  ojson j;
  j["concession_c"] = optional_to_json(m.concession_c);
  j["own_gain_g"] = optional_to_json(m.own_gain_g);
  j["alignment_mean"] = optional_to_json(m.alignment_mean);
  ojson features = ojson::array();
  for (std::size_t f : m.mentioned_features) features.push_back(feature_name(f));
  j["mentioned_features"] = features;
  return j;
}

inline TurnMetrics metrics_from_json(const nlohmann::json& j) {
  TurnMetrics m;
  m.concession_c = optional_double(detail::field(j, "concession_c"));
  m.own_gain_g = optional_double(detail::field(j, "own_gain_g"));
  m.alignment_mean = optional_double(detail::field(j, "alignment_mean"));
  for (const auto& f : detail::field(j, "mentioned_features")) {
    const auto idx = feature_from_name(f.get<std::string>());
    if (!idx) throw detail::bad_record("unknown mentioned feature");
    m.mentioned_features.push_back(*idx);
  }
  return m;
}

inline ojson resolved_to_json(const std::optional<ResolvedOffer>& r) {
  if (!r) return nullptr;
  ojson j;
  const bool complete = std::holds_alternative<Contract>(*r);
  j["complete"] = complete;
  j["terms"] = complete ? offer_to_json(std::get<Contract>(*r)) : offer_to_json(std::get<PartialOffer>(*r));
  return j;
}

inline std::optional<ResolvedOffer> resolved_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  PartialOffer p = offer_from_json(detail::field(j, "terms"));
  if (detail::field(j, "complete").get<bool>()) return ResolvedOffer{Contract::from_partial(p)};
  return ResolvedOffer{p};
}

inline ojson turn_to_json(const Turn& t) {
  ojson j;
  j["index"] = t.index;
  j["role"] = std::string(to_string(t.role));
  j["dialogue"] = t.dialogue;
  j["think"] = t.think;
  j["raw_action"] = t.raw_action;
  j["reasoning"] = t.reasoning;
  j["action"] = action_record(t.action);
  j["resolved_offer"] = resolved_to_json(t.resolved_offer);
  ojson ev = ojson::array();
  for (const auto& e : t.events) ev.push_back({{"kind", e.kind}, {"detail", e.detail}});
  j["events"] = ev;
  j["beliefs"] = beliefs_to_json(t.beliefs);
  j["beliefs_available"] = t.beliefs_available;
  j["metrics"] = metrics_to_json(t.metrics);
  return j;
}

inline std::vector<TurnEvent> events_from_json(const nlohmann::json& j) {
  std::vector<TurnEvent> out;
  for (const auto& e : j) out.push_back({detail::field(e, "kind").get<std::string>(), detail::field(e, "detail").get<std::string>()});
  return out;
}

inline Turn turn_from_json(const nlohmann::json& j) {
  using detail::field;
  Turn t;
  t.index = field(j, "index").get<int>();
  t.role = role_from_string(field(j, "role").get<std::string>());
  t.dialogue = field(j, "dialogue").get<std::string>();
  t.think = field(j, "think").get<std::string>();
  t.raw_action = field(j, "raw_action").get<std::string>();
  t.reasoning = field(j, "reasoning").get<std::string>();
  t.action = action_from_record(field(j, "action"));
  t.resolved_offer = resolved_from_json(field(j, "resolved_offer"));
  t.events = events_from_json(field(j, "events"));
  t.beliefs = beliefs_from_record(field(j, "beliefs"));
  t.beliefs_available = field(j, "beliefs_available").get<bool>();
  t.metrics = metrics_from_json(field(j, "metrics"));
  return t;
}

inline ojson profile_to_json(const UtilityProfile& p) {
  ojson j;
  j["role"] = std::string(to_string(p.role));
  ojson w = ojson::object();
  for (std::size_t f = 0; f < kFeatureDim; ++f) w[feature_name(f)] = p.weights[f];
  j["weights"] = w;
  j["reservation"] = p.reservation;
  j["best_utility"] = p.best_utility;
  return j;
}

/// Derived fields are recomputed from the weights.
inline UtilityProfile profile_from_json(const nlohmann::json& j) {
  const Role role = role_from_string(detail::field(j, "role").get<std::string>());
  const auto& w = detail::field(j, "weights");
  FeatureVector weights;
  for (std::size_t f = 0; f < kFeatureDim; ++f) weights[f] = detail::field(w, feature_name(f).c_str()).get<double>();
  return make_profile(role, weights);
}

inline ojson point_to_json(UtilityPoint p) { return ojson::array({p.buyer, p.seller}); }

inline UtilityPoint point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw detail::bad_record("utility point");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ojson outcome_to_json(const Outcome& o) {
  ojson j;
  if (const auto* d = std::get_if<DealOutcome>(&o)) {
    j["deal"] = true;
    j["contract"] = offer_to_json(d->contract);
    j["buyer_utility"] = d->buyer_utility;
    j["seller_utility"] = d->seller_utility;
  } else {
    j["deal"] = false;
    j["reason"] = std::string(to_string(std::get<NoDeal>(o).reason));
  }
  return j;
}

inline Outcome outcome_from_json(const nlohmann::json& j) {
  if (detail::field(j, "deal").get<bool>()) {
    return DealOutcome{contract_from_json(detail::field(j, "contract")), detail::field(j, "buyer_utility").get<double>(),
                       detail::field(j, "seller_utility").get<double>()};
  }
  const std::string r = detail::field(j, "reason").get<std::string>();
  if (r == "turn_cap") return NoDeal{NoDealReason::turn_cap};
  if (r == "backend_failure") return NoDeal{NoDealReason::backend_failure};
  throw detail::bad_record("no-deal reason " + r);
}

/// Trial summary object (everything except the turns).
inline ojson record_summary_json(const TrialRecord& r) {
  ojson j;
  j["trial_index"] = r.trial_index;
  j["experiment"] = r.experiment;
  j["condition"] = r.condition;
  j["buyer_informed"] = r.buyer_informed;
  j["seller_informed"] = r.seller_informed;
  j["trade_plan"] = r.trade_plan;
  j["seed"] = r.seed;
  j["buyer_agent"] = r.buyer_agent;
  j["seller_agent"] = r.seller_agent;
  j["turn_cap"] = r.turn_cap;
  j["K"] = r.K;
  j["belief_source"] = std::string(to_string(r.belief_source));
  j["buyer_profile"] = profile_to_json(r.buyer);
  j["seller_profile"] = profile_to_json(r.seller);
  j["turn_count"] = r.turns.size();
  j["outcome"] = outcome_to_json(r.outcome);
  if (r.efficiency) {
    j["efficiency"] = {{"d_pareto", r.efficiency->d_pareto},
                       {"d_nbs", r.efficiency->d_nbs},
                       {"deal_point", point_to_json(r.efficiency->deal_point)}};
  } else {
    j["efficiency"] = nullptr;
  }
  j["frontier"] = {{"nbs", point_to_json(r.nbs)},
                   {"nbs_contract", offer_to_json(r.nbs_contract)},
                   {"vertices", r.frontier_vertices}};
  ojson fe = ojson::array();
  for (const auto& e : r.failure_events) fe.push_back({{"kind", e.kind}, {"detail", e.detail}});
  j["failure_events"] = fe;
  return j;
}

inline TrialRecord record_from_json(const nlohmann::json& summary, const std::vector<nlohmann::json>& turn_lines) {
  using detail::field;
  TrialRecord r;
  r.trial_index = field(summary, "trial_index").get<int>();
  r.experiment = field(summary, "experiment").get<std::string>();
  r.condition = field(summary, "condition").get<std::string>();
  r.buyer_informed = field(summary, "buyer_informed").get<bool>();
  r.seller_informed = field(summary, "seller_informed").get<bool>();
  r.trade_plan = field(summary, "trade_plan").get<bool>();
  r.seed = field(summary, "seed").get<std::uint64_t>();
  r.buyer_agent = field(summary, "buyer_agent").get<std::string>();
  r.seller_agent = field(summary, "seller_agent").get<std::string>();
  r.turn_cap = field(summary, "turn_cap").get<int>();
  r.K = field(summary, "K").get<std::size_t>();
  r.belief_source = belief_source_from_string(field(summary, "belief_source").get<std::string>());
  r.buyer = profile_from_json(field(summary, "buyer_profile"));
  r.seller = profile_from_json(field(summary, "seller_profile"));
  r.outcome = outcome_from_json(field(summary, "outcome"));
  if (const auto& e = field(summary, "efficiency"); !e.is_null()) {
    r.efficiency = EfficiencyReport{field(e, "d_pareto").get<double>(), field(e, "d_nbs").get<double>(),
                                    point_from_json(field(e, "deal_point"))};
  }
  const auto& fr = field(summary, "frontier");
  r.nbs = point_from_json(field(fr, "nbs"));
  r.nbs_contract = contract_from_json(field(fr, "nbs_contract"));
  r.frontier_vertices = field(fr, "vertices").get<std::size_t>();
  r.failure_events = events_from_json(field(summary, "failure_events"));
  for (const auto& line : turn_lines) r.turns.push_back(turn_from_json(line));
  if (r.turns.size() != field(summary, "turn_count").get<std::size_t>()) throw detail::bad_record("turn count mismatch");
  return r;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Serialized forms exactly as persisted: summary line and one line per turn.
struct RecordText {
  std::string summary;
  std::vector<std::string> turns;
};

inline RecordText record_text(const TrialRecord& r) {
  RecordText t;
  t.summary = record_summary_json(r).dump();
  for (const Turn& turn : r.turns) t.turns.push_back(turn_to_json(turn).dump());
  return t;
}

/// FNV-1a over the summary and turn lines, each followed by a newline.
inline std::string record_hash(const RecordText& text) {
  std::uint64_t h = fnv1a64(text.summary);
  h = fnv1a64("\n", h);
  for (const auto& line : text.turns) {
    h = fnv1a64(line, h);
    h = fnv1a64("\n", h);
  }
  return hex64(h);
}

inline std::string record_hash(const TrialRecord& r) { return record_hash(record_text(r)); }

}  // namespace negotiate
