#pragma once

// Parsing of agent output: reasoning segment, dialogue, and the JSON action.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "negotiate/beliefs.hpp"
#include "negotiate/domain.hpp"
#include "negotiate/protocol.hpp"

namespace negotiate {

struct ParsedResponse {
  std::string dialogue;
  std::string think;
  std::optional<Action> action;  // absent when no JSON object was found
  std::optional<std::vector<Belief>> belief_annotations;
  std::vector<TurnEvent> parse_events;

  bool failed() const { return !action.has_value(); }
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Identifier normalization: lowercase, spaces and hyphens to underscores.
inline std::string ident(std::string_view s) {
  std::string out = lower(trim(s));
  for (char& c : out) {
    if (c == ' ' || c == '-') c = '_';
  }
  return out;
}

inline std::optional<Term> term_from_alias(std::string_view name) {
  const std::string n = ident(name);
  if (auto t = term_from_name(n)) return t;
  static const std::pair<std::string_view, Term> aliases[] = {
      {"delivery", Term::delivery_day},      {"delivery_days", Term::delivery_day},
      {"delivery_time", Term::delivery_day}, {"down", Term::down_payment},
      {"downpayment", Term::down_payment},   {"down_payment_pct", Term::down_payment},
      {"tradein", Term::trade_in},           {"trade_in_value", Term::trade_in},
      {"accessories", Term::has_accessories}, {"has_accessory", Term::has_accessories},
      {"accessory", Term::has_accessories},  {"car_model", Term::model},
      {"interior_type", Term::interior},     {"warranty_type", Term::warranty},
      {"service_plan", Term::service},       {"service_package", Term::service},
      {"car_color", Term::color},            {"colour", Term::color},
  };
  for (const auto& [a, t] : aliases) {
    if (n == a) return t;
  }
  return std::nullopt;
}

/// Numeric reading of "35", "$35k", "35,000", "14 days", "20%".
inline std::optional<double> number_from(const nlohmann::json& v, bool& thousands_suffix) {
  thousands_suffix = false;
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) return std::nullopt;
  std::string s;
  for (char c : v.get<std::string>()) {
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-') {
      s += c;
    } else if ((c == 'k' || c == 'K') && !s.empty()) {
      thousands_suffix = true;
      break;
    } else if (c == ',' || c == '$' || c == ' ') {
      continue;
    } else if (!s.empty()) {
      break;
    }
  }
  if (s.empty() || s == "-" || s == ".") return std::nullopt;
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return x;
  } catch (...) {
    return std::nullopt;
  }
}

inline std::optional<TermValue> term_value_from(Term term, const nlohmann::json& v) {
  const auto& t = schema(term);
  switch (t.kind) {
    case TermKind::continuous: {
      bool k = false;
      auto x = number_from(v, k);
      if (!x || !std::isfinite(*x)) return std::nullopt;
      // Money in dollars rather than $k.
      if ((term == Term::price || term == Term::trade_in) && !k && *x > 1000.0) *x /= 1000.0;
      return TermValue{*x};
    }
    case TermKind::categorical: {
      if (!v.is_string()) return std::nullopt;
      const std::string want = lower(trim(v.get<std::string>()));
      for (std::size_t i = 0; i < t.options.size(); ++i) {
        if (lower(t.options[i]) == want) return TermValue{Choice{i}};
      }
      return std::nullopt;
    }
    case TermKind::binary: {
      if (v.is_boolean()) return TermValue{v.get<bool>()};
      if (v.is_number()) return TermValue{v.get<double>() != 0.0};
      if (!v.is_string()) return std::nullopt;
      const std::string s = lower(trim(v.get<std::string>()));
      if (s == "true" || s == "yes" || s == "include" || s == "included") return TermValue{true};
      if (s == "false" || s == "no" || s == "exclude" || s == "excluded" || s == "none") return TermValue{false};
      return std::nullopt;
    }
  }
  return std::nullopt;
}

/// Outermost balanced {...} spans, string-literal aware.
inline std::vector<std::pair<std::size_t, std::size_t>> brace_spans(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      ++i;
      continue;
    }
    int depth = 0;
    bool in_string = false, escaped = false;
    std::size_t j = i;
    for (; j < text.size(); ++j) {
      const char c = text[j];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) break;
    }
    if (j >= text.size()) {
      ++i;  // unbalanced: try the next brace
      continue;
    }
    out.emplace_back(i, j + 1);
    i = j + 1;
  }
  return out;
}

/// Splits "<think>...</think>" from the text; tolerates a missing opening or closing tag.
inline std::pair<std::string, std::string> split_think(std::string_view raw) {
  static constexpr std::string_view open = "<think>", close = "</think>";
  const auto o = raw.find(open);
  const auto c = raw.find(close);
  if (o != std::string_view::npos && c != std::string_view::npos && c > o) {
    return {std::string(raw.substr(o + open.size(), c - o - open.size())),
            std::string(raw.substr(0, o)) + std::string(raw.substr(c + close.size()))};
  }
  if (c != std::string_view::npos) return {std::string(raw.substr(0, c)), std::string(raw.substr(c + close.size()))};
  if (o != std::string_view::npos) return {std::string(raw.substr(o + open.size())), std::string(raw.substr(0, o))};
  return {std::string(), std::string(raw)};
}

inline std::string strip_fences(std::string s) {
  for (std::string_view fence : {"```json", "```JSON", "```"}) {
    std::size_t p;
    while ((p = s.find(fence)) != std::string::npos) s.erase(p, fence.size());
  }
  return trim(s);
}

}  // namespace detail

/// Feature identifier to layout index: "price", "model:Sedan", "Sedan", "has_accessories".
inline std::optional<std::size_t> feature_from_identifier(std::string_view text) {
  const std::string id = detail::trim(text);
  if (auto f = feature_from_name(id)) return f;
  std::string norm = id;
  for (char sep : {'=', '.', '/'}) std::replace(norm.begin(), norm.end(), sep, ':');
  const auto colon = norm.find(':');
  if (colon != std::string::npos) {
    const auto term = detail::term_from_alias(norm.substr(0, colon));
    if (!term || schema(*term).kind != TermKind::categorical) return std::nullopt;
    const std::string opt = detail::lower(detail::trim(norm.substr(colon + 1)));
    const auto& t = schema(*term);
    for (std::size_t i = 0; i < t.options.size(); ++i) {
      if (detail::lower(t.options[i]) == opt) return t.feature_offset + i;
    }
    return std::nullopt;
  }
  if (auto term = detail::term_from_alias(id); term && schema(*term).kind != TermKind::categorical) {
    return schema(*term).feature_offset;
  }
  // Bare option name, when unique across categorical terms.
  std::optional<std::size_t> found;
  const std::string want = detail::lower(id);
  for (Term term : kCategoricalTerms) {
    const auto& t = schema(term);
    for (std::size_t i = 0; i < t.options.size(); ++i) {
      if (detail::lower(t.options[i]) != want) continue;
      if (found) return std::nullopt;
      found = t.feature_offset + i;
    }
  }
  return found;
}

/// Belief list from JSON [{feature, direction}]; unknown features counted in `dropped`.
inline std::vector<Belief> beliefs_from_json(const nlohmann::json& list, int turn_index, BeliefSource source,
                                             std::size_t& dropped) {
  std::vector<Belief> out;
  dropped = 0;
  if (!list.is_array()) return out;
  for (const auto& item : list) {
    if (!item.is_object() || !item.contains("feature") || !item["feature"].is_string()) {
      ++dropped;
      continue;
    }
    const auto f = feature_from_identifier(item["feature"].get<std::string>());
    int d = 0;
    if (item.contains("direction")) {
      const auto& dv = item["direction"];
      if (dv.is_number()) d = dv.get<double>() > 0 ? 1 : (dv.get<double>() < 0 ? -1 : 0);
      else if (dv.is_string()) {
        const std::string s = detail::lower(dv.get<std::string>());
        if (s == "+1" || s == "1" || s == "up" || s == "higher" || s == "increase" || s == "prefer") d = 1;
        if (s == "-1" || s == "down" || s == "lower" || s == "decrease" || s == "avoid") d = -1;
      }
    }
    if (!f || d == 0) {
      ++dropped;
      continue;
    }
    out.push_back(Belief{*f, d, turn_index, source});
  }
  return out;
}

/// Reads `<beliefs>[...]</beliefs>` from a reasoning segment.
inline std::optional<std::vector<Belief>> belief_sidecar(std::string_view think, int turn_index = 0) {
  static constexpr std::string_view open = "<beliefs>", close = "</beliefs>";
  const auto o = think.find(open);
  if (o == std::string_view::npos) return std::nullopt;
  const auto c = think.find(close, o);
  if (c == std::string_view::npos) return std::nullopt;
  const auto j = nlohmann::json::parse(think.substr(o + open.size(), c - o - open.size()), nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  std::size_t dropped = 0;
  return beliefs_from_json(j, turn_index, BeliefSource::annotation, dropped);
}

/// Action from a parsed JSON object; never throws.
inline Action action_from_json(const nlohmann::json& j, std::vector<TurnEvent>& events) {
  Action a;
  const std::string kind = j.contains("action") && j["action"].is_string() ? j["action"].get<std::string>() : "";
  const std::string upper_kind = [&] {
    std::string s = detail::trim(kind);
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  }();
  if (j.contains("notes") && j["notes"].is_string()) a.notes = j["notes"].get<std::string>();
  if (upper_kind == "ACCEPT") {
    a.kind = ActionKind::accept;
    if (j.contains("terms") && !j["terms"].empty()) events.push_back({std::string(events::kParse), "accept_terms_ignored"});
    return a;
  }
  a.kind = ActionKind::counter;
  if (!j.contains("action")) {
    events.push_back({std::string(events::kParse), "missing_action"});
  } else if (upper_kind != "COUNTER") {
    events.push_back({std::string(events::kParse), "unknown_action:" + kind});
    return a;
  }
  if (!j.contains("terms")) return a;
  auto add = [&](const std::string& name, const nlohmann::json& value) {
    const auto term = detail::term_from_alias(name);
    if (!term) {
      events.push_back({std::string(events::kParse), "unknown_term:" + name});
      return;
    }
    const auto v = detail::term_value_from(*term, value);
    if (!v) {
      events.push_back({std::string(events::kParse), "invalid_value:" + std::string(to_string(*term))});
      return;
    }
    a.terms.set(*term, *v);
  };
  const auto& terms = j["terms"];
  if (terms.is_array()) {
    for (const auto& item : terms) {
      if (!item.is_object() || !item.contains("name") || !item["name"].is_string() || !item.contains("value")) {
        events.push_back({std::string(events::kParse), "malformed_term"});
        continue;
      }
      add(item["name"].get<std::string>(), item["value"]);
    }
  } else if (terms.is_object()) {
    for (const auto& [name, value] : terms.items()) add(name, value);
  } else {
    events.push_back({std::string(events::kParse), "malformed_terms"});
  }
  return a;
}

/// Splits raw output into reasoning, dialogue and the last well-formed JSON object.
/// `reasoning` is a separate reasoning field from the backend, if any.
inline ParsedResponse parse_response(std::string_view raw, std::string_view reasoning = {}) {
  ParsedResponse r;
  auto [think, rest] = detail::split_think(raw);
  if (!reasoning.empty()) think = think.empty() ? std::string(reasoning) : std::string(reasoning) + "\n" + think;
  r.think = detail::trim(think);
  if (!r.think.empty()) r.belief_annotations = belief_sidecar(r.think);

  std::optional<std::pair<std::size_t, std::size_t>> chosen;
  nlohmann::json parsed;
  for (const auto& span : detail::brace_spans(rest)) {
    auto j = nlohmann::json::parse(rest.substr(span.first, span.second - span.first), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    chosen = span;
    parsed = std::move(j);
  }
  if (!chosen) {
    r.dialogue = detail::strip_fences(rest);
    r.parse_events.push_back({std::string(events::kParse), "no_json_object"});
    return r;
  }
  r.dialogue = detail::strip_fences(rest.substr(0, chosen->first));
  r.action = action_from_json(parsed, r.parse_events);
  return r;
}

/// Canonical JSON rendering of an action, as agents are asked to emit it.
inline nlohmann::ordered_json action_to_json(const Action& a) {
  nlohmann::ordered_json j;
  j["action"] = std::string(to_string(a.kind));
  if (a.kind == ActionKind::counter) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (Term t : kAllTerms) {
      const auto& v = a.terms.get(t);
      if (!v) continue;
      nlohmann::ordered_json item;
      item["name"] = std::string(to_string(t));
      switch (schema(t).kind) {
        case TermKind::continuous:
          item["type"] = (t == Term::price || t == Term::trade_in) ? "money" : "number";
          item["value"] = std::get<double>(*v);
          break;
        case TermKind::categorical:
          item["type"] = "categorical";
          item["value"] = std::string(option_name(t, std::get<Choice>(*v).index));
          break;
        case TermKind::binary:
          item["type"] = "boolean";
          item["value"] = std::get<bool>(*v);
          break;
      }
      terms.push_back(item);
    }
    j["terms"] = terms;
  }
  if (!a.notes.empty()) j["notes"] = a.notes;
  return j;
}

}  // namespace negotiate
