#pragma once

// Offline chat backend. It reads its role, ranges and preferences back out of
// the prompt text and plays a fixed phase-keyed script, so the whole LLM path
// (prompting, parsing, extraction) runs without a model.

#include <atomic>
#include <cmath>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "negotiate/chat.hpp"
#include "negotiate/extraction.hpp"
#include "negotiate/response.hpp"

namespace negotiate {

struct StubOptions {
  int malformed_replies = 0;  // the first N negotiation replies carry no JSON
  bool unavailable = false;   // every call throws BackendUnavailable
};

namespace detail {

struct StubPreference {
  Term term;
  int direction = +1;  // continuous/binary
  std::optional<std::size_t> option;
  Tier tier = Tier::flexible;
};

struct StubView {
  Role role = Role::buyer;
  std::array<Interval, kTermCount> ranges{};
  std::vector<StubPreference> prefs;
  int turn = 1;
  bool offer_on_table = false;
  std::string phase_key;
  std::string opponent_last;
  std::vector<std::string> intel;
};

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

inline std::optional<StubPreference> preference_from_line(const std::string& line) {
  static const std::pair<std::string_view, Term> labels[] = {
      {"Price:", Term::price},           {"Delivery Day:", Term::delivery_day}, {"Down Payment:", Term::down_payment},
      {"Trade In:", Term::trade_in},     {"Has Accessories:", Term::has_accessories}, {"Is ", Term::model},
      {"Color ", Term::color},           {"Interior ", Term::interior},         {"Warranty ", Term::warranty},
      {"Service ", Term::service},
  };
  const std::string body = trim(line).substr(2);  // drop "- "
  for (const auto& [label, term] : labels) {
    if (body.rfind(label, 0) != 0) continue;
    StubPreference p;
    p.term = term;
    if (schema(term).kind == TermKind::categorical) {
      const auto c = body.find("choose ");
      if (c == std::string::npos) return std::nullopt;
      std::string opt = body.substr(c + 7);
      opt = opt.substr(0, opt.find(' '));
      const auto& sch = schema(term);
      for (std::size_t i = 0; i < sch.options.size(); ++i) {
        if (lower(sch.options[i]) == lower(opt)) p.option = i;
      }
      if (!p.option) return std::nullopt;
    } else {
      p.direction = body.find("increase") != std::string::npos || body.find("include") != std::string::npos ? +1 : -1;
    }
    return p;
  }
  return std::nullopt;
}

inline StubView read_prompts(const std::string& system, const std::string& turn) {
  StubView v;
  v.role = system.find("You are a SELLER") == 0 ? Role::seller : Role::buyer;
  for (Term t : kContinuousTerms) v.ranges[index_of(t)] = schema(t).range(v.role);
  static const std::regex range(R"(^  - (price|delivery_day|down_payment|trade_in): \$?([0-9.]+)k?%? to \$?([0-9.]+))");
  Tier tier = Tier::flexible;
  bool in_prefs = false;
  for (const std::string& line : lines_of(system)) {
    std::smatch m;
    if (std::regex_search(line, m, range)) {
      if (auto t = term_from_name(m[1].str())) v.ranges[index_of(*t)] = {std::stod(m[2].str()), std::stod(m[3].str())};
      continue;
    }
    if (line.rfind("## YOUR PREFERENCES", 0) == 0) in_prefs = true;
    if (line.rfind("## HOW TO NEGOTIATE", 0) == 0) in_prefs = false;
    if (!in_prefs) continue;
    if (line.rfind("**CRITICAL**", 0) == 0) tier = Tier::critical;
    if (line.rfind("**IMPORTANT**", 0) == 0) tier = Tier::important;
    if (line.rfind("**FLEXIBLE**", 0) == 0) tier = Tier::flexible;
    if (line.rfind("  - ", 0) == 0) {
      if (auto p = preference_from_line(line)) {
        p->tier = tier;
        v.prefs.push_back(*p);
      }
    }
  }
  static const std::regex turn_no(R"(\(Turn ([0-9]+)\))");
  std::smatch m;
  if (std::regex_search(turn, m, turn_no)) v.turn = std::stoi(m[1].str());
  v.offer_on_table = turn.find("## CURRENT OFFER ON TABLE: None") == std::string::npos;
  for (std::string_view key : {"START CONVERSATIONALLY", "DISCUSS what matters", "PROPOSE A COMPLETE DEAL",
                               "REACT to their offer", "CONVERGE toward", "FINAL ROUND"}) {
    if (turn.find(key) != std::string::npos) v.phase_key = std::string(key);
  }
  const std::string other = v.role == Role::buyer ? "SELLER: " : "BUYER: ";
  bool in_intel = false;
  for (const std::string& line : lines_of(turn)) {
    if (line.rfind(other, 0) == 0) v.opponent_last = line.substr(other.size());
    if (line.find("INTELLIGENCE ON OPPONENT'S PREFERENCES") != std::string::npos) in_intel = true;
    if (line.find("STRATEGIC GUIDELINES") != std::string::npos) in_intel = false;
    if (in_intel && line.rfind("  - ", 0) == 0) v.intel.push_back(trim(line).substr(2));
  }
  return v;
}

inline std::string wish_phrase(const StubPreference& p) {
  const bool up = p.direction > 0;
  switch (p.term) {
    case Term::price: return up ? "a higher price" : "a lower price";
    case Term::delivery_day: return up ? "later delivery" : "faster delivery";
    case Term::down_payment: return up ? "a higher down payment" : "a lower down payment";
    case Term::trade_in: return up ? "a higher trade-in" : "a lower trade-in";
    case Term::has_accessories: return up ? "accessories included" : "no accessories";
    default: return "";
  }
}

}  // namespace detail

class StubChatBackend : public ChatBackend {
 public:
  explicit StubChatBackend(StubOptions options = {}) : options_(options), malformed_left_(options.malformed_replies) {}

  ChatCompletion complete(const ChatRequest& request) override {
    if (options_.unavailable) throw Error(ErrorKind::backend_unavailable, "stub backend configured unavailable");
    if (request.messages.size() < 2) throw Error(ErrorKind::backend_unavailable, "stub expects system and user messages");
    const std::string& system = request.messages[0].content;
    const std::string& user = request.messages[1].content;
    if (system.rfind(kExtractorHeader, 0) == 0) return {extract(user), ""};
    if (malformed_left_.fetch_sub(1) > 0) return {"I need a moment to think about this offer.", ""};
    return {negotiate_reply(detail::read_prompts(system, user)), ""};
  }

 private:
  static std::string extract(const std::string& think) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const Belief& b : heuristic_beliefs(think)) {
      nlohmann::ordered_json item;
      item["feature"] = feature_name(b.feature);
      item["direction"] = b.direction;
      list.push_back(item);
    }
    return list.dump();
  }

  static std::string negotiate_reply(const detail::StubView& v) {
    std::string think;
    if (!v.opponent_last.empty()) think += "They said: \"" + v.opponent_last + "\"\n";
    for (const auto& line : v.intel) think += "They want: " + line + "\n";
    if (think.empty()) think = "No information about the other side yet.\n";

    // Linear move from the own-best end of each range.
    const double p = std::min(1.0, (v.turn - 1) / 39.0) * 0.9;
    Contract c;
    for (Term t : kAllTerms) {
      const auto& sch = schema(t);
      if (sch.kind == TermKind::categorical) c.set(t, Choice{0});
      else if (sch.kind == TermKind::binary) c.set(t, false);
    }
    for (Term t : kContinuousTerms) c.set(t, v.ranges[index_of(t)].lo);
    for (const auto& pref : v.prefs) {
      const auto& sch = schema(pref.term);
      if (sch.kind == TermKind::categorical) {
        c.set(pref.term, Choice{*pref.option});
      } else if (sch.kind == TermKind::binary) {
        c.set(pref.term, pref.direction > 0);
      } else {
        const Interval r = v.ranges[index_of(pref.term)];
        const double best = pref.direction > 0 ? r.hi : r.lo;
        const double x = best - pref.direction * p * r.width();
        c.set(pref.term, std::round(x * 10.0) / 10.0);
      }
    }

    std::vector<std::string> wishes;
    for (const auto& pref : v.prefs) {
      if (pref.tier == Tier::flexible) continue;
      if (schema(pref.term).kind == TermKind::categorical) {
        wishes.push_back("I prefer a " + std::string(option_name(pref.term, *pref.option)));
      } else {
        wishes.push_back("I want " + detail::wish_phrase(pref));
      }
    }
    std::string wish_text;
    for (std::size_t i = 0; i < wishes.size(); ++i) wish_text += (i ? "; " : "") + wishes[i];
    if (wish_text.empty()) wish_text = "I am flexible";

    Action a;
    std::string dialogue;
    const std::string& k = v.phase_key;
    const bool accept_now =
        v.offer_on_table && (k == "FINAL ROUND" || (k == "CONVERGE toward" && v.turn % 4 < 2));
    if (k == "START CONVERSATIONALLY") {
      dialogue = std::string(v.role == Role::buyer ? "Hello, I'm looking to buy a car today. "
                                                    : "Welcome, happy to find you the right car. ") +
                 wish_text + ".";
    } else if (k == "DISCUSS what matters") {
      for (const auto& pref : v.prefs) {
        if (pref.tier != Tier::critical) continue;
        a.terms.set(pref.term, c.get(pref.term));
      }
      dialogue = wish_text + ". " + (a.terms.size() ? "To start: " + format_offer(a.terms) + "." : "");
    } else if (accept_now) {
      a.kind = ActionKind::accept;
      dialogue = "Your offer works for me, let's close.";
    } else {
      a.terms = c.to_partial();
      dialogue = wish_text + ". My proposal: " + format_offer(a.terms) + ".";
    }
    a.notes = "stub";
    return "<think>" + think + "</think>\n" + detail::trim(dialogue) + "\n```json\n" + action_to_json(a).dump() + "\n```";
  }

  StubOptions options_;
  std::atomic<int> malformed_left_;
};

}  // namespace negotiate
