#pragma once

// Belief extraction from reasoning traces: machine-readable sidecars from
// scripted agents, or an LLM extractor over free text.

#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "negotiate/beliefs.hpp"
#include "negotiate/chat.hpp"
#include "negotiate/response.hpp"

namespace negotiate {

inline constexpr std::string_view kExtractorPromptVersion = "extractor-v1";
inline constexpr std::string_view kExtractorHeader = "## BELIEF EXTRACTION (extractor-v1)";

/// Canonical feature vocabulary, one identifier per line.
inline std::string feature_vocabulary() {
  std::string out;
  for (std::size_t f = 0; f < kFeatureDim; ++f) out += "  - " + feature_name(f) + "\n";
  return out;
}

inline std::string extractor_system_prompt() {
  std::string out(kExtractorHeader);
  out += R"(

You read the private reasoning of one party in a car-sale negotiation and
list what that party believes the OTHER party wants.

Report one entry per feature the reasoning attributes to the other party:
  - "feature": an identifier from the vocabulary below
  - "direction": +1 if the other party wants the value higher (or wants
    that option), -1 if lower (or wants to avoid that option)

Ignore statements about the reasoning party's own preferences.
If the reasoning says nothing about the other party, return [].

Vocabulary:
)";
  out += feature_vocabulary();
  out += R"(
Answer with a JSON list only, for example:
[{"feature": "price", "direction": -1}, {"feature": "model:Sedan", "direction": 1}]
)";
  return out;
}

struct ExtractionResult {
  std::vector<Belief> beliefs;
  bool available = true;  // false when the extractor could not be reached
  std::size_t dropped = 0;
};

namespace detail {

struct KeywordRule {
  std::size_t feature;
  std::regex up;
  std::regex down;
};

inline const std::vector<KeywordRule>& keyword_rules() {
  static const std::vector<KeywordRule> rules = [] {
    std::vector<KeywordRule> out;
    auto add = [&](std::size_t f, const std::string& up, const std::string& down) {
      out.push_back({f, std::regex(up), std::regex(down)});
    };
    add(feature_index(Term::price), R"((higher|increase|raise|more)\s+(the\s+)?price|price\s+(higher|up))",
        R"((lower|decrease|reduce|cheaper)\s+(the\s+)?price|price\s+(lower|down)|cheaper)");
    add(feature_index(Term::delivery_day), R"((later|longer|increase)\s+(the\s+)?delivery)",
        R"((faster|sooner|quicker|earlier|decrease)\s+(the\s+)?delivery|faster\s+->)");
    add(feature_index(Term::down_payment), R"((higher|larger|bigger|increase|more)\s+(the\s+)?down\s+payment)",
        R"((lower|smaller|decrease|less)\s+(the\s+)?down\s+payment)");
    add(feature_index(Term::trade_in), R"((higher|increase|more)\s+(the\s+)?trade[- ]in)",
        R"((lower|decrease|less)\s+(the\s+)?trade[- ]in)");
    add(feature_index(Term::has_accessories), R"(include\s+accessories|accessories=true|want\w*\s+accessories)",
        R"(exclude\s+accessories|accessories=false|no\s+accessories)");
    for (Term term : kCategoricalTerms) {
      const auto& t = schema(term);
      for (std::size_t i = 0; i < t.options.size(); ++i) {
        const std::string opt = lower(t.options[i]);
        if (opt == "none") continue;
        add(t.feature_offset + i, R"(\b(prefer\w*|want\w*|choose|like\w*|selecting)\s+(a\s+|an\s+|the\s+)?)" + opt + R"(s?\b)",
            R"(\b(dislike\w*|avoid\w*)\s+(a\s+|an\s+|the\s+)?)" + opt + R"(s?\b)");
      }
    }
    return out;
  }();
  return rules;
}

}  // namespace detail

/// Keyword reading of directional statements; the stub extractor's engine.
inline std::vector<Belief> heuristic_beliefs(std::string_view text, int turn_index = 0) {
  const std::string s = detail::lower(text);
  std::vector<Belief> out;
  for (const auto& rule : detail::keyword_rules()) {
    const bool up = std::regex_search(s, rule.up);
    const bool down = std::regex_search(s, rule.down);
    if (up != down) out.push_back({rule.feature, up ? +1 : -1, turn_index, BeliefSource::extractor});
  }
  return out;
}

/// Beliefs from a JSON list embedded anywhere in `text`.
inline std::vector<Belief> parse_extractor_answer(std::string_view text, int turn_index, std::size_t& dropped) {
  dropped = 0;
  const auto o = text.find('[');
  const auto c = text.rfind(']');
  if (o == std::string_view::npos || c == std::string_view::npos || c < o) return {};
  const auto j = nlohmann::json::parse(text.substr(o, c - o + 1), nullptr, false);
  if (j.is_discarded()) return {};
  return beliefs_from_json(j, turn_index, BeliefSource::extractor, dropped);
}

/// Annotation mode reads the sidecar; extractor mode queries `backend`.
inline ExtractionResult extract_beliefs(std::string_view think, BeliefSource source, int turn_index,
                                        ChatBackend* backend = nullptr, const std::string& model = {},
                                        double temperature = 0.0) {
  ExtractionResult r;
  if (detail::trim(think).empty()) return r;
  if (source == BeliefSource::annotation) {
    if (auto b = belief_sidecar(think, turn_index)) r.beliefs = std::move(*b);
    return r;
  }
  if (!backend) {
    r.available = false;
    return r;
  }
  try {
    const ChatCompletion c =
        backend->complete({model, {{"system", extractor_system_prompt()}, {"user", std::string(think)}}, temperature});
    r.beliefs = parse_extractor_answer(c.content, turn_index, r.dropped);
  } catch (const Error&) {
    r.available = false;
    r.beliefs.clear();
  }
  return r;
}

}  // namespace negotiate
