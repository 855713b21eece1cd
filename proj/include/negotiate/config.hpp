#pragma once

// Experiment conditions and the flat key = value configuration format.

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "negotiate/agents.hpp"
#include "negotiate/beliefs.hpp"
#include "negotiate/error.hpp"
#include "negotiate/prompts.hpp"
#include "negotiate/turn_metrics.hpp"

namespace negotiate {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;

struct Condition {
  std::string_view experiment;
  std::string_view name;
  bool buyer_informed;
  bool seller_informed;
  bool trade_plan;

  PromptCondition for_role(Role r) const {
    return {r == Role::buyer ? buyer_informed : seller_informed, trade_plan};
  }
};

inline constexpr std::array<Condition, 8> kConditions{{
    {"exp_asym", "symmetric_none", false, false, false},
    {"exp_asym", "buyer_informed", true, false, false},
    {"exp_asym", "seller_informed", false, true, false},
    {"exp_asym", "symmetric_full", true, true, false},
    {"exp_trade_plan", "uninformed_no_plan", false, false, false},
    {"exp_trade_plan", "uninformed_with_plan", false, false, true},
    {"exp_trade_plan", "informed_no_plan", true, true, false},
    {"exp_trade_plan", "informed_with_plan", true, true, true},
}};

inline const Condition& condition_by_name(std::string_view name) {
  for (const auto& c : kConditions) {
    if (c.name == name) return c;
  }
  throw Error(ErrorKind::invalid_config, "unknown condition '" + std::string(name) + "'");
}

inline constexpr std::string_view kStubEndpoint = "stub";

struct ExperimentConfig {
  std::string condition = "symmetric_none";  // or "all"
  int n_trials = 100;
  std::uint64_t master_seed = 2026;
  int turn_cap = kDefaultTurnCap;
  std::size_t K = kDefaultOwnGainK;
  BeliefSource extractor_backend = BeliefSource::annotation;
  int concurrency = 4;
  AgentKind buyer_agent = AgentKind::scripted_conceder;
  AgentKind seller_agent = AgentKind::scripted_conceder;
  double conceder_exponent = 1.0;
  double conceder_floor = 0.1;
  std::string endpoint_url = std::string(kStubEndpoint);
  std::string model_name = "stub";
  double temperature = 0.6;

  AgentKind agent(Role r) const { return r == Role::buyer ? buyer_agent : seller_agent; }
  bool uses_backend() const {
    return buyer_agent == AgentKind::llm || seller_agent == AgentKind::llm ||
           extractor_backend == BeliefSource::extractor;
  }

  std::vector<std::string_view> conditions() const {
    if (condition != "all") return {condition_by_name(condition).name};
    std::vector<std::string_view> out;
    for (const auto& c : kConditions) out.push_back(c.name);
    return out;
  }

  void validate() const {
    if (condition != "all") (void)condition_by_name(condition);
    if (n_trials < 1) throw Error(ErrorKind::invalid_config, "n_trials must be >= 1");
    if (turn_cap < 1) throw Error(ErrorKind::invalid_config, "turn_cap must be >= 1");
    if (K < 1 || K > kFeatureDim) throw Error(ErrorKind::invalid_config, "K must be in [1, 22]");
    if (concurrency < 1) throw Error(ErrorKind::invalid_config, "concurrency must be >= 1");
    if (!(conceder_exponent > 0.0)) throw Error(ErrorKind::invalid_config, "conceder_exponent must be > 0");
    if (!(conceder_floor >= 0.0 && conceder_floor < 1.0)) {
      throw Error(ErrorKind::invalid_config, "conceder_floor must be in [0, 1)");
    }
    if (!(temperature >= 0.0)) throw Error(ErrorKind::invalid_config, "temperature must be >= 0");
    if (uses_backend() && endpoint_url.empty()) throw Error(ErrorKind::invalid_config, "endpoint_url is required");
  }
};

namespace detail {

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorKind::invalid_config, "key '" + std::string(key) + "': not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace detail

/// Documented keys, in the order they are written.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 16> kConfigKeys{{
    {"schema_version", "config format version (must be 1)"},
    {"condition", "one of the eight condition names, or all"},
    {"n_trials", "trials per condition"},
    {"master_seed", "unsigned 64-bit seed; trial seeds derive from it"},
    {"turn_cap", "maximum turns before no-deal"},
    {"K", "top-K components for the own-gain metric"},
    {"extractor_backend", "annotation | extractor"},
    {"concurrency", "parallel trials"},
    {"buyer_agent", "llm | scripted_conceder | scripted_accommodator"},
    {"seller_agent", "llm | scripted_conceder | scripted_accommodator"},
    {"conceder_exponent", "scripted concession exponent (4 tough, 1 linear, 0.5 eager)"},
    {"conceder_floor", "scripted concession floor"},
    {"endpoint_url", "chat-completions URL, or stub for the offline backend"},
    {"model_name", "model field of chat requests"},
    {"temperature", "sampling temperature"},
    {"output_dir", "ignored by run; --out takes precedence"},
}};

inline std::string config_help() {
  std::string out = "Config file: one 'key = value' per line, '#' starts a comment.\n";
  for (const auto& [k, d] : kConfigKeys) out += "  " + std::string(k) + ": " + std::string(d) + "\n";
  return out;
}

inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::invalid_config, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    const bool known = std::any_of(kConfigKeys.begin(), kConfigKeys.end(), [&](const auto& p) { return p.first == key; });
    if (!known) throw Error(ErrorKind::invalid_config, "unknown key '" + key + "'");
    if (!kv.emplace(key, value).second) throw Error(ErrorKind::invalid_config, "duplicate key '" + key + "'");
  }
  const auto sv = kv.find("schema_version");
  if (sv == kv.end()) throw Error(ErrorKind::invalid_config, "missing schema_version");
  if (detail::parse_number<int>("schema_version", sv->second) != kConfigSchemaVersion) {
    throw Error(ErrorKind::invalid_config, "unsupported schema_version " + sv->second);
  }
  for (const auto& [k, v] : kv) {
    if (k == "condition") c.condition = v;
    else if (k == "n_trials") c.n_trials = detail::parse_number<int>(k, v);
    else if (k == "master_seed") c.master_seed = detail::parse_number<std::uint64_t>(k, v);
    else if (k == "turn_cap") c.turn_cap = detail::parse_number<int>(k, v);
    else if (k == "K") c.K = detail::parse_number<std::size_t>(k, v);
    else if (k == "extractor_backend") c.extractor_backend = belief_source_from_string(v);
    else if (k == "concurrency") c.concurrency = detail::parse_number<int>(k, v);
    else if (k == "buyer_agent") c.buyer_agent = agent_kind_from_string(v);
    else if (k == "seller_agent") c.seller_agent = agent_kind_from_string(v);
    else if (k == "conceder_exponent") c.conceder_exponent = detail::parse_number<double>(k, v);
    else if (k == "conceder_floor") c.conceder_floor = detail::parse_number<double>(k, v);
    else if (k == "endpoint_url") c.endpoint_url = v;
    else if (k == "model_name") c.model_name = v;
    else if (k == "temperature") c.temperature = detail::parse_number<double>(k, v);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io_failure, "cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace negotiate
