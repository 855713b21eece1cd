#pragma once

// Trial execution, persistence, experiments over a worker pool, and replay.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "negotiate/agents.hpp"
#include "negotiate/analysis.hpp"
#include "negotiate/chat.hpp"
#include "negotiate/config.hpp"
#include "negotiate/extraction.hpp"
#include "negotiate/frontier.hpp"
#include "negotiate/prompts.hpp"
#include "negotiate/protocol.hpp"
#include "negotiate/serialize.hpp"
#include "negotiate/stub.hpp"
#include "negotiate/turn_metrics.hpp"

namespace negotiate {

namespace fs = std::filesystem;

inline constexpr std::string_view kSeedAlgorithm =
    "seed_i = splitmix64_mix(master_seed + 0x9E3779B97F4A7C15 * (i + 1)) (output i+1 of SplitMix64 seeded with "
    "master_seed); buyer profile then seller profile drawn from mt19937_64(seed_i)";

/// SplitMix64 output function.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return splitmix64_mix(master_seed + 0x9E3779B97F4A7C15ULL * (trial_index + 1));
}

using BackendFactory = std::function<std::unique_ptr<ChatBackend>()>;

/// Stub for endpoint_url = stub, HTTP otherwise.
inline BackendFactory default_backend_factory(const ExperimentConfig& cfg) {
  if (cfg.endpoint_url == kStubEndpoint) return [] { return std::make_unique<StubChatBackend>(); };
  const std::string url = cfg.endpoint_url;
  return [url] { return std::make_unique<HttpChatBackend>(url); };
}

inline std::unique_ptr<Agent> make_agent(AgentKind kind, const ExperimentConfig& cfg, ChatBackend* backend) {
  const ConcessionSchedule schedule{cfg.conceder_exponent, cfg.conceder_floor};
  switch (kind) {
    case AgentKind::llm:
      if (!backend) throw Error(ErrorKind::invalid_config, "llm agent needs a chat backend");
      return std::make_unique<LlmAgent>(*backend, cfg.model_name, cfg.temperature);
    case AgentKind::scripted_conceder: return std::make_unique<ScriptedConceder>(schedule);
    case AgentKind::scripted_accommodator: return std::make_unique<ScriptedAccommodator>(0.5, schedule);
  }
  throw Error(ErrorKind::invalid_config, "unknown agent kind");
}

namespace detail {

/// A COUNTER that put new terms on the table.
inline bool is_proposal(const Turn& t) {
  return t.action.kind == ActionKind::counter && !t.action.terms.empty() && t.resolved_offer.has_value();
}

inline bool is_agent_event(std::string_view kind) {
  return kind == events::kParseRetry || kind == "backend_unavailable";
}

}  // namespace detail

/// Metrics for transcript[i], computed from the transcript alone.
inline TurnMetrics compute_turn_metrics(std::span<const Turn> transcript, std::size_t i, const UtilityProfile& own,
                                        std::size_t K) {
  const Turn& t = transcript[i];
  TurnMetrics m;
  if (t.beliefs_available) {
    for (const Belief& b : latest_by_feature(t.beliefs)) m.mentioned_features.push_back(b.feature);
  }
  if (!detail::is_proposal(t)) return m;
  const PartialOffer offered = t.complete_offer() ? t.complete_offer()->to_partial() : std::get<PartialOffer>(*t.resolved_offer);
  if (t.beliefs_available) m.alignment_mean = turn_alignment(t.beliefs, offered, t.role);
  const Contract* now = t.complete_offer();
  if (!now) return m;
  for (std::size_t j = i; j-- > 0;) {
    const Turn& p = transcript[j];
    if (p.role != t.role || !detail::is_proposal(p) || !p.complete_offer()) continue;
    const FeatureVector prev = encode(*p.complete_offer(), t.role), cur = encode(*now, t.role);
    if (t.beliefs_available) m.concession_c = concession_eq1(t.beliefs, prev, cur);
    m.own_gain_g = own_gain_eq2(own.weights, prev, cur, K);
    break;
  }
  return m;
}

/// Beliefs for a turn from the annotation sidecar or the extractor.
inline ExtractionResult turn_beliefs(const ParsedResponse& parsed, BeliefSource source, int turn_index,
                                     ChatBackend* backend, const std::string& model) {
  if (source == BeliefSource::annotation) {
    ExtractionResult r;
    if (parsed.belief_annotations) {
      r.beliefs = *parsed.belief_annotations;
      for (Belief& b : r.beliefs) {
        b.turn_index = turn_index;
        b.source = BeliefSource::annotation;
      }
    }
    return r;
  }
  return extract_beliefs(parsed.think, BeliefSource::extractor, turn_index, backend, model, 0.0);
}

inline void finalize_frontier(TrialRecord& rec) {
  const FrontierCurve curve = compute_frontier(rec.buyer, rec.seller);
  rec.nbs = curve.nbs;
  rec.nbs_contract = curve.nbs_contract;
  rec.frontier_vertices = curve.vertices.size();
  rec.efficiency.reset();
  if (const auto* d = std::get_if<DealOutcome>(&rec.outcome)) {
    rec.efficiency = efficiency_distances(curve, d->contract, rec.buyer, rec.seller);
  }
}

inline TrialRecord run_trial(const ExperimentConfig& cfg, std::string_view condition_name, int trial_index,
                             const BackendFactory& factory = {}) {
  const Condition& cond = condition_by_name(condition_name);
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.experiment = std::string(cond.experiment);
  rec.condition = std::string(cond.name);
  rec.buyer_informed = cond.buyer_informed;
  rec.seller_informed = cond.seller_informed;
  rec.trade_plan = cond.trade_plan;
  rec.seed = trial_seed(cfg.master_seed, static_cast<std::uint64_t>(trial_index));
  rec.buyer_agent = std::string(to_string(cfg.buyer_agent));
  rec.seller_agent = std::string(to_string(cfg.seller_agent));
  rec.turn_cap = cfg.turn_cap;
  rec.K = cfg.K;
  rec.belief_source = cfg.extractor_backend;

  Rng rng(rec.seed);
  rec.buyer = sample_profile(Role::buyer, rng);
  rec.seller = sample_profile(Role::seller, rng);

  std::unique_ptr<ChatBackend> backend;
  if (cfg.uses_backend()) backend = factory ? factory() : default_backend_factory(cfg)();
  std::unique_ptr<Agent> agents[2] = {make_agent(cfg.buyer_agent, cfg, backend.get()),
                                      make_agent(cfg.seller_agent, cfg, backend.get())};

  NegotiationState state(rec.buyer, rec.seller, cfg.turn_cap);
  while (state.running()) {
    const Role role = state.to_move();
    Agent& agent = *agents[role == Role::buyer ? 0 : 1];
    const PromptBundle prompts =
        agent.kind() == AgentKind::llm ? build_prompts(state, role, cond.for_role(role)) : PromptBundle{};
    const AgentReply reply = agent.act({state, role, prompts, rec.seed});
    if (reply.backend_failure) {
      rec.failure_events = reply.events;
      fail_backend(state);
      break;
    }
    Turn t;
    t.index = state.next_index();
    t.role = role;
    t.dialogue = reply.parsed.dialogue;
    t.think = reply.parsed.think;
    t.raw_action = reply.raw;
    t.reasoning = reply.reasoning;
    t.action = *reply.parsed.action;
    t.events = reply.events;
    t.events.insert(t.events.end(), reply.parsed.parse_events.begin(), reply.parsed.parse_events.end());
    const ExtractionResult ex = turn_beliefs(reply.parsed, cfg.extractor_backend, t.index, backend.get(), cfg.model_name);
    t.beliefs = ex.beliefs;
    t.beliefs_available = ex.available;
    apply_action(state, std::move(t));
    Turn& applied = state.transcript.back();
    if (!applied.beliefs_available) applied.events.push_back({std::string(events::kExtractorUnavailable), ""});
    applied.metrics = compute_turn_metrics(state.transcript, state.transcript.size() - 1, state.profile(role), cfg.K);
  }
  rec.turns = std::move(state.transcript);
  rec.outcome = outcome(state);
  finalize_frontier(rec);
  return rec;
}

// ---- persistence ----

inline fs::path trial_summary_path(const fs::path& dir, int index) {
  return dir / "trials" / ("trial_" + std::to_string(index) + ".json");
}

inline fs::path trial_turns_path(const fs::path& dir, int index) {
  return dir / "trials" / ("trial_" + std::to_string(index) + ".jsonl");
}

inline void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::io_failure, "cannot write " + tmp.string());
    f << content;
    if (!f) throw Error(ErrorKind::io_failure, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io_failure, "cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Writes the turns file, then the summary (with record hash) that marks the trial complete.
inline std::string write_record(const fs::path& dir, const TrialRecord& rec) {
  fs::create_directories(dir / "trials");
  const RecordText text = record_text(rec);
  std::string turns;
  for (const auto& line : text.turns) turns += line + "\n";
  write_file_atomic(trial_turns_path(dir, rec.trial_index), turns);
  const std::string hash = record_hash(text);
  ojson summary = ojson::parse(text.summary);
  summary["record_hash"] = hash;
  write_file_atomic(trial_summary_path(dir, rec.trial_index), summary.dump(2) + "\n");
  return hash;
}

struct LoadedRecord {
  TrialRecord record;
  std::string stored_hash;
};

inline LoadedRecord load_record_files(const fs::path& summary_path, const fs::path& turns_path) {
  nlohmann::json summary = nlohmann::json::parse(read_text(summary_path), nullptr, false);
  if (summary.is_discarded()) throw Error(ErrorKind::io_failure, "malformed record: " + summary_path.string());
  std::vector<nlohmann::json> lines;
  std::istringstream in(read_text(turns_path));
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::io_failure, "malformed turn line in " + turns_path.string());
    lines.push_back(std::move(j));
  }
  LoadedRecord out;
  out.stored_hash = summary.value("record_hash", "");
  out.record = record_from_json(summary, lines);
  return out;
}

inline LoadedRecord load_record(const fs::path& dir, int index) {
  return load_record_files(trial_summary_path(dir, index), trial_turns_path(dir, index));
}

/// All complete records under `root` (the directory itself or any subdirectory holding trials/).
inline std::vector<TrialRecord> load_records(const fs::path& root) {
  std::vector<std::pair<fs::path, TrialRecord>> found;
  if (!fs::exists(root)) throw Error(ErrorKind::io_failure, "no such directory " + root.string());
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const fs::path& p = e.path();
    if (!e.is_regular_file() || p.extension() != ".json" || p.parent_path().filename() != "trials") continue;
    if (p.filename().string().rfind("trial_", 0) != 0) continue;
    fs::path turns = p;
    turns.replace_extension(".jsonl");
    found.emplace_back(p, load_record_files(p, turns).record);
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.second.condition != b.second.condition) return a.second.condition < b.second.condition;
    return a.second.trial_index < b.second.trial_index;
  });
  std::vector<TrialRecord> out;
  for (auto& [p, r] : found) out.push_back(std::move(r));
  return out;
}

// ---- experiments ----

inline ojson manifest_json(const ExperimentConfig& cfg, std::string_view condition) {
  const Condition& c = condition_by_name(condition);
  ojson m;
  m["tool"] = "negotiate";
  m["tool_version"] = std::string(kToolVersion);
  m["config_schema_version"] = kConfigSchemaVersion;
  m["experiment"] = std::string(c.experiment);
  m["condition"] = std::string(c.name);
  m["flags"] = {{"buyer_informed", c.buyer_informed}, {"seller_informed", c.seller_informed}, {"trade_plan", c.trade_plan}};
  ojson conf;
  conf["n_trials"] = cfg.n_trials;
  conf["master_seed"] = cfg.master_seed;
  conf["turn_cap"] = cfg.turn_cap;
  conf["K"] = cfg.K;
  conf["extractor_backend"] = std::string(to_string(cfg.extractor_backend));
  conf["concurrency"] = cfg.concurrency;
  conf["buyer_agent"] = std::string(to_string(cfg.buyer_agent));
  conf["seller_agent"] = std::string(to_string(cfg.seller_agent));
  conf["conceder_exponent"] = cfg.conceder_exponent;
  conf["conceder_floor"] = cfg.conceder_floor;
  // The endpoint URL is deliberately not recorded.
  conf["endpoint_kind"] = cfg.endpoint_url == kStubEndpoint ? "stub" : "http";
  conf["model_name"] = cfg.model_name;
  conf["temperature"] = cfg.temperature;
  m["config"] = conf;
  m["prompt_versions"] = {{"templates", "appendix-c"}, {"extractor", std::string(kExtractorPromptVersion)}};
  m["seed_algorithm"] = std::string(kSeedAlgorithm);
  ojson seeds = ojson::array();
  for (int i = 0; i < cfg.n_trials; ++i) seeds.push_back(trial_seed(cfg.master_seed, static_cast<std::uint64_t>(i)));
  m["trial_seeds"] = seeds;
  return m;
}

struct ExperimentResult {
  ConditionSummary summary;
  std::size_t ran = 0;
  std::size_t skipped = 0;  // already persisted
  std::vector<std::string> record_hashes;  // by trial index
};

/// Runs one condition into `out_dir`. Trials already on disk are kept.
inline ExperimentResult run_condition(const ExperimentConfig& cfg, std::string_view condition, const fs::path& out_dir,
                                      const BackendFactory& factory = {}) {
  cfg.validate();
  fs::create_directories(out_dir / "trials");
  write_file_atomic(out_dir / "manifest.json", manifest_json(cfg, condition).dump(2) + "\n");

  ExperimentResult res;
  std::atomic<int> next{0};
  std::atomic<std::size_t> ran{0}, skipped{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (int i = next++; i < cfg.n_trials; i = next++) {
      try {
        if (fs::exists(trial_summary_path(out_dir, i))) {
          ++skipped;
          continue;
        }
        write_record(out_dir, run_trial(cfg, condition, i, factory));
        ++ran;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_workers = std::min(cfg.concurrency, cfg.n_trials);
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<TrialRecord> records;
  for (int i = 0; i < cfg.n_trials; ++i) {
    LoadedRecord lr = load_record(out_dir, i);
    res.record_hashes.push_back(lr.stored_hash);
    records.push_back(std::move(lr.record));
  }
  res.ran = ran;
  res.skipped = skipped;
  res.summary = condition_summary(records, std::string(condition));
  const ConditionSummary rows[] = {res.summary};
  write_file_atomic(out_dir / "summary.csv", summary_csv(rows));
  if (res.summary.backend_failures * 2 > res.summary.n_trials) {
    throw Error(ErrorKind::backend_unavailable, std::to_string(res.summary.backend_failures) + " of " +
                                                    std::to_string(res.summary.n_trials) +
                                                    " trials ended in backend failure");
  }
  return res;
}

/// Runs every configured condition; with condition = all each goes to its own subdirectory.
inline std::vector<ExperimentResult> run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir,
                                                    const BackendFactory& factory = {}) {
  std::vector<ExperimentResult> out;
  const auto conditions = cfg.conditions();
  for (std::string_view c : conditions) {
    const fs::path dir = cfg.condition == "all" ? out_dir / std::string(c) : out_dir;
    out.push_back(run_condition(cfg, c, dir, factory));
  }
  if (conditions.size() > 1) {
    std::vector<ConditionSummary> rows;
    for (const auto& r : out) rows.push_back(r.summary);
    write_file_atomic(out_dir / "summary.csv", summary_csv(rows));
  }
  return out;
}

// ---- replay ----

struct Divergence {
  int turn = 0;  // 0 for record-level fields
  std::string field;
};

struct ReplayResult {
  std::size_t turns_replayed = 0;
  std::optional<Divergence> divergence;
};

/// Re-applies the persisted raw outputs through parsing, protocol and metrics and
/// compares every derived field with the record.
inline ReplayResult replay(const TrialRecord& rec, std::optional<int> turn_cap = std::nullopt) {
  ReplayResult res;
  auto diverge = [&](int turn, std::string field) {
    res.divergence = Divergence{turn, std::move(field)};
    return res;
  };
  NegotiationState state(rec.buyer, rec.seller, turn_cap.value_or(rec.turn_cap));
  for (const Turn& stored : rec.turns) {
    if (!state.running()) return diverge(static_cast<int>(state.transcript.size()), "status");
    const ParsedResponse parsed = parse_response(stored.raw_action, stored.reasoning);
    if (parsed.failed()) return diverge(stored.index, "raw_action");
    if (stored.index != state.next_index()) return diverge(stored.index, "index");
    if (stored.role != state.to_move()) return diverge(stored.index, "role");
    if (parsed.dialogue != stored.dialogue) return diverge(stored.index, "dialogue");
    if (parsed.think != stored.think) return diverge(stored.index, "think");
    Turn t;
    t.index = stored.index;
    t.role = stored.role;
    t.action = *parsed.action;
    t.events = parsed.parse_events;
    if (rec.belief_source == BeliefSource::annotation) {
      t.beliefs = turn_beliefs(parsed, BeliefSource::annotation, t.index, nullptr, {}).beliefs;
      t.beliefs_available = true;
    } else {
      t.beliefs = stored.beliefs;  // extractor output is an external input
      t.beliefs_available = stored.beliefs_available;
    }
    apply_action(state, std::move(t));
    Turn& applied = state.transcript.back();
    if (!applied.beliefs_available) applied.events.push_back({std::string(events::kExtractorUnavailable), ""});
    applied.metrics =
        compute_turn_metrics(state.transcript, state.transcript.size() - 1, state.profile(applied.role), rec.K);
    ++res.turns_replayed;

    if (!(applied.action == stored.action)) return diverge(stored.index, "action");
    if (resolved_to_json(applied.resolved_offer) != resolved_to_json(stored.resolved_offer)) {
      return diverge(stored.index, "resolved_offer");
    }
    std::vector<TurnEvent> stored_events;
    for (const auto& e : stored.events) {
      if (!detail::is_agent_event(e.kind)) stored_events.push_back(e);
    }
    if (applied.events != stored_events) return diverge(stored.index, "events");
    if (applied.beliefs != stored.beliefs) return diverge(stored.index, "beliefs");
    if (!(applied.metrics == stored.metrics)) return diverge(stored.index, "metrics");
  }
  if (state.running() && rec.backend_failure()) fail_backend(state);
  if (state.running()) return diverge(static_cast<int>(state.transcript.size()), "status");
  if (outcome_to_json(outcome(state)) != outcome_to_json(rec.outcome)) {
    return diverge(static_cast<int>(state.transcript.size()), "outcome");
  }
  TrialRecord again = rec;
  finalize_frontier(again);
  if (point_to_json(again.nbs) != point_to_json(rec.nbs) || again.nbs_contract != rec.nbs_contract) {
    return diverge(0, "frontier");
  }
  const auto eff = [](const TrialRecord& r) {
    return r.efficiency ? ojson::array({r.efficiency->d_pareto, r.efficiency->d_nbs}) : ojson(nullptr);
  };
  if (eff(again) != eff(rec)) return diverge(0, "efficiency");
  return res;
}

inline void replay_or_throw(const TrialRecord& rec, std::optional<int> turn_cap = std::nullopt) {
  const ReplayResult r = replay(rec, turn_cap);
  if (r.divergence) {
    throw Error(ErrorKind::replay_divergence, "trial " + std::to_string(rec.trial_index) + " turn " +
                                                  std::to_string(r.divergence->turn) + ": " + r.divergence->field);
  }
}

}  // namespace negotiate
