#pragma once

// Command-line entry point: run, analyze, report, frontier, replay, prompts.
// Exit codes: 0 success, 1 usage error, 2 execution failure.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "negotiate/config.hpp"
#include "negotiate/fixtures.hpp"
#include "negotiate/report.hpp"
#include "negotiate/runner.hpp"
#include "negotiate/svg.hpp"

namespace negotiate::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void write_artifacts(const fs::path& dir, const Artifacts& files, std::ostream& out) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) write_file_atomic(dir / name, content);
  out << "wrote " << files.size() << " files to " << dir.string() << "\n";
}

struct ProfilePair {
  UtilityProfile buyer;
  UtilityProfile seller;
  std::optional<UtilityPoint> deal;
};

/// Accepts {"buyer": profile, "seller": profile} or a persisted trial summary.
inline ProfilePair load_profile_pair(const fs::path& path) {
  const auto j = nlohmann::json::parse(read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::io_failure, "not a JSON object: " + path.string());
  ProfilePair p;
  if (j.contains("buyer_profile")) {
    p.buyer = profile_from_json(j.at("buyer_profile"));
    p.seller = profile_from_json(j.at("seller_profile"));
    if (j.contains("efficiency") && j.at("efficiency").is_object()) {
      p.deal = point_from_json(j.at("efficiency").at("deal_point"));
    }
  } else {
    p.buyer = profile_from_json(detail::field(j, "buyer"));
    p.seller = profile_from_json(detail::field(j, "seller"));
  }
  if (p.buyer.role != Role::buyer || p.seller.role != Role::seller) {
    throw Error(ErrorKind::io_failure, "profile roles must be buyer and seller");
  }
  return p;
}

inline ojson frontier_json(const FrontierCurve& curve) {
  ojson j;
  ojson vs = ojson::array();
  for (const auto& v : curve.vertices) {
    vs.push_back({{"point", point_to_json(v.point)},
                  {"contract", offer_to_json(v.contract)},
                  {"connected_to_next", v.connected_to_next}});
  }
  j["vertices"] = vs;
  j["nbs"] = point_to_json(curve.nbs);
  j["nbs_product"] = curve.nbs.buyer * curve.nbs.seller;
  j["nbs_contract"] = offer_to_json(curve.nbs_contract);
  return j;
}

/// Either a trial_<i>.json file or a directory of records.
inline std::vector<TrialRecord> records_for_replay(const fs::path& path) {
  if (fs::is_directory(path)) return load_records(path);
  fs::path turns = path;
  turns.replace_extension(".jsonl");
  return {load_record_files(path, turns).record};
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-issue car negotiation experiments"};
  app.name("negotiate");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config_path, out_dir, in_dir, condition, profiles_path, svg_path, record_path, dump_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials, turn_cap;
  bool charts = false;

  auto* run_cmd = app.add_subcommand("run", "Run trials for the configured conditions");
  run_cmd->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "output directory")->required();
  run_cmd->add_option("--seed", seed, "override master_seed");
  run_cmd->add_option("--trials", trials, "override n_trials");
  run_cmd->add_option("--condition", condition, "override condition");

  auto* analyze_cmd = app.add_subcommand("analyze", "Aggregate persisted records into CSV tables");
  analyze_cmd->add_option("--in", in_dir, "directory with trial records")->required();
  analyze_cmd->add_option("--out", out_dir, "output directory (default <in>/analysis)");
  analyze_cmd->add_flag("--charts", charts, "also write SVG charts and report.md");

  auto* report_cmd = app.add_subcommand("report", "Summary tables, SVG charts and report.md");
  report_cmd->add_option("--in", in_dir, "directory with trial records")->required();
  report_cmd->add_option("--out", out_dir, "output directory (default <in>/report)");

  auto* frontier_cmd = app.add_subcommand("frontier", "Pareto frontier and NBS for a profile pair");
  frontier_cmd->add_option("--profiles", profiles_path, "profile pair JSON or trial summary")
      ->required()
      ->check(CLI::ExistingFile);
  frontier_cmd->add_option("--out", out_dir, "write frontier JSON here instead of stdout");
  frontier_cmd->add_option("--svg", svg_path, "write an SVG plot");

  auto* replay_cmd = app.add_subcommand("replay", "Re-derive records from raw outputs and compare");
  replay_cmd->add_option("--record", record_path, "trial_<i>.json or a directory of records")
      ->required()
      ->check(CLI::ExistingPath);
  replay_cmd->add_option("--turn-cap", turn_cap, "replay under a different turn cap");

  auto* prompts_cmd = app.add_subcommand("prompts", "Regenerate golden prompt fixtures");
  prompts_cmd->add_option("--dump", dump_dir, "output directory")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help() << "\n" << config_help();
    return kExitUsage;
  }

  try {
    if (*run_cmd) {
      ExperimentConfig cfg;
      try {
        cfg = load_config(config_path);
        if (seed) cfg.master_seed = *seed;
        if (trials) cfg.n_trials = *trials;
        if (!condition.empty()) cfg.condition = condition;
        cfg.validate();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::invalid_config) throw;
        throw UsageError(e.what());
      }
      for (const auto& r : run_experiment(cfg, out_dir)) {
        out << r.summary.condition << ": " << r.ran << " run, " << r.skipped << " resumed, " << r.summary.n_deals
            << "/" << r.summary.n_trials << " deals\n";
      }
    } else if (*analyze_cmd) {
      const auto records = load_records(in_dir);
      write_artifacts(out_dir.empty() ? fs::path(in_dir) / "analysis" : fs::path(out_dir),
                      analysis_artifacts(records, charts), out);
    } else if (*report_cmd) {
      const auto records = load_records(in_dir);
      write_artifacts(out_dir.empty() ? fs::path(in_dir) / "report" : fs::path(out_dir),
                      analysis_artifacts(records, true), out);
    } else if (*frontier_cmd) {
      const ProfilePair p = load_profile_pair(profiles_path);
      const FrontierCurve curve = compute_frontier(p.buyer, p.seller);
      const std::string text = frontier_json(curve).dump(2) + "\n";
      if (out_dir.empty()) {
        out << text;
      } else {
        write_file_atomic(out_dir, text);
      }
      if (!svg_path.empty()) write_file_atomic(svg_path, svg::frontier_chart(curve, p.deal));
    } else if (*replay_cmd) {
      const auto records = records_for_replay(record_path);
      if (records.empty()) throw Error(ErrorKind::insufficient_data, "no trial records found");
      std::size_t diverged = 0;
      for (const auto& rec : records) {
        const ReplayResult r = replay(rec, turn_cap);
        if (!r.divergence) continue;
        ++diverged;
        out << rec.condition << " trial " << rec.trial_index << ": diverged at turn " << r.divergence->turn
            << " field " << r.divergence->field << "\n";
      }
      out << records.size() - diverged << "/" << records.size() << " records replayed identically\n";
      if (diverged) return kExitFailure;
    } else if (*prompts_cmd) {
      write_artifacts(dump_dir, fixtures::prompt_fixtures(), out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << config_help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), std::cout, std::cerr);
}

}  // namespace negotiate::cli
