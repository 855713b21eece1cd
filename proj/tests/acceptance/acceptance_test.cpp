// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "negotiate/fixtures.hpp"
#include "negotiate/frontier.hpp"
#include "negotiate/report.hpp"
#include "negotiate/runner.hpp"
#include "negotiate/turn_metrics.hpp"

using namespace negotiate;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("negotiate_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

Contract contract(double price, double delivery, double down, double trade_in) {
  Contract c;
  c.set(Term::price, price);
  c.set(Term::delivery_day, delivery);
  c.set(Term::down_payment, down);
  c.set(Term::trade_in, trade_in);
  c.set(Term::model, Choice{0});
  c.set(Term::color, Choice{0});
  c.set(Term::interior, Choice{0});
  c.set(Term::warranty, Choice{0});
  c.set(Term::service, Choice{0});
  c.set(Term::has_accessories, false);
  return c;
}

ExperimentConfig scripted(int n, std::uint64_t seed) {
  ExperimentConfig c;
  c.n_trials = n;
  c.master_seed = seed;
  c.concurrency = 4;
  return c;
}

// ---- criteria ----

Verdict encoding_fidelity() {
  Verdict o;
  const double cases[][2] = {{20, 0.0}, {45, 1.0}, {32.5, 0.5}};
  for (const auto& [price, want] : cases) {
    const double got = encode(contract(price, 10, 20, 7), Role::buyer)[feature_index(Term::price)];
    const double formula = (price - 20) / (45 - 20);
    o.check(std::abs(got - want) <= 1e-12 && std::abs(got - formula) <= 1e-12,
            "price " + fmt("%g", price) + " encoded as " + fmt("%.15g", got));
  }
  o.detail = o.pass ? "20->0, 45->1, 32.5->0.5" : o.detail;
  return o;
}

// Extremes of an additive utility over the role's own ranges: per-term min/max
// of the change from a base contract.
std::pair<double, double> separable_extremes(const UtilityProfile& p) {
  const Contract base = contract(35, 15, 20, 7);
  const double u0 = utility(p, base);
  double lo = u0, hi = u0;
  for (Term t : kContinuousTerms) {
    const Interval r = schema(t).range(p.role);
    double mn = INFINITY, mx = -INFINITY;
    for (double v : {r.lo, r.hi}) {
      Contract c = base;
      c.set(t, v);
      mn = std::min(mn, utility(p, c) - u0);
      mx = std::max(mx, utility(p, c) - u0);
    }
    lo += mn;
    hi += mx;
  }
  for (Term t : kCategoricalTerms) {
    double mn = INFINITY, mx = -INFINITY;
    for (std::size_t k = 0; k < schema(t).width(); ++k) {
      Contract c = base;
      c.set(t, Choice{k});
      mn = std::min(mn, utility(p, c) - u0);
      mx = std::max(mx, utility(p, c) - u0);
    }
    lo += mn;
    hi += mx;
  }
  Contract c = base;
  c.set(Term::has_accessories, true);
  const double d = utility(p, c) - u0;
  lo += std::min(0.0, d);
  hi += std::max(0.0, d);
  return {lo, hi};
}

Verdict profile_laws() {
  Verdict o;
  Rng rng(20260101);
  double worst_l1 = 0, worst_end = 0;
  for (int i = 0; i < 10000; ++i) {
    for (Role role : {Role::buyer, Role::seller}) {
      const UtilityProfile p = sample_profile(role, rng);
      double l1 = 0;
      for (double w : p.weights) l1 += std::abs(w);
      worst_l1 = std::max(worst_l1, std::abs(l1 - 1));
      o.check(std::abs(l1 - 1) <= 1e-9, "L1 norm " + fmt("%.17g", l1));
      for (Term t : {Term::price, Term::delivery_day, Term::down_payment, Term::trade_in, Term::has_accessories}) {
        o.check((p.weight(t) > 0 ? 1 : -1) == weight_sign(role, t), "sign of " + std::string(to_string(t)));
      }
      for (Term t : kCategoricalTerms) {
        const std::size_t pref = p.preferred[index_of(t)].value_or(0);
        double sum = 0;
        for (std::size_t k = 0; k < schema(t).width(); ++k) {
          sum += p.weight(t, k);
          if (k != pref) o.check(p.weight(t, k) < 0, "non-preferred option weight not negative");
        }
        o.check(p.weight(t, pref) > 0 && std::abs(sum) <= 1e-12, "categorical group does not sum to zero");
      }
      const auto [lo, hi] = separable_extremes(p);
      o.check(std::abs(lo - p.reservation) <= 1e-9 && std::abs(hi - p.best_utility) <= 1e-9,
              "reservation/best disagree with separable oracle");
      const double uw = normalized_utility(p, p.worst_contract), ub = normalized_utility(p, p.best_contract);
      worst_end = std::max({worst_end, std::abs(uw), std::abs(ub - 1)});
      o.check(std::abs(uw) <= 1e-9 && std::abs(ub - 1) <= 1e-9, "normalized extremes " + fmt("%.3g", uw));
    }
  }
  if (o.pass) o.detail = "20000 profiles, max |L1-1| " + fmt("%.1e", worst_l1) + ", max endpoint error " + fmt("%.1e", worst_end);
  return o;
}

Verdict frontier_oracle() {
  Verdict o;
  Rng rng(50);
  double min_margin = INFINITY, max_h = 0;
  for (int i = 0; i < 50; ++i) {
    const UtilityProfile b = sample_profile(Role::buyer, rng);
    const UtilityProfile s = sample_profile(Role::seller, rng);
    const FrontierCurve f = compute_frontier(b, s);
    const OracleResult g = brute_force_oracle(b, s, 21);
    const double margin = f.nbs.product() - g.nbs_product;
    const double h = one_sided_hausdorff(g.frontier, f);
    min_margin = std::min(min_margin, margin);
    max_h = std::max(max_h, h);
    o.check(margin >= -1e-3, "pair " + std::to_string(i) + ": NBS product short by " + fmt("%.3g", -margin));
    o.check(h <= 0.02, "pair " + std::to_string(i) + ": Hausdorff " + fmt("%.4f", h));
  }
  if (o.pass) o.detail = "50 pairs, min product margin " + fmt("%.2e", min_margin) + ", max Hausdorff " + fmt("%.2e", max_h);
  return o;
}

UtilityProfile price_only(Role role) {
  FeatureVector w{};
  w[feature_index(Term::price)] = weight_sign(role, Term::price);
  return make_profile(role, w);
}

Verdict analytic_nbs() {
  Verdict o;
  // 1-D oracle: Ub = 1 - (p-20)/25 and Us = (p-25)/30 over the joint interval [25, 45].
  double best_p = 25, best = -1;
  for (int i = 0; i <= 200000; ++i) {
    const double p = 25 + i * 1e-4;
    const double v = (1 - (p - 20) / 25) * ((p - 25) / 30);
    if (v > best) best = v, best_p = p;
  }
  const FrontierCurve f = compute_frontier(price_only(Role::buyer), price_only(Role::seller));
  const double price = f.nbs_contract.number(Term::price);
  o.check(std::abs(best_p - 35) <= 1e-4, "grid oracle argmax " + fmt("%.6f", best_p));
  o.check(std::abs(price - 35) <= 1e-6, "NBS price " + fmt("%.9f", price));
  o.check(std::abs(f.nbs.buyer - 0.4) <= 1e-6 && std::abs(f.nbs.seller - 1.0 / 3.0) <= 1e-6,
          "NBS point (" + fmt("%.9f", f.nbs.buyer) + ", " + fmt("%.9f", f.nbs.seller) + ")");
  if (o.pass) o.detail = "price " + fmt("%.9f", price) + ", point (" + fmt("%.9f", f.nbs.buyer) + ", " + fmt("%.9f", f.nbs.seller) + ")";
  return o;
}

Verdict metric_formulas() {
  Verdict o;
  const std::size_t price = feature_index(Term::price), delivery = feature_index(Term::delivery_day);
  auto belief = [](std::size_t f, int d) { return Belief{f, d, 1, BeliefSource::annotation}; };
  {
    FeatureVector a{}, b{};
    a[price] = 0.6, b[price] = 0.5;
    o.check(std::abs(concession_eq1(std::vector{belief(price, -1)}, a, b) - 0.1) <= 1e-12, "concession case 1");
    o.check(std::abs(concession_eq1(std::vector{belief(price, -1)}, b, a)) <= 1e-12, "concession case 2");
    a[delivery] = 0.2, b[delivery] = 0.3;
    o.check(std::abs(concession_eq1(std::vector{belief(price, -1), belief(delivery, -1)}, a, b) - 0.1) <= 1e-12,
            "concession case 3");
  }
  {
    FeatureVector w{}, prev{}, next{};
    w[0] = 0.4, w[1] = -0.3, w[2] = 0.2, w[5] = 0.1;
    next[0] = 0.2, next[1] = 0.1;
    o.check(std::abs(own_gain_eq2(w, prev, next, 3) - (0.2 - 0.1 + 0.0) / 3) <= 1e-12, "own-gain case 1");
    o.check(std::abs(own_gain_eq2(w, next, next, 3)) <= 1e-12, "own-gain case 2");
    FeatureVector lo{}, hi{};
    hi[0] = 1, lo[1] = 1, hi[2] = 1;
    o.check(std::abs(own_gain_eq2(w, lo, hi, 3) - 1.0) <= 1e-12, "own-gain case 3");
  }
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int d = (rng() & 1) ? 1 : -1;
    const double v = u(rng);
    o.check(alignment_score(-d, v) == -alignment_score(d, v), "alignment antisymmetry");
    o.check(std::abs(alignment_score(d, v) - d * (v - 0.5)) <= 1e-15, "alignment formula");
  }
  if (o.pass) o.detail = "3 concession + 3 own-gain hand cases, 1000 alignment pairs";
  return o;
}

Verdict protocol_soundness() {
  Verdict o;
  ExperimentConfig cfg = scripted(125, 99);
  std::size_t deals = 0, trials = 0, divergences = 0;
  for (const Condition& c : kConditions) {
    for (int i = 0; i < cfg.n_trials; ++i) {
      const TrialRecord r = run_trial(cfg, c.name, i);
      ++trials;
      for (std::size_t t = 0; t < r.turns.size(); ++t) {
        o.check(r.turns[t].role == (t % 2 == 0 ? Role::buyer : Role::seller), "roles do not alternate");
        o.check(r.turns[t].index == static_cast<int>(t) + 1, "turn indices not consecutive");
      }
      if (const auto* d = std::get_if<DealOutcome>(&r.outcome)) {
        ++deals;
        o.check(utility(r.buyer, d->contract) > r.buyer.reservation, "deal at or below buyer reservation");
        o.check(utility(r.seller, d->contract) > r.seller.reservation, "deal at or below seller reservation");
      }
      if (replay(r).divergence) ++divergences;
    }
  }
  o.check(divergences == 0, std::to_string(divergences) + " replay divergences");
  if (o.pass) o.detail = std::to_string(trials) + " trials, " + std::to_string(deals) + " deals, 0 violations, 0 divergences";
  return o;
}

Verdict determinism() {
  Verdict o;
  const ExperimentConfig cfg = scripted(100, 4242);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run_condition(cfg, "symmetric_full", a);
  ExperimentConfig serial = cfg;
  serial.concurrency = 1;
  const auto rb = run_condition(serial, "symmetric_full", b);
  o.check(read_text(a / "summary.csv") == read_text(b / "summary.csv"), "summary CSVs differ");
  o.check(ra.record_hashes == rb.record_hashes, "record hashes differ");
  std::size_t identical_files = 0;
  for (int i = 0; i < cfg.n_trials; ++i) {
    identical_files += read_text(trial_turns_path(a, i)) == read_text(trial_turns_path(b, i));
  }
  o.check(identical_files == 100, "transcript files differ");
  const std::set<std::string> distinct(ra.record_hashes.begin(), ra.record_hashes.end());
  if (o.pass) o.detail = "100 trials x 2 runs, " + std::to_string(distinct.size()) + " distinct hashes, identical CSVs";
  fs::remove_all(a);
  fs::remove_all(b);
  return o;
}

Verdict prompt_fidelity() {
  Verdict o;
  const auto fixtures = fixtures::prompt_fixtures();
  const fs::path golden = fs::path(NEGOTIATE_TEST_DIR) / "golden";
  for (const auto& [name, text] : fixtures) {
    o.check(fs::exists(golden / name) && read_text(golden / name) == text, name + " differs from golden");
  }
  // Decimals other than dollar amounts, or any number with 3+ decimals.
  static const std::regex number(R"(\$?\d+\.\d+)");
  auto leaks = [&](const std::string& s) {
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
      const std::string m = it->str();
      if (m[0] != '$' || m.size() - m.find('.') - 1 >= 3) return true;
    }
    return false;
  };
  Rng rng(8);
  std::size_t audited = 0;
  for (int i = 0; i < 100; ++i) {
    NegotiationState s(sample_profile(Role::buyer, rng), sample_profile(Role::seller, rng));
    for (Role r : {Role::buyer, Role::seller}) {
      for (const Condition& c : kConditions) {
        const PromptBundle p = build_prompts(s, r, c.for_role(r));
        o.check(!leaks(p.system_prompt) && !leaks(p.turn_prompt), "numeric leak in prompt");
        audited += 2;
      }
    }
  }
  for (const auto& [name, text] : fixtures) o.check(!leaks(text), "numeric leak in " + name);
  if (o.pass) o.detail = std::to_string(fixtures.size()) + " goldens match, " + std::to_string(audited) + " prompts audited";
  return o;
}

Verdict scripted_convergence() {
  Verdict o;
  ExperimentConfig cfg = scripted(100, 40);
  cfg.conceder_exponent = 1.0;
  std::size_t deals = 0, max_turns = 0;
  for (int i = 0; i < cfg.n_trials; ++i) {
    const TrialRecord r = run_trial(cfg, "symmetric_none", i);
    const bool ok = r.deal() && static_cast<int>(r.turns.size()) < kDefaultTurnCap;
    deals += ok;
    max_turns = std::max(max_turns, r.turns.size());
  }
  o.check(deals == 100, std::to_string(deals) + "/100 deals before the cap");
  o.detail = std::to_string(deals) + "/100 deals, longest " + std::to_string(max_turns) + " turns";
  return o;
}

Verdict stub_end_to_end() {
  Verdict o;
  ExperimentConfig cfg;
  cfg.condition = "all";
  cfg.n_trials = 10;
  cfg.master_seed = 2026;
  cfg.buyer_agent = AgentKind::llm;
  cfg.seller_agent = AgentKind::llm;
  cfg.extractor_backend = BeliefSource::extractor;
  cfg.endpoint_url = std::string(kStubEndpoint);
  const fs::path dir = scratch("e2e");
  const auto results = run_experiment(cfg, dir);
  o.check(results.size() == 8, "expected 8 conditions");
  const auto records = load_records(dir);
  o.check(records.size() == 80, std::to_string(records.size()) + " records loaded");
  std::size_t failures = 0;
  for (const auto& r : records) failures += r.backend_failure();
  o.check(failures == 0, std::to_string(failures) + " backend failures");
  const Artifacts files = analysis_artifacts(records, true);
  for (const char* name : {"conditions.csv", "outcome_table.csv", "turn_metrics.csv", "coupling.csv", "anchor.csv",
                           "anchor_points.csv", "conflicts.csv", "accuracy.csv", "alignment.csv", "report.md",
                           "fig_utilities.svg", "fig_outcomes.svg", "fig_price_anchor.svg", "fig_accuracy.svg",
                           "fig_alignment.svg", "fig_coupling.svg", "fig_efficiency.svg"}) {
    const auto it = files.find(name);
    o.check(it != files.end() && !it->second.empty(), std::string("missing artifact ") + name);
  }
  o.check(analysis_artifacts(load_records(dir), true) == files, "report not byte-stable");
  const std::string table = files.count("conditions.csv") ? files.at("conditions.csv") : "";
  for (const Condition& c : kConditions) o.check(table.find(c.name) != std::string::npos, "condition row missing");
  if (o.pass) o.detail = "8 conditions x 10 trials, " + std::to_string(files.size()) + " artifacts";
  fs::remove_all(dir);
  return o;
}

struct Criterion {
  const char* name;
  double limit_s;  // 0 when the criterion has no runtime bound
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"encoding fidelity", 1.0, encoding_fidelity},
      {"profile laws", 10.0, profile_laws},
      {"frontier-oracle equivalence", 120.0, frontier_oracle},
      {"analytic NBS", 0, analytic_nbs},
      {"metric formulas", 0, metric_formulas},
      {"protocol soundness", 0, protocol_soundness},
      {"determinism", 0, determinism},
      {"prompt fidelity", 0, prompt_fidelity},
      {"scripted convergence", 0, scripted_convergence},
      {"stub end-to-end report", 300.0, stub_end_to_end},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) {
      if (o.pass) o.detail = "runtime over " + fmt("%.0f s", c.limit_s);
      o.pass = false;
    }
    failed += !o.pass;
    std::printf("%s  %-30s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
