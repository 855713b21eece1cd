#pragma once

// Aggregation over trial records: condition summaries, concession/gain
// coupling, price anchoring, categorical conflicts, belief accuracy and
// alignment. Every function is a pure function of the records.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "negotiate/beliefs.hpp"
#include "negotiate/config.hpp"
#include "negotiate/serialize.hpp"

namespace negotiate {

struct MeanSe {
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> se;  // sample sd / sqrt(n), absent below two samples
};

inline MeanSe mean_se(std::span<const double> xs) {
  MeanSe r;
  r.n = xs.size();
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double m = sum / static_cast<double>(xs.size());
  r.mean = m;
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    r.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  }
  return r;
}

struct ConditionSummary {
  std::string condition;
  std::size_t n_trials = 0;
  std::size_t n_deals = 0;
  std::size_t backend_failures = 0;
  double deal_rate = 0.0;
  std::optional<double> deal_rate_se;
  MeanSe buyer_utility;
  MeanSe seller_utility;
  MeanSe welfare;
  MeanSe d_pareto;
  MeanSe d_nbs;
};

inline ConditionSummary condition_summary(std::span<const TrialRecord> trials, std::string condition = {}) {
  if (trials.empty()) throw Error(ErrorKind::insufficient_data, "no trials to summarize");
  ConditionSummary s;
  s.condition = condition.empty() ? trials.front().condition : std::move(condition);
  s.n_trials = trials.size();
  std::vector<double> deal_flags, ub, us, w, dp, dn;
  for (const TrialRecord& r : trials) {
    if (r.backend_failure()) ++s.backend_failures;
    const auto* d = std::get_if<DealOutcome>(&r.outcome);
    deal_flags.push_back(d ? 1.0 : 0.0);
    if (!d) continue;
    ub.push_back(d->buyer_utility);
    us.push_back(d->seller_utility);
    w.push_back(d->buyer_utility + d->seller_utility);
    if (r.efficiency) {
      dp.push_back(r.efficiency->d_pareto);
      dn.push_back(r.efficiency->d_nbs);
    }
  }
  s.n_deals = ub.size();
  const MeanSe dr = mean_se(deal_flags);
  s.deal_rate = *dr.mean;
  s.deal_rate_se = dr.se;
  s.buyer_utility = mean_se(ub);
  s.seller_utility = mean_se(us);
  s.welfare = mean_se(w);
  s.d_pareto = mean_se(dp);
  s.d_nbs = mean_se(dn);
  return s;
}

/// Records grouped by condition, in the canonical condition order (unknown names last, sorted).
inline std::vector<std::pair<std::string, std::vector<TrialRecord>>> group_by_condition(
    std::span<const TrialRecord> trials) {
  std::map<std::string, std::vector<TrialRecord>> by;
  for (const TrialRecord& r : trials) by[r.condition].push_back(r);
  std::vector<std::pair<std::string, std::vector<TrialRecord>>> out;
  for (const auto& c : kConditions) {
    if (auto it = by.find(std::string(c.name)); it != by.end()) {
      out.emplace_back(it->first, std::move(it->second));
      by.erase(it);
    }
  }
  for (auto& [k, v] : by) out.emplace_back(k, std::move(v));
  for (auto& [k, v] : out) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.trial_index < b.trial_index; });
  }
  return out;
}

// ---- coupling ----

struct CouplingRow {
  std::string condition;
  Role role;
  MeanSe concession_turns;  // own gain on turns with c > 0
  MeanSe other_turns;       // own gain on turns with c = 0
};

inline std::vector<CouplingRow> coupling_report(std::span<const TrialRecord> trials) {
  std::vector<CouplingRow> out;
  for (const auto& [cond, recs] : group_by_condition(trials)) {
    for (Role role : {Role::buyer, Role::seller}) {
      std::vector<double> with, without;
      for (const TrialRecord& r : recs) {
        for (const Turn& t : r.turns) {
          if (t.role != role || !t.metrics.concession_c || !t.metrics.own_gain_g) continue;
          (*t.metrics.concession_c > 0.0 ? with : without).push_back(*t.metrics.own_gain_g);
        }
      }
      out.push_back({cond, role, mean_se(with), mean_se(without)});
    }
  }
  return out;
}

// ---- anchoring ----

struct Regression {
  std::size_t n = 0;
  std::optional<double> pearson_r;  // absent when either variable is constant
  std::optional<double> slope;      // absent when the predictor is constant
};

inline Regression regress(std::span<const double> x, std::span<const double> y) {
  Regression r;
  r.n = x.size();
  if (x.size() != y.size()) throw Error(ErrorKind::insufficient_data, "mismatched regression inputs");
  if (x.size() < 3) throw Error(ErrorKind::insufficient_data, "need at least 3 points, got " + std::to_string(x.size()));
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  // Sums of squares at rounding level of the mean count as a constant variable.
  const auto varies = [n](double ss, double mean) { return ss > n * 1e-24 * (mean * mean + 1.0); };
  if (varies(sxx, mx)) r.slope = sxy / sxx;
  if (varies(sxx, mx) && varies(syy, my)) r.pearson_r = sxy / std::sqrt(sxx * syy);
  return r;
}

struct AnchorPoint {
  int trial_index;
  std::string condition;
  double first_price;
  double final_price;
  double buyer_price_weight;   // |weight| of price in the buyer profile
  double seller_price_weight;
};

struct AnchorReport {
  std::vector<AnchorPoint> points;
  Regression first_price;
  Regression buyer_weight;
  Regression seller_weight;
};

/// Price value of the earliest action that names a price.
inline std::optional<double> first_proposed_price(const TrialRecord& r) {
  for (const Turn& t : r.turns) {
    if (t.action.kind != ActionKind::counter) continue;
    if (const auto& v = t.action.terms.get(Term::price)) return std::get<double>(*v);
  }
  return std::nullopt;
}

inline std::vector<AnchorPoint> anchor_points(std::span<const TrialRecord> trials,
                                              std::optional<std::size_t> model = std::nullopt) {
  std::vector<AnchorPoint> pts;
  for (const TrialRecord& r : trials) {
    const auto* d = std::get_if<DealOutcome>(&r.outcome);
    if (!d) continue;
    if (model && d->contract.choice(Term::model) != *model) continue;
    const auto first = first_proposed_price(r);
    if (!first) continue;
    pts.push_back({r.trial_index, r.condition, *first, d->contract.number(Term::price),
                   std::abs(r.buyer.weight(Term::price)), std::abs(r.seller.weight(Term::price))});
  }
  return pts;
}

inline AnchorReport anchor_report(std::span<const TrialRecord> trials, std::optional<std::size_t> model = std::nullopt) {
  AnchorReport rep;
  rep.points = anchor_points(trials, model);
  std::vector<double> first, bw, sw, final_price;
  for (const auto& p : rep.points) {
    first.push_back(p.first_price);
    bw.push_back(p.buyer_price_weight);
    sw.push_back(p.seller_price_weight);
    final_price.push_back(p.final_price);
  }
  rep.first_price = regress(first, final_price);
  rep.buyer_weight = regress(bw, final_price);
  rep.seller_weight = regress(sw, final_price);
  return rep;
}

// ---- categorical conflicts ----

struct ConflictRow {
  Term term;
  std::size_t n_conflict = 0;
  std::optional<double> buyer_win_rate;
  MeanSe price_seller_conceded;  // deal carries the buyer's option
  MeanSe price_buyer_conceded;   // deal carries the seller's option
  std::optional<double> price_difference;  // seller-conceded minus buyer-conceded
};

inline std::vector<ConflictRow> categorical_conflict_report(std::span<const TrialRecord> trials) {
  std::vector<ConflictRow> out;
  for (Term term : kCategoricalTerms) {
    ConflictRow row;
    row.term = term;
    std::size_t wins = 0;
    std::vector<double> seller_conceded, buyer_conceded;
    for (const TrialRecord& r : trials) {
      const auto* d = std::get_if<DealOutcome>(&r.outcome);
      if (!d) continue;
      const auto bp = r.buyer.preferred[index_of(term)], sp = r.seller.preferred[index_of(term)];
      if (!bp || !sp || *bp == *sp) continue;
      ++row.n_conflict;
      const std::size_t got = d->contract.choice(term);
      const double price = d->contract.number(Term::price);
      if (got == *bp) {
        ++wins;
        seller_conceded.push_back(price);
      } else if (got == *sp) {
        buyer_conceded.push_back(price);
      }
    }
    if (row.n_conflict > 0) row.buyer_win_rate = static_cast<double>(wins) / static_cast<double>(row.n_conflict);
    row.price_seller_conceded = mean_se(seller_conceded);
    row.price_buyer_conceded = mean_se(buyer_conceded);
    if (row.price_seller_conceded.mean && row.price_buyer_conceded.mean) {
      row.price_difference = *row.price_seller_conceded.mean - *row.price_buyer_conceded.mean;
    }
    out.push_back(std::move(row));
  }
  return out;
}

// ---- belief accuracy curves ----

inline constexpr std::size_t kAccuracyBins = 10;
inline constexpr std::size_t kAccuracyK = 5;

struct AccuracySample {
  double fraction;  // turn_index / final turn index
  double accuracy;
};

/// Cumulative signed accuracy after each of `role`'s turns that has at least one prediction.
inline std::vector<AccuracySample> accuracy_trajectory(const TrialRecord& r, Role role, std::size_t k = kAccuracyK) {
  std::vector<AccuracySample> out;
  if (r.turns.empty()) return out;
  const double last = static_cast<double>(r.turns.back().index);
  std::vector<Belief> cumulative;
  for (const Turn& t : r.turns) {
    if (t.role != role) continue;
    if (t.beliefs_available) cumulative.insert(cumulative.end(), t.beliefs.begin(), t.beliefs.end());
    if (const auto a = signed_accuracy_at_k(cumulative, r.profile(opponent(role)), k)) {
      out.push_back({static_cast<double>(t.index) / last, *a});
    }
  }
  return out;
}

struct AccuracyCurve {
  std::string condition;
  Role role;
  std::array<MeanSe, kAccuracyBins> bins;  // bin b covers fractions in (b/10, (b+1)/10]
};

inline std::size_t fraction_bin(double f) {
  const auto b = static_cast<std::size_t>(std::ceil(f * kAccuracyBins)) - 1;
  return std::min(b, kAccuracyBins - 1);
}

inline std::vector<AccuracyCurve> accuracy_curves(std::span<const TrialRecord> trials, std::size_t k = kAccuracyK) {
  std::vector<AccuracyCurve> out;
  for (const auto& [cond, recs] : group_by_condition(trials)) {
    for (Role role : {Role::buyer, Role::seller}) {
      std::array<std::vector<double>, kAccuracyBins> xs;
      for (const TrialRecord& r : recs) {
        for (const auto& s : accuracy_trajectory(r, role, k)) xs[fraction_bin(s.fraction)].push_back(s.accuracy);
      }
      AccuracyCurve c{cond, role, {}};
      for (std::size_t b = 0; b < kAccuracyBins; ++b) c.bins[b] = mean_se(xs[b]);
      out.push_back(std::move(c));
    }
  }
  return out;
}

// ---- alignment ----

struct AlignmentRow {
  std::string condition;
  Role role;
  MeanSe alignment;  // per-turn means, averaged over turns
};

inline std::vector<AlignmentRow> alignment_report(std::span<const TrialRecord> trials) {
  std::vector<AlignmentRow> out;
  for (const auto& [cond, recs] : group_by_condition(trials)) {
    for (Role role : {Role::buyer, Role::seller}) {
      std::vector<double> xs;
      for (const TrialRecord& r : recs) {
        for (const Turn& t : r.turns) {
          if (t.role == role && t.metrics.alignment_mean) xs.push_back(*t.metrics.alignment_mean);
        }
      }
      out.push_back({cond, role, mean_se(xs)});
    }
  }
  return out;
}

// ---- CSV ----

namespace csv {

inline std::string num(std::optional<double> v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v == 0.0 ? 0.0 : *v);
  return buf;
}

inline std::string row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  return out + "\n";
}

}  // namespace csv

inline std::string summary_csv(std::span<const ConditionSummary> rows) {
  using csv::num;
  std::string out = csv::row({"condition", "n_trials", "n_deals", "no_deal_rate", "deal_rate", "deal_rate_se",
                              "buyer_utility", "buyer_utility_se", "seller_utility", "seller_utility_se", "welfare",
                              "welfare_se", "d_pareto", "d_pareto_se", "d_nbs", "d_nbs_se", "backend_failures"});
  for (const auto& s : rows) {
    out += csv::row({s.condition, std::to_string(s.n_trials), std::to_string(s.n_deals), num(1.0 - s.deal_rate),
                     num(s.deal_rate), num(s.deal_rate_se), num(s.buyer_utility.mean), num(s.buyer_utility.se),
                     num(s.seller_utility.mean), num(s.seller_utility.se), num(s.welfare.mean), num(s.welfare.se),
                     num(s.d_pareto.mean), num(s.d_pareto.se), num(s.d_nbs.mean), num(s.d_nbs.se),
                     std::to_string(s.backend_failures)});
  }
  return out;
}

inline std::string_view experiment_of(std::string_view condition) {
  for (const auto& c : kConditions) {
    if (c.name == condition) return c.experiment;
  }
  return {};
}

/// Utilities with deltas against the first listed condition of each experiment.
inline std::string delta_table_csv(std::span<const ConditionSummary> rows) {
  using csv::num;
  auto delta = [](std::optional<double> a, std::optional<double> b) -> std::optional<double> {
    if (!a || !b) return std::nullopt;
    return *a - *b;
  };
  std::string out = csv::row({"experiment", "condition", "buyer_utility", "buyer_utility_se", "delta_buyer",
                              "seller_utility", "seller_utility_se", "delta_seller", "welfare", "no_deal_rate"});
  std::string_view current;
  const ConditionSummary* base = nullptr;
  for (const auto& s : rows) {
    const std::string_view exp = experiment_of(s.condition);
    if (!base || exp != current) {
      current = exp;
      base = &s;
    }
    const bool is_base = base == &s;
    out += csv::row({std::string(exp), s.condition, num(s.buyer_utility.mean), num(s.buyer_utility.se),
                     is_base ? "" : num(delta(s.buyer_utility.mean, base->buyer_utility.mean)), num(s.seller_utility.mean),
                     num(s.seller_utility.se), is_base ? "" : num(delta(s.seller_utility.mean, base->seller_utility.mean)),
                     num(s.welfare.mean), num(1.0 - s.deal_rate)});
  }
  return out;
}

inline std::string turn_metrics_csv(std::span<const TrialRecord> trials) {
  using csv::num;
  std::string out = csv::row({"condition", "trial", "turn", "role", "action", "concession_c", "own_gain_g",
                              "alignment_mean", "n_mentioned", "beliefs_available"});
  for (const auto& [cond, recs] : group_by_condition(trials)) {
    for (const TrialRecord& r : recs) {
      for (const Turn& t : r.turns) {
        out += csv::row({cond, std::to_string(r.trial_index), std::to_string(t.index), std::string(to_string(t.role)),
                         std::string(to_string(t.action.kind)), num(t.metrics.concession_c), num(t.metrics.own_gain_g),
                         num(t.metrics.alignment_mean), std::to_string(t.metrics.mentioned_features.size()),
                         t.beliefs_available ? "true" : "false"});
      }
    }
  }
  return out;
}

inline std::string coupling_csv(std::span<const CouplingRow> rows) {
  using csv::num;
  std::string out = csv::row({"condition", "role", "concession_n", "concession_gain", "concession_gain_se", "other_n",
                              "other_gain", "other_gain_se"});
  for (const auto& r : rows) {
    out += csv::row({r.condition, std::string(to_string(r.role)), std::to_string(r.concession_turns.n),
                     num(r.concession_turns.mean), num(r.concession_turns.se), std::to_string(r.other_turns.n),
                     num(r.other_turns.mean), num(r.other_turns.se)});
  }
  return out;
}

inline std::string anchor_csv(const AnchorReport& rep) {
  using csv::num;
  std::string out = csv::row({"predictor", "n", "pearson_r", "slope"});
  auto line = [&](const char* name, const Regression& g) {
    out += csv::row({name, std::to_string(g.n), num(g.pearson_r), num(g.slope)});
  };
  line("first_price", rep.first_price);
  line("buyer_price_weight", rep.buyer_weight);
  line("seller_price_weight", rep.seller_weight);
  return out;
}

inline std::string anchor_points_csv(std::span<const AnchorPoint> pts) {
  using csv::num;
  std::string out = csv::row({"condition", "trial", "first_price", "final_price", "buyer_price_weight", "seller_price_weight"});
  for (const auto& p : pts) {
    out += csv::row({p.condition, std::to_string(p.trial_index), num(p.first_price), num(p.final_price),
                     num(p.buyer_price_weight), num(p.seller_price_weight)});
  }
  return out;
}

inline std::string conflict_csv(std::span<const ConflictRow> rows) {
  using csv::num;
  std::string out = csv::row({"term", "n_conflict", "buyer_win_rate", "price_seller_conceded", "n_seller_conceded",
                              "price_buyer_conceded", "n_buyer_conceded", "price_difference"});
  for (const auto& r : rows) {
    out += csv::row({std::string(to_string(r.term)), std::to_string(r.n_conflict), num(r.buyer_win_rate),
                     num(r.price_seller_conceded.mean), std::to_string(r.price_seller_conceded.n),
                     num(r.price_buyer_conceded.mean), std::to_string(r.price_buyer_conceded.n), num(r.price_difference)});
  }
  return out;
}

inline std::string accuracy_csv(std::span<const AccuracyCurve> curves) {
  using csv::num;
  std::string out = csv::row({"condition", "role", "bin_upper", "n", "accuracy", "accuracy_se"});
  for (const auto& c : curves) {
    for (std::size_t b = 0; b < kAccuracyBins; ++b) {
      out += csv::row({c.condition, std::string(to_string(c.role)), num(static_cast<double>(b + 1) / kAccuracyBins),
                       std::to_string(c.bins[b].n), num(c.bins[b].mean), num(c.bins[b].se)});
    }
  }
  return out;
}

inline std::string alignment_csv(std::span<const AlignmentRow> rows) {
  using csv::num;
  std::string out = csv::row({"condition", "role", "n_turns", "alignment", "alignment_se"});
  for (const auto& r : rows) {
    out += csv::row({r.condition, std::string(to_string(r.role)), std::to_string(r.alignment.n), num(r.alignment.mean),
                     num(r.alignment.se)});
  }
  return out;
}

}  // namespace negotiate
