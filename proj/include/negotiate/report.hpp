#pragma once

// Analysis artifacts (CSV tables, SVG charts, markdown report) for a set of
// trial records. Returns file name -> content; callers decide where to write.

#include <map>
#include <string>
#include <vector>

#include "negotiate/analysis.hpp"
#include "negotiate/svg.hpp"

namespace negotiate {

using Artifacts = std::map<std::string, std::string>;

namespace detail {

inline std::vector<std::string> condition_names(const std::vector<ConditionSummary>& rows) {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.condition);
  return out;
}

inline std::string utilities_chart(const std::vector<ConditionSummary>& rows) {
  svg::Document d(120 + 110.0 * rows.size(), 420, "Mean normalized utility by condition");
  const svg::Panel p{70, 50, 90.0 * rows.size() + 20, 290, 0, 0, 0, 1};
  p.axes(d, "", "normalized utility", {}, 5, false);
  svg::Series b{"buyer", {}, {}}, s{"seller", {}, {}};
  for (const auto& r : rows) {
    b.values.push_back(r.buyer_utility.mean);
    b.errors.push_back(r.buyer_utility.se);
    s.values.push_back(r.seller_utility.mean);
    s.errors.push_back(r.seller_utility.se);
  }
  svg::bars(d, p, condition_names(rows), {b, s});
  svg::legend(d, p.x + p.w + 8, 70, {"buyer", "seller"});
  return d.str();
}

inline std::string outcome_scatter(const std::vector<std::pair<std::string, std::vector<TrialRecord>>>& groups) {
  svg::Document d(640, 520, "Agreed outcomes in utility space (star = condition mean)");
  const svg::Panel p{70, 50, 400, 400, 0, 1, 0, 1};
  p.axes(d, "buyer normalized utility", "seller normalized utility");
  std::vector<std::string> names;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    names.push_back(groups[g].first);
    double sb = 0, ss = 0;
    std::size_t n = 0;
    for (const auto& r : groups[g].second) {
      if (const auto* o = std::get_if<DealOutcome>(&r.outcome)) {
        d.circle(p.px(o->buyer_utility), p.py(o->seller_utility), 3, svg::kPalette[g % 8], 0.45);
        sb += o->buyer_utility;
        ss += o->seller_utility;
        ++n;
      }
    }
    if (n) d.star(p.px(sb / n), p.py(ss / n), 8, svg::kPalette[g % 8]);
  }
  svg::legend(d, p.x + p.w + 12, 70, names);
  return d.str();
}

inline std::string anchor_chart(const std::vector<AnchorPoint>& pts) {
  svg::Document d(1020, 400, "Final agreed price against price weights and first proposed price");
  std::vector<double> bw, sw, first, final_price;
  for (const auto& a : pts) {
    bw.push_back(a.buyer_price_weight);
    sw.push_back(a.seller_price_weight);
    first.push_back(a.first_price);
    final_price.push_back(a.final_price);
  }
  const auto [y0, y1] = svg::padded_range(final_price);
  const struct {
    const std::vector<double>* xs;
    const char* label;
  } panels[] = {{&bw, "buyer price weight"}, {&sw, "seller price weight"}, {&first, "first proposed price ($k)"}};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [x0, x1] = svg::padded_range(*panels[i].xs);
    const svg::Panel p{70 + 330.0 * i, 50, 250, 270, x0, x1, y0, y1};
    p.axes(d, panels[i].label, i == 0 ? "final price ($k)" : "");
    for (std::size_t k = 0; k < final_price.size(); ++k) {
      d.circle(p.px((*panels[i].xs)[k]), p.py(final_price[k]), 3, svg::kPalette[i], 0.6);
    }
  }
  return d.str();
}

inline std::string accuracy_chart(const std::vector<AccuracyCurve>& curves) {
  svg::Document d(900, 420, "Cumulative signed accuracy@5 over normalized turn fraction");
  std::vector<std::string> names;
  for (std::size_t r = 0; r < 2; ++r) {
    const svg::Panel p{70 + 360.0 * r, 50, 290, 290, 0, 1, 0, 1};
    p.axes(d, "turn fraction", r == 0 ? "signed accuracy@5" : "", r == 0 ? "buyer" : "seller");
    std::size_t series = 0;
    for (const auto& c : curves) {
      if (c.role != (r == 0 ? Role::buyer : Role::seller)) continue;
      if (r == 0) names.push_back(c.condition);
      std::vector<std::pair<double, double>> pts;
      for (std::size_t b = 0; b < kAccuracyBins; ++b) {
        if (!c.bins[b].mean) continue;
        const double x = (b + 0.5) / kAccuracyBins;
        pts.emplace_back(p.px(x), p.py(*c.bins[b].mean));
        d.circle(p.px(x), p.py(*c.bins[b].mean), 2.5, svg::kPalette[series % 8]);
      }
      d.polyline(pts, svg::kPalette[series % 8], 1.6);
      ++series;
    }
  }
  svg::legend(d, 790, 70, names);
  return d.str();
}

inline std::string role_bars(std::string_view title, std::string_view ylabel, const std::vector<std::string>& groups,
                             const svg::Series& buyer, const svg::Series& seller) {
  std::vector<double> all;
  for (const auto* s : {&buyer, &seller}) {
    for (std::size_t i = 0; i < s->values.size(); ++i) {
      if (!s->values[i]) continue;
      const double e = i < s->errors.size() && s->errors[i] ? *s->errors[i] : 0.0;
      all.push_back(*s->values[i] + e);
      all.push_back(*s->values[i] - e);
    }
  }
  all.push_back(0.0);
  const auto [y0, y1] = svg::padded_range(all, 0.1);
  svg::Document d(120 + 110.0 * groups.size(), 420, title);
  const svg::Panel p{70, 50, 90.0 * groups.size() + 20, 290, 0, 0, y0, y1};
  p.axes(d, "", ylabel, {}, 5, false);
  d.line(p.x, p.py(0), p.x + p.w, p.py(0), "#000", 1);
  svg::bars(d, p, groups, {buyer, seller});
  svg::legend(d, p.x + p.w + 8, 70, {buyer.name, seller.name});
  return d.str();
}

inline std::string coupling_chart(const std::vector<CouplingRow>& rows) {
  svg::Document d(1000, 420, "Own gain on concession turns (c > 0) and other turns");
  std::vector<std::string> groups;
  for (const auto& r : rows) {
    if (r.role == Role::buyer) groups.push_back(r.condition);
  }
  std::vector<double> all{0.0};
  for (const auto& r : rows) {
    for (const auto* m : {&r.concession_turns, &r.other_turns}) {
      if (m->mean) all.push_back(*m->mean + m->se.value_or(0) * (*m->mean >= 0 ? 1 : -1));
    }
  }
  const auto [y0, y1] = svg::padded_range(all, 0.1);
  for (std::size_t k = 0; k < 2; ++k) {
    const Role role = k == 0 ? Role::buyer : Role::seller;
    const double pw = std::max(200.0, 60.0 * groups.size());
    const svg::Panel p{70 + (pw + 110) * k, 50, pw, 290, 0, 0, y0, y1};
    p.axes(d, "", k == 0 ? "mean own gain g" : "", to_string(role), 5, false);
    d.line(p.x, p.py(0), p.x + p.w, p.py(0), "#000", 1);
    svg::Series con{"c > 0", {}, {}}, oth{"c = 0", {}, {}};
    for (const auto& r : rows) {
      if (r.role != role) continue;
      con.values.push_back(r.concession_turns.mean);
      con.errors.push_back(r.concession_turns.se);
      oth.values.push_back(r.other_turns.mean);
      oth.errors.push_back(r.other_turns.se);
    }
    svg::bars(d, p, groups, {con, oth});
  }
  svg::legend(d, 900, 70, {"c > 0", "c = 0"});
  return d.str();
}

inline std::string efficiency_chart(const std::vector<ConditionSummary>& rows) {
  svg::Document d(1000, 420, "Distance to the Pareto frontier and to the Nash solution");
  const auto groups = condition_names(rows);
  std::vector<double> all{0.0};
  for (const auto& r : rows) {
    for (const auto* m : {&r.d_pareto, &r.d_nbs}) {
      if (m->mean) all.push_back(*m->mean + m->se.value_or(0));
    }
  }
  const double top = *std::max_element(all.begin(), all.end());
  for (std::size_t k = 0; k < 2; ++k) {
    const double pw = std::max(200.0, 60.0 * groups.size());
    const svg::Panel p{70 + (pw + 110) * k, 50, pw, 290, 0, 0, 0, top > 0 ? top * 1.1 : 1.0};
    p.axes(d, "", k == 0 ? "distance (normalized utility)" : "", k == 0 ? "d_Pareto" : "d_NBS", 5, false);
    svg::Series s{k == 0 ? "d_Pareto" : "d_NBS", {}, {}};
    for (const auto& r : rows) {
      const MeanSe& m = k == 0 ? r.d_pareto : r.d_nbs;
      s.values.push_back(m.mean);
      s.errors.push_back(m.se);
    }
    svg::bars(d, p, groups, {s});
  }
  return d.str();
}

inline std::string fmt_cell(const MeanSe& m) {
  if (!m.mean) return "n/a";
  char buf[64];
  if (m.se) {
    std::snprintf(buf, sizeof buf, "%.3f (%.3f)", *m.mean, *m.se);
  } else {
    std::snprintf(buf, sizeof buf, "%.3f", *m.mean);
  }
  return buf;
}

inline std::string fmt3(std::optional<double> v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

inline std::string markdown_report(const std::vector<ConditionSummary>& rows, const std::vector<ConflictRow>& conflicts,
                                   const std::optional<AnchorReport>& anchor, std::size_t n_records) {
  std::string md = "# Negotiation report\n\n";
  md += std::to_string(n_records) + " trial records.\n\n";
  md += "## Outcomes\n\nValues are mean (standard error) over agreed deals.\n\n";
  md += "| Condition | Trials | U_b | U_s | Welfare | d_Pareto | d_NBS | No-deal |\n";
  md += "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    char nd[32];
    std::snprintf(nd, sizeof nd, "%.0f%%", 100.0 * (1.0 - r.deal_rate));
    md += "| " + r.condition + " | " + std::to_string(r.n_trials) + " | " + fmt_cell(r.buyer_utility) + " | " +
          fmt_cell(r.seller_utility) + " | " + fmt_cell(r.welfare) + " | " + fmt_cell(r.d_pareto) + " | " +
          fmt_cell(r.d_nbs) + " | " + nd + " |\n";
  }
  md += "\n## Categorical conflicts\n\n| Term | Conflicts | Buyer win rate | Price diff ($k) |\n|---|---|---|---|\n";
  for (const auto& c : conflicts) {
    md += "| " + std::string(to_string(c.term)) + " | " + std::to_string(c.n_conflict) + " | " +
          fmt3(c.buyer_win_rate) + " | " +
          fmt3(c.price_difference) + " |\n";
  }
  md += "\n## Price anchoring\n\n";
  if (anchor) {
    md += "| Predictor | n | r | slope |\n|---|---|---|---|\n";
    auto line = [&](const char* name, const Regression& g) {
      md += std::string("| ") + name + " | " + std::to_string(g.n) + " | " +
            fmt3(g.pearson_r) + " | " + fmt3(g.slope) + " |\n";
    };
    line("first proposed price", anchor->first_price);
    line("buyer price weight", anchor->buyer_weight);
    line("seller price weight", anchor->seller_weight);
  } else {
    md += "Fewer than 3 agreed deals with a proposed price.\n";
  }
  md += "\n## Charts\n\n";
  for (const char* f : {"fig_utilities.svg", "fig_outcomes.svg", "fig_price_anchor.svg", "fig_accuracy.svg",
                        "fig_alignment.svg", "fig_coupling.svg", "fig_efficiency.svg"}) {
    md += std::string("- [") + f + "](" + f + ")\n";
  }
  return md;
}

}  // namespace detail

/// All analysis CSVs; charts and the markdown report when `charts` is set.
inline Artifacts analysis_artifacts(const std::vector<TrialRecord>& records, bool charts) {
  if (records.empty()) throw Error(ErrorKind::insufficient_data, "no trial records found");
  Artifacts out;
  const auto groups = group_by_condition(records);
  std::vector<ConditionSummary> rows;
  for (const auto& [c, recs] : groups) rows.push_back(condition_summary(recs, c));
  out["conditions.csv"] = summary_csv(rows);
  out["outcome_table.csv"] = delta_table_csv(rows);
  out["turn_metrics.csv"] = turn_metrics_csv(records);
  const auto coupling = coupling_report(records);
  out["coupling.csv"] = coupling_csv(coupling);
  const auto pts = anchor_points(records);
  out["anchor_points.csv"] = anchor_points_csv(pts);
  std::optional<AnchorReport> anchor;
  try {
    anchor = anchor_report(records);
    out["anchor.csv"] = anchor_csv(*anchor);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::insufficient_data) throw;
    out["anchor.csv"] = csv::row({"predictor", "n", "pearson_r", "slope"});
  }
  try {
    out["anchor_sedan.csv"] = anchor_csv(anchor_report(records, 0));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::insufficient_data) throw;
    out["anchor_sedan.csv"] = csv::row({"predictor", "n", "pearson_r", "slope"});
  }
  const auto conflicts = categorical_conflict_report(records);
  out["conflicts.csv"] = conflict_csv(conflicts);
  const auto curves = accuracy_curves(records);
  out["accuracy.csv"] = accuracy_csv(curves);
  const auto alignment = alignment_report(records);
  out["alignment.csv"] = alignment_csv(alignment);
  if (!charts) return out;

  const auto names = detail::condition_names(rows);
  out["fig_utilities.svg"] = detail::utilities_chart(rows);
  out["fig_outcomes.svg"] = detail::outcome_scatter(groups);
  out["fig_price_anchor.svg"] = detail::anchor_chart(pts);
  out["fig_accuracy.svg"] = detail::accuracy_chart(curves);
  svg::Series ab{"buyer", {}, {}}, as{"seller", {}, {}};
  for (const auto& a : alignment) {
    (a.role == Role::buyer ? ab : as).values.push_back(a.alignment.mean);
    (a.role == Role::buyer ? ab : as).errors.push_back(a.alignment.se);
  }
  out["fig_alignment.svg"] = detail::role_bars("Belief-action alignment by condition and role", "mean alignment", names, ab, as);
  out["fig_coupling.svg"] = detail::coupling_chart(coupling);
  out["fig_efficiency.svg"] = detail::efficiency_chart(rows);
  out["report.md"] = detail::markdown_report(rows, conflicts, anchor, records.size());
  return out;
}

}  // namespace negotiate
