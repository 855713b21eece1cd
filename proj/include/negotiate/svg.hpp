#pragma once

// Minimal self-contained SVG charts: grouped bars, scatter panels and line
// panels. Output is byte-stable for identical input.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "negotiate/frontier.hpp"

namespace negotiate::svg {

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Document {
 public:
  Document(double width, double height, std::string_view title) : w_(width), h_(height) {
    body_ += "<title>" + escape(title) + "</title>\n";
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + f2(w_) + "\" height=\"" + f2(h_) + "\" fill=\"white\"/>\n";
    text(w_ / 2, 22, title, 15, "middle", "bold");
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke = "#333", double width = 1,
            std::string_view dash = {}) {
    body_ += "<line x1=\"" + f2(x1) + "\" y1=\"" + f2(y1) + "\" x2=\"" + f2(x2) + "\" y2=\"" + f2(y2) + "\" stroke=\"" +
             std::string(stroke) + "\" stroke-width=\"" + f2(width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + std::string(dash) + "\"";
    body_ += "/>\n";
  }

  void rect(double x, double y, double w, double h, std::string_view fill) {
    body_ += "<rect x=\"" + f2(x) + "\" y=\"" + f2(y) + "\" width=\"" + f2(std::max(w, 0.0)) + "\" height=\"" +
             f2(std::max(h, 0.0)) + "\" fill=\"" + std::string(fill) + "\"/>\n";
  }

  void circle(double x, double y, double r, std::string_view fill, double opacity = 1.0) {
    body_ += "<circle cx=\"" + f2(x) + "\" cy=\"" + f2(y) + "\" r=\"" + f2(r) + "\" fill=\"" + std::string(fill) +
             "\" fill-opacity=\"" + f2(opacity) + "\"/>\n";
  }

  /// Five-pointed star marker.
  void star(double x, double y, double r, std::string_view fill) {
    std::string pts;
    for (int i = 0; i < 10; ++i) {
      const double a = -M_PI / 2 + i * M_PI / 5;
      const double rr = i % 2 ? r * 0.45 : r;
      pts += (i ? " " : "") + f2(x + rr * std::cos(a)) + "," + f2(y + rr * std::sin(a));
    }
    body_ += "<polygon points=\"" + pts + "\" fill=\"" + std::string(fill) + "\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width = 2) {
    if (pts.empty()) return;
    std::string p;
    for (std::size_t i = 0; i < pts.size(); ++i) p += (i ? " " : "") + f2(pts[i].first) + "," + f2(pts[i].second);
    body_ += "<polyline points=\"" + p + "\" fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" +
             f2(width) + "\"/>\n";
  }

  void text(double x, double y, std::string_view s, double size = 11, std::string_view anchor = "start",
            std::string_view weight = "normal", double rotate = 0) {
    body_ += "<text x=\"" + f2(x) + "\" y=\"" + f2(y) + "\" font-family=\"sans-serif\" font-size=\"" + f2(size) +
             "\" text-anchor=\"" + std::string(anchor) + "\" font-weight=\"" + std::string(weight) + "\"";
    if (rotate != 0) body_ += " transform=\"rotate(" + f2(rotate) + " " + f2(x) + " " + f2(y) + ")\"";
    body_ += ">" + escape(s) + "</text>\n";
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(w_) + "\" height=\"" + f2(h_) + "\" viewBox=\"0 0 " +
           f2(w_) + " " + f2(h_) + "\">\n" + body_ + "</svg>\n";
  }

  double width() const { return w_; }
  double height() const { return h_; }

 private:
  double w_, h_;
  std::string body_;
};

/// Data-to-pixel mapping for one panel.
struct Panel {
  double x, y, w, h;  // pixel box of the plotting area
  double x0, x1, y0, y1;  // data ranges

  double px(double v) const { return x + (x1 == x0 ? 0.5 : (v - x0) / (x1 - x0)) * w; }
  double py(double v) const { return y + h - (y1 == y0 ? 0.5 : (v - y0) / (y1 - y0)) * h; }

  void axes(Document& d, std::string_view xlabel, std::string_view ylabel, std::string_view title = {},
            int ticks = 5, bool x_ticks = true) const {
    d.line(x, y + h, x + w, y + h);
    d.line(x, y, x, y + h);
    for (int i = 0; i <= ticks; ++i) {
      const double yv = y0 + (y1 - y0) * i / ticks;
      d.line(x - 4, py(yv), x, py(yv));
      d.line(x, py(yv), x + w, py(yv), "#e5e5e5", 0.6);
      d.text(x - 6, py(yv) + 4, f2(yv), 10, "end");
      if (x_ticks) {
        const double xv = x0 + (x1 - x0) * i / ticks;
        d.line(px(xv), y + h, px(xv), y + h + 4);
        d.text(px(xv), y + h + 16, f2(xv), 10, "middle");
      }
    }
    if (!xlabel.empty()) d.text(x + w / 2, y + h + 34, xlabel, 11, "middle");
    if (!ylabel.empty()) d.text(x - 42, y + h / 2, ylabel, 11, "middle", "normal", -90);
    if (!title.empty()) d.text(x + w / 2, y - 8, title, 12, "middle", "bold");
  }
};

struct Series {
  std::string name;
  std::vector<std::optional<double>> values;  // one per group
  std::vector<std::optional<double>> errors;  // optional, same length
};

inline void legend(Document& d, double x, double y, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    d.rect(x, y + i * 16 - 9, 10, 10, kPalette[i % 8]);
    d.text(x + 14, y + i * 16, names[i], 10);
  }
}

/// Grouped bars with optional error whiskers; absent values leave a gap.
inline void bars(Document& d, const Panel& p, const std::vector<std::string>& groups, const std::vector<Series>& series) {
  const double gw = p.w / std::max<std::size_t>(groups.size(), 1);
  const double bw = gw * 0.8 / std::max<std::size_t>(series.size(), 1);
  const double base = p.py(std::clamp(0.0, p.y0, p.y1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t s = 0; s < series.size(); ++s) {
      const auto& v = series[s].values[g];
      if (!v) continue;
      const double x = p.x + g * gw + gw * 0.1 + s * bw;
      const double top = p.py(*v);
      d.rect(x, std::min(top, base), bw * 0.92, std::abs(base - top), kPalette[s % 8]);
      if (g < series[s].errors.size() && series[s].errors[g]) {
        const double e = *series[s].errors[g];
        const double cx = x + bw * 0.46;
        d.line(cx, p.py(*v - e), cx, p.py(*v + e), "#000", 1);
      }
    }
    d.text(p.x + g * gw + gw / 2, p.y + p.h + 14, groups[g], 9, "middle");
  }
}

inline std::pair<double, double> padded_range(const std::vector<double>& xs, double pad = 0.05) {
  if (xs.empty()) return {0.0, 1.0};
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double span = *hi - *lo;
  if (span == 0) return {*lo - 1.0, *hi + 1.0};
  return {*lo - pad * span, *hi + pad * span};
}

/// Frontier polyline (connected pieces), NBS star and optional deal point in utility space.
inline std::string frontier_chart(const FrontierCurve& curve, std::optional<UtilityPoint> deal = std::nullopt) {
  Document d(520, 520, "Pareto frontier and Nash bargaining solution");
  const Panel p{70, 50, 410, 400, 0, 1, 0, 1};
  p.axes(d, "buyer normalized utility", "seller normalized utility");
  std::vector<std::pair<double, double>> run;
  auto flush = [&] {
    if (run.size() >= 2) d.polyline(run, kPalette[0]);
    run.clear();
  };
  for (std::size_t i = 0; i < curve.vertices.size(); ++i) {
    const auto& v = curve.vertices[i];
    run.emplace_back(p.px(v.point.buyer), p.py(v.point.seller));
    d.circle(p.px(v.point.buyer), p.py(v.point.seller), 2.2, kPalette[0]);
    if (!v.connected_to_next) flush();
  }
  flush();
  d.star(p.px(curve.nbs.buyer), p.py(curve.nbs.seller), 9, "#ffd700");
  d.text(p.px(curve.nbs.buyer) + 10, p.py(curve.nbs.seller) - 8, "NBS", 11);
  if (deal) {
    d.circle(p.px(deal->buyer), p.py(deal->seller), 5, kPalette[1]);
    d.text(p.px(deal->buyer) + 8, p.py(deal->seller) + 14, "deal", 11);
  }
  return d.str();
}

}  // namespace negotiate::svg
