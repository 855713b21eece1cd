#pragma once

// Pareto frontier and Nash bargaining solution in normalized-utility space.
//
// Every contract's normalized utility pair splits additively into a part from
// the categorical/binary terms (810 combinations) and a part from the four
// continuous terms. The continuous part ranges over a zonotope spanned by one
// generator per term (low end -> high end of the joint interval), so the
// achievable set is a union of 810 translates of one zonotope. The frontier is
// the non-dominated part of the union of the translated zonotope boundaries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "negotiate/domain.hpp"
#include "negotiate/error.hpp"
#include "negotiate/utility.hpp"

namespace negotiate {

struct UtilityPoint {
  double buyer = 0.0;
  double seller = 0.0;

  double product() const { return buyer * seller; }
  bool operator==(const UtilityPoint&) const = default;
};

inline double distance(UtilityPoint a, UtilityPoint b) { return std::hypot(a.buyer - b.buyer, a.seller - b.seller); }

inline bool dominates(UtilityPoint a, UtilityPoint b) {
  return a.buyer >= b.buyer && a.seller >= b.seller && (a.buyer > b.buyer || a.seller > b.seller);
}

inline UtilityPoint utility_point(const UtilityProfile& buyer, const UtilityProfile& seller, const Contract& c) {
  return {normalized_utility(buyer, c), normalized_utility(seller, c)};
}

/// Distance from p to the closed segment [a, b].
inline double segment_distance(UtilityPoint p, UtilityPoint a, UtilityPoint b) {
  const double dx = b.buyer - a.buyer, dy = b.seller - a.seller;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.buyer - a.buyer) * dx + (p.seller - a.seller) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, {a.buyer + t * dx, a.seller + t * dy});
}

/// Maximizer of buyer*seller on the segment [a, b]; returns the parameter t in [0, 1].
inline double segment_product_argmax(UtilityPoint a, UtilityPoint b) {
  const double db = b.buyer - a.buyer, ds = b.seller - a.seller;
  // f(t) = (a.b + t db)(a.s + t ds) = a.b a.s + t (a.b ds + a.s db) + t^2 db ds
  const double quad = db * ds, lin = a.buyer * ds + a.seller * db;
  double best_t = 0.0;
  double best = a.product();
  auto consider = [&](double t) {
    const UtilityPoint p{a.buyer + t * db, a.seller + t * ds};
    if (p.product() > best) {
      best = p.product();
      best_t = t;
    }
  };
  consider(1.0);
  if (quad < 0.0) {
    const double t = -lin / (2.0 * quad);
    if (t > 0.0 && t < 1.0) consider(t);
  }
  return best_t;
}

/// Linear interpolation of the continuous terms; categorical terms are taken from `a`.
inline Contract lerp_contract(const Contract& a, const Contract& b, double t) {
  Contract out = a;
  for (Term term : kContinuousTerms) out.set(term, a.number(term) + t * (b.number(term) - a.number(term)));
  return out;
}

struct FrontierVertex {
  UtilityPoint point;
  Contract contract;
  bool connected_to_next = false;  // segment to the next vertex is achievable by pure contracts
};

struct FrontierCurve {
  std::vector<FrontierVertex> vertices;  // buyer ascending, seller non-increasing
  UtilityPoint nbs;
  Contract nbs_contract;

  /// Euclidean distance from p to the closed frontier.
  double distance_to(UtilityPoint p) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      best = std::min(best, distance(p, vertices[i].point));
      if (vertices[i].connected_to_next && i + 1 < vertices.size()) {
        best = std::min(best, segment_distance(p, vertices[i].point, vertices[i + 1].point));
      }
    }
    return best;
  }
};

struct EfficiencyReport {
  double d_pareto = 0.0;
  double d_nbs = 0.0;
  UtilityPoint deal_point;
};

namespace detail {

inline constexpr std::size_t kComboCount = 3 * 5 * 3 * 3 * 3 * 2;

/// Contract with categorical/binary values from combination `k` and continuous terms at the joint lower bounds.
inline Contract combo_contract(std::size_t k) {
  Contract c;
  for (Term t : kCategoricalTerms) {
    const std::size_t n = schema(t).width();
    c.set(t, Choice{k % n});
    k /= n;
  }
  c.set(Term::has_accessories, k % 2 == 1);
  for (Term t : kContinuousTerms) c.set(t, joint_bounds(t).lo);
  return c;
}

/// Indices of the non-dominated points; exact duplicates keep the first occurrence.
inline std::vector<std::size_t> pareto_indices(const std::vector<UtilityPoint>& pts) {
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].buyer != pts[b].buyer) return pts[a].buyer > pts[b].buyer;
    return pts[a].seller > pts[b].seller;
  });
  std::vector<std::size_t> keep;
  double best_seller = -std::numeric_limits<double>::infinity();
  for (std::size_t i : order) {
    if (pts[i].seller > best_seller) {
      keep.push_back(i);
      best_seller = pts[i].seller;
    }
  }
  std::reverse(keep.begin(), keep.end());  // buyer ascending
  return keep;
}

struct Move {
  Term term;
  bool to_high;  // true: move term low->high, false: high->low
  UtilityPoint delta;
  double lambda;  // scalarization weight at which the move becomes optimal
};

/// Pareto boundary of the continuous zonotope: contracts for each vertex (continuous terms only)
/// and the corresponding offsets relative to all-low.
struct ZonotopeBoundary {
  std::vector<std::array<bool, 4>> at_high;
  std::vector<UtilityPoint> points;
};

inline ZonotopeBoundary zonotope_boundary(const std::array<UtilityPoint, 4>& generators) {
  std::array<bool, 4> state{};
  UtilityPoint start{};
  std::vector<Move> moves;
  for (std::size_t j = 0; j < 4; ++j) {
    const UtilityPoint g = generators[j];
    const Term term = kContinuousTerms[j];
    if (g.buyer >= 0.0 && g.seller >= 0.0) {
      state[j] = g.buyer > 0.0 || g.seller > 0.0;
    } else if (g.buyer <= 0.0 && g.seller <= 0.0) {
      state[j] = false;
    } else if (g.buyer > 0.0) {  // (+, -): added once buyer weight dominates
      moves.push_back({term, true, g, -g.seller / (g.buyer - g.seller)});
    } else {  // (-, +): included at first, removed later
      state[j] = true;
      moves.push_back({term, false, {-g.buyer, -g.seller}, g.seller / (g.seller - g.buyer)});
    }
    if (state[j]) {
      start.buyer += g.buyer;
      start.seller += g.seller;
    }
  }
  std::stable_sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.lambda < b.lambda; });

  ZonotopeBoundary out;
  out.at_high.push_back(state);
  out.points.push_back(start);
  for (std::size_t i = 0; i < moves.size(); ++i) {
    const auto& m = moves[i];
    const std::size_t j = static_cast<std::size_t>(m.term);
    state[j] = m.to_high;
    UtilityPoint next{out.points.back().buyer + m.delta.buyer, out.points.back().seller + m.delta.seller};
    // collinear consecutive moves share a breakpoint: fold into one segment
    if (i > 0 && moves[i - 1].lambda == m.lambda) {
      out.at_high.back() = state;
      out.points.back() = next;
    } else {
      out.at_high.push_back(state);
      out.points.push_back(next);
    }
  }
  return out;
}

struct Piece {
  std::size_t curve;
  std::size_t segment;
  double x0, x1;
  std::optional<double> end_floor;  // seller value the clipped end must not drop below
};

}  // namespace detail

/// Exact Pareto frontier over pure contracts plus the Nash bargaining solution.
inline FrontierCurve compute_frontier(const UtilityProfile& buyer, const UtilityProfile& seller) {
  using detail::Piece;
  const Contract base = detail::combo_contract(0);
  const UtilityPoint base_pt = utility_point(buyer, seller, base);

  std::array<UtilityPoint, 4> generators{};
  for (std::size_t j = 0; j < 4; ++j) {
    Contract hi = base;
    hi.set(kContinuousTerms[j], joint_bounds(kContinuousTerms[j]).hi);
    const UtilityPoint p = utility_point(buyer, seller, hi);
    generators[j] = {p.buyer - base_pt.buyer, p.seller - base_pt.seller};
  }

  std::vector<UtilityPoint> offsets(detail::kComboCount);
  for (std::size_t k = 0; k < detail::kComboCount; ++k) offsets[k] = utility_point(buyer, seller, detail::combo_contract(k));
  const std::vector<std::size_t> combos = detail::pareto_indices(offsets);
  if (combos.empty()) throw Error(ErrorKind::empty_feasible_space, "no feasible combination");

  const detail::ZonotopeBoundary zono = detail::zonotope_boundary(generators);

  auto vertex_contract = [&](std::size_t curve, std::size_t v) {
    Contract c = detail::combo_contract(combos[curve]);
    for (std::size_t j = 0; j < 4; ++j) {
      const Interval jb = joint_bounds(kContinuousTerms[j]);
      c.set(kContinuousTerms[j], zono.at_high[v][j] ? jb.hi : jb.lo);
    }
    return c;
  };
  auto vertex_point = [&](std::size_t curve, std::size_t v) {
    return UtilityPoint{offsets[combos[curve]].buyer + zono.points[v].buyer,
                        offsets[combos[curve]].seller + zono.points[v].seller};
  };

  FrontierCurve out;

  if (zono.points.size() == 1) {
    // No continuous trade-offs: each combination contributes a single point.
    std::vector<UtilityPoint> pts;
    for (std::size_t c = 0; c < combos.size(); ++c) pts.push_back(vertex_point(c, 0));
    for (std::size_t i : detail::pareto_indices(pts)) out.vertices.push_back({pts[i], vertex_contract(i, 0), false});
  } else {
    const std::size_t n_curves = combos.size();
    const std::size_t n_segs = zono.points.size() - 1;
    auto seg_value = [&](std::size_t c, std::size_t s, double x) {
      const UtilityPoint a = vertex_point(c, s), b = vertex_point(c, s + 1);
      return a.seller + (x - a.buyer) * (b.seller - a.seller) / (b.buyer - a.buyer);
    };

    std::vector<double> xs;
    for (std::size_t c = 0; c < n_curves; ++c)
      for (std::size_t v = 0; v < zono.points.size(); ++v) xs.push_back(vertex_point(c, v).buyer);
    for (std::size_t c1 = 0; c1 < n_curves; ++c1) {
      for (std::size_t c2 = c1 + 1; c2 < n_curves; ++c2) {
        for (std::size_t s1 = 0; s1 < n_segs; ++s1) {
          const UtilityPoint a1 = vertex_point(c1, s1), b1 = vertex_point(c1, s1 + 1);
          for (std::size_t s2 = 0; s2 < n_segs; ++s2) {
            const UtilityPoint a2 = vertex_point(c2, s2), b2 = vertex_point(c2, s2 + 1);
            const double lo = std::max(a1.buyer, a2.buyer), hi = std::min(b1.buyer, b2.buyer);
            if (lo >= hi) continue;
            const double f_lo = seg_value(c1, s1, lo) - seg_value(c2, s2, lo);
            const double f_hi = seg_value(c1, s1, hi) - seg_value(c2, s2, hi);
            if ((f_lo < 0.0) != (f_hi < 0.0) && f_lo != f_hi) xs.push_back(lo + (hi - lo) * f_lo / (f_lo - f_hi));
          }
        }
      }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    // Upper envelope: one (curve, segment) per elementary interval.
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double x0 = xs[i], x1 = xs[i + 1];
      if (x1 - x0 <= 1e-15) continue;
      const double mid = 0.5 * (x0 + x1);
      std::optional<Piece> best;
      double best_s = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < n_curves; ++c) {
        for (std::size_t s = 0; s < n_segs; ++s) {
          if (vertex_point(c, s).buyer <= mid && mid <= vertex_point(c, s + 1).buyer) {
            const double v = seg_value(c, s, mid);
            if (v > best_s) {
              best_s = v;
              best = Piece{c, s, x0, x1, std::nullopt};
            }
          }
        }
      }
      if (!best) continue;
      if (!pieces.empty() && pieces.back().curve == best->curve && pieces.back().segment == best->segment &&
          pieces.back().x1 == x0) {
        pieces.back().x1 = x1;
      } else {
        pieces.push_back(*best);
      }
    }

    // Drop dominated stretches, sweeping from the buyer-best end.
    std::vector<Piece> kept;
    double running = -std::numeric_limits<double>::infinity();
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
      Piece p = *it;
      const double s0 = seg_value(p.curve, p.segment, p.x0);
      const double s1 = seg_value(p.curve, p.segment, p.x1);
      if (s0 <= running) continue;
      if (s1 <= running) {
        const UtilityPoint a = vertex_point(p.curve, p.segment), b = vertex_point(p.curve, p.segment + 1);
        const double slope = (b.seller - a.seller) / (b.buyer - a.buyer);
        p.x1 = std::min(p.x1, p.x0 + (running - s0) / slope);
        if (!kept.empty()) p.x1 = std::min(p.x1, kept.back().x0);
        p.end_floor = running;
      }
      running = s0;
      kept.push_back(p);
    }
    std::reverse(kept.begin(), kept.end());

    auto piece_vertex = [&](const Piece& p, double x) {
      const UtilityPoint a = vertex_point(p.curve, p.segment), b = vertex_point(p.curve, p.segment + 1);
      const double t = std::clamp((x - a.buyer) / (b.buyer - a.buyer), 0.0, 1.0);
      const Contract c = lerp_contract(vertex_contract(p.curve, p.segment), vertex_contract(p.curve, p.segment + 1), t);
      return FrontierVertex{{x, seg_value(p.curve, p.segment, x)}, c, false};
    };
    for (const Piece& p : kept) {
      FrontierVertex start = piece_vertex(p, p.x0);
      FrontierVertex end = piece_vertex(p, p.x1);
      if (p.end_floor) end.point.seller = std::max(end.point.seller, *p.end_floor);
      // Adjacent pieces may meet at one point with different categorical terms,
      // so each piece keeps its own start vertex.
      if (p.x1 <= p.x0) {
        out.vertices.push_back(start);
        continue;
      }
      start.connected_to_next = true;
      out.vertices.push_back(start);
      out.vertices.push_back(end);
    }
  }

  // Nash bargaining solution over the closed frontier.
  std::size_t best_i = 0;
  double best_t = 0.0, best_prod = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.vertices.size(); ++i) {
    const auto& v = out.vertices[i];
    if (v.point.product() > best_prod) {
      best_prod = v.point.product();
      best_i = i;
      best_t = 0.0;
    }
    if (v.connected_to_next && i + 1 < out.vertices.size()) {
      const double t = segment_product_argmax(v.point, out.vertices[i + 1].point);
      const UtilityPoint a = v.point, b = out.vertices[i + 1].point;
      const UtilityPoint p{a.buyer + t * (b.buyer - a.buyer), a.seller + t * (b.seller - a.seller)};
      if (p.product() > best_prod) {
        best_prod = p.product();
        best_i = i;
        best_t = t;
      }
    }
  }
  const auto& a = out.vertices[best_i];
  if (best_t == 0.0) {
    out.nbs = a.point;
    out.nbs_contract = a.contract;
  } else {
    const auto& b = out.vertices[best_i + 1];
    out.nbs = {a.point.buyer + best_t * (b.point.buyer - a.point.buyer),
               a.point.seller + best_t * (b.point.seller - a.point.seller)};
    out.nbs_contract = lerp_contract(a.contract, b.contract, best_t);
  }
  return out;
}

/// Distances of a deal to the frontier and to the Nash bargaining solution.
inline EfficiencyReport efficiency_distances(const FrontierCurve& curve, const Contract& deal, const UtilityProfile& buyer,
                                             const UtilityProfile& seller) {
  EfficiencyReport r;
  r.deal_point = utility_point(buyer, seller, deal);
  r.d_pareto = curve.distance_to(r.deal_point);
  r.d_nbs = distance(r.deal_point, curve.nbs);
  return r;
}

struct SupportedPoint {
  double lambda;
  UtilityPoint point;
  Contract contract;
};

/// Weighted-sum scalarization: for each lambda in {0, 1/L, ..., 1}, the contract maximizing
/// lambda*Ub + (1-lambda)*Us term by term within the joint bounds (ties broken toward the
/// other objective). Recovers the supported vertices of the frontier.
inline std::vector<SupportedPoint> scalarized_sweep(const UtilityProfile& buyer, const UtilityProfile& seller,
                                                    std::size_t steps) {
  const double sb = 1.0 / (buyer.best_utility - buyer.reservation);
  const double ss = 1.0 / (seller.best_utility - seller.reservation);
  const FeatureVector eb = buyer.weights, es = seller.weights;
  std::vector<SupportedPoint> out;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double lambda = static_cast<double>(i) / static_cast<double>(steps);
    auto better = [&](double db, double ds) {  // score of candidate minus incumbent, tie-broken
      const double primary = lambda * sb * db + (1.0 - lambda) * ss * ds;
      if (primary != 0.0) return primary > 0.0;
      return (lambda >= 0.5 ? ss * ds : sb * db) > 0.0;
    };
    Contract c;
    for (const auto& t : schema()) {
      switch (t.kind) {
        case TermKind::continuous: {
          const Interval jb = joint_bounds(t);
          const double db = eb[t.feature_offset] * (normalize_value(t.term, Role::buyer, jb.hi) -
                                                    normalize_value(t.term, Role::buyer, jb.lo));
          const double ds = es[t.feature_offset] * (normalize_value(t.term, Role::seller, jb.hi) -
                                                    normalize_value(t.term, Role::seller, jb.lo));
          c.set(t.term, better(db, ds) ? jb.hi : jb.lo);
          break;
        }
        case TermKind::categorical: {
          std::size_t best = 0;
          for (std::size_t o = 1; o < t.width(); ++o) {
            if (better(eb[t.feature_offset + o] - eb[t.feature_offset + best],
                       es[t.feature_offset + o] - es[t.feature_offset + best]))
              best = o;
          }
          c.set(t.term, Choice{best});
          break;
        }
        case TermKind::binary:
          c.set(t.term, better(eb[t.feature_offset], es[t.feature_offset]));
          break;
      }
    }
    out.push_back({lambda, utility_point(buyer, seller, c), c});
  }
  return out;
}

struct OracleResult {
  std::vector<UtilityPoint> frontier;  // non-dominated grid points, buyer ascending
  UtilityPoint nbs;
  double nbs_product = 0.0;
  std::uint64_t contracts_evaluated = 0;
};

/// Grid enumeration over all 810 categorical/binary combinations and `grid_steps`
/// points per continuous joint interval.
///
/// Utilities are additive across terms, so each grid contract's value is
/// continuous-part + categorical-part - reference; both parts come from the
/// public utility function. The non-dominated set of a sum of two point sets is
/// contained in the sum of their non-dominated sets, which keeps the frontier
/// filter small while the product maximum scans every contract.
inline OracleResult brute_force_oracle(const UtilityProfile& buyer, const UtilityProfile& seller, std::size_t grid_steps) {
  if (grid_steps < 2) throw Error(ErrorKind::invalid_config, "grid_steps must be >= 2");
  const Contract ref = detail::combo_contract(0);
  const UtilityPoint ref_pt = utility_point(buyer, seller, ref);

  std::array<std::vector<double>, 4> grids;
  for (std::size_t j = 0; j < 4; ++j) {
    const Interval jb = joint_bounds(kContinuousTerms[j]);
    for (std::size_t i = 0; i < grid_steps; ++i)
      grids[j].push_back(jb.lo + jb.width() * static_cast<double>(i) / static_cast<double>(grid_steps - 1));
  }

  std::vector<UtilityPoint> cont;
  cont.reserve(grid_steps * grid_steps * grid_steps * grid_steps);
  Contract c = ref;
  for (double p : grids[0]) {
    c.set(Term::price, p);
    for (double d : grids[1]) {
      c.set(Term::delivery_day, d);
      for (double dp : grids[2]) {
        c.set(Term::down_payment, dp);
        for (double ti : grids[3]) {
          c.set(Term::trade_in, ti);
          const UtilityPoint u = utility_point(buyer, seller, c);
          cont.push_back({u.buyer - ref_pt.buyer, u.seller - ref_pt.seller});
        }
      }
    }
  }
  std::vector<UtilityPoint> cat(detail::kComboCount);
  for (std::size_t k = 0; k < detail::kComboCount; ++k) cat[k] = utility_point(buyer, seller, detail::combo_contract(k));

  OracleResult out;
  double best = -std::numeric_limits<double>::infinity();
  for (const UtilityPoint& ck : cat) {
    for (const UtilityPoint& g : cont) {
      const double b = ck.buyer + g.buyer, s = ck.seller + g.seller;
      if (b * s > best) {
        best = b * s;
        out.nbs = {b, s};
      }
    }
  }
  out.nbs_product = best;
  out.contracts_evaluated = static_cast<std::uint64_t>(cat.size()) * cont.size();

  std::vector<UtilityPoint> cont_nd, cat_nd, sums;
  for (std::size_t i : detail::pareto_indices(cont)) cont_nd.push_back(cont[i]);
  for (std::size_t i : detail::pareto_indices(cat)) cat_nd.push_back(cat[i]);
  for (const auto& a : cat_nd)
    for (const auto& g : cont_nd) sums.push_back({a.buyer + g.buyer, a.seller + g.seller});
  for (std::size_t i : detail::pareto_indices(sums)) out.frontier.push_back(sums[i]);
  return out;
}

/// max over `from` of the distance to the closed frontier `to`.
inline double one_sided_hausdorff(const std::vector<UtilityPoint>& from, const FrontierCurve& to) {
  double worst = 0.0;
  for (const auto& p : from) worst = std::max(worst, to.distance_to(p));
  return worst;
}

}  // namespace negotiate
