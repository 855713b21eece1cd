#pragma once

// Car-purchase negotiation domain: the ten terms, their feasible ranges,
// contract representation and the fixed-layout feature encoding.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "negotiate/error.hpp"

namespace negotiate {

enum class Role : std::uint8_t { buyer, seller };

constexpr Role opponent(Role role) { return role == Role::buyer ? Role::seller : Role::buyer; }

constexpr std::string_view to_string(Role role) { return role == Role::buyer ? "buyer" : "seller"; }

inline Role role_from_string(std::string_view text) {
  if (text == "buyer") return Role::buyer;
  if (text == "seller") return Role::seller;
  throw Error(ErrorKind::invalid_config, "unknown role '" + std::string(text) + "'");
}

enum class Term : std::uint8_t {
  price,
  delivery_day,
  down_payment,
  trade_in,
  model,
  color,
  interior,
  warranty,
  service,
  has_accessories,
};

inline constexpr std::size_t kTermCount = 10;
inline constexpr std::size_t kFeatureDim = 22;

enum class TermKind : std::uint8_t { continuous, categorical, binary };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr double width() const { return hi - lo; }
  constexpr bool contains(double v) const { return v >= lo && v <= hi; }
  constexpr double clamp(double v) const { return std::clamp(v, lo, hi); }
  constexpr bool operator==(const Interval&) const = default;
};

namespace detail {
inline constexpr std::array<std::string_view, 3> kModels{"Sedan", "SUV", "Truck"};
inline constexpr std::array<std::string_view, 5> kColors{"White", "Black", "Silver", "Blue", "Red"};
inline constexpr std::array<std::string_view, 3> kInteriors{"Standard", "Premium", "Luxury"};
inline constexpr std::array<std::string_view, 3> kWarranties{"none", "basic", "extended"};
inline constexpr std::array<std::string_view, 3> kServices{"none", "annual", "comprehensive"};
}  // namespace detail

struct TermSchema {
  Term term;
  std::string_view name;  // canonical identifier used in JSON actions and transcripts
  TermKind kind;
  Interval buyer_range;   // continuous only
  Interval seller_range;  // continuous only
  std::span<const std::string_view> options;  // categorical only
  std::size_t feature_offset;

  std::size_t width() const { return kind == TermKind::categorical ? options.size() : 1; }
  const Interval& range(Role role) const { return role == Role::buyer ? buyer_range : seller_range; }
};

// Units: price and trade-in in $k, delivery in days, down payment in percent.
inline const std::array<TermSchema, kTermCount>& schema() {
  static const std::array<TermSchema, kTermCount> terms{{
      {Term::price, "price", TermKind::continuous, {20, 45}, {25, 55}, {}, 0},
      {Term::delivery_day, "delivery_day", TermKind::continuous, {1, 30}, {7, 60}, {}, 1},
      {Term::down_payment, "down_payment", TermKind::continuous, {0, 30}, {15, 40}, {}, 2},
      {Term::trade_in, "trade_in", TermKind::continuous, {5, 15}, {0, 10}, {}, 3},
      {Term::model, "model", TermKind::categorical, {}, {}, detail::kModels, 4},
      {Term::color, "color", TermKind::categorical, {}, {}, detail::kColors, 7},
      {Term::interior, "interior", TermKind::categorical, {}, {}, detail::kInteriors, 12},
      {Term::warranty, "warranty", TermKind::categorical, {}, {}, detail::kWarranties, 15},
      {Term::service, "service", TermKind::categorical, {}, {}, detail::kServices, 18},
      {Term::has_accessories, "has_accessories", TermKind::binary, {}, {}, {}, 21},
  }};
  return terms;
}

inline const TermSchema& schema(Term term) { return schema()[static_cast<std::size_t>(term)]; }

inline constexpr std::array<Term, kTermCount> kAllTerms{
    Term::price,    Term::delivery_day, Term::down_payment, Term::trade_in, Term::model,
    Term::color,    Term::interior,     Term::warranty,     Term::service,  Term::has_accessories};

inline constexpr std::array<Term, 4> kContinuousTerms{Term::price, Term::delivery_day,
                                                      Term::down_payment, Term::trade_in};

inline constexpr std::array<Term, 5> kCategoricalTerms{Term::model, Term::color, Term::interior,
                                                       Term::warranty, Term::service};

constexpr std::size_t index_of(Term term) { return static_cast<std::size_t>(term); }

inline std::string_view to_string(Term term) { return schema(term).name; }

inline std::optional<Term> term_from_name(std::string_view name) {
  for (const auto& t : schema()) {
    if (t.name == name) return t.term;
  }
  return std::nullopt;
}

/// Intersection of both roles' ranges; throws EmptyIntersection when disjoint.
inline Interval joint_bounds(const TermSchema& term) {
  if (term.kind != TermKind::continuous) {
    throw Error(ErrorKind::empty_intersection, std::string(term.name) + " is not continuous");
  }
  const Interval joint{std::max(term.buyer_range.lo, term.seller_range.lo),
                       std::min(term.buyer_range.hi, term.seller_range.hi)};
  if (joint.lo > joint.hi) {
    throw Error(ErrorKind::empty_intersection, std::string(term.name));
  }
  return joint;
}

inline Interval joint_bounds(Term term) { return joint_bounds(schema(term)); }

// ---------------------------------------------------------------------------
// Values, offers, contracts

/// Index into a categorical term's option list.
struct Choice {
  std::size_t index = 0;
  constexpr bool operator==(const Choice&) const = default;
};

using TermValue = std::variant<double, Choice, bool>;

inline std::optional<std::size_t> option_index(Term term, std::string_view option) {
  const auto& opts = schema(term).options;
  for (std::size_t i = 0; i < opts.size(); ++i) {
    if (opts[i] == option) return i;
  }
  return std::nullopt;
}

inline std::string_view option_name(Term term, std::size_t index) {
  const auto& opts = schema(term).options;
  if (index >= opts.size()) throw Error(ErrorKind::value_out_of_range, "option index for " + std::string(schema(term).name));
  return opts[index];
}

/// Possibly-empty assignment of terms, as proposed in one COUNTER.
class PartialOffer {
 public:
  PartialOffer() = default;

  bool has(Term term) const { return values_[index_of(term)].has_value(); }
  const std::optional<TermValue>& get(Term term) const { return values_[index_of(term)]; }
  void set(Term term, TermValue value) { values_[index_of(term)] = value; }
  void erase(Term term) { values_[index_of(term)].reset(); }

  std::size_t size() const {
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(),
                                                  [](const auto& v) { return v.has_value(); }));
  }
  bool empty() const { return size() == 0; }
  bool complete() const { return size() == kTermCount; }

  bool operator==(const PartialOffer&) const = default;

 private:
  std::array<std::optional<TermValue>, kTermCount> values_{};
};

/// Complete assignment of all ten terms.
class Contract {
 public:
  Contract() = default;

  static Contract from_partial(const PartialOffer& offer) {
    if (!offer.complete()) {
      throw Error(ErrorKind::incomplete_contract, "offer assigns " + std::to_string(offer.size()) + " of 10 terms");
    }
    Contract c;
    for (Term t : kAllTerms) c.values_[index_of(t)] = *offer.get(t);
    return c;
  }

  const TermValue& get(Term term) const { return values_[index_of(term)]; }
  void set(Term term, TermValue value) { values_[index_of(term)] = value; }

  double number(Term term) const { return std::get<double>(get(term)); }
  std::size_t choice(Term term) const { return std::get<Choice>(get(term)).index; }
  bool flag(Term term) const { return std::get<bool>(get(term)); }

  PartialOffer to_partial() const {
    PartialOffer p;
    for (Term t : kAllTerms) p.set(t, get(t));
    return p;
  }

  bool operator==(const Contract&) const = default;

 private:
  std::array<TermValue, kTermCount> values_{0.0, 0.0, 0.0, 0.0, Choice{}, Choice{}, Choice{}, Choice{}, Choice{}, false};
};

/// True when every continuous value lies in the intersection of both roles' ranges.
inline bool within_joint_bounds(const Contract& contract) {
  for (Term t : kContinuousTerms) {
    if (!joint_bounds(t).contains(contract.number(t))) return false;
  }
  return true;
}

/// Result of merging a new proposal into the last complete offer.
using ResolvedOffer = std::variant<PartialOffer, Contract>;

/// Unmentioned terms inherit from `last_complete` when one exists.
inline ResolvedOffer merge_autofill(const PartialOffer& proposal, const std::optional<Contract>& last_complete) {
  if (!last_complete) {
    if (proposal.complete()) return Contract::from_partial(proposal);
    return proposal;
  }
  Contract merged = *last_complete;
  for (Term t : kAllTerms) {
    if (const auto& v = proposal.get(t)) merged.set(t, *v);
  }
  return merged;
}

// ---------------------------------------------------------------------------
// Feature encoding
//
// Layout (D = 22):
//   0 price, 1 delivery_day, 2 down_payment, 3 trade_in,
//   4-6 model, 7-11 color, 12-14 interior, 15-17 warranty, 18-20 service,
//   21 has_accessories

struct FeatureVector {
  std::array<double, kFeatureDim> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  auto begin() { return values.begin(); }
  auto end() { return values.end(); }
  auto begin() const { return values.begin(); }
  auto end() const { return values.end(); }
  bool operator==(const FeatureVector&) const = default;
};

inline Term term_of_feature(std::size_t feature) {
  for (const auto& t : schema()) {
    if (feature >= t.feature_offset && feature < t.feature_offset + t.width()) return t.term;
  }
  throw Error(ErrorKind::value_out_of_range, "feature index " + std::to_string(feature));
}

/// Canonical feature identifier: "price", "model:Sedan", "has_accessories".
inline std::string feature_name(std::size_t feature) {
  const auto& t = schema(term_of_feature(feature));
  if (t.kind != TermKind::categorical) return std::string(t.name);
  return std::string(t.name) + ":" + std::string(t.options[feature - t.feature_offset]);
}

inline std::optional<std::size_t> feature_from_name(std::string_view name) {
  for (std::size_t f = 0; f < kFeatureDim; ++f) {
    if (feature_name(f) == name) return f;
  }
  return std::nullopt;
}

inline std::size_t feature_index(Term term, std::size_t option = 0) { return schema(term).feature_offset + option; }

enum class RangePolicy : std::uint8_t { clamp, strict };

inline double normalize_value(Term term, Role role, double value) {
  const Interval& r = schema(term).range(role);
  return (value - r.lo) / r.width();
}

inline double denormalize_value(Term term, Role role, double normalized) {
  const Interval& r = schema(term).range(role);
  return r.lo + normalized * r.width();
}

struct Encoding {
  FeatureVector features;
  std::vector<Term> clamped;  // continuous terms that fell outside the role's range
};

/// Encode with continuous terms rescaled to the role's own range.
inline Encoding encode_checked(const Contract& contract, Role role, RangePolicy policy = RangePolicy::clamp) {
  Encoding out;
  for (const auto& t : schema()) {
    switch (t.kind) {
      case TermKind::continuous: {
        const double v = contract.number(t.term);
        double x = normalize_value(t.term, role, v);
        if (!t.range(role).contains(v)) {
          if (policy == RangePolicy::strict) {
            throw Error(ErrorKind::value_out_of_range,
                        std::string(t.name) + "=" + std::to_string(v) + " outside " + std::string(to_string(role)) +
                            " range");
          }
          x = std::clamp(x, 0.0, 1.0);
          out.clamped.push_back(t.term);
        }
        out.features[t.feature_offset] = x;
        break;
      }
      case TermKind::categorical:
        out.features[t.feature_offset + contract.choice(t.term)] = 1.0;
        break;
      case TermKind::binary:
        out.features[t.feature_offset] = contract.flag(t.term) ? 1.0 : 0.0;
        break;
    }
  }
  return out;
}

inline FeatureVector encode(const Contract& contract, Role role, RangePolicy policy = RangePolicy::clamp) {
  return encode_checked(contract, role, policy).features;
}

/// Normalized value of one feature in a (possibly partial) offer, clamped for continuous terms.
inline std::optional<double> feature_value(const PartialOffer& offer, Role role, std::size_t feature) {
  const Term term = term_of_feature(feature);
  const auto& v = offer.get(term);
  if (!v) return std::nullopt;
  const auto& t = schema(term);
  switch (t.kind) {
    case TermKind::continuous: return std::clamp(normalize_value(term, role, std::get<double>(*v)), 0.0, 1.0);
    case TermKind::categorical: return std::get<Choice>(*v).index == feature - t.feature_offset ? 1.0 : 0.0;
    case TermKind::binary: return std::get<bool>(*v) ? 1.0 : 0.0;
  }
  return std::nullopt;
}

}  // namespace negotiate
