#pragma once

// Private linear utilities: sampling, evaluation, reservation values and tiers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "negotiate/domain.hpp"
#include "negotiate/error.hpp"

namespace negotiate {

// Platform-independent draws on top of std::mt19937_64 (whose output sequence is
// fixed by the standard, unlike the std distributions).
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

inline constexpr double kMagnitudeLo = 0.05;
inline constexpr double kMagnitudeHi = 1.0;

/// Sign of a continuous or binary term's weight for a role.
constexpr int weight_sign(Role role, Term term) {
  int buyer_sign = 0;
  switch (term) {
    case Term::price:
    case Term::delivery_day:
    case Term::down_payment: buyer_sign = -1; break;
    case Term::trade_in:
    case Term::has_accessories: buyer_sign = +1; break;
    default: return 0;
  }
  return role == Role::buyer ? buyer_sign : -buyer_sign;
}

enum class Tier : std::uint8_t { critical, important, flexible };

constexpr std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::critical: return "CRITICAL";
    case Tier::important: return "IMPORTANT";
    case Tier::flexible: return "FLEXIBLE";
  }
  return "";
}

inline Tier tier_from_string(std::string_view s) {
  if (s == "CRITICAL") return Tier::critical;
  if (s == "IMPORTANT") return Tier::important;
  if (s == "FLEXIBLE") return Tier::flexible;
  throw Error(ErrorKind::invalid_config, "unknown tier '" + std::string(s) + "'");
}

inline constexpr double kCriticalThreshold = 0.6;
inline constexpr double kImportantThreshold = 0.3;

struct TierEntry {
  Term group;
  Tier tier;
  double relative;  // |w_group| / max |w_group|; never rendered into prompts
  int direction;    // sign of the group weight; +1 for categorical (choose the preferred option)
  std::optional<std::size_t> option;  // preferred option for categorical groups

  bool operator==(const TierEntry&) const = default;
};

struct UtilityProfile {
  Role role = Role::buyer;
  FeatureVector weights;
  std::array<std::optional<std::size_t>, kTermCount> preferred{};  // categorical terms only
  double reservation = 0.0;
  double best_utility = 0.0;
  Contract worst_contract;
  Contract best_contract;
  std::vector<TierEntry> tiers;

  double weight(Term term, std::size_t option = 0) const { return weights[feature_index(term, option)]; }
};

inline double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kFeatureDim; ++i) s += a[i] * b[i];
  return s;
}

/// Raw utility under the profile's own (clamped) encoding.
inline double utility(const UtilityProfile& profile, const Contract& contract) {
  return dot(profile.weights, encode(contract, profile.role, RangePolicy::clamp));
}

/// Group weight used for tiering: the continuous/binary weight, or the preferred option's weight.
inline double group_weight(const FeatureVector& weights, Term term) {
  const auto& t = schema(term);
  if (t.kind != TermKind::categorical) return weights[t.feature_offset];
  double best = weights[t.feature_offset];
  for (std::size_t o = 1; o < t.width(); ++o) best = std::max(best, weights[t.feature_offset + o]);
  return best;
}

inline std::optional<std::size_t> preferred_option(const FeatureVector& weights, Term term) {
  const auto& t = schema(term);
  std::optional<std::size_t> best;
  for (std::size_t o = 0; o < t.width(); ++o) {
    const double w = weights[t.feature_offset + o];
    if (w > 0.0 && (!best || w > weights[t.feature_offset + *best])) best = o;
  }
  return best;
}

/// Best and worst contracts inside the role's own ranges, built term by term.
inline std::pair<Contract, Contract> extreme_contracts(Role role, const FeatureVector& weights) {
  Contract worst, best;
  for (const auto& t : schema()) {
    switch (t.kind) {
      case TermKind::continuous: {
        const Interval& r = t.range(role);
        const bool increasing = weights[t.feature_offset] > 0.0;
        best.set(t.term, increasing ? r.hi : r.lo);
        worst.set(t.term, increasing ? r.lo : r.hi);
        break;
      }
      case TermKind::categorical: {
        std::size_t hi = 0, lo = 0;
        for (std::size_t o = 1; o < t.width(); ++o) {
          if (weights[t.feature_offset + o] > weights[t.feature_offset + hi]) hi = o;
          if (weights[t.feature_offset + o] < weights[t.feature_offset + lo]) lo = o;
        }
        best.set(t.term, Choice{hi});
        worst.set(t.term, Choice{lo});
        break;
      }
      case TermKind::binary: {
        const bool increasing = weights[t.feature_offset] > 0.0;
        best.set(t.term, increasing);
        worst.set(t.term, !increasing);
        break;
      }
    }
  }
  return {worst, best};
}

/// Tier listing ordered CRITICAL, IMPORTANT, FLEXIBLE, each by descending relative magnitude.
inline std::vector<TierEntry> tier_summary(const FeatureVector& weights) {
  double max_mag = 0.0;
  for (Term t : kAllTerms) max_mag = std::max(max_mag, std::abs(group_weight(weights, t)));
  std::vector<TierEntry> out;
  if (max_mag <= 0.0) return out;
  for (Term t : kAllTerms) {
    const double w = group_weight(weights, t);
    if (w == 0.0) continue;
    const double r = std::abs(w) / max_mag;
    const Tier tier = r > kCriticalThreshold ? Tier::critical : r > kImportantThreshold ? Tier::important : Tier::flexible;
    const bool categorical = schema(t).kind == TermKind::categorical;
    out.push_back({t, tier, r, categorical ? +1 : (w > 0 ? +1 : -1),
                   categorical ? preferred_option(weights, t) : std::nullopt});
  }
  std::stable_sort(out.begin(), out.end(), [](const TierEntry& a, const TierEntry& b) {
    if (a.tier != b.tier) return a.tier < b.tier;
    return a.relative > b.relative;
  });
  return out;
}

inline std::vector<TierEntry> tier_summary(const UtilityProfile& profile) { return tier_summary(profile.weights); }

/// Utilities of the worst and best feasible contracts in the role's own ranges.
inline std::pair<double, double> reservation_and_scale(const UtilityProfile& profile) {
  return {utility(profile, profile.worst_contract), utility(profile, profile.best_contract)};
}

/// Complete a profile from its weight vector.
inline UtilityProfile make_profile(Role role, const FeatureVector& weights) {
  UtilityProfile p;
  p.role = role;
  p.weights = weights;
  for (Term t : kCategoricalTerms) p.preferred[index_of(t)] = preferred_option(weights, t);
  std::tie(p.worst_contract, p.best_contract) = extreme_contracts(role, weights);
  std::tie(p.reservation, p.best_utility) = reservation_and_scale(p);
  p.tiers = tier_summary(weights);
  return p;
}

/// Draw one magnitude per feature group from U(0.05, 1), apply role signs and
/// contrastive categorical weights, then L1-normalize.
inline UtilityProfile sample_profile(Role role, Rng& rng) {
  FeatureVector w;
  for (const auto& t : schema()) {
    const double mag = uniform_real(rng, kMagnitudeLo, kMagnitudeHi);
    if (t.kind == TermKind::categorical) {
      const std::size_t preferred = uniform_index(rng, t.width());
      const double share = -mag / static_cast<double>(t.width() - 1);
      for (std::size_t o = 0; o < t.width(); ++o) w[t.feature_offset + o] = o == preferred ? mag : share;
    } else {
      w[t.feature_offset] = weight_sign(role, t.term) * mag;
    }
  }
  const double l1 = std::accumulate(w.values.begin(), w.values.end(), 0.0,
                                    [](double acc, double x) { return acc + std::abs(x); });
  for (double& x : w.values) x /= l1;
  return make_profile(role, w);
}

inline constexpr double kMinScale = 1e-12;

/// (U - d) / (max U - d); not clamped.
inline double normalized_utility(const UtilityProfile& profile, const Contract& contract) {
  const double scale = profile.best_utility - profile.reservation;
  if (scale < kMinScale) throw Error(ErrorKind::degenerate_scale, "best utility equals reservation");
  return (utility(profile, contract) - profile.reservation) / scale;
}

}  // namespace negotiate
