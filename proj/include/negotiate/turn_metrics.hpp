#pragma once

// Per-turn strategy metrics: concession toward the counterparty, own gain on
// top priorities, and belief/offer alignment.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "negotiate/beliefs.hpp"
#include "negotiate/domain.hpp"
#include "negotiate/error.hpp"

namespace negotiate {

inline constexpr std::size_t kDefaultOwnGainK = 5;

struct TurnMetrics {
  std::optional<double> concession_c;  // absent for an agent's first complete offer
  std::optional<double> own_gain_g;
  std::optional<double> alignment_mean;  // absent when no mentioned feature appears in the offer
  std::vector<std::size_t> mentioned_features;

  bool operator==(const TurnMetrics&) const = default;
};

/// c = sum over mentioned features of max(0, d_f * (new_f - prev_f)), offers in the actor's own encoding.
inline double concession_eq1(std::span<const Belief> beliefs, const FeatureVector& prev_offer_norm,
                             const FeatureVector& new_offer_norm) {
  double c = 0.0;
  for (const Belief& b : latest_by_feature(beliefs)) {
    const double delta = new_offer_norm[b.feature] - prev_offer_norm[b.feature];
    c += std::max(0.0, static_cast<double>(b.direction) * delta);
  }
  return c;
}

inline double concession_eq1(std::span<const Belief> beliefs, const std::optional<FeatureVector>& prev_offer_norm,
                             const FeatureVector& new_offer_norm) {
  if (!prev_offer_norm) throw Error(ErrorKind::no_prior_offer, "concession needs a previous complete offer");
  return concession_eq1(beliefs, *prev_offer_norm, new_offer_norm);
}

/// g = (1/K) sum over the K largest-|weight| components of sign(w_k) * (new_k - prev_k).
inline double own_gain_eq2(const FeatureVector& weights, const FeatureVector& prev_offer_norm,
                           const FeatureVector& new_offer_norm, std::size_t k = kDefaultOwnGainK) {
  if (k == 0) throw Error(ErrorKind::invalid_config, "K must be >= 1");
  const std::vector<std::size_t> top = top_k_components(weights, k);
  double g = 0.0;
  for (std::size_t f : top) g += sign_of(weights[f]) * (new_offer_norm[f] - prev_offer_norm[f]);
  return g / static_cast<double>(top.size());
}

/// Mean alignment over this turn's beliefs whose feature is assigned in the offer.
inline std::optional<double> turn_alignment(std::span<const Belief> beliefs, const PartialOffer& offer,
                                            Role offering_role) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const Belief& b : latest_by_feature(beliefs)) {
    const auto v = feature_value(offer, offering_role, b.feature);
    if (!v) continue;  // feature absent from the offer
    sum += alignment_score(b, *v);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace negotiate
