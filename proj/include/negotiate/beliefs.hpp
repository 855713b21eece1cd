#pragma once

// Counterparty beliefs and their scoring.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "negotiate/domain.hpp"
#include "negotiate/utility.hpp"

namespace negotiate {

enum class BeliefSource : std::uint8_t { annotation, extractor };

constexpr std::string_view to_string(BeliefSource s) { return s == BeliefSource::annotation ? "annotation" : "extractor"; }

inline BeliefSource belief_source_from_string(std::string_view s) {
  if (s == "annotation") return BeliefSource::annotation;
  if (s == "extractor") return BeliefSource::extractor;
  throw Error(ErrorKind::invalid_config, "unknown belief source '" + std::string(s) + "'");
}

/// "The other party wants feature `feature` to move in `direction`."
struct Belief {
  std::size_t feature = 0;  // component index in the feature layout
  int direction = +1;       // -1 or +1
  int turn_index = 0;
  BeliefSource source = BeliefSource::annotation;

  bool operator==(const Belief&) const = default;
};

/// Distinct beliefs by feature, keeping the latest direction, in first-mention order.
inline std::vector<Belief> latest_by_feature(std::span<const Belief> beliefs) {
  std::vector<Belief> out;
  for (const Belief& b : beliefs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Belief& o) { return o.feature == b.feature; });
    if (it == out.end()) {
      out.push_back(b);
    } else {
      *it = b;
    }
  }
  return out;
}

/// Indices of the k largest-|weight| components; ties resolved by layout order.
inline std::vector<std::size_t> top_k_components(const FeatureVector& weights, std::size_t k) {
  std::vector<std::size_t> idx(kFeatureDim);
  for (std::size_t i = 0; i < kFeatureDim; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(weights[a]) > std::abs(weights[b]); });
  idx.resize(std::min(k, kFeatureDim));
  return idx;
}

inline int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

/// Fraction of distinct cumulative beliefs naming a top-k component of the opponent with the right sign.
/// Empty input has no defined accuracy.
inline std::optional<double> signed_accuracy_at_k(std::span<const Belief> cumulative, const UtilityProfile& opponent,
                                                  std::size_t k) {
  const std::vector<Belief> distinct = latest_by_feature(cumulative);
  if (distinct.empty()) return std::nullopt;
  const std::vector<std::size_t> top = top_k_components(opponent.weights, k);
  std::size_t correct = 0;
  for (const Belief& b : distinct) {
    if (std::find(top.begin(), top.end(), b.feature) != top.end() && b.direction == sign_of(opponent.weights[b.feature]))
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(distinct.size());
}

/// d * (v - 0.5): positive when the offered value sits on the side the opponent is believed to prefer.
inline double alignment_score(int direction, double offered_value_norm) {
  return static_cast<double>(direction) * (offered_value_norm - 0.5);
}

inline double alignment_score(const Belief& belief, double offered_value_norm) {
  return alignment_score(belief.direction, offered_value_norm);
}

}  // namespace negotiate
