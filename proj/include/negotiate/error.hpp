#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace negotiate {

enum class ErrorKind {
  value_out_of_range,
  empty_intersection,
  degenerate_scale,
  empty_feasible_space,
  incomplete_contract,
  out_of_turn,
  still_running,
  no_prior_offer,
  parse_failure,
  backend_unavailable,
  extractor_unavailable,
  insufficient_data,
  replay_divergence,
  invalid_config,
  io_failure,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::value_out_of_range: return "ValueOutOfRange";
    case ErrorKind::empty_intersection: return "EmptyIntersection";
    case ErrorKind::degenerate_scale: return "DegenerateScale";
    case ErrorKind::empty_feasible_space: return "EmptyFeasibleSpace";
    case ErrorKind::incomplete_contract: return "IncompleteContract";
    case ErrorKind::out_of_turn: return "OutOfTurn";
    case ErrorKind::still_running: return "StillRunning";
    case ErrorKind::no_prior_offer: return "NoPriorOffer";
    case ErrorKind::parse_failure: return "ParseFailure";
    case ErrorKind::backend_unavailable: return "BackendUnavailable";
    case ErrorKind::extractor_unavailable: return "ExtractorUnavailable";
    case ErrorKind::insufficient_data: return "InsufficientData";
    case ErrorKind::replay_divergence: return "ReplayDivergence";
    case ErrorKind::invalid_config: return "InvalidConfig";
    case ErrorKind::io_failure: return "IoFailure";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace negotiate
