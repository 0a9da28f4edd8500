#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trustya/events.hpp"
#include "trustya/types.hpp"

namespace trustya::metrics {

// Relative mean absolute difference: sum_i sum_j |x_i - x_j| / (2 N^2 mu).
// Ranges over [0, 1 - 1/N]; all-zero input gives 0. Requires N >= 2 and
// non-negative wealths (std::invalid_argument otherwise).
double gini(std::span<const Coins> wealths);

struct RoundPoint {
  int round = 0;
  Coins pile = 0;
  Coins total_savings = 0;
  std::vector<int> supporters;
};

struct GameSummary {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<std::string> roster;  // seat kinds
  std::vector<Coins> final_savings;
  double gini = 0.0;
  double earnings_fraction = 0.0;
  int rounds = 0;
  EndReason end_reason = EndReason::PileEmpty;
  Coins initial_pile = 0;
  Coins final_pile = 0;
  Coins burned = 0;
  std::vector<RoundPoint> series;
};

// Computed from the event log alone. A log without a game_over event throws
// GameError(TruncatedLog) naming the last complete round.
GameSummary summarize(const std::vector<Event>& log);

}  // namespace trustya::metrics
