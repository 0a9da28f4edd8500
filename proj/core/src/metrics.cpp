#include "trustya/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "trustya/config.hpp"

namespace trustya::metrics {

double gini(std::span<const Coins> wealths) {
  const auto n = static_cast<std::int64_t>(wealths.size());
  if (n < 2) throw std::invalid_argument("gini needs at least two wealth values");
  __int128 total = 0;
  for (Coins x : wealths) {
    if (x < 0) throw std::invalid_argument("gini needs non-negative wealth values");
    total += x;
  }
  if (total == 0) return 0.0;
  // Pairwise sum via the sorted form: sum_{i<j} (x_j - x_i) = sum_k (2k - n + 1) x_(k).
  std::vector<Coins> sorted(wealths.begin(), wealths.end());
  std::sort(sorted.begin(), sorted.end());
  __int128 half_pairs = 0;
  for (std::int64_t k = 0; k < n; ++k) half_pairs += static_cast<__int128>(2 * k - n + 1) * sorted[k];
  // sum_i sum_j |x_i - x_j| = 2 * half_pairs and N^2 mu = N * total.
  return static_cast<double>(half_pairs) / static_cast<double>(static_cast<__int128>(n) * total);
}

GameSummary summarize(const std::vector<Event>& log) {
  if (log.empty()) throw GameError(ErrorCode::TruncatedLog, "empty log: no rounds recorded");
  const Event& first = log.front();
  if (first.kind != event_kind::kGameCreated) {
    throw GameError(ErrorCode::CorruptLog, "log does not start with game_created");
  }
  GameSummary s;
  const GameConfig config = first.payload.at("config").get<GameConfig>();
  s.config_digest = config_digest(config);
  s.seed = config.seed;
  s.initial_pile = config.initial_pile();
  for (const auto& p : first.payload.at("players")) s.roster.push_back(p.at("kind").get<std::string>());

  int last_complete_round = 0;
  bool over = false;
  for (const auto& e : log) {
    if (e.kind == event_kind::kRoundEnded) {
      RoundPoint point;
      point.round = e.round;
      point.pile = e.payload.at("pile").get<Coins>();
      point.total_savings = e.payload.at("total_savings").get<Coins>();
      point.supporters = e.payload.at("supporters").get<std::vector<int>>();
      s.series.push_back(std::move(point));
      last_complete_round = e.round;
    } else if (e.kind == event_kind::kGameOver) {
      s.end_reason = e.payload.at("reason").get<EndReason>();
      s.rounds = e.payload.at("rounds").get<int>();
      s.final_pile = e.payload.at("pile").get<Coins>();
      s.burned = e.payload.at("burned").get<Coins>();
      s.final_savings = e.payload.at("final_savings").get<std::vector<Coins>>();
      over = true;
    }
  }
  if (!over) {
    throw GameError(ErrorCode::TruncatedLog,
                    "log ends without game_over; last valid round " + std::to_string(last_complete_round));
  }
  s.gini = gini(s.final_savings);
  s.earnings_fraction =
      static_cast<double>(s.initial_pile - s.final_pile) / static_cast<double>(s.initial_pile);
  return s;
}

}  // namespace trustya::metrics
