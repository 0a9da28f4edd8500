#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustya/types.hpp"

namespace trustya {

namespace event_kind {
inline constexpr std::string_view kGameCreated = "game_created";
inline constexpr std::string_view kRoundStarted = "round_started";
inline constexpr std::string_view kPhaseStarted = "phase_started";
inline constexpr std::string_view kChoiceSubmitted = "choice_submitted";
inline constexpr std::string_view kChoicesResolved = "choices_resolved";
inline constexpr std::string_view kInvestSubmitted = "invest_submitted";
inline constexpr std::string_view kInvestmentResolved = "investment_resolved";
inline constexpr std::string_view kDistributionSubmitted = "distribution_submitted";
inline constexpr std::string_view kDistributionApplied = "distribution_applied";
inline constexpr std::string_view kPurchaseSubmitted = "purchase_submitted";
inline constexpr std::string_view kPurchaseApplied = "purchase_applied";
inline constexpr std::string_view kPcardLost = "pcard_lost";
inline constexpr std::string_view kRoundEnded = "round_ended";
inline constexpr std::string_view kGameOver = "game_over";
}  // namespace event_kind

struct Event {
  int round = 0;
  Phase phase = Phase::Choice;
  std::string kind;
  nlohmann::json payload;
  std::uint64_t rng_draw_index = 0;
  // Running FNV-1a digest over every event up to and including this one.
  std::string chain;

  friend bool operator==(const Event&, const Event&) = default;
};

// Append-only, hash-chained event log serialized as JSON lines.
class EventLog {
 public:
  const Event& append(int round, Phase phase, std::string_view kind, nlohmann::json payload,
                      std::uint64_t rng_draw_index);

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const Event& back() const { return events_.back(); }

  std::vector<std::string> lines() const;
  void write(std::ostream& out) const;
  std::string to_jsonl() const;

 private:
  std::vector<Event> events_;
  std::uint64_t chain_state_ = 0;
};

std::string serialize_event(const Event& event);

// Parses one line. Throws GameError(CorruptLog) on malformed input.
Event parse_event_line(std::string_view line);

struct ParsedLog {
  std::vector<Event> events;
  std::vector<std::string> lines;
  // 1-based line number of the first event whose chain digest does not match.
  std::optional<std::size_t> chain_break;
};

// Parses JSON lines and checks the hash chain. Malformed lines throw
// GameError(CorruptLog) with the 1-based line number.
ParsedLog parse_log(std::istream& in);
ParsedLog read_log_file(const std::string& path);

}  // namespace trustya
