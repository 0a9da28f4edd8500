#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustya/agents.hpp"
#include "trustya/config.hpp"
#include "trustya/events.hpp"
#include "trustya/game.hpp"
#include "trustya/metrics.hpp"

namespace trustya::sim {

struct RosterEntry {
  agents::BotKind kind = agents::BotKind::Taking;
  int count = 0;

  friend bool operator==(const RosterEntry&, const RosterEntry&) = default;
};

struct SimSpec {
  GameConfig config;
  std::vector<RosterEntry> roster;
  int seeds = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path out_dir;  // empty: nothing written

  // Throws GameError(InvalidConfig) for an unsatisfiable roster or config.
  void validate() const;
  std::vector<agents::BotKind> seats() const;
  std::string roster_label() const;
};

// Object of kind -> count, or array of {kind, count}.
std::vector<RosterEntry> parse_roster(const nlohmann::json& doc);

// Per-seat bot RNG seed, shared by the simulator and the server.
std::uint64_t bot_seed(std::uint64_t game_seed, PlayerId seat);

// A spec document is a GameConfig document plus "roster" (object of
// kind -> count, or array of {kind, count}) and optional "seeds"/"base_seed".
SimSpec parse_spec(const nlohmann::json& doc);
SimSpec load_spec(const std::filesystem::path& path);

struct GameRun {
  EventLog log;
  metrics::GameSummary summary;
};

// Plays one all-bot game to termination; seeds come from config.seed.
GameRun run_game(const GameConfig& config, const std::vector<agents::BotKind>& seats);

// Drives an existing game with one bot per seat until it is over.
void play_to_end(Game& game, std::vector<agents::Bot>& bots);
std::vector<agents::Bot> make_bots(const std::vector<agents::BotKind>& seats, std::uint64_t game_seed);

struct Aggregate {
  std::size_t games = 0;
  double mean_gini = 0.0;
  double stddev_gini = 0.0;
  double mean_earnings = 0.0;
  double stddev_earnings = 0.0;
};

Aggregate aggregate(const std::vector<metrics::GameSummary>& games);

struct BatchResult {
  std::string roster;
  std::vector<metrics::GameSummary> games;
  std::vector<std::string> logs;  // JSONL per game, same order
  Aggregate aggregate;
};

// Runs seeds base_seed .. base_seed + seeds - 1. With an out_dir, writes
// games.csv, aggregate.csv, scatter.csv and logs/game_<seed>.jsonl.
BatchResult run_batch(const SimSpec& spec);

void write_batch(const BatchResult& result, const std::filesystem::path& dir);

// CSV cell formatting shared by every export.
std::string format_real(double x);
std::string games_csv_header();
std::string games_csv_row(const metrics::GameSummary& game, const std::string& roster);

struct Baseline {
  std::string name;
  SimSpec spec;
};

// The nine homogeneous-roster settings on the given config template.
std::vector<Baseline> baseline_specs(const GameConfig& base, int seeds, std::uint64_t base_seed);

struct Divergence {
  std::size_t line = 0;  // 1-based
  std::string reason;
  std::string expected;  // line from the log
  std::string actual;    // line regenerated by the engine
};

struct ReplayReport {
  std::size_t events = 0;
  std::optional<Divergence> divergence;
  std::optional<metrics::GameSummary> summary;
};

// Re-executes the engine on the logged actions and compares every regenerated
// line with the logged one.
ReplayReport replay(const ParsedLog& log);
ReplayReport replay_file(const std::filesystem::path& path);

}  // namespace trustya::sim
