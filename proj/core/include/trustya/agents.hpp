#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "trustya/config.hpp"
#include "trustya/game.hpp"
#include "trustya/rng.hpp"
#include "trustya/view.hpp"

namespace trustya::agents {

enum class BotKind : std::uint8_t {
  BadSharing,
  Taking,
  LuckySharing,
  Smart,
  SmartRandom,
  Smarter,
  SmarterRandom,
  Status,
  SmartStatus,
};

inline constexpr std::array<BotKind, 9> kAllBotKinds{
    BotKind::BadSharing, BotKind::Taking,        BotKind::LuckySharing, BotKind::Smart,       BotKind::SmartRandom,
    BotKind::Smarter,    BotKind::SmarterRandom, BotKind::Status,       BotKind::SmartStatus,
};

std::string_view to_string(BotKind kind);
std::optional<BotKind> bot_kind_from_string(std::string_view name);

// Kinds that coordinate on a single designated leader.
bool is_coordinated(BotKind kind);
bool is_smart_family(BotKind kind);
bool is_status_family(BotKind kind);

inline constexpr double kRandomGiveProbability = 0.05;

// Running record of what each target has returned, built only from what the
// bot's own view shows.
class SmartMemory {
 public:
  SmartMemory() = default;
  SmartMemory(PlayerId self, std::size_t n_players);

  void record(PlayerId target, Coins given, Coins returned);

  // coins returned / coins given; empty until something was given.
  std::optional<double> estimate(PlayerId target) const;
  Coins given(PlayerId target) const;
  Coins returned(PlayerId target) const;
  const std::vector<PlayerId>& untried() const { return untried_; }

 private:
  struct Ledger {
    Coins given = 0;
    Coins returned = 0;
  };
  std::map<PlayerId, Ledger> per_target_;
  std::vector<PlayerId> untried_;
};

struct BotContext {
  BotKind kind = BotKind::Taking;
  PlayerId self;
  std::optional<PlayerId> leader;  // coordinated kinds only
};

bool is_leader(const BotContext& ctx);

ChoiceAction decide_choice(const BotContext& ctx, const PlayerView& view, const SmartMemory& memory, Rng& rng);
Coins decide_invest(const BotContext& ctx, const PlayerView& view, const GameConfig& config);
DistributionPlan decide_distribution(const BotContext& ctx, const PlayerView& view, Coins pot);
PurchaseOrder decide_purchases(const BotContext& ctx, const PlayerView& view, const GameConfig& config);

// Folds the results of this round's give (visible in a post-distribution
// view) into the memory.
void update_memory(SmartMemory& memory, const PlayerView& view, const GameConfig& config);

// A seat played by a policy: context, memory and a private RNG stream.
class Bot {
 public:
  Bot(BotContext ctx, std::size_t n_players, std::uint64_t seed);

  BotKind kind() const { return ctx_.kind; }
  PlayerId id() const { return ctx_.self; }
  const BotContext& context() const { return ctx_; }
  const SmartMemory& memory() const { return memory_; }

  ChoiceAction choose(const PlayerView& view) { return decide_choice(ctx_, view, memory_, rng_); }
  Coins invest(const PlayerView& view, const GameConfig& config) const { return decide_invest(ctx_, view, config); }
  DistributionPlan distribute(const PlayerView& view) const {
    return decide_distribution(ctx_, view, view.self.pending_pot);
  }
  // Updates memory from the view first, then decides.
  PurchaseOrder shop(const PlayerView& view, const GameConfig& config);

 private:
  BotContext ctx_;
  SmartMemory memory_;
  Rng rng_;
};

// Seat contexts in seat order (nullopt seats are humans). A coordinated kind's
// leader is the first seat of that kind.
std::vector<std::optional<BotContext>> assign_roster(const std::vector<std::optional<BotKind>>& seats);

}  // namespace trustya::agents
