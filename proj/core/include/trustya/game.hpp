#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustya/cards.hpp"
#include "trustya/config.hpp"
#include "trustya/events.hpp"
#include "trustya/rng.hpp"
#include "trustya/types.hpp"

namespace trustya {

inline constexpr std::string_view kHumanKind = "human";

struct PlayerState {
  PlayerId id;
  std::string name;
  std::string kind;  // "human" or a bot kind name
  Coins savings = 0;
  Coins received_pool = 0;
  PerFace<int> pcards{};
  std::vector<int> emojis;  // sorted multiset of emoji ids
};

struct ChoiceAction {
  enum class Kind : std::uint8_t { Take, Give };

  Kind kind = Kind::Take;
  PlayerId target{};

  static ChoiceAction take() { return {}; }
  static ChoiceAction give(PlayerId target) { return {Kind::Give, target}; }
  bool is_give() const { return kind == Kind::Give; }

  friend bool operator==(const ChoiceAction&, const ChoiceAction&) = default;
};

void to_json(nlohmann::json& j, const ChoiceAction& a);
void from_json(const nlohmann::json& j, ChoiceAction& a);

// Funded actions of one choice phase.
struct RoundLedger {
  int round = 0;
  std::map<PlayerId, PlayerId> gives;  // giver -> receiver
  std::vector<PlayerId> takers;
  std::vector<PlayerId> unfunded;
  std::vector<int> supporters;  // indexed by seat

  int supporters_of(PlayerId p) const;
  std::vector<PlayerId> backers_of(PlayerId p) const;
};

struct InvestmentOutcome {
  PlayerId investor;
  Coins invested = 0;
  Coins available = 0;
  std::optional<Card> card;
  int value = 0;
  Coins payout = 0;
  Coins penalty = 0;
  bool is_protected = false;
  bool capped = false;  // payout limited by the remaining pile

  friend bool operator==(const InvestmentOutcome&, const InvestmentOutcome&) = default;
};

void to_json(nlohmann::json& j, const InvestmentOutcome& o);

struct DistributionPlan {
  std::map<PlayerId, Coins> allocations;

  Coins total() const;

  static DistributionPlan keep_all() { return {}; }
  // floor(pot / backers) to each backer; the investor keeps the remainder.
  static DistributionPlan even_split(Coins pot, const std::vector<PlayerId>& backers);
  // Investor counted as one more share: floor(pot / (backers + 1)) each.
  static DistributionPlan even_split_with_investor(Coins pot, const std::vector<PlayerId>& backers);

  friend bool operator==(const DistributionPlan&, const DistributionPlan&) = default;
};

void to_json(nlohmann::json& j, const DistributionPlan& plan);
void from_json(const nlohmann::json& j, DistributionPlan& plan);

struct PurchaseOrder {
  std::vector<Face> pcards;
  std::vector<int> emojis;

  bool empty() const { return pcards.empty() && emojis.empty(); }
  friend bool operator==(const PurchaseOrder&, const PurchaseOrder&) = default;
};

void to_json(nlohmann::json& j, const PurchaseOrder& order);
void from_json(const nlohmann::json& j, PurchaseOrder& order);

Coins order_price(const PurchaseOrder& order, const GameConfig& config);

using CardSource = std::function<Card(Rng&)>;

struct GameState {
  GameConfig config;
  Coins central_pile = 0;
  Coins burned = 0;
  int round = 1;
  Phase phase = Phase::Choice;
  std::vector<PlayerState> players;

  RoundLedger ledger;
  std::vector<std::optional<InvestmentOutcome>> outcomes;
  std::vector<Coins> pending_pots;
  std::vector<bool> invested;
  std::vector<bool> distributed;
  std::vector<bool> shopped;
  std::map<PlayerId, std::map<PlayerId, Coins>> shares;  // investor -> backer -> coins

  bool end_flag = false;
  std::optional<EndReason> end_reason;

  Rng rng{0};
  CardSource card_source;
  EventLog log;

  const PlayerState& player(PlayerId id) const;
  PlayerState& player(PlayerId id);
  bool has_player(PlayerId id) const { return id.value < players.size(); }
  std::size_t size() const { return players.size(); }

  Coins total_savings() const;
  Coins total_received() const;
  Coins total_pending() const;
  // pile + savings + received + pending pots + burned; constant over a game.
  Coins conserved_total() const;
};

struct Termination {
  bool over = false;
  EndReason reason = EndReason::PileEmpty;
};

// Drops one copy of each held P-card whose supporter threshold is not met.
std::vector<std::pair<PlayerId, Face>> enforce_pcard_maintenance(GameState& state, const RoundLedger& ledger);

// End-of-round check; draws once from the game RNG in overtime.
Termination check_termination(GameState& state);

// Display name: three lowercase letters followed by three digits.
std::string random_display_name(Rng& rng);

// Rule engine for one game. Every operation validates before mutating, so a
// rejected call (GameError) leaves the state untouched.
class Game {
 public:
  // `seat_kinds[i]` is "human" or a bot kind name; it is only recorded.
  Game(GameConfig config, std::vector<std::string> seat_kinds);

  const GameState& state() const { return state_; }
  const GameConfig& config() const { return state_.config; }
  const EventLog& log() const { return state_.log; }
  Phase phase() const { return state_.phase; }
  int round() const { return state_.round; }
  bool over() const { return state_.phase == Phase::Over; }
  std::size_t size() const { return state_.players.size(); }

  // Validation without mutation; used at submission time by the server.
  void validate_choice(PlayerId player, const ChoiceAction& action) const;
  void validate_investment(PlayerId investor, Coins amount) const;
  void validate_distribution(PlayerId investor, const DistributionPlan& plan) const;
  void validate_purchases(PlayerId player, const PurchaseOrder& order) const;

  // Players whose input the current phase waits for.
  std::vector<PlayerId> pending_actors() const;
  bool needs_action(PlayerId player) const;

  // Missing choices default to Take.
  const RoundLedger& resolve_choice_phase(const std::map<PlayerId, ChoiceAction>& choices);

  InvestmentOutcome resolve_investment(PlayerId investor, Coins amount);
  // Defaults: invest everything (nothing if below the minimum threshold).
  void close_invest_phase();

  void apply_distribution(PlayerId investor, const DistributionPlan& plan);
  // Default: even split among backers.
  void close_distribute_phase();

  void apply_purchases(PlayerId player, const PurchaseOrder& order);
  // Runs P-card maintenance and the termination check.
  Termination close_shop_phase();

  // Closes whichever of invest / distribute / shop is current.
  void close_phase();

  void abort();

  Coins default_investment(PlayerId investor) const;
  DistributionPlan default_distribution(PlayerId investor) const;

  void set_card_source(CardSource source) { state_.card_source = std::move(source); }
  GameState& state_for_testing() { return state_; }

 private:
  void emit(std::string_view kind, nlohmann::json payload);
  void require_phase(Phase phase) const;
  void require_player(PlayerId player) const;
  void do_investment(PlayerId investor, Coins amount, bool defaulted);
  void do_distribution(PlayerId investor, const DistributionPlan& plan, bool defaulted);
  void start_round();
  void finish(EndReason reason);

  GameState state_;
};

}  // namespace trustya
