#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustya/cards.hpp"
#include "trustya/game.hpp"
#include "trustya/types.hpp"

namespace trustya {

// Another player's investment as seen by one of their backers. It omits the
// coins that were available to the investor (a received total).
struct RevealedInvestment {
  Coins invested = 0;
  std::optional<Card> card;
  int value = 0;
  Coins payout = 0;
  Coins penalty = 0;
  bool is_protected = false;

  friend bool operator==(const RevealedInvestment&, const RevealedInvestment&) = default;
};

struct SelfView {
  PlayerId id;
  std::string name;
  Coins savings = 0;
  Coins received_pool = 0;
  Coins received_this_round = 0;
  std::vector<PlayerId> givers;
  PerFace<int> pcards{};
  std::vector<int> emojis;
  std::optional<ChoiceAction> choice;  // funded choice this round
  bool choice_funded = false;
  std::optional<InvestmentOutcome> investment;
  Coins pending_pot = 0;

  friend bool operator==(const SelfView&, const SelfView&) = default;
};

struct OtherView {
  PlayerId id;
  std::string name;
  std::vector<int> emojis;
  // Present only when the viewer gave to this player this round.
  std::optional<RevealedInvestment> investment;
  std::optional<Coins> share_received;

  friend bool operator==(const OtherView&, const OtherView&) = default;
};

// Everything one player is allowed to know about a game.
struct PlayerView {
  int round = 0;
  Phase phase = Phase::Choice;
  Coins central_pile = 0;
  SelfView self;
  std::vector<OtherView> others;

  const OtherView* other(PlayerId id) const;

  friend bool operator==(const PlayerView&, const PlayerView&) = default;
};

// Pure projection; throws GameError(UnknownPlayer) for ids outside the game.
PlayerView view_for(const GameState& state, PlayerId player);

void to_json(nlohmann::json& j, const RevealedInvestment& r);
void to_json(nlohmann::json& j, const SelfView& s);
void to_json(nlohmann::json& j, const OtherView& o);
void to_json(nlohmann::json& j, const PlayerView& v);

}  // namespace trustya
