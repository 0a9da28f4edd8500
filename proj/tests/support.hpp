#pragma once

#include <map>
#include <string>
#include <vector>

#include "trustya/game.hpp"

namespace trustya::test {

inline PlayerId P(std::uint32_t v) { return PlayerId{v}; }

inline GameConfig config_for(int n, std::uint64_t seed = 7) {
  GameConfig c;
  c.n_players = n;
  c.seed = seed;
  return c;
}

inline Game make_game(const GameConfig& config) {
  return Game(config, std::vector<std::string>(static_cast<std::size_t>(config.n_players), "human"));
}

inline Game make_game(int n, std::uint64_t seed = 7) { return make_game(config_for(n, seed)); }

// Always returns `card` from the game's card source.
inline void force_card(Game& game, Card card) {
  game.set_card_source([card](Rng&) { return card; });
}

inline std::map<PlayerId, ChoiceAction> all_give_to(const Game& game, PlayerId target) {
  std::map<PlayerId, ChoiceAction> choices;
  for (const auto& p : game.state().players) {
    choices[p.id] = p.id == target ? ChoiceAction::take() : ChoiceAction::give(target);
  }
  return choices;
}

}  // namespace trustya::test
