#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustya/types.hpp"

namespace trustya {

struct EmojiItem {
  int id = 0;  // rank, 1 is the cheapest
  Coins price = 0;

  friend bool operator==(const EmojiItem&, const EmojiItem&) = default;
};

std::vector<EmojiItem> default_emoji_catalog();

// Where coins spent in the shop go.
enum class PurchaseSink : std::uint8_t { Pile, Burn };

// Every tunable rule constant of a game. Defaults are the baseline simulation
// parameters; `validate()` enforces the structural invariants.

struct GameConfig {
  int n_players = 10;
  Coins c_ppp = 10000;
  Coins c_give = 2;
  Coins c_take = 2;
  int v_jack = 10;
  int v_queen = 25;
  int v_king = 50;
  int round_limit = 50;
  double termination_prob = 0.10;
  bool hard_stop = false;
  Coins min_invest_threshold = 0;
  PerFace<Coins> pcard_costs{{200, 500, 1000}};
  // Unset means {J: 1, Q: ceil(N/4), K: ceil(N/2)}.
  std::optional<PerFace<int>> pcard_thresholds;
  std::vector<EmojiItem> emoji_catalog = default_emoji_catalog();
  bool equal_price_mode = false;
  std::optional<double> alpha_override;
  PurchaseSink purchase_sink = PurchaseSink::Pile;
  std::uint64_t seed = 0;

  void validate() const;

  double alpha() const;
  Coins initial_pile() const { return c_ppp * n_players; }
  int face_value(Face face) const;
  int pcard_threshold(Face face) const;
  // Effective price; in equal price mode every symbol costs the rank-1 price.
  Coins emoji_price(int emoji_id) const;
  bool has_emoji(int emoji_id) const;
  int cheapest_emoji() const;

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

// Flat key/value document; unknown keys are rejected.
void to_json(nlohmann::json& j, const GameConfig& config);
void from_json(const nlohmann::json& j, GameConfig& config);

GameConfig parse_config(const nlohmann::json& j);

// Stable 64-bit FNV-1a hex digest over the canonical JSON form.
std::string config_digest(const GameConfig& config);

}  // namespace trustya
