#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "trustya/config.hpp"
#include "trustya/rng.hpp"
#include "trustya/types.hpp"

namespace trustya {

enum class Rank : std::uint8_t { Ace = 1, Two, Three, Four, Five, Six, Seven, Eight, Nine, Ten, Jack, Queen, King };
enum class Suit : std::uint8_t { Clubs, Diamonds, Hearts, Spades };

struct Card {
  Rank rank = Rank::Ace;
  Suit suit = Suit::Clubs;

  friend bool operator==(const Card&, const Card&) = default;
};

bool is_face(Card card);
std::optional<Face> face_of(Card card);

// A = 1, numeric ranks at face value, J/Q/K from the config.
int card_value(Card card, const GameConfig& config);

// Uniform over the 52-card deck, with replacement: one bounded draw.
Card draw_card(Rng& rng);

// "AS", "10H", "KC"...
std::string to_string(Card card);
Card card_from_string(const std::string& s);

void to_json(nlohmann::json& j, const Card& card);
void from_json(const nlohmann::json& j, Card& card);

}  // namespace trustya
