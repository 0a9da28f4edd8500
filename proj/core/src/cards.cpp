#include "trustya/cards.hpp"

#include <array>
#include <string_view>

namespace trustya {
namespace {

constexpr std::array<std::string_view, 13> kRankNames{"A", "2", "3", "4", "5", "6", "7", "8", "9", "10", "J", "Q", "K"};
constexpr std::array<char, 4> kSuitNames{'C', 'D', 'H', 'S'};

}  // namespace

bool is_face(Card card) { return card.rank >= Rank::Jack; }

std::optional<Face> face_of(Card card) {
  switch (card.rank) {
    case Rank::Jack:
      return Face::Jack;
    case Rank::Queen:
      return Face::Queen;
    case Rank::King:
      return Face::King;
    default:
      return std::nullopt;
  }
}

int card_value(Card card, const GameConfig& config) {
  if (auto face = face_of(card)) return config.face_value(*face);
  return static_cast<int>(card.rank);
}

Card draw_card(Rng& rng) {
  const auto index = static_cast<int>(rng.below(52));
  return Card{static_cast<Rank>(index % 13 + 1), static_cast<Suit>(index / 13)};
}

std::string to_string(Card card) {
  std::string s(kRankNames[static_cast<std::size_t>(card.rank) - 1]);
  s.push_back(kSuitNames[static_cast<std::size_t>(card.suit)]);
  return s;
}

Card card_from_string(const std::string& s) {
  if (s.size() < 2) throw GameError(ErrorCode::CorruptLog, "bad card '" + s + "'");
  const std::string_view rank(s.data(), s.size() - 1);
  const char suit = s.back();
  Card card;
  bool ok = false;
  for (std::size_t r = 0; r < kRankNames.size(); ++r) {
    if (kRankNames[r] == rank) {
      card.rank = static_cast<Rank>(r + 1);
      ok = true;
    }
  }
  bool suit_ok = false;
  for (std::size_t i = 0; i < kSuitNames.size(); ++i) {
    if (kSuitNames[i] == suit) {
      card.suit = static_cast<Suit>(i);
      suit_ok = true;
    }
  }
  if (!ok || !suit_ok) throw GameError(ErrorCode::CorruptLog, "bad card '" + s + "'");
  return card;
}

void to_json(nlohmann::json& j, const Card& card) { j = to_string(card); }
void from_json(const nlohmann::json& j, Card& card) { card = card_from_string(j.get<std::string>()); }

}  // namespace trustya
