#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace trustya {

using Coins = std::int64_t;

// Seat index within a game; stable for the lifetime of the game.
struct PlayerId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(PlayerId, PlayerId) = default;
};

enum class Phase : std::uint8_t { Choice, Invest, Distribute, Shop, Over };

enum class Face : std::uint8_t { Jack, Queen, King };

inline constexpr std::array<Face, 3> kFaces{Face::Jack, Face::Queen, Face::King};

template <class T>
struct PerFace {
  std::array<T, 3> values{};

  constexpr T& operator[](Face f) { return values[static_cast<std::size_t>(f)]; }
  constexpr const T& operator[](Face f) const { return values[static_cast<std::size_t>(f)]; }

  friend constexpr bool operator==(const PerFace&, const PerFace&) = default;
};

enum class EndReason : std::uint8_t { PileEmpty, HardStop, Overtime, Aborted };

enum class ErrorCode : std::uint8_t {
  InvalidConfig,
  WrongPhase,
  UnknownPlayer,
  InvalidTarget,
  InvalidAmount,
  InvalidPlan,
  InsufficientFunds,
  UnknownItem,
  DuplicateSubmission,
  CorruptLog,
  TruncatedLog,
};

class GameError : public std::runtime_error {
 public:
  GameError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

std::string_view to_string(Phase phase);
std::string_view to_string(Face face);
std::string_view to_string(EndReason reason);
std::string_view to_string(ErrorCode code);

Phase phase_from_string(std::string_view s);
Face face_from_string(std::string_view s);
EndReason end_reason_from_string(std::string_view s);

void to_json(nlohmann::json& j, PlayerId id);
void from_json(const nlohmann::json& j, PlayerId& id);
void to_json(nlohmann::json& j, Phase phase);
void from_json(const nlohmann::json& j, Phase& phase);
void to_json(nlohmann::json& j, Face face);
void from_json(const nlohmann::json& j, Face& face);
void to_json(nlohmann::json& j, EndReason reason);
void from_json(const nlohmann::json& j, EndReason& reason);

template <class T>
void to_json(nlohmann::json& j, const PerFace<T>& per_face) {
  j = nlohmann::json::object();
  for (Face f : kFaces) j[std::string(to_string(f))] = per_face[f];
}

template <class T>
void from_json(const nlohmann::json& j, PerFace<T>& per_face) {
  if (!j.is_object() || j.size() != kFaces.size()) {
    throw GameError(ErrorCode::InvalidConfig, "expected an object with keys J, Q, K");
  }
  for (Face f : kFaces) j.at(std::string(to_string(f))).get_to(per_face[f]);
}

}  // namespace trustya

template <>
struct std::hash<trustya::PlayerId> {
  std::size_t operator()(trustya::PlayerId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
