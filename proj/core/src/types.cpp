#include "trustya/types.hpp"

#include <algorithm>

namespace trustya {
namespace {

constexpr std::array<std::string_view, 5> kPhaseNames{"choice", "invest", "distribute", "shop", "over"};
constexpr std::array<std::string_view, 3> kFaceNames{"J", "Q", "K"};
constexpr std::array<std::string_view, 4> kEndReasonNames{"PileEmpty", "HardStop", "Overtime", "Aborted"};
constexpr std::array<std::string_view, 11> kErrorNames{
    "invalid_config", "wrong_phase",         "unknown_player", "invalid_target", "invalid_amount", "invalid_plan",
    "insufficient_funds", "unknown_item", "duplicate_submission", "corrupt_log", "truncated_log"};

template <class Enum, std::size_t N>
Enum lookup(const std::array<std::string_view, N>& names, std::string_view s, std::string_view what) {
  auto it = std::find(names.begin(), names.end(), s);
  if (it == names.end()) {
    throw GameError(ErrorCode::InvalidConfig, "unknown " + std::string(what) + " '" + std::string(s) + "'");
  }
  return static_cast<Enum>(it - names.begin());
}

}  // namespace

std::string_view to_string(Phase phase) { return kPhaseNames.at(static_cast<std::size_t>(phase)); }
std::string_view to_string(Face face) { return kFaceNames.at(static_cast<std::size_t>(face)); }
std::string_view to_string(EndReason reason) { return kEndReasonNames.at(static_cast<std::size_t>(reason)); }
std::string_view to_string(ErrorCode code) { return kErrorNames.at(static_cast<std::size_t>(code)); }

Phase phase_from_string(std::string_view s) { return lookup<Phase>(kPhaseNames, s, "phase"); }
Face face_from_string(std::string_view s) { return lookup<Face>(kFaceNames, s, "P-card face"); }
EndReason end_reason_from_string(std::string_view s) { return lookup<EndReason>(kEndReasonNames, s, "end reason"); }

void to_json(nlohmann::json& j, PlayerId id) { j = id.value; }
void from_json(const nlohmann::json& j, PlayerId& id) { id.value = j.get<std::uint32_t>(); }
void to_json(nlohmann::json& j, Phase phase) { j = std::string(to_string(phase)); }
void from_json(const nlohmann::json& j, Phase& phase) { phase = phase_from_string(j.get<std::string>()); }
void to_json(nlohmann::json& j, Face face) { j = std::string(to_string(face)); }
void from_json(const nlohmann::json& j, Face& face) { face = face_from_string(j.get<std::string>()); }
void to_json(nlohmann::json& j, EndReason reason) { j = std::string(to_string(reason)); }
void from_json(const nlohmann::json& j, EndReason& reason) { reason = end_reason_from_string(j.get<std::string>()); }

}  // namespace trustya
