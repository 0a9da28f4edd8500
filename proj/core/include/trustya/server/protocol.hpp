#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "trustya/config.hpp"
#include "trustya/game.hpp"
#include "trustya/view.hpp"

namespace trustya::server {

inline constexpr int kProtocolVersion = 1;

enum class MessageKind : std::uint8_t {
  Hello,
  Join,
  Joined,
  GameStarted,
  PhaseStart,
  SubmitChoice,
  SubmitInvest,
  SubmitDistribution,
  SubmitPurchase,
  ActionAck,
  ActionRejected,
  RoundReveal,
  InvestResult,
  ShopCatalog,
  StateView,
  GameOver,
  Error,
};

std::string_view to_string(MessageKind kind);
std::optional<MessageKind> message_kind_from_string(std::string_view name);
bool is_submit(MessageKind kind);

// Wire frame: one JSON object {kind, session, seq, payload} per text message.
struct Envelope {
  MessageKind kind = MessageKind::Hello;
  std::string session;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();
};

std::string serialize(const Envelope& msg);

// Thrown by parse_envelope. `unknown_kind` distinguishes a well-formed frame
// carrying an unrecognised kind (answered with Error) from a malformed one.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string reason, const std::string& what, std::string kind = {})
      : std::runtime_error(what), reason_(std::move(reason)), kind_(std::move(kind)) {}
  const std::string& reason() const noexcept { return reason_; }
  // Raw kind string when it was readable.
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string reason_;
  std::string kind_;
};

Envelope parse_envelope(std::string_view text);

// Decoded Submit payload. Every submission names the round and phase it
// targets; the action member matching the kind is set.
struct Submission {
  MessageKind kind = MessageKind::SubmitChoice;
  int round = 0;
  Phase phase = Phase::Choice;
  std::optional<ChoiceAction> choice;
  std::optional<Coins> amount;
  std::optional<DistributionPlan> plan;
  std::optional<PurchaseOrder> order;
};

// Throws ProtocolError("schema") when the payload does not fit the kind.
Submission parse_submission(MessageKind kind, const nlohmann::json& payload);
nlohmann::json submission_payload(const Submission& submission);

// Server-to-client payload builders. Everything player-specific is taken
// from a PlayerView, so no builder can see more than its recipient may.
nlohmann::json state_view_payload(const PlayerView& view);
nlohmann::json phase_start_payload(const PlayerView& view, std::int64_t timeout_ms, bool must_act);
nlohmann::json round_reveal_payload(const PlayerView& view);
nlohmann::json invest_result_payload(const PlayerView& view);
nlohmann::json shop_catalog_payload(const GameConfig& config, const PlayerView& view);
nlohmann::json game_started_payload(const PlayerView& view, const GameConfig& config);

struct Standing {
  PlayerId id;
  std::string name;
  Coins savings = 0;
};

// The only message that carries other players' savings: final standings,
// sorted by savings descending then id.
nlohmann::json game_over_payload(EndReason reason, int rounds, std::vector<Standing> standings);

}  // namespace trustya::server
