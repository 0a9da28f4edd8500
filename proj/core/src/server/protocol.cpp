#include "trustya/server/protocol.hpp"

#include <algorithm>
#include <array>

namespace trustya::server {
namespace {

constexpr std::array<std::string_view, 17> kKindNames{
    "Hello",        "Join",         "Joined",         "GameStarted", "PhaseStart",    "SubmitChoice",
    "SubmitInvest", "SubmitDistribution", "SubmitPurchase", "ActionAck", "ActionRejected", "RoundReveal",
    "InvestResult", "ShopCatalog",  "StateView",      "GameOver",    "Error"};

[[noreturn]] void schema(const std::string& what) { throw ProtocolError("schema", what); }

Phase phase_of(MessageKind kind) {
  switch (kind) {
    case MessageKind::SubmitChoice:
      return Phase::Choice;
    case MessageKind::SubmitInvest:
      return Phase::Invest;
    case MessageKind::SubmitDistribution:
      return Phase::Distribute;
    default:
      return Phase::Shop;
  }
}

}  // namespace

std::string_view to_string(MessageKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<MessageKind> message_kind_from_string(std::string_view name) {
  auto it = std::find(kKindNames.begin(), kKindNames.end(), name);
  if (it == kKindNames.end()) return std::nullopt;
  return static_cast<MessageKind>(it - kKindNames.begin());
}

bool is_submit(MessageKind kind) {
  return kind == MessageKind::SubmitChoice || kind == MessageKind::SubmitInvest ||
         kind == MessageKind::SubmitDistribution || kind == MessageKind::SubmitPurchase;
}

std::string serialize(const Envelope& msg) {
  // A brace-initialized payload is null; it goes on the wire as {}.
  const nlohmann::json payload = msg.payload.is_null() ? nlohmann::json::object() : msg.payload;
  nlohmann::json j{{"kind", to_string(msg.kind)}, {"session", msg.session}, {"seq", msg.seq}, {"payload", payload}};
  return j.dump();
}

Envelope parse_envelope(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) schema("frame is not a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) schema("frame lacks a string 'kind'");
  const auto kind_name = j["kind"].get<std::string>();
  const auto kind = message_kind_from_string(kind_name);
  if (!kind) throw ProtocolError("unknown_kind", "unknown message kind '" + kind_name + "'", kind_name);

  Envelope out;
  out.kind = *kind;
  if (j.contains("session")) {
    if (!j["session"].is_string()) throw ProtocolError("schema", "'session' must be a string", kind_name);
    out.session = j["session"].get<std::string>();
  }
  if (j.contains("seq")) {
    if (!j["seq"].is_number_unsigned()) throw ProtocolError("schema", "'seq' must be a non-negative integer", kind_name);
    out.seq = j["seq"].get<std::uint64_t>();
  }
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) throw ProtocolError("schema", "'payload' must be an object", kind_name);
    out.payload = j["payload"];
  }
  return out;
}

Submission parse_submission(MessageKind kind, const nlohmann::json& payload) {
  if (!is_submit(kind)) schema("not a submission kind");
  Submission s;
  s.kind = kind;
  try {
    s.round = payload.at("round").get<int>();
    s.phase = payload.at("phase").get<Phase>();
    switch (kind) {
      case MessageKind::SubmitChoice:
        s.choice = payload.at("choice").get<ChoiceAction>();
        break;
      case MessageKind::SubmitInvest:
        if (!payload.at("amount").is_number_integer()) schema("'amount' must be an integer");
        s.amount = payload.at("amount").get<Coins>();
        break;
      case MessageKind::SubmitDistribution:
        s.plan = payload.at("allocations").get<DistributionPlan>();
        break;
      default:
        s.order = payload.at("order").get<PurchaseOrder>();
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    schema(std::string("bad ") + std::string(to_string(kind)) + " payload: " + e.what());
  } catch (const GameError& e) {
    schema(std::string("bad ") + std::string(to_string(kind)) + " payload: " + e.what());
  }
  if (s.phase != phase_of(kind)) schema(std::string(to_string(kind)) + " must target its own phase");
  return s;
}

nlohmann::json submission_payload(const Submission& s) {
  nlohmann::json j{{"round", s.round}, {"phase", s.phase}};
  if (s.choice) j["choice"] = *s.choice;
  if (s.amount) j["amount"] = *s.amount;
  if (s.plan) j["allocations"] = *s.plan;
  if (s.order) j["order"] = *s.order;
  return j;
}

nlohmann::json state_view_payload(const PlayerView& view) { return {{"view", view}}; }

nlohmann::json phase_start_payload(const PlayerView& view, std::int64_t timeout_ms, bool must_act) {
  return {{"round", view.round},
          {"phase", view.phase},
          {"timeout_ms", timeout_ms},
          {"must_act", must_act},
          {"central_pile", view.central_pile}};
}

nlohmann::json round_reveal_payload(const PlayerView& view) {
  nlohmann::json choice = view.self.choice ? nlohmann::json(*view.self.choice) : nlohmann::json(nullptr);
  return {{"round", view.round},
          {"central_pile", view.central_pile},
          {"choice", choice},
          {"choice_funded", view.self.choice_funded},
          {"givers", view.self.givers},
          {"received_this_round", view.self.received_this_round},
          {"received_pool", view.self.received_pool}};
}

nlohmann::json invest_result_payload(const PlayerView& view) {
  auto backed = nlohmann::json::array();
  for (const auto& other : view.others) {
    if (other.investment) backed.push_back({{"id", other.id}, {"name", other.name}, {"investment", *other.investment}});
  }
  nlohmann::json self = view.self.investment ? nlohmann::json(*view.self.investment) : nlohmann::json(nullptr);
  return {{"round", view.round},
          {"central_pile", view.central_pile},
          {"investment", self},
          {"pending_pot", view.self.pending_pot},
          {"backed", backed}};
}

nlohmann::json shop_catalog_payload(const GameConfig& config, const PlayerView& view) {
  auto pcards = nlohmann::json::array();
  for (Face f : kFaces) {
    pcards.push_back({{"face", f},
                      {"price", config.pcard_costs[f]},
                      {"threshold", config.pcard_threshold(f)},
                      {"owned", view.self.pcards[f]}});
  }
  auto emojis = nlohmann::json::array();
  for (const auto& item : config.emoji_catalog) {
    const bool owned = std::find(view.self.emojis.begin(), view.self.emojis.end(), item.id) != view.self.emojis.end();
    emojis.push_back({{"id", item.id}, {"price", config.emoji_price(item.id)}, {"owned", owned}});
  }
  return {{"round", view.round}, {"savings", view.self.savings}, {"pcards", pcards}, {"emojis", emojis}};
}

nlohmann::json game_started_payload(const PlayerView& view, const GameConfig& config) {
  auto players = nlohmann::json::array();
  players.push_back({{"id", view.self.id}, {"name", view.self.name}});
  for (const auto& other : view.others) players.push_back({{"id", other.id}, {"name", other.name}});
  std::sort(players.begin(), players.end(),
            [](const nlohmann::json& a, const nlohmann::json& b) { return a["id"] < b["id"]; });
  nlohmann::json rules = config;
  // The seed would let a client predict every card.
  rules.erase("seed");
  return {{"you", view.self.id}, {"players", players}, {"config", rules}};
}

nlohmann::json game_over_payload(EndReason reason, int rounds, std::vector<Standing> standings) {
  std::sort(standings.begin(), standings.end(), [](const Standing& a, const Standing& b) {
    return a.savings != b.savings ? a.savings > b.savings : a.id < b.id;
  });
  auto rows = nlohmann::json::array();
  for (const auto& s : standings) rows.push_back({{"id", s.id}, {"name", s.name}, {"savings", s.savings}});
  return {{"reason", reason}, {"rounds", rounds}, {"standings", rows}};
}

}  // namespace trustya::server
