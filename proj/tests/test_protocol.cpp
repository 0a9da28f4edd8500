#include <gtest/gtest.h>

#include "leak_check.hpp"
#include "support.hpp"
#include "trustya/server/protocol.hpp"

namespace trustya::server {
namespace {

using test::P;

ProtocolError parse_error(std::string_view text) {
  try {
    parse_envelope(text);
  } catch (const ProtocolError& e) {
    return e;
  }
  ADD_FAILURE() << "parsed " << text;
  return ProtocolError("", "");
}

ProtocolError submission_error(MessageKind kind, const char* payload) {
  try {
    parse_submission(kind, nlohmann::json::parse(payload));
  } catch (const ProtocolError& e) {
    return e;
  }
  ADD_FAILURE() << "accepted " << payload;
  return ProtocolError("", "");
}

TEST(Kinds, RoundTripAllSeventeen) {
  for (int k = 0; k < 17; ++k) {
    const auto kind = static_cast<MessageKind>(k);
    EXPECT_EQ(message_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_FALSE(message_kind_from_string("hello").has_value());
  EXPECT_TRUE(is_submit(MessageKind::SubmitPurchase));
  EXPECT_FALSE(is_submit(MessageKind::ActionAck));
}

TEST(Envelope, SerializeParseRoundTrip) {
  Envelope e{MessageKind::SubmitInvest, "abc123", 42, {{"round", 3}}};
  const auto text = serialize(e);
  EXPECT_EQ(text, R"({"kind":"SubmitInvest","payload":{"round":3},"seq":42,"session":"abc123"})");
  const auto back = parse_envelope(text);
  EXPECT_EQ(back.kind, e.kind);
  EXPECT_EQ(back.session, e.session);
  EXPECT_EQ(back.seq, 42u);
  EXPECT_EQ(back.payload, e.payload);
}

TEST(Envelope, NullPayloadIsSentAsEmptyObject) {
  const auto text = serialize(Envelope{MessageKind::Join, "s", 1, {}});
  EXPECT_EQ(parse_envelope(text).payload, nlohmann::json::object());
}

TEST(Envelope, OptionalFieldsDefault) {
  const auto e = parse_envelope(R"({"kind":"Hello"})");
  EXPECT_EQ(e.kind, MessageKind::Hello);
  EXPECT_TRUE(e.session.empty());
  EXPECT_EQ(e.seq, 0u);
  EXPECT_TRUE(e.payload.is_object());
}

TEST(Envelope, MalformedFramesAreSchemaErrors) {
  for (const char* bad : {"not json", "[1,2]", R"({"seq":1})", R"({"kind":7})", R"({"kind":"Join","seq":-1})",
                          R"({"kind":"Join","seq":"1"})", R"({"kind":"Join","session":5})",
                          R"({"kind":"Join","payload":[]})"}) {
    EXPECT_EQ(parse_error(bad).reason(), "schema") << bad;
  }
}

TEST(Envelope, UnknownKindIsDistinguished) {
  const auto e = parse_error(R"({"kind":"Teleport","seq":1})");
  EXPECT_EQ(e.reason(), "unknown_kind");
  EXPECT_EQ(e.kind(), "Teleport");
}

TEST(Submission, ParsesEachKind) {
  auto c = parse_submission(MessageKind::SubmitChoice,
                            nlohmann::json::parse(R"({"round":2,"phase":"choice","choice":{"action":"give","target":3}})"));
  EXPECT_EQ(c.round, 2);
  EXPECT_EQ(*c.choice, ChoiceAction::give(P(3)));
  auto i = parse_submission(MessageKind::SubmitInvest, nlohmann::json::parse(R"({"round":2,"phase":"invest","amount":8})"));
  EXPECT_EQ(*i.amount, 8);
  auto d = parse_submission(MessageKind::SubmitDistribution,
                            nlohmann::json::parse(R"({"round":2,"phase":"distribute","allocations":[[1,5],[4,0]]})"));
  EXPECT_EQ(d.plan->allocations.at(P(1)), 5);
  EXPECT_EQ(d.plan->allocations.size(), 2u);
  auto s = parse_submission(MessageKind::SubmitPurchase,
                            nlohmann::json::parse(R"({"round":2,"phase":"shop","order":{"pcards":["J"],"emojis":[2]}})"));
  EXPECT_EQ(s.order->pcards, std::vector<Face>{Face::Jack});
  EXPECT_EQ(s.order->emojis, std::vector<int>{2});

  for (const auto& sub : {c, i, d, s}) {
    const auto again = parse_submission(sub.kind, submission_payload(sub));
    EXPECT_EQ(again.choice, sub.choice);
    EXPECT_EQ(again.amount, sub.amount);
    EXPECT_EQ(again.plan, sub.plan);
    EXPECT_EQ(again.order, sub.order);
  }
}

TEST(Submission, RejectsMalformedPayloads) {
  EXPECT_EQ(submission_error(MessageKind::SubmitChoice, R"({"phase":"choice","choice":{"action":"take"}})").reason(),
            "schema");
  submission_error(MessageKind::SubmitChoice, R"({"round":1,"phase":"choice","choice":{"action":"steal"}})");
  submission_error(MessageKind::SubmitChoice, R"({"round":1,"phase":"invest","choice":{"action":"take"}})");
  submission_error(MessageKind::SubmitChoice, R"({"round":1,"phase":"dance","choice":{"action":"take"}})");
  submission_error(MessageKind::SubmitInvest, R"({"round":1,"phase":"invest","amount":2.5})");
  submission_error(MessageKind::SubmitInvest, R"({"round":1,"phase":"invest","amount":"4"})");
  submission_error(MessageKind::SubmitDistribution, R"({"round":1,"phase":"distribute","allocations":{"1":2}})");
  submission_error(MessageKind::SubmitDistribution, R"({"round":1,"phase":"distribute","allocations":[[1,2],[1,3]]})");
  submission_error(MessageKind::SubmitPurchase, R"({"round":1,"phase":"shop","order":{"pcards":["A"]}})");
  EXPECT_THROW(parse_submission(MessageKind::Join, nlohmann::json::object()), ProtocolError);
}

class Builders : public ::testing::Test {
 protected:
  void SetUp() override {
    game_ = std::make_unique<Game>(test::make_game(4, 11));
    test::force_card(*game_, Card{Rank::Six, Suit::Hearts});
    game_->resolve_choice_phase(test::all_give_to(*game_, P(0)));
  }
  std::unique_ptr<Game> game_;
};

TEST_F(Builders, RoundRevealCarriesOnlyOwnChoiceData) {
  const auto v0 = view_for(game_->state(), P(0));
  const auto r0 = round_reveal_payload(v0);
  EXPECT_EQ(r0["givers"], (nlohmann::json{1, 2, 3}));
  EXPECT_EQ(r0["received_this_round"], 6);
  const auto r2 = round_reveal_payload(view_for(game_->state(), P(2)));
  EXPECT_EQ(r2["choice"], (nlohmann::json{{"action", "give"}, {"target", 0}}));
  EXPECT_TRUE(r2["givers"].empty());
  EXPECT_TRUE(test::leaks_in(r2, P(2)).empty());
}

TEST_F(Builders, InvestResultListsOnlyBackedInvestors) {
  game_->resolve_investment(P(0), 6);
  game_->close_invest_phase();
  const auto r1 = invest_result_payload(view_for(game_->state(), P(1)));
  ASSERT_EQ(r1["backed"].size(), 1u);
  EXPECT_EQ(r1["backed"][0]["id"], 0);
  EXPECT_FALSE(r1["backed"][0]["investment"].contains("available"));
  EXPECT_TRUE(r1["investment"].is_null());
  EXPECT_TRUE(test::leaks_in(r1, P(1)).empty());
  const auto r0 = invest_result_payload(view_for(game_->state(), P(0)));
  EXPECT_EQ(r0["investment"]["invested"], 6);
  EXPECT_GT(r0["pending_pot"].get<Coins>(), 0);
}

TEST_F(Builders, PhaseStartAndStateView) {
  const auto v = view_for(game_->state(), P(3));
  const auto p = phase_start_payload(v, 20000, true);
  EXPECT_EQ(p, (nlohmann::json{{"round", 1}, {"phase", "invest"}, {"timeout_ms", 20000}, {"must_act", true},
                               {"central_pile", v.central_pile}}));
  EXPECT_EQ(state_view_payload(v)["view"], nlohmann::json(v));
}

TEST(BuildersStatic, ShopCatalogReflectsOwnershipAndPriceMode) {
  GameConfig c;
  PlayerView v;
  v.round = 4;
  v.self.savings = 700;
  v.self.pcards[Face::Queen] = 1;
  v.self.emojis = {3};
  auto j = shop_catalog_payload(c, v);
  EXPECT_EQ(j["pcards"][1], (nlohmann::json{{"face", "Q"}, {"price", 500}, {"threshold", 3}, {"owned", 1}}));
  EXPECT_EQ(j["emojis"].size(), 10u);
  EXPECT_EQ(j["emojis"][2], (nlohmann::json{{"id", 3}, {"price", 150}, {"owned", true}}));
  c.equal_price_mode = true;
  j = shop_catalog_payload(c, v);
  EXPECT_EQ(j["emojis"][9]["price"], 50);
}

TEST(BuildersStatic, GameStartedHidesSeed) {
  GameConfig c = test::config_for(3, 123456);
  Game g = test::make_game(c);
  const auto j = game_started_payload(view_for(g.state(), P(1)), c);
  EXPECT_EQ(j["you"], 1);
  EXPECT_EQ(j["players"].size(), 3u);
  EXPECT_EQ(j["players"][0]["id"], 0);
  EXPECT_FALSE(j["config"].contains("seed"));
  EXPECT_EQ(j["config"]["n_players"], 3);
}

TEST(BuildersStatic, GameOverSortsStandings) {
  const auto j = game_over_payload(EndReason::PileEmpty, 17,
                                   {{P(0), "a", 50}, {P(1), "b", 90}, {P(2), "c", 50}, {P(3), "d", 10}});
  EXPECT_EQ(j["reason"], "PileEmpty");
  EXPECT_EQ(j["rounds"], 17);
  std::vector<int> ids;
  for (const auto& row : j["standings"]) ids.push_back(row["id"].get<int>());
  EXPECT_EQ(ids, (std::vector<int>{1, 0, 2, 3}));
}

}  // namespace
}  // namespace trustya::server
