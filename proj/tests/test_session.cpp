#include <deque>
#include <filesystem>
#include <set>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "leak_check.hpp"
#include "shadow.hpp"
#include "support.hpp"
#include "trustya/server/session.hpp"
#include "trustya/view.hpp"

namespace trustya::server {
namespace {

using agents::BotKind;
using namespace std::chrono_literals;
using test::P;

const TimePoint t0 = TimePoint{} + 1h;

GameConfig cfg(int n, std::uint64_t seed = 21) {
  GameConfig c;
  c.n_players = n;
  c.seed = seed;
  return c;
}

Session make_session(int humans, std::vector<sim::RosterEntry> bots, std::uint64_t seed = 21) {
  SessionRoster roster{humans, std::move(bots)};
  return Session("s1", cfg(roster.total(), seed), roster, PhaseTimeouts{}, 99, t0);
}

std::vector<Outbound> send(Session& s, ConnectionId conn, MessageKind kind, nlohmann::json payload,
                           std::uint64_t seq = 1, TimePoint now = t0) {
  return s.handle(conn, Envelope{kind, "s1", seq, std::move(payload)}, now);
}

std::vector<Envelope> to(const std::vector<Outbound>& out, ConnectionId conn) {
  std::vector<Envelope> r;
  for (const auto& o : out) {
    if (o.to == conn) r.push_back(o.message);
  }
  return r;
}

std::vector<MessageKind> kinds(const std::vector<Envelope>& msgs) {
  std::vector<MessageKind> r;
  for (const auto& m : msgs) r.push_back(m.kind);
  return r;
}

const Envelope* first(const std::vector<Outbound>& out, ConnectionId conn, MessageKind kind) {
  for (const auto& o : out) {
    if (o.to == conn && o.message.kind == kind) return &o.message;
  }
  return nullptr;
}

nlohmann::json choice_payload(const Session& s, ChoiceAction a) {
  return {{"round", s.game().round()}, {"phase", "choice"}, {"choice", a}};
}

TEST(Timeouts, JsonRoundTripAndValidation) {
  PhaseTimeouts t = nlohmann::json::parse(R"({"choice_ms": 1000, "grace_ms": 5})").get<PhaseTimeouts>();
  EXPECT_EQ(t.choice, 1000ms);
  EXPECT_EQ(t.invest, 20000ms);
  EXPECT_EQ(t.for_phase(Phase::Distribute), 30000ms);
  EXPECT_EQ(t.grace, 5ms);
  EXPECT_EQ(nlohmann::json(t).get<PhaseTimeouts>().choice, 1000ms);
  EXPECT_THROW(nlohmann::json::parse(R"({"choice_ms": 0})").get<PhaseTimeouts>(), GameError);
  EXPECT_THROW(nlohmann::json::parse(R"({"choice_ms": -4})").get<PhaseTimeouts>(), GameError);
  EXPECT_THROW(nlohmann::json::parse(R"({"lunch_ms": 4})").get<PhaseTimeouts>(), GameError);
}

TEST(Roster, ParsesAndRejects) {
  const auto r = parse_session_roster(nlohmann::json::parse(R"({"humans": 2, "bots": {"Smart": 8}})"));
  EXPECT_EQ(r.total(), 10);
  EXPECT_THROW(parse_session_roster(nlohmann::json::parse(R"({"humans": -1})")), GameError);
  EXPECT_THROW(parse_session_roster(nlohmann::json::parse(R"({"people": 1})")), GameError);
  EXPECT_THROW(parse_session_roster(nlohmann::json::parse(R"({"bots": {"Robot": 3}})")), GameError);
  EXPECT_THROW(make_session(2, {}), GameError);  // two seats is too few
  EXPECT_THROW(Session("x", cfg(10), SessionRoster{2, {}}, {}, 1, t0), GameError);
}

TEST(Lobby, StartsWhenAllHumanSeatsAreClaimed) {
  Session s = make_session(2, {{BotKind::Smart, 8}});
  EXPECT_EQ(s.state(), SessionState::Lobby);
  auto out = send(s, 1, MessageKind::Join, {});
  ASSERT_EQ(kinds(to(out, 1)), std::vector<MessageKind>{MessageKind::Joined});
  EXPECT_EQ(to(out, 1)[0].payload["seat"], 0);
  EXPECT_EQ(to(out, 1)[0].payload["token"].get<std::string>().size(), 32u);
  EXPECT_EQ(s.state(), SessionState::Lobby);

  out = send(s, 1, MessageKind::Join, {});
  EXPECT_EQ(to(out, 1)[0].payload["code"], "already_joined");

  out = send(s, 2, MessageKind::Join, {});
  EXPECT_EQ(s.state(), SessionState::Playing);
  EXPECT_EQ(kinds(to(out, 2)), (std::vector<MessageKind>{MessageKind::Joined, MessageKind::GameStarted,
                                                         MessageKind::PhaseStart, MessageKind::StateView}));
  EXPECT_EQ(kinds(to(out, 1)),
            (std::vector<MessageKind>{MessageKind::GameStarted, MessageKind::PhaseStart, MessageKind::StateView}));
  const auto* start = first(out, 1, MessageKind::PhaseStart);
  EXPECT_EQ(start->payload["timeout_ms"], 30000);
  EXPECT_EQ(start->payload["must_act"], true);
  EXPECT_FALSE(first(out, 1, MessageKind::GameStarted)->payload["config"].contains("seed"));

  out = send(s, 3, MessageKind::Join, {});
  EXPECT_EQ(to(out, 3)[0].kind, MessageKind::Error);
  EXPECT_EQ(to(out, 3)[0].payload["code"], "session_full");
}

TEST(Lobby, SevenHumansFillEverySeat) {
  Session s = make_session(7, {});
  for (ConnectionId c = 1; c <= 7; ++c) {
    EXPECT_EQ(s.state(), SessionState::Lobby);
    auto out = send(s, c, MessageKind::Join, {});
    EXPECT_EQ(to(out, c)[0].payload["seat"], c - 1);
  }
  EXPECT_EQ(s.state(), SessionState::Playing);
  // Nobody acts; the phase closes at its deadline and everyone took.
  EXPECT_TRUE(s.tick(t0 + 29999ms).empty());
  auto out = s.tick(t0 + 30s);
  EXPECT_EQ(s.game().phase(), Phase::Shop);
  for (ConnectionId c = 1; c <= 7; ++c) ASSERT_NE(first(out, c, MessageKind::RoundReveal), nullptr);
  EXPECT_EQ(s.game().state().players[0].savings, 2);
}

TEST(Lobby, LeavingFreesTheSeat) {
  Session s = make_session(2, {{BotKind::Taking, 1}});
  send(s, 1, MessageKind::Join, {});
  s.disconnect(1, t0);
  auto out = send(s, 2, MessageKind::Join, {});
  EXPECT_EQ(to(out, 2)[0].payload["seat"], 0);
  EXPECT_EQ(s.state(), SessionState::Lobby);
}

TEST(Messages, HelloAndUnexpectedKinds) {
  Session s = make_session(1, {{BotKind::Smart, 2}});
  auto out = send(s, 1, MessageKind::Hello, {});
  EXPECT_EQ(to(out, 1)[0].payload["protocol"], kProtocolVersion);
  out = send(s, 1, MessageKind::StateView, {});
  EXPECT_EQ(to(out, 1)[0].payload["code"], "unexpected_kind");
  out = s.handle(1, Envelope{MessageKind::Join, "other", 1, {}}, t0);
  EXPECT_EQ(to(out, 1)[0].payload["code"], "unknown_session");
  out = s.handle(1, std::string_view("{oops"), t0);
  EXPECT_EQ(to(out, 1)[0].payload["code"], "schema");
  out = s.handle(1, std::string_view(R"({"kind":"Dance","seq":3})"), t0);
  EXPECT_EQ(to(out, 1)[0].payload["code"], "unknown_kind");
  out = s.handle(1, std::string_view(R"({"kind":"SubmitChoice","seq":3,"payload":[]})"), t0);
  EXPECT_EQ(to(out, 1)[0].kind, MessageKind::ActionRejected);
  EXPECT_EQ(to(out, 1)[0].payload["reason"], "schema");
  out = send(s, 1, MessageKind::SubmitChoice, choice_payload(s, ChoiceAction::take()));
  EXPECT_EQ(to(out, 1)[0].payload["reason"], "not_joined");
}

TEST(Messages, OutboundSeqIsPerConnection) {
  Session s = make_session(2, {{BotKind::Smart, 1}});
  auto a = send(s, 1, MessageKind::Join, {});
  auto b = send(s, 2, MessageKind::Join, {});
  std::uint64_t expect1 = 1, expect2 = 1;
  for (const auto& o : a) EXPECT_EQ(o.message.seq, expect1++);
  for (const auto& o : b) {
    if (o.to == 1) EXPECT_EQ(o.message.seq, expect1++);
    if (o.to == 2) EXPECT_EQ(o.message.seq, expect2++);
  }
}

class Playing : public ::testing::Test {
 protected:
  // One human at seat 0 and two bots.
  Session s = make_session(1, {{BotKind::Smart, 2}});
  void SetUp() override { send(s, 1, MessageKind::Join, {}); }
};

TEST_F(Playing, StaleAndSchemaSubmissionsAreRejected) {
  auto out = send(s, 1, MessageKind::SubmitChoice,
                  {{"round", 2}, {"phase", "choice"}, {"choice", {{"action", "take"}}}}, 7);
  ASSERT_EQ(kinds(to(out, 1)), std::vector<MessageKind>{MessageKind::ActionRejected});
  EXPECT_EQ(to(out, 1)[0].payload["reason"], "stale");
  EXPECT_EQ(to(out, 1)[0].payload["ref_seq"], 7);
  out = send(s, 1, MessageKind::SubmitInvest, {{"round", 1}, {"phase", "invest"}, {"amount", 2}}, 8);
  EXPECT_EQ(to(out, 1)[0].payload["reason"], "stale");
  out = send(s, 1, MessageKind::SubmitChoice, {{"round", 1}, {"phase", "choice"}}, 9);
  EXPECT_EQ(to(out, 1)[0].payload["reason"], "schema");
  out = send(s, 1, MessageKind::SubmitChoice, choice_payload(s, ChoiceAction::give(P(0))), 10);
  EXPECT_EQ(to(out, 1)[0].payload["reason"], "invalid");
  EXPECT_EQ(to(out, 1)[0].payload["code"], "invalid_target");
  EXPECT_EQ(s.game().phase(), Phase::Choice);
}

TEST_F(Playing, ActingFastForwardsAndRepliesAreIdempotent) {
  auto out = send(s, 1, MessageKind::SubmitChoice, choice_payload(s, ChoiceAction::take()), 5);
  const auto msgs = to(out, 1);
  ASSERT_FALSE(msgs.empty());
  EXPECT_EQ(msgs[0].kind, MessageKind::ActionAck);
  EXPECT_EQ(msgs[0].payload["ref_seq"], 5);
  EXPECT_EQ(msgs[0].payload["kind"], "SubmitChoice");
  ASSERT_NE(first(out, 1, MessageKind::RoundReveal), nullptr);
  EXPECT_NE(s.game().phase(), Phase::Choice);
  const auto seq_before = msgs.back().seq;

  out = send(s, 1, MessageKind::SubmitChoice, choice_payload(s, ChoiceAction::take()), 5);
  ASSERT_EQ(to(out, 1).size(), 1u);
  const Envelope dup = to(out, 1)[0];
  EXPECT_EQ(dup.kind, MessageKind::ActionAck);
  EXPECT_EQ(dup.payload["duplicate"], true);
  EXPECT_EQ(dup.payload["round"], 1);
  EXPECT_EQ(dup.seq, seq_before + 1);
}

TEST_F(Playing, ShopPhaseSendsCatalog) {
  auto out = send(s, 1, MessageKind::SubmitChoice, choice_payload(s, ChoiceAction::take()), 1);
  // A lone taker with no pot: investment and distribution are skipped.
  ASSERT_EQ(s.game().phase(), Phase::Shop);
  const auto* cat = first(out, 1, MessageKind::ShopCatalog);
  ASSERT_NE(cat, nullptr);
  EXPECT_EQ(cat->payload["savings"], 2);
  out = send(s, 1, MessageKind::SubmitPurchase, {{"round", 1}, {"phase", "shop"}, {"order", {{"emojis", {1}}}}}, 2);
  EXPECT_EQ(to(out, 1)[0].payload["reason"], "invalid");
  EXPECT_EQ(to(out, 1)[0].payload["code"], "insufficient_funds");
  out = send(s, 1, MessageKind::SubmitPurchase, {{"round", 1}, {"phase", "shop"}, {"order", nlohmann::json::object()}}, 3);
  EXPECT_EQ(to(out, 1)[0].kind, MessageKind::ActionAck);
  EXPECT_EQ(s.game().round(), 2);
  EXPECT_EQ(s.game().phase(), Phase::Choice);
}

TEST_F(Playing, TimeoutAppliesDefaults) {
  EXPECT_EQ(s.next_deadline(), t0 + 30s);
  EXPECT_TRUE(s.tick(t0 + 10s).empty());
  auto out = s.tick(t0 + 30s);
  EXPECT_NE(first(out, 1, MessageKind::RoundReveal), nullptr);
  EXPECT_EQ(first(out, 1, MessageKind::RoundReveal)->payload["choice"], (nlohmann::json{{"action", "take"}}));
  EXPECT_EQ(s.game().phase(), Phase::Shop);
  EXPECT_EQ(s.next_deadline(), t0 + 50s);
  s.tick(t0 + 50s);
  EXPECT_EQ(s.game().round(), 2);
}

TEST_F(Playing, ReconnectWithToken) {
  const auto token = [&] {
    Session probe = make_session(1, {{BotKind::Smart, 2}});
    return to(send(probe, 1, MessageKind::Join, {}), 1)[0].payload["token"].get<std::string>();
  }();  // same token seed, same token
  s.disconnect(1, t0 + 1s);
  EXPECT_EQ(s.state(), SessionState::Paused);
  auto out = send(s, 2, MessageKind::Join, {{"token", "feedface"}}, 1, t0 + 2s);
  EXPECT_EQ(to(out, 2)[0].payload["code"], "unknown_token");
  out = send(s, 2, MessageKind::Join, {{"token", token}}, 1, t0 + 2s);
  EXPECT_EQ(kinds(to(out, 2)), (std::vector<MessageKind>{MessageKind::Joined, MessageKind::GameStarted,
                                                         MessageKind::PhaseStart, MessageKind::StateView}));
  EXPECT_EQ(to(out, 2)[0].payload["seat"], 0);
  EXPECT_EQ(s.state(), SessionState::Playing);
  // The phase clock restarts on resume.
  EXPECT_EQ(first(out, 2, MessageKind::PhaseStart)->payload["timeout_ms"], 30000);
}

TEST_F(Playing, PausesThenAbortsAfterGrace) {
  s.disconnect(1, t0 + 5s);
  EXPECT_EQ(s.state(), SessionState::Paused);
  EXPECT_EQ(s.next_deadline(), t0 + 65s);
  s.tick(t0 + 64s);
  EXPECT_EQ(s.state(), SessionState::Paused);
  EXPECT_EQ(s.game().phase(), Phase::Choice);
  s.tick(t0 + 65s);
  EXPECT_EQ(s.state(), SessionState::Over);
  EXPECT_EQ(s.game().state().end_reason, EndReason::Aborted);
  EXPECT_FALSE(s.next_deadline().has_value());
  // The abort replays like any other log.
  std::istringstream in(s.log_jsonl());
  const auto report = sim::replay(parse_log(in));
  EXPECT_FALSE(report.divergence.has_value()) << report.divergence->reason;
}

TEST(Session, DisconnectedHumanIsNotAwaited) {
  Session s = make_session(2, {{BotKind::Smart, 3}});
  send(s, 1, MessageKind::Join, {});
  send(s, 2, MessageKind::Join, {});
  s.disconnect(2, t0);
  EXPECT_EQ(s.state(), SessionState::Playing);
  send(s, 1, MessageKind::SubmitChoice, choice_payload(s, ChoiceAction::take()), 1);
  EXPECT_NE(s.game().phase(), Phase::Choice);
}

TEST(Session, BotOnlySessionMatchesSimulator) {
  for (BotKind kind : {BotKind::Smart, BotKind::LuckySharing, BotKind::SmartStatus}) {
    Session s("s1", cfg(10, 42), SessionRoster{0, {{kind, 10}}}, {}, 1, t0);
    EXPECT_EQ(s.state(), SessionState::Over);
    const auto run = sim::run_game(cfg(10, 42), std::vector<BotKind>(10, kind));
    EXPECT_EQ(s.log_jsonl(), run.log.to_jsonl()) << agents::to_string(kind);
  }
}

TEST(Visibility, EveryMessageIsTheRecipientsProjection) {
  for (std::uint64_t seed : {1, 2, 3}) {
    ShadowGame g(seed);
    g.play();
    EXPECT_GT(g.audited, 100);
    EXPECT_TRUE(g.failures.empty()) << g.failures.size() << " failures, first: " << g.failures.front();
    EXPECT_NE(g.session.game().state().end_reason, EndReason::Aborted);
    std::istringstream in(g.session.log_jsonl());
    const auto report = sim::replay(parse_log(in));
    EXPECT_FALSE(report.divergence.has_value()) << report.divergence->reason;
  }
}

class Manager : public ::testing::Test {
 protected:
  std::filesystem::path dir = std::filesystem::temp_directory_path() / ("trustya_archive_" + std::to_string(::getpid()));
  void TearDown() override { std::filesystem::remove_all(dir); }
};

TEST_F(Manager, CreateMergesDefaultsAndArchivesOnce) {
  ManagerOptions opts;
  opts.defaults = nlohmann::json::parse(R"({"config": {"round_limit": 3, "hard_stop": true}, "timeouts": {"grace_ms": 10}})");
  opts.archive_dir = dir;
  opts.seed = 8;
  SessionManager m(opts);
  auto s = m.create(nlohmann::json::parse(R"({"roster": {"humans": 1, "bots": {"Taking": 3}}, "config": {"c_give": 3}})"), t0);
  EXPECT_EQ(s->id().size(), 12u);
  EXPECT_EQ(s->game().config().n_players, 4);
  EXPECT_EQ(s->game().config().round_limit, 3);
  EXPECT_EQ(s->game().config().c_give, 3);
  EXPECT_EQ(s->timeouts().grace, 10ms);
  EXPECT_EQ(m.find(s->id()), s);
  EXPECT_EQ(m.find("nope"), nullptr);
  EXPECT_EQ(m.list().size(), 1u);
  EXPECT_EQ(m.list()[0]["state"], "lobby");
  EXPECT_FALSE(m.archive(*s));

  s->handle(1, Envelope{MessageKind::Join, s->id(), 1, {}}, t0);
  s->disconnect(1, t0);
  s->tick(t0 + 1s);
  EXPECT_EQ(s->state(), SessionState::Over);
  EXPECT_TRUE(m.archive(*s));
  EXPECT_FALSE(m.archive(*s));
  EXPECT_TRUE(std::filesystem::exists(dir / (s->id() + ".jsonl")));
  EXPECT_TRUE(std::filesystem::exists(dir / (s->id() + ".config.json")));
  EXPECT_EQ(*m.log_text(s->id()), s->log_jsonl());

  SessionManager fresh(ManagerOptions{{}, dir, 9});
  EXPECT_EQ(*fresh.log_text(s->id()), s->log_jsonl());
  EXPECT_FALSE(fresh.log_text("../etc/passwd").has_value());
  EXPECT_FALSE(fresh.log_text("abcdef").has_value());
}

TEST_F(Manager, RejectsBadRequests) {
  SessionManager m(ManagerOptions{{}, {}, 1});
  for (const char* bad : {R"([])", R"({})", R"({"roster": {"humans": 1}, "extra": 1})",
                          R"({"roster": {"humans": 1, "bots": {"Smart": 1}}})",
                          R"({"roster": {"humans": 3}, "config": {"n_players": 4}})",
                          R"({"roster": {"humans": 3}, "config": {"v_jack": 0}})",
                          R"({"roster": {"humans": 3}, "timeouts": {"invest_ms": 0}})"}) {
    EXPECT_THROW(m.create(nlohmann::json::parse(bad), t0), GameError) << bad;
  }
  EXPECT_EQ(m.list().size(), 0u);
}

TEST_F(Manager, RandomSeedsWhenUnset) {
  SessionManager m;
  auto a = m.create(nlohmann::json::parse(R"({"roster": {"bots": {"Taking": 3}}, "config": {"round_limit": 1, "hard_stop": true}})"), t0);
  auto b = m.create(nlohmann::json::parse(R"({"roster": {"bots": {"Taking": 3}}, "config": {"round_limit": 1, "hard_stop": true}})"), t0);
  EXPECT_NE(a->id(), b->id());
  EXPECT_NE(a->game().config().seed, b->game().config().seed);
  EXPECT_EQ(a->state(), SessionState::Over);
}

}  // namespace
}  // namespace trustya::server
