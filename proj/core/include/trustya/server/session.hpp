#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustya/agents.hpp"
#include "trustya/game.hpp"
#include "trustya/server/protocol.hpp"
#include "trustya/sim.hpp"

namespace trustya::server {

using Clock = std::chrono::steady_clock;
using TimePoint = Clock::time_point;
using Millis = std::chrono::milliseconds;
using ConnectionId = std::uint64_t;

struct PhaseTimeouts {
  Millis choice{30000};
  Millis invest{20000};
  Millis distribute{30000};
  Millis shop{20000};
  // How long a session with no connected human waits before aborting.
  Millis grace{60000};

  Millis for_phase(Phase phase) const;
};

// {"choice_ms", "invest_ms", "distribute_ms", "shop_ms", "grace_ms"}; missing keys keep defaults.
void to_json(nlohmann::json& j, const PhaseTimeouts& t);
void from_json(const nlohmann::json& j, PhaseTimeouts& t);

struct SessionRoster {
  int humans = 0;
  std::vector<sim::RosterEntry> bots;

  int total() const;
};

enum class SessionState : std::uint8_t { Lobby, Playing, Paused, Over };
std::string_view to_string(SessionState state);

struct Outbound {
  ConnectionId to = 0;
  Envelope message;
};

// One hosted game. Transport-free: the caller feeds frames, disconnects and
// clock ticks in one serialized order and delivers the returned messages.
// Human seats come first, bots fill the rest.
class Session {
 public:
  // Called for every outbound message at emission time with the engine state
  // it was derived from.
  using Tap = std::function<void(const Outbound&, const GameState&)>;

  Session(std::string id, GameConfig config, SessionRoster roster, PhaseTimeouts timeouts, std::uint64_t token_seed,
          TimePoint now);

  std::vector<Outbound> handle(ConnectionId conn, std::string_view frame, TimePoint now);
  std::vector<Outbound> handle(ConnectionId conn, const Envelope& msg, TimePoint now);
  std::vector<Outbound> disconnect(ConnectionId conn, TimePoint now);
  // Applies any deadline that has passed.
  std::vector<Outbound> tick(TimePoint now);

  std::optional<TimePoint> next_deadline() const;

  const std::string& id() const { return id_; }
  SessionState state() const;
  std::string log_jsonl() const;
  // Unsynchronized access for single-threaded callers such as tests.
  const Game& game() const { return game_; }
  const PhaseTimeouts& timeouts() const { return timeouts_; }
  nlohmann::json summary() const;

  void set_tap(Tap tap) { tap_ = std::move(tap); }

 private:
  struct Seat {
    PlayerId id;
    bool human = false;
    std::optional<agents::Bot> bot;
    std::string token;
    bool claimed = false;
    std::optional<ConnectionId> conn;
    // Replies to processed submissions, by client seq.
    std::map<std::uint64_t, Envelope> replies;
  };

  using Out = std::vector<Outbound>;

  void handle_locked(Out& out, ConnectionId conn, const Envelope& msg, TimePoint now);
  void tick_locked(Out& out, TimePoint now);

  void send(Out& out, ConnectionId to, MessageKind kind, nlohmann::json payload);
  void send_error(Out& out, ConnectionId to, const std::string& code, const std::string& message);
  void send_view_messages(Out& out, const Seat& seat, TimePoint now);
  bool must_act(const Seat& seat) const;
  std::optional<PlayerId> seat_of(ConnectionId conn) const;
  int connected_humans() const;
  void on_join(Out& out, ConnectionId conn, const Envelope& msg, TimePoint now);
  void on_submit(Out& out, ConnectionId conn, const Envelope& msg, TimePoint now);
  void reply(Out& out, Seat& seat, std::uint64_t seq, MessageKind kind, nlohmann::json payload);

  void start_game(Out& out, TimePoint now);
  void begin_phase(Out& out, TimePoint now);
  void bots_act();
  bool phase_complete() const;
  void close_current_phase(Out& out);
  void advance(Out& out, TimePoint now);
  void finalize(Out& out);
  void finalize_for(Out& out, const Seat& seat);

  // Public entry points lock this, so admin reads from other threads are safe.
  mutable std::mutex mutex_;
  std::string id_;
  PhaseTimeouts timeouts_;
  Game game_;
  std::vector<Seat> seats_;
  SessionState state_ = SessionState::Lobby;
  std::optional<TimePoint> phase_deadline_;
  std::optional<TimePoint> grace_deadline_;
  std::map<PlayerId, ChoiceAction> choices_;
  std::map<ConnectionId, std::uint64_t> out_seq_;
  Tap tap_;
};

struct ManagerOptions {
  // Base document merged under every create request: {config, timeouts}.
  nlohmann::json defaults = nlohmann::json::object();
  std::filesystem::path archive_dir;  // empty: finished logs stay in memory only
  std::optional<std::uint64_t> seed;  // fixes session/token seeds for tests
};

// Registry of sessions. Thread-safe for lookup; each Session is still
// expected to be driven from one serialized context.
class SessionManager {
 public:
  explicit SessionManager(ManagerOptions options = {});

  // Request: {"config": {...}, "roster": {"humans": n, "bots": {...}}, "timeouts": {...}}.
  // Throws GameError(InvalidConfig) for a bad request.
  std::shared_ptr<Session> create(const nlohmann::json& request, TimePoint now);
  std::shared_ptr<Session> find(const std::string& id) const;
  nlohmann::json list() const;

  // The event log as JSONL, from a live session or the archive.
  std::optional<std::string> log_text(const std::string& id) const;

  // Writes <id>.jsonl and <id>.config.json once the session is over.
  // Returns false if it was already archived or is still running.
  bool archive(const Session& session);

  const ManagerOptions& options() const { return options_; }

 private:
  std::uint64_t next_random();

  ManagerOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, bool> archived_;
  std::uint64_t counter_ = 0;
  std::optional<Rng> rng_;
};

SessionRoster parse_session_roster(const nlohmann::json& doc);

}  // namespace trustya::server
