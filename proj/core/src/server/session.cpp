#include "trustya/server/session.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <random>

#include "trustya/detail/fnv.hpp"
#include "trustya/view.hpp"

namespace trustya::server {
namespace {

[[noreturn]] void invalid(const std::string& what) { throw GameError(ErrorCode::InvalidConfig, what); }

std::vector<std::string> seat_kinds(const GameConfig& config, const SessionRoster& roster) {
  if (roster.humans < 0) invalid("human seat count must be non-negative");
  if (roster.total() != config.n_players) {
    invalid("roster has " + std::to_string(roster.total()) + " seats but n_players is " +
            std::to_string(config.n_players));
  }
  std::vector<std::string> kinds(static_cast<std::size_t>(roster.humans), "human");
  for (const auto& entry : roster.bots) {
    kinds.insert(kinds.end(), static_cast<std::size_t>(entry.count), std::string(agents::to_string(entry.kind)));
  }
  return kinds;
}

const GameConfig& checked(const GameConfig& config, const SessionRoster& roster) {
  config.validate();
  seat_kinds(config, roster);
  return config;
}

std::int64_t millis_until(std::optional<TimePoint> deadline, TimePoint now) {
  if (!deadline || *deadline <= now) return 0;
  return std::chrono::duration_cast<Millis>(*deadline - now).count();
}

}  // namespace

Millis PhaseTimeouts::for_phase(Phase phase) const {
  switch (phase) {
    case Phase::Choice:
      return choice;
    case Phase::Invest:
      return invest;
    case Phase::Distribute:
      return distribute;
    case Phase::Shop:
      return shop;
    case Phase::Over:
      break;
  }
  return Millis{0};
}

void to_json(nlohmann::json& j, const PhaseTimeouts& t) {
  j = {{"choice_ms", t.choice.count()},
       {"invest_ms", t.invest.count()},
       {"distribute_ms", t.distribute.count()},
       {"shop_ms", t.shop.count()},
       {"grace_ms", t.grace.count()}};
}

void from_json(const nlohmann::json& j, PhaseTimeouts& t) {
  if (!j.is_object()) invalid("timeouts must be an object");
  auto read = [&](const char* key, Millis& field) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_integer() || j.at(key).get<std::int64_t>() <= 0) {
      invalid(std::string(key) + " must be a positive integer");
    }
    field = Millis{j.at(key).get<std::int64_t>()};
  };
  for (const auto& [key, _] : j.items()) {
    if (key != "choice_ms" && key != "invest_ms" && key != "distribute_ms" && key != "shop_ms" && key != "grace_ms") {
      invalid("unknown timeout key '" + key + "'");
    }
  }
  read("choice_ms", t.choice);
  read("invest_ms", t.invest);
  read("distribute_ms", t.distribute);
  read("shop_ms", t.shop);
  read("grace_ms", t.grace);
}

int SessionRoster::total() const {
  int n = humans;
  for (const auto& entry : bots) n += entry.count;
  return n;
}

std::string_view to_string(SessionState state) {
  switch (state) {
    case SessionState::Lobby:
      return "lobby";
    case SessionState::Playing:
      return "playing";
    case SessionState::Paused:
      return "paused";
    case SessionState::Over:
      return "over";
  }
  return "?";
}

SessionRoster parse_session_roster(const nlohmann::json& doc) {
  if (!doc.is_object()) invalid("roster must be an object");
  SessionRoster roster;
  for (const auto& [key, value] : doc.items()) {
    if (key == "humans") {
      if (!value.is_number_unsigned()) invalid("humans must be a non-negative integer");
      roster.humans = value.get<int>();
    } else if (key == "bots") {
      roster.bots = sim::parse_roster(value);
    } else {
      invalid("unknown roster key '" + key + "'");
    }
  }
  return roster;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(std::string id, GameConfig config, SessionRoster roster, PhaseTimeouts timeouts,
                 std::uint64_t token_seed, TimePoint now)
    : id_(std::move(id)), timeouts_(timeouts), game_(checked(config, roster), seat_kinds(config, roster)) {
  const auto n = game_.size();
  std::vector<std::optional<agents::BotKind>> kinds(n);
  for (std::size_t i = 0; i < n; ++i) kinds[i] = agents::bot_kind_from_string(game_.state().players[i].kind);
  const auto contexts = agents::assign_roster(kinds);

  Rng tokens(token_seed);
  seats_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Seat& seat = seats_[i];
    seat.id = PlayerId{static_cast<std::uint32_t>(i)};
    seat.human = !kinds[i].has_value();
    if (seat.human) {
      seat.token = detail::to_hex(tokens.next()) + detail::to_hex(tokens.next());
    } else {
      seat.bot.emplace(*contexts[i], n, sim::bot_seed(game_.config().seed, seat.id));
    }
  }
  if (roster.humans == 0) {
    Out ignored;
    start_game(ignored, now);
  }
}

std::optional<PlayerId> Session::seat_of(ConnectionId conn) const {
  for (const auto& seat : seats_) {
    if (seat.conn == conn) return seat.id;
  }
  return std::nullopt;
}

int Session::connected_humans() const {
  return static_cast<int>(std::count_if(seats_.begin(), seats_.end(), [](const Seat& s) { return s.conn.has_value(); }));
}

SessionState Session::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::string Session::log_jsonl() const {
  std::lock_guard lock(mutex_);
  return game_.log().to_jsonl();
}

std::optional<TimePoint> Session::next_deadline() const {
  std::lock_guard lock(mutex_);
  if (state_ == SessionState::Playing) return phase_deadline_;
  if (state_ == SessionState::Paused) return grace_deadline_;
  return std::nullopt;
}

nlohmann::json Session::summary() const {
  std::lock_guard lock(mutex_);
  auto seats = nlohmann::json::array();
  int humans = 0;
  for (const auto& seat : seats_) {
    const auto& p = game_.state().players[seat.id.value];
    humans += seat.human;
    seats.push_back({{"id", seat.id}, {"name", p.name}, {"kind", p.kind}, {"connected", seat.conn.has_value()}});
  }
  const auto& st = game_.state();
  return {{"id", id_},
          {"state", to_string(state_)},
          {"round", st.round},
          {"phase", st.phase},
          {"humans", humans},
          {"humans_connected", connected_humans()},
          {"end_reason", st.end_reason ? nlohmann::json(*st.end_reason) : nlohmann::json(nullptr)},
          {"seats", seats}};
}

void Session::send(Out& out, ConnectionId to, MessageKind kind, nlohmann::json payload) {
  Outbound msg{to, Envelope{kind, id_, ++out_seq_[to], std::move(payload)}};
  if (tap_) tap_(msg, game_.state());
  out.push_back(std::move(msg));
}

void Session::send_error(Out& out, ConnectionId to, const std::string& code, const std::string& message) {
  send(out, to, MessageKind::Error, {{"code", code}, {"message", message}});
}

void Session::reply(Out& out, Seat& seat, std::uint64_t seq, MessageKind kind, nlohmann::json payload) {
  payload["ref_seq"] = seq;
  send(out, *seat.conn, kind, std::move(payload));
  seat.replies[seq] = out.back().message;
  // Clients only ever resend recent frames.
  while (seat.replies.size() > 64) seat.replies.erase(seat.replies.begin());
}

void Session::send_view_messages(Out& out, const Seat& seat, TimePoint now) {
  const PlayerView view = view_for(game_.state(), seat.id);
  const auto to = *seat.conn;
  send(out, to, MessageKind::PhaseStart, phase_start_payload(view, millis_until(phase_deadline_, now), must_act(seat)));
  send(out, to, MessageKind::StateView, state_view_payload(view));
  if (game_.phase() == Phase::Shop) send(out, to, MessageKind::ShopCatalog, shop_catalog_payload(game_.config(), view));
}

bool Session::must_act(const Seat& seat) const {
  if (game_.phase() == Phase::Choice) return !choices_.count(seat.id);
  return game_.needs_action(seat.id);
}

std::vector<Outbound> Session::handle(ConnectionId conn, std::string_view frame, TimePoint now) {
  std::lock_guard lock(mutex_);
  Out out;
  Envelope msg;
  try {
    msg = parse_envelope(frame);
  } catch (const ProtocolError& e) {
    if (e.reason() == "unknown_kind") {
      send_error(out, conn, "unknown_kind", e.what());
    } else if (!e.kind().empty() && is_submit(*message_kind_from_string(e.kind()))) {
      send(out, conn, MessageKind::ActionRejected, {{"reason", "schema"}, {"message", e.what()}});
    } else {
      send_error(out, conn, "schema", e.what());
    }
    return out;
  }
  handle_locked(out, conn, msg, now);
  return out;
}

std::vector<Outbound> Session::handle(ConnectionId conn, const Envelope& msg, TimePoint now) {
  std::lock_guard lock(mutex_);
  Out out;
  handle_locked(out, conn, msg, now);
  return out;
}

void Session::handle_locked(Out& out, ConnectionId conn, const Envelope& msg, TimePoint now) {
  tick_locked(out, now);
  if (!msg.session.empty() && msg.session != id_) {
    send_error(out, conn, "unknown_session", "frame addressed to session '" + msg.session + "'");
    return;
  }
  switch (msg.kind) {
    case MessageKind::Hello:
      send(out, conn, MessageKind::Hello, {{"protocol", kProtocolVersion}, {"state", to_string(state_)}});
      break;
    case MessageKind::Join:
      on_join(out, conn, msg, now);
      break;
    case MessageKind::SubmitChoice:
    case MessageKind::SubmitInvest:
    case MessageKind::SubmitDistribution:
    case MessageKind::SubmitPurchase:
      on_submit(out, conn, msg, now);
      break;
    default:
      send_error(out, conn, "unexpected_kind", std::string(to_string(msg.kind)) + " is a server-to-client message");
      break;
  }
}

void Session::on_join(Out& out, ConnectionId conn, const Envelope& msg, TimePoint now) {
  if (seat_of(conn)) {
    send_error(out, conn, "already_joined", "this connection already holds a seat");
    return;
  }
  Seat* seat = nullptr;
  const bool resume = msg.payload.contains("token");
  if (resume) {
    if (!msg.payload["token"].is_string()) {
      send_error(out, conn, "schema", "'token' must be a string");
      return;
    }
    const auto token = msg.payload["token"].get<std::string>();
    for (auto& s : seats_) {
      if (s.human && s.claimed && s.token == token) seat = &s;
    }
    if (seat == nullptr) {
      send_error(out, conn, "unknown_token", "no seat holds that token");
      return;
    }
    if (seat->conn) {
      // A newer connection takes the seat over.
      out_seq_.erase(*seat->conn);
    }
  } else {
    if (state_ == SessionState::Lobby) {
      for (auto& s : seats_) {
        if (s.human && !s.claimed) {
          seat = &s;
          break;
        }
      }
    }
    if (seat == nullptr) {
      send_error(out, conn, "session_full", "every human seat is taken");
      return;
    }
    seat->claimed = true;
  }
  seat->conn = conn;
  const auto& player = game_.state().players[seat->id.value];
  send(out, conn, MessageKind::Joined,
       {{"seat", seat->id}, {"name", player.name}, {"token", seat->token}, {"state", to_string(state_)}});

  if (state_ == SessionState::Lobby) {
    const bool full = std::all_of(seats_.begin(), seats_.end(), [](const Seat& s) { return !s.human || s.claimed; });
    if (full) start_game(out, now);
    return;
  }
  if (state_ == SessionState::Over) {
    finalize_for(out, *seat);
    return;
  }
  if (state_ == SessionState::Paused) {
    state_ = SessionState::Playing;
    grace_deadline_.reset();
    phase_deadline_ = now + timeouts_.for_phase(game_.phase());
  }
  const PlayerView view = view_for(game_.state(), seat->id);
  send(out, conn, MessageKind::GameStarted, game_started_payload(view, game_.config()));
  send_view_messages(out, *seat, now);
}

void Session::on_submit(Out& out, ConnectionId conn, const Envelope& msg, TimePoint now) {
  const auto seat_id = seat_of(conn);
  if (!seat_id) {
    send(out, conn, MessageKind::ActionRejected,
         {{"ref_seq", msg.seq}, {"reason", "not_joined"}, {"message", "join a seat before submitting"}});
    return;
  }
  Seat& seat = seats_[seat_id->value];
  if (auto it = seat.replies.find(msg.seq); it != seat.replies.end()) {
    auto payload = it->second.payload;
    payload["duplicate"] = true;
    send(out, conn, it->second.kind, std::move(payload));
    return;
  }
  auto reject = [&](const std::string& reason, const std::string& message, std::optional<ErrorCode> code = {}) {
    nlohmann::json payload{{"reason", reason}, {"message", message}};
    if (code) payload["code"] = to_string(*code);
    reply(out, seat, msg.seq, MessageKind::ActionRejected, std::move(payload));
  };

  Submission sub;
  try {
    sub = parse_submission(msg.kind, msg.payload);
  } catch (const ProtocolError& e) {
    reject("schema", e.what());
    return;
  }
  if (state_ != SessionState::Playing || sub.round != game_.round() || sub.phase != game_.phase()) {
    reject("stale", "the game is in round " + std::to_string(game_.round()) + ", phase " +
                        std::string(to_string(game_.phase())));
    return;
  }
  const PlayerId me = seat.id;
  try {
    switch (msg.kind) {
      case MessageKind::SubmitChoice:
        if (choices_.count(me)) throw GameError(ErrorCode::DuplicateSubmission, "choice already submitted");
        game_.validate_choice(me, *sub.choice);
        choices_[me] = *sub.choice;
        break;
      case MessageKind::SubmitInvest:
        game_.validate_investment(me, *sub.amount);
        game_.resolve_investment(me, *sub.amount);
        break;
      case MessageKind::SubmitDistribution:
        game_.validate_distribution(me, *sub.plan);
        game_.apply_distribution(me, *sub.plan);
        break;
      default:
        game_.validate_purchases(me, *sub.order);
        game_.apply_purchases(me, *sub.order);
        break;
    }
  } catch (const GameError& e) {
    reject("invalid", e.what(), e.code());
    return;
  }
  reply(out, seat, msg.seq, MessageKind::ActionAck,
        {{"round", sub.round}, {"phase", sub.phase}, {"kind", to_string(msg.kind)}});
  advance(out, now);
}

std::vector<Outbound> Session::disconnect(ConnectionId conn, TimePoint now) {
  std::lock_guard lock(mutex_);
  Out out;
  out_seq_.erase(conn);
  const auto seat_id = seat_of(conn);
  if (!seat_id) return out;
  Seat& seat = seats_[seat_id->value];
  seat.conn.reset();
  if (state_ == SessionState::Lobby) {
    seat.claimed = false;
    return out;
  }
  if (state_ == SessionState::Playing) {
    if (connected_humans() == 0) {
      state_ = SessionState::Paused;
      grace_deadline_ = now + timeouts_.grace;
    } else {
      // The remaining players may now be all that the phase waits for.
      advance(out, now);
    }
  }
  return out;
}

std::vector<Outbound> Session::tick(TimePoint now) {
  std::lock_guard lock(mutex_);
  Out out;
  tick_locked(out, now);
  return out;
}

void Session::tick_locked(Out& out, TimePoint now) {
  if (state_ == SessionState::Playing) {
    advance(out, now);
  } else if (state_ == SessionState::Paused && grace_deadline_ && now >= *grace_deadline_) {
    game_.abort();
    finalize(out);
  }
}

void Session::start_game(Out& out, TimePoint now) {
  state_ = SessionState::Playing;
  for (const auto& seat : seats_) {
    if (seat.conn) send(out, *seat.conn, MessageKind::GameStarted,
                        game_started_payload(view_for(game_.state(), seat.id), game_.config()));
  }
  begin_phase(out, now);
  advance(out, now);
}

void Session::begin_phase(Out& out, TimePoint now) {
  phase_deadline_ = now + timeouts_.for_phase(game_.phase());
  if (game_.phase() == Phase::Choice) choices_.clear();
  bots_act();
  for (const auto& seat : seats_) {
    if (seat.conn) send_view_messages(out, seat, now);
  }
}

void Session::bots_act() {
  const GameConfig& config = game_.config();
  switch (game_.phase()) {
    case Phase::Choice:
      for (auto& seat : seats_) {
        if (seat.bot) choices_[seat.id] = seat.bot->choose(view_for(game_.state(), seat.id));
      }
      break;
    case Phase::Invest:
      for (PlayerId p : game_.pending_actors()) {
        auto& seat = seats_[p.value];
        if (seat.bot) game_.resolve_investment(p, seat.bot->invest(view_for(game_.state(), p), config));
      }
      break;
    case Phase::Distribute:
      for (PlayerId p : game_.pending_actors()) {
        auto& seat = seats_[p.value];
        if (seat.bot) game_.apply_distribution(p, seat.bot->distribute(view_for(game_.state(), p)));
      }
      break;
    case Phase::Shop:
      for (auto& seat : seats_) {
        if (seat.bot) game_.apply_purchases(seat.id, seat.bot->shop(view_for(game_.state(), seat.id), config));
      }
      break;
    case Phase::Over:
      break;
  }
}

bool Session::phase_complete() const {
  return std::none_of(seats_.begin(), seats_.end(), [&](const Seat& s) { return s.conn && must_act(s); });
}

void Session::close_current_phase(Out& out) {
  const Phase phase = game_.phase();
  switch (phase) {
    case Phase::Choice:
      game_.resolve_choice_phase(choices_);
      choices_.clear();
      break;
    case Phase::Invest:
    case Phase::Distribute:
    case Phase::Shop:
      game_.close_phase();
      break;
    case Phase::Over:
      return;
  }
  for (const auto& seat : seats_) {
    if (!seat.conn) continue;
    if (phase == Phase::Choice) {
      send(out, *seat.conn, MessageKind::RoundReveal, round_reveal_payload(view_for(game_.state(), seat.id)));
    } else if (phase == Phase::Invest) {
      send(out, *seat.conn, MessageKind::InvestResult, invest_result_payload(view_for(game_.state(), seat.id)));
    }
  }
}

void Session::advance(Out& out, TimePoint now) {
  while (state_ == SessionState::Playing) {
    if (game_.over()) {
      finalize(out);
      return;
    }
    if (!phase_complete() && phase_deadline_ && now < *phase_deadline_) return;
    close_current_phase(out);
    if (game_.over()) {
      finalize(out);
      return;
    }
    begin_phase(out, now);
  }
}

void Session::finalize(Out& out) {
  state_ = SessionState::Over;
  phase_deadline_.reset();
  grace_deadline_.reset();
  for (const auto& seat : seats_) {
    if (seat.conn) finalize_for(out, seat);
  }
}

void Session::finalize_for(Out& out, const Seat& seat) {
  const auto& st = game_.state();
  std::vector<Standing> standings;
  for (const auto& p : st.players) standings.push_back({p.id, p.name, p.savings});
  send(out, *seat.conn, MessageKind::GameOver,
       game_over_payload(st.end_reason.value_or(EndReason::Aborted), st.round, std::move(standings)));
}

// ---------------------------------------------------------------------------
// SessionManager

SessionManager::SessionManager(ManagerOptions options) : options_(std::move(options)) {
  if (options_.defaults.is_null()) options_.defaults = nlohmann::json::object();
  if (!options_.defaults.is_object()) invalid("session defaults must be a JSON object");
  if (options_.seed) rng_.emplace(*options_.seed);
  if (!options_.archive_dir.empty()) std::filesystem::create_directories(options_.archive_dir);
}

std::uint64_t SessionManager::next_random() {
  if (rng_) return rng_->next();
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

std::shared_ptr<Session> SessionManager::create(const nlohmann::json& request, TimePoint now) {
  if (!request.is_object()) invalid("session request must be a JSON object");
  for (const auto& [key, _] : request.items()) {
    if (key != "config" && key != "roster" && key != "timeouts") invalid("unknown request key '" + key + "'");
  }
  if (!request.contains("roster")) invalid("session request needs a roster");
  const SessionRoster roster = parse_session_roster(request.at("roster"));

  nlohmann::json config_doc = options_.defaults.value("config", nlohmann::json::object());
  if (request.contains("config")) {
    if (!request.at("config").is_object()) invalid("config must be a JSON object");
    config_doc.merge_patch(request.at("config"));
  }
  if (!config_doc.contains("n_players")) config_doc["n_players"] = roster.total();

  nlohmann::json timeout_doc = options_.defaults.value("timeouts", nlohmann::json::object());
  if (request.contains("timeouts")) {
    if (!request.at("timeouts").is_object()) invalid("timeouts must be a JSON object");
    timeout_doc.merge_patch(request.at("timeouts"));
  }
  const PhaseTimeouts timeouts = timeout_doc.get<PhaseTimeouts>();

  std::lock_guard lock(mutex_);
  if (!config_doc.contains("seed")) config_doc["seed"] = next_random();
  const GameConfig config = parse_config(config_doc);
  std::string id;
  do {
    id = detail::to_hex(next_random() ^ ++counter_).substr(0, 12);
  } while (sessions_.count(id));
  auto session = std::make_shared<Session>(id, config, roster, timeouts, next_random(), now);
  sessions_[id] = session;
  archived_[id] = false;
  return session;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

nlohmann::json SessionManager::list() const {
  std::vector<std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [_, s] : sessions_) sessions.push_back(s);
  }
  auto out = nlohmann::json::array();
  for (const auto& s : sessions) out.push_back(s->summary());
  return out;
}

std::optional<std::string> SessionManager::log_text(const std::string& id) const {
  if (auto session = find(id)) return session->log_jsonl();
  if (options_.archive_dir.empty()) return std::nullopt;
  // Ids are hex; anything else cannot name an archived file.
  if (id.empty() || !std::all_of(id.begin(), id.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); })) {
    return std::nullopt;
  }
  std::ifstream in(options_.archive_dir / (id + ".jsonl"), std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool SessionManager::archive(const Session& session) {
  if (session.state() != SessionState::Over) return false;
  {
    std::lock_guard lock(mutex_);
    auto& done = archived_[session.id()];
    if (done) return false;
    done = true;
  }
  if (options_.archive_dir.empty()) return true;
  const auto base = options_.archive_dir / session.id();
  std::ofstream log(base.string() + ".jsonl", std::ios::binary);
  log << session.log_jsonl();
  std::ofstream config(base.string() + ".config.json", std::ios::binary);
  config << nlohmann::json(session.game().config()).dump(2) << '\n';
  return static_cast<bool>(log) && static_cast<bool>(config);
}

}  // namespace trustya::server
