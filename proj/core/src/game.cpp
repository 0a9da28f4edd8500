#include "trustya/game.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "trustya/formulas.hpp"

namespace trustya {
namespace {

constexpr std::uint64_t kNameStream = 0x6e616d6573ULL;

[[noreturn]] void reject(ErrorCode code, const std::string& what) { throw GameError(code, what); }

std::string pid(PlayerId p) { return "player " + std::to_string(p.value); }

nlohmann::json ids_json(const std::vector<PlayerId>& ids) {
  auto j = nlohmann::json::array();
  for (auto p : ids) j.push_back(p);
  return j;
}

nlohmann::json allocations_json(const std::map<PlayerId, Coins>& allocations) {
  // Array of pairs keeps numeric ids numeric and ordering stable.
  auto j = nlohmann::json::array();
  for (const auto& [p, coins] : allocations) j.push_back({p, coins});
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Value types

void to_json(nlohmann::json& j, const ChoiceAction& a) {
  if (a.is_give()) {
    j = {{"action", "give"}, {"target", a.target}};
  } else {
    j = {{"action", "take"}};
  }
}

void from_json(const nlohmann::json& j, ChoiceAction& a) {
  const auto action = j.at("action").get<std::string>();
  if (action == "take") {
    a = ChoiceAction::take();
  } else if (action == "give") {
    a = ChoiceAction::give(j.at("target").get<PlayerId>());
  } else {
    throw GameError(ErrorCode::InvalidTarget, "unknown choice action '" + action + "'");
  }
}

int RoundLedger::supporters_of(PlayerId p) const {
  return p.value < supporters.size() ? supporters[p.value] : 0;
}

std::vector<PlayerId> RoundLedger::backers_of(PlayerId p) const {
  std::vector<PlayerId> out;
  for (const auto& [giver, receiver] : gives) {
    if (receiver == p) out.push_back(giver);
  }
  return out;
}

void to_json(nlohmann::json& j, const InvestmentOutcome& o) {
  j = {{"investor", o.investor}, {"invested", o.invested}, {"available", o.available},
       {"card", o.card ? nlohmann::json(*o.card) : nlohmann::json(nullptr)},
       {"value", o.value},       {"payout", o.payout},     {"penalty", o.penalty},
       {"protected", o.is_protected}, {"capped", o.capped}};
}

Coins DistributionPlan::total() const {
  return std::accumulate(allocations.begin(), allocations.end(), Coins{0},
                         [](Coins acc, const auto& kv) { return acc + kv.second; });
}

DistributionPlan DistributionPlan::even_split(Coins pot, const std::vector<PlayerId>& backers) {
  DistributionPlan plan;
  if (backers.empty() || pot <= 0) return plan;
  const Coins share = pot / static_cast<Coins>(backers.size());
  for (auto b : backers) plan.allocations[b] = share;
  return plan;
}

DistributionPlan DistributionPlan::even_split_with_investor(Coins pot, const std::vector<PlayerId>& backers) {
  DistributionPlan plan;
  if (backers.empty() || pot <= 0) return plan;
  const Coins share = pot / static_cast<Coins>(backers.size() + 1);
  for (auto b : backers) plan.allocations[b] = share;
  return plan;
}

void to_json(nlohmann::json& j, const DistributionPlan& plan) { j = allocations_json(plan.allocations); }

void from_json(const nlohmann::json& j, DistributionPlan& plan) {
  plan.allocations.clear();
  if (!j.is_array()) throw GameError(ErrorCode::InvalidPlan, "allocations must be an array of [player, coins]");
  for (const auto& entry : j) {
    if (!entry.is_array() || entry.size() != 2) {
      throw GameError(ErrorCode::InvalidPlan, "allocation entries are [player, coins]");
    }
    const auto p = entry[0].get<PlayerId>();
    if (!plan.allocations.emplace(p, entry[1].get<Coins>()).second) {
      throw GameError(ErrorCode::InvalidPlan, "duplicate allocation for " + pid(p));
    }
  }
}

void to_json(nlohmann::json& j, const PurchaseOrder& order) {
  j = {{"pcards", order.pcards}, {"emojis", order.emojis}};
}

void from_json(const nlohmann::json& j, PurchaseOrder& order) {
  order = {};
  if (j.contains("pcards")) j.at("pcards").get_to(order.pcards);
  if (j.contains("emojis")) j.at("emojis").get_to(order.emojis);
}

Coins order_price(const PurchaseOrder& order, const GameConfig& config) {
  Coins total = 0;
  for (Face f : order.pcards) total += config.pcard_costs[f];
  for (int e : order.emojis) total += config.emoji_price(e);
  return total;
}

// ---------------------------------------------------------------------------
// GameState

const PlayerState& GameState::player(PlayerId id) const {
  if (!has_player(id)) reject(ErrorCode::UnknownPlayer, "unknown " + pid(id));
  return players[id.value];
}

PlayerState& GameState::player(PlayerId id) {
  if (!has_player(id)) reject(ErrorCode::UnknownPlayer, "unknown " + pid(id));
  return players[id.value];
}

Coins GameState::total_savings() const {
  return std::accumulate(players.begin(), players.end(), Coins{0},
                         [](Coins acc, const PlayerState& p) { return acc + p.savings; });
}

Coins GameState::total_received() const {
  return std::accumulate(players.begin(), players.end(), Coins{0},
                         [](Coins acc, const PlayerState& p) { return acc + p.received_pool; });
}

Coins GameState::total_pending() const { return std::accumulate(pending_pots.begin(), pending_pots.end(), Coins{0}); }

Coins GameState::conserved_total() const {
  return central_pile + total_savings() + total_received() + total_pending() + burned;
}

std::vector<std::pair<PlayerId, Face>> enforce_pcard_maintenance(GameState& state, const RoundLedger& ledger) {
  std::vector<std::pair<PlayerId, Face>> losses;
  for (auto& player : state.players) {
    const int supporters = ledger.supporters_of(player.id);
    for (Face f : kFaces) {
      if (player.pcards[f] > 0 && supporters < state.config.pcard_threshold(f)) {
        --player.pcards[f];
        losses.emplace_back(player.id, f);
      }
    }
  }
  return losses;
}

Termination check_termination(GameState& state) {
  if (state.central_pile == 0 || state.end_flag) return {true, EndReason::PileEmpty};
  const auto& cfg = state.config;
  if (state.round >= cfg.round_limit && cfg.hard_stop) return {true, EndReason::HardStop};
  if (state.round > cfg.round_limit && state.rng.bernoulli(cfg.termination_prob)) return {true, EndReason::Overtime};
  return {};
}

std::string random_display_name(Rng& rng) {
  std::string name;
  for (int i = 0; i < 3; ++i) name.push_back(static_cast<char>('a' + rng.below(26)));
  for (int i = 0; i < 3; ++i) name.push_back(static_cast<char>('0' + rng.below(10)));
  return name;
}

// ---------------------------------------------------------------------------
// Game

Game::Game(GameConfig config, std::vector<std::string> seat_kinds) {
  config.validate();
  if (seat_kinds.size() != static_cast<std::size_t>(config.n_players)) {
    reject(ErrorCode::InvalidConfig, "roster has " + std::to_string(seat_kinds.size()) + " seats but n_players is " +
                                         std::to_string(config.n_players));
  }
  state_.config = std::move(config);
  state_.central_pile = state_.config.initial_pile();
  state_.rng = Rng(state_.config.seed);
  state_.card_source = [](Rng& rng) { return draw_card(rng); };

  Rng names(derive_seed(state_.config.seed, kNameStream));
  std::set<std::string> taken;
  auto players_json = nlohmann::json::array();
  for (std::size_t i = 0; i < seat_kinds.size(); ++i) {
    PlayerState p;
    p.id = PlayerId{static_cast<std::uint32_t>(i)};
    do {
      p.name = random_display_name(names);
    } while (!taken.insert(p.name).second);
    p.kind = std::move(seat_kinds[i]);
    players_json.push_back({{"id", p.id}, {"name", p.name}, {"kind", p.kind}});
    state_.players.push_back(std::move(p));
  }
  state_.round = 1;
  state_.phase = Phase::Choice;
  emit(event_kind::kGameCreated, {{"config", state_.config}, {"players", players_json},
                                   {"pile", state_.central_pile}});
  start_round();
}

void Game::emit(std::string_view kind, nlohmann::json payload) {
  state_.log.append(state_.round, state_.phase, kind, std::move(payload), state_.rng.draws());
}

void Game::require_phase(Phase phase) const {
  if (state_.phase != phase) {
    reject(ErrorCode::WrongPhase, "operation requires phase " + std::string(to_string(phase)) + ", game is in " +
                                      std::string(to_string(state_.phase)));
  }
}

void Game::require_player(PlayerId player) const {
  if (!state_.has_player(player)) reject(ErrorCode::UnknownPlayer, "unknown " + pid(player));
}

void Game::start_round() {
  const std::size_t n = state_.players.size();
  state_.ledger = RoundLedger{state_.round, {}, {}, {}, std::vector<int>(n, 0)};
  state_.outcomes.assign(n, std::nullopt);
  state_.pending_pots.assign(n, 0);
  state_.invested.assign(n, false);
  state_.distributed.assign(n, false);
  state_.shopped.assign(n, false);
  state_.shares.clear();
  for (auto& p : state_.players) p.received_pool = 0;
  emit(event_kind::kRoundStarted, {{"round", state_.round}, {"pile", state_.central_pile}});
}

// --- validation ------------------------------------------------------------

void Game::validate_choice(PlayerId player, const ChoiceAction& action) const {
  require_phase(Phase::Choice);
  require_player(player);
  if (action.is_give()) {
    if (!state_.has_player(action.target)) reject(ErrorCode::InvalidTarget, "give target is not in the game");
    if (action.target == player) reject(ErrorCode::InvalidTarget, "players cannot give to themselves");
  }
}

void Game::validate_investment(PlayerId investor, Coins amount) const {
  require_phase(Phase::Invest);
  require_player(investor);
  if (state_.invested[investor.value]) reject(ErrorCode::DuplicateSubmission, pid(investor) + " already invested");
  const Coins r = state_.player(investor).received_pool;
  if (amount < 0 || amount > r) {
    reject(ErrorCode::InvalidAmount, "investment must lie in [0, " + std::to_string(r) + "]");
  }
  if (amount > 0 && r < state_.config.min_invest_threshold) {
    reject(ErrorCode::InvalidAmount, "received coins below the minimum investment threshold");
  }
}

void Game::validate_distribution(PlayerId investor, const DistributionPlan& plan) const {
  require_phase(Phase::Distribute);
  require_player(investor);
  if (state_.distributed[investor.value]) reject(ErrorCode::DuplicateSubmission, pid(investor) + " already distributed");
  const Coins pot = state_.pending_pots[investor.value];
  if (pot <= 0) reject(ErrorCode::InvalidPlan, pid(investor) + " has no pending payout");
  const auto backers = state_.ledger.backers_of(investor);
  Coins total = 0;
  for (const auto& [backer, coins] : plan.allocations) {
    if (std::find(backers.begin(), backers.end(), backer) == backers.end()) {
      reject(ErrorCode::InvalidPlan, pid(backer) + " did not back " + pid(investor) + " this round");
    }
    if (coins < 0) reject(ErrorCode::InvalidPlan, "allocations must be non-negative");
    total += coins;
  }
  if (total > pot) {
    reject(ErrorCode::InvalidPlan, "allocations total " + std::to_string(total) + " exceeds pot " + std::to_string(pot));
  }
}

void Game::validate_purchases(PlayerId player, const PurchaseOrder& order) const {
  require_phase(Phase::Shop);
  require_player(player);
  if (state_.shopped[player.value]) reject(ErrorCode::DuplicateSubmission, pid(player) + " already shopped");
  for (int e : order.emojis) {
    if (!state_.config.has_emoji(e)) reject(ErrorCode::UnknownItem, "unknown emoji id " + std::to_string(e));
  }
  const Coins price = order_price(order, state_.config);
  if (price > state_.player(player).savings) {
    reject(ErrorCode::InsufficientFunds, "order costs " + std::to_string(price) + " but savings are " +
                                             std::to_string(state_.player(player).savings));
  }
}

bool Game::needs_action(PlayerId player) const {
  if (!state_.has_player(player)) return false;
  const auto i = player.value;
  switch (state_.phase) {
    case Phase::Choice:
      return true;
    case Phase::Invest:
      return !state_.invested[i] && state_.players[i].received_pool > 0;
    case Phase::Distribute:
      return !state_.distributed[i] && state_.pending_pots[i] > 0;
    case Phase::Shop:
      return !state_.shopped[i];
    case Phase::Over:
      return false;
  }
  return false;
}

std::vector<PlayerId> Game::pending_actors() const {
  std::vector<PlayerId> out;
  for (const auto& p : state_.players) {
    if (needs_action(p.id)) out.push_back(p.id);
  }
  return out;
}

// --- choice ----------------------------------------------------------------

const RoundLedger& Game::resolve_choice_phase(const std::map<PlayerId, ChoiceAction>& choices) {
  require_phase(Phase::Choice);
  for (const auto& [player, action] : choices) validate_choice(player, action);

  const auto& cfg = state_.config;
  const std::size_t n = state_.players.size();
  std::vector<ChoiceAction> actions(n);
  std::vector<PlayerId> order;
  Coins demand = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const PlayerId p{static_cast<std::uint32_t>(i)};
    auto it = choices.find(p);
    const bool defaulted = it == choices.end();
    actions[i] = defaulted ? ChoiceAction::take() : it->second;
    demand += actions[i].is_give() ? cfg.c_give : cfg.c_take;
    order.push_back(p);
    auto payload = nlohmann::json(actions[i]);
    payload["player"] = p;
    payload["defaulted"] = defaulted;
    emit(event_kind::kChoiceSubmitted, std::move(payload));
  }

  // An underfunded pile pays actions in a uniformly random order.
  const bool shortfall = demand > state_.central_pile;
  if (shortfall) state_.rng.shuffle(std::span<PlayerId>(order));

  auto& ledger = state_.ledger;
  for (PlayerId p : order) {
    const auto& action = actions[p.value];
    const Coins cost = action.is_give() ? cfg.c_give : cfg.c_take;
    if (cost > state_.central_pile) {
      ledger.unfunded.push_back(p);
      continue;
    }
    state_.central_pile -= cost;
    if (action.is_give()) {
      state_.players[action.target.value].received_pool += cost;
      ledger.gives[p] = action.target;
      ++ledger.supporters[action.target.value];
    } else {
      state_.players[p.value].savings += cost;
      ledger.takers.push_back(p);
    }
  }
  std::sort(ledger.takers.begin(), ledger.takers.end());
  std::sort(ledger.unfunded.begin(), ledger.unfunded.end());
  if (shortfall) state_.end_flag = true;

  auto gives = nlohmann::json::array();
  for (const auto& [giver, receiver] : ledger.gives) gives.push_back({giver, receiver});
  emit(event_kind::kChoicesResolved, {{"takers", ids_json(ledger.takers)},
                                      {"gives", gives},
                                      {"unfunded", ids_json(ledger.unfunded)},
                                      {"supporters", ledger.supporters},
                                      {"pile", state_.central_pile},
                                      {"end_flag", state_.end_flag}});
  state_.phase = Phase::Invest;
  emit(event_kind::kPhaseStarted, {{"phase", Phase::Invest}});
  return ledger;
}

// --- invest ----------------------------------------------------------------

Coins Game::default_investment(PlayerId investor) const {
  const Coins r = state_.player(investor).received_pool;
  return r >= state_.config.min_invest_threshold ? r : 0;
}

InvestmentOutcome Game::resolve_investment(PlayerId investor, Coins amount) {
  validate_investment(investor, amount);
  do_investment(investor, amount, false);
  return *state_.outcomes[investor.value];
}

void Game::do_investment(PlayerId investor, Coins amount, bool defaulted) {
  auto& player = state_.players[investor.value];
  const Coins r = player.received_pool;
  emit(event_kind::kInvestSubmitted, {{"player", investor}, {"amount", amount}, {"defaulted", defaulted}});

  InvestmentOutcome out;
  out.investor = investor;
  out.invested = amount;
  out.available = r;

  const Coins prior_savings = player.savings;
  player.savings += r - amount;
  player.received_pool = 0;
  state_.invested[investor.value] = true;

  if (amount > 0) {
    // The stake goes back to the pile; payouts are drawn from it.
    state_.central_pile += amount;
    const Card card = state_.card_source(state_.rng);
    out.card = card;
    out.value = card_value(card, state_.config);
    const auto face = face_of(card);
    if (!face || player.pcards[*face] > 0) {
      out.is_protected = face.has_value();
      Coins pay = payout(amount, out.value, state_.config);
      if (pay > state_.central_pile) {
        pay = state_.central_pile;
        out.capped = true;
        state_.end_flag = true;
      }
      state_.central_pile -= pay;
      state_.pending_pots[investor.value] = pay;
      out.payout = pay;
    } else {
      const Coins lost = std::min(penalty(prior_savings, r, amount, out.value), player.savings);
      player.savings -= lost;
      state_.central_pile += lost;
      out.penalty = lost;
    }
  }
  state_.outcomes[investor.value] = out;
  auto payload = nlohmann::json(out);
  payload["pile"] = state_.central_pile;
  emit(event_kind::kInvestmentResolved, std::move(payload));
}

void Game::close_invest_phase() {
  require_phase(Phase::Invest);
  for (const auto& p : state_.players) {
    if (!state_.invested[p.id.value] && p.received_pool > 0) do_investment(p.id, default_investment(p.id), true);
  }
  state_.phase = Phase::Distribute;
  emit(event_kind::kPhaseStarted, {{"phase", Phase::Distribute}});
}

// --- distribute ------------------------------------------------------------

DistributionPlan Game::default_distribution(PlayerId investor) const {
  require_player(investor);
  return DistributionPlan::even_split(state_.pending_pots[investor.value], state_.ledger.backers_of(investor));
}

void Game::apply_distribution(PlayerId investor, const DistributionPlan& plan) {
  validate_distribution(investor, plan);
  do_distribution(investor, plan, false);
}

void Game::do_distribution(PlayerId investor, const DistributionPlan& plan, bool defaulted) {
  emit(event_kind::kDistributionSubmitted,
       {{"investor", investor}, {"allocations", plan}, {"defaulted", defaulted}});
  const Coins pot = state_.pending_pots[investor.value];
  const Coins given = plan.total();
  auto& shares = state_.shares[investor];
  for (PlayerId backer : state_.ledger.backers_of(investor)) {
    auto it = plan.allocations.find(backer);
    const Coins coins = it == plan.allocations.end() ? 0 : it->second;
    state_.players[backer.value].savings += coins;
    shares[backer] = coins;
  }
  state_.players[investor.value].savings += pot - given;
  state_.pending_pots[investor.value] = 0;
  state_.distributed[investor.value] = true;
  emit(event_kind::kDistributionApplied,
       {{"investor", investor}, {"pot", pot}, {"allocations", allocations_json(shares)}, {"kept", pot - given}});
}

void Game::close_distribute_phase() {
  require_phase(Phase::Distribute);
  for (const auto& p : state_.players) {
    if (!state_.distributed[p.id.value] && state_.pending_pots[p.id.value] > 0) {
      do_distribution(p.id, default_distribution(p.id), true);
    }
  }
  state_.phase = Phase::Shop;
  emit(event_kind::kPhaseStarted, {{"phase", Phase::Shop}});
}

// --- shop ------------------------------------------------------------------

void Game::apply_purchases(PlayerId player, const PurchaseOrder& order) {
  validate_purchases(player, order);
  const Coins price = order_price(order, state_.config);
  emit(event_kind::kPurchaseSubmitted, {{"player", player}, {"order", order}});
  auto& p = state_.players[player.value];
  p.savings -= price;
  if (state_.config.purchase_sink == PurchaseSink::Burn) {
    state_.burned += price;
  } else {
    state_.central_pile += price;
  }
  for (Face f : order.pcards) ++p.pcards[f];
  for (int e : order.emojis) p.emojis.insert(std::upper_bound(p.emojis.begin(), p.emojis.end(), e), e);
  state_.shopped[player.value] = true;
  emit(event_kind::kPurchaseApplied, {{"player", player}, {"spent", price}, {"pile", state_.central_pile}, {"burned", state_.burned}});
}

Termination Game::close_shop_phase() {
  require_phase(Phase::Shop);
  for (const auto& [player, face] : enforce_pcard_maintenance(state_, state_.ledger)) {
    emit(event_kind::kPcardLost, {{"player", player}, {"face", face}, {"remaining", state_.players[player.value].pcards[face]}});
  }
  auto savings = nlohmann::json::array();
  for (const auto& p : state_.players) savings.push_back(p.savings);
  emit(event_kind::kRoundEnded, {{"pile", state_.central_pile},
                                 {"total_savings", state_.total_savings()},
                                 {"burned", state_.burned},
                                 {"supporters", state_.ledger.supporters},
                                 {"savings", savings}});
  const Termination t = check_termination(state_);
  if (t.over) {
    finish(t.reason);
  } else {
    ++state_.round;
    state_.phase = Phase::Choice;
    start_round();
  }
  return t;
}

void Game::close_phase() {
  switch (state_.phase) {
    case Phase::Invest:
      close_invest_phase();
      return;
    case Phase::Distribute:
      close_distribute_phase();
      return;
    case Phase::Shop:
      close_shop_phase();
      return;
    case Phase::Choice:
      resolve_choice_phase({});
      return;
    case Phase::Over:
      reject(ErrorCode::WrongPhase, "game is over");
  }
}

void Game::finish(EndReason reason) {
  state_.phase = Phase::Over;
  state_.end_reason = reason;
  auto savings = nlohmann::json::array();
  for (const auto& p : state_.players) savings.push_back(p.savings);
  emit(event_kind::kGameOver, {{"reason", reason},
                               {"rounds", state_.round},
                               {"pile", state_.central_pile},
                               {"burned", state_.burned},
                               {"final_savings", savings}});
}

void Game::abort() {
  if (over()) return;
  // Coins still in flight are returned to their owners' savings first.
  for (auto& p : state_.players) {
    p.savings += p.received_pool;
    p.received_pool = 0;
    p.savings += state_.pending_pots[p.id.value];
    state_.pending_pots[p.id.value] = 0;
  }
  finish(EndReason::Aborted);
}

}  // namespace trustya
