#include "trustya/view.hpp"

#include <algorithm>

namespace trustya {

const OtherView* PlayerView::other(PlayerId id) const {
  auto it = std::find_if(others.begin(), others.end(), [&](const OtherView& o) { return o.id == id; });
  return it == others.end() ? nullptr : &*it;
}

PlayerView view_for(const GameState& state, PlayerId player) {
  const PlayerState& me = state.player(player);
  PlayerView view;
  view.round = state.round;
  view.phase = state.phase;
  view.central_pile = state.central_pile;

  auto& self = view.self;
  self.id = me.id;
  self.name = me.name;
  self.savings = me.savings;
  self.received_pool = me.received_pool;
  self.givers = state.ledger.backers_of(player);
  self.received_this_round = static_cast<Coins>(self.givers.size()) * state.config.c_give;
  self.pcards = me.pcards;
  self.emojis = me.emojis;
  const auto& ledger = state.ledger;
  std::optional<PlayerId> backed;
  if (auto it = ledger.gives.find(player); it != ledger.gives.end()) {
    self.choice = ChoiceAction::give(it->second);
    self.choice_funded = true;
    backed = it->second;
  } else if (std::find(ledger.takers.begin(), ledger.takers.end(), player) != ledger.takers.end()) {
    self.choice = ChoiceAction::take();
    self.choice_funded = true;
  }
  if (player.value < state.outcomes.size()) self.investment = state.outcomes[player.value];
  if (player.value < state.pending_pots.size()) self.pending_pot = state.pending_pots[player.value];

  for (const auto& p : state.players) {
    if (p.id == player) continue;
    OtherView other;
    other.id = p.id;
    other.name = p.name;
    other.emojis = p.emojis;
    if (backed && *backed == p.id) {
      if (const auto& outcome = state.outcomes[p.id.value]) {
        other.investment = RevealedInvestment{outcome->invested, outcome->card,    outcome->value,
                                              outcome->payout,   outcome->penalty, outcome->is_protected};
      }
      if (auto s = state.shares.find(p.id); s != state.shares.end()) {
        if (auto mine = s->second.find(player); mine != s->second.end()) other.share_received = mine->second;
      }
    }
    view.others.push_back(std::move(other));
  }
  return view;
}

void to_json(nlohmann::json& j, const RevealedInvestment& r) {
  j = {{"invested", r.invested},
       {"card", r.card ? nlohmann::json(*r.card) : nlohmann::json(nullptr)},
       {"value", r.value},
       {"payout", r.payout},
       {"penalty", r.penalty},
       {"protected", r.is_protected}};
}

void to_json(nlohmann::json& j, const SelfView& s) {
  j = {{"id", s.id},
       {"name", s.name},
       {"savings", s.savings},
       {"received_pool", s.received_pool},
       {"received_this_round", s.received_this_round},
       {"givers", s.givers},
       {"pcards", s.pcards},
       {"emojis", s.emojis},
       {"choice", s.choice ? nlohmann::json(*s.choice) : nlohmann::json(nullptr)},
       {"choice_funded", s.choice_funded},
       {"investment", s.investment ? nlohmann::json(*s.investment) : nlohmann::json(nullptr)},
       {"pending_pot", s.pending_pot}};
}

void to_json(nlohmann::json& j, const OtherView& o) {
  j = {{"id", o.id}, {"name", o.name}, {"emojis", o.emojis}};
  if (o.investment) j["investment"] = *o.investment;
  if (o.share_received) j["share_received"] = *o.share_received;
}

void to_json(nlohmann::json& j, const PlayerView& v) {
  j = {{"round", v.round}, {"phase", v.phase}, {"central_pile", v.central_pile}, {"self", v.self}, {"others", v.others}};
}

}  // namespace trustya
