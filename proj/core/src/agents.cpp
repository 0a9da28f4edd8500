#include "trustya/agents.hpp"

#include <algorithm>
#include <array>

namespace trustya::agents {
namespace {

constexpr std::array<std::string_view, 9> kKindNames{"BadSharing", "Taking",        "LuckySharing",
                                                     "Smart",      "SmartRandom",   "Smarter",
                                                     "SmarterRandom", "Status",     "SmartStatus"};

PlayerId pick(const std::vector<PlayerId>& candidates, Rng& rng) {
  return candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
}

std::vector<PlayerId> other_ids(const PlayerView& view) {
  std::vector<PlayerId> ids;
  for (const auto& o : view.others) ids.push_back(o.id);
  return ids;
}

ChoiceAction smart_choice(const BotContext& ctx, const PlayerView& view, const SmartMemory& memory, Rng& rng) {
  const bool random_variant = ctx.kind == BotKind::SmartRandom || ctx.kind == BotKind::SmarterRandom;
  if (random_variant && rng.bernoulli(kRandomGiveProbability)) return ChoiceAction::give(pick(other_ids(view), rng));
  if (!memory.untried().empty()) return ChoiceAction::give(pick(memory.untried(), rng));

  std::vector<PlayerId> best;
  double best_estimate = 0.0;
  for (const auto& o : view.others) {
    const double e = memory.estimate(o.id).value_or(0.0);
    if (best.empty() || e > best_estimate) {
      best = {o.id};
      best_estimate = e;
    } else if (e == best_estimate) {
      best.push_back(o.id);
    }
  }
  return ChoiceAction::give(pick(best, rng));
}

ChoiceAction status_choice(const PlayerView& view, Rng& rng) {
  // The viewer competes too: when it holds the most symbols it takes.
  std::vector<PlayerId> best{view.self.id};
  std::size_t most = view.self.emojis.size();
  for (const auto& o : view.others) {
    if (o.emojis.size() > most) {
      best = {o.id};
      most = o.emojis.size();
    } else if (o.emojis.size() == most) {
      best.push_back(o.id);
    }
  }
  const PlayerId target = pick(best, rng);
  return target == view.self.id ? ChoiceAction::take() : ChoiceAction::give(target);
}

std::optional<Face> next_pcard(const PlayerView& view, const GameConfig& config) {
  for (Face f : kFaces) {
    if (view.self.pcards[f] == 0) {
      if (config.pcard_costs[f] <= view.self.savings) return f;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(BotKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::optional<BotKind> bot_kind_from_string(std::string_view name) {
  auto it = std::find(kKindNames.begin(), kKindNames.end(), name);
  if (it == kKindNames.end()) return std::nullopt;
  return static_cast<BotKind>(it - kKindNames.begin());
}

bool is_coordinated(BotKind kind) { return kind == BotKind::BadSharing || kind == BotKind::LuckySharing; }

bool is_smart_family(BotKind kind) {
  return kind == BotKind::Smart || kind == BotKind::SmartRandom || kind == BotKind::Smarter ||
         kind == BotKind::SmarterRandom;
}

bool is_status_family(BotKind kind) { return kind == BotKind::Status || kind == BotKind::SmartStatus; }

SmartMemory::SmartMemory(PlayerId self, std::size_t n_players) {
  for (std::uint32_t i = 0; i < n_players; ++i) {
    if (i != self.value) untried_.push_back(PlayerId{i});
  }
}

void SmartMemory::record(PlayerId target, Coins given, Coins returned) {
  auto& l = per_target_[target];
  l.given += given;
  l.returned += returned;
  if (given > 0) std::erase(untried_, target);
}

std::optional<double> SmartMemory::estimate(PlayerId target) const {
  auto it = per_target_.find(target);
  if (it == per_target_.end() || it->second.given <= 0) return std::nullopt;
  return static_cast<double>(it->second.returned) / static_cast<double>(it->second.given);
}

Coins SmartMemory::given(PlayerId target) const {
  auto it = per_target_.find(target);
  return it == per_target_.end() ? 0 : it->second.given;
}

Coins SmartMemory::returned(PlayerId target) const {
  auto it = per_target_.find(target);
  return it == per_target_.end() ? 0 : it->second.returned;
}

bool is_leader(const BotContext& ctx) { return ctx.leader && *ctx.leader == ctx.self; }

ChoiceAction decide_choice(const BotContext& ctx, const PlayerView& view, const SmartMemory& memory, Rng& rng) {
  switch (ctx.kind) {
    case BotKind::Taking:
      return ChoiceAction::take();
    case BotKind::BadSharing:
    case BotKind::LuckySharing:
      if (!ctx.leader || is_leader(ctx)) return ChoiceAction::take();
      return ChoiceAction::give(*ctx.leader);
    case BotKind::Smart:
    case BotKind::SmartRandom:
    case BotKind::Smarter:
    case BotKind::SmarterRandom:
      return smart_choice(ctx, view, memory, rng);
    case BotKind::Status:
    case BotKind::SmartStatus:
      return status_choice(view, rng);
  }
  return ChoiceAction::take();
}

Coins decide_invest(const BotContext& ctx, const PlayerView& view, const GameConfig& config) {
  if (ctx.kind == BotKind::BadSharing && is_leader(ctx)) return 0;
  const Coins r = view.self.received_pool;
  return r >= config.min_invest_threshold ? r : 0;
}

DistributionPlan decide_distribution(const BotContext&, const PlayerView& view, Coins pot) {
  return DistributionPlan::even_split_with_investor(pot, view.self.givers);
}

PurchaseOrder decide_purchases(const BotContext& ctx, const PlayerView& view, const GameConfig& config) {
  PurchaseOrder order;
  const bool buys_pcards = is_smart_family(ctx.kind) || (ctx.kind == BotKind::LuckySharing && is_leader(ctx));
  if (buys_pcards) {
    if (auto face = next_pcard(view, config)) {
      const bool cautious = ctx.kind == BotKind::Smarter || ctx.kind == BotKind::SmarterRandom;
      const auto supporters = static_cast<int>(view.self.givers.size());
      if (!cautious || supporters >= config.pcard_threshold(*face)) order.pcards.push_back(*face);
    }
  } else if (is_status_family(ctx.kind)) {
    const int emoji = config.cheapest_emoji();
    const bool wants = ctx.kind == BotKind::Status || view.self.received_this_round > 0;
    if (wants && config.emoji_price(emoji) <= view.self.savings) order.emojis.push_back(emoji);
  }
  return order;
}

void update_memory(SmartMemory& memory, const PlayerView& view, const GameConfig& config) {
  if (!view.self.choice || !view.self.choice->is_give() || !view.self.choice_funded) return;
  const PlayerId target = view.self.choice->target;
  Coins returned = 0;
  if (const auto* o = view.other(target); o && o->share_received) returned = *o->share_received;
  memory.record(target, config.c_give, returned);
}

Bot::Bot(BotContext ctx, std::size_t n_players, std::uint64_t seed)
    : ctx_(ctx), memory_(ctx.self, n_players), rng_(seed) {}

PurchaseOrder Bot::shop(const PlayerView& view, const GameConfig& config) {
  if (is_smart_family(ctx_.kind)) update_memory(memory_, view, config);
  return decide_purchases(ctx_, view, config);
}

std::vector<std::optional<BotContext>> assign_roster(const std::vector<std::optional<BotKind>>& seats) {
  std::vector<std::optional<BotContext>> out;
  std::map<BotKind, PlayerId> leaders;
  for (std::uint32_t i = 0; i < seats.size(); ++i) {
    if (seats[i] && is_coordinated(*seats[i])) leaders.try_emplace(*seats[i], PlayerId{i});
  }
  for (std::uint32_t i = 0; i < seats.size(); ++i) {
    if (!seats[i]) {
      out.emplace_back();
      continue;
    }
    BotContext ctx{*seats[i], PlayerId{i}, std::nullopt};
    if (auto it = leaders.find(*seats[i]); it != leaders.end()) ctx.leader = it->second;
    out.push_back(ctx);
  }
  return out;
}

}  // namespace trustya::agents
