#include "trustya/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "trustya/view.hpp"

namespace trustya::sim {
namespace {

using agents::BotKind;

[[noreturn]] void invalid(const std::string& what) { throw GameError(ErrorCode::InvalidConfig, what); }

constexpr std::uint64_t kBotStreamBase = 0x626f74ULL << 16;

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

BotKind parse_kind(const std::string& name) {
  auto kind = agents::bot_kind_from_string(name);
  if (!kind) invalid("unknown bot kind '" + name + "'");
  return *kind;
}

}  // namespace

// ---------------------------------------------------------------------------
// SimSpec

void SimSpec::validate() const {
  config.validate();
  if (seeds < 1) invalid("seeds must be at least 1");
  int total = 0;
  for (const auto& entry : roster) {
    if (entry.count < 0) invalid("roster counts must be non-negative");
    total += entry.count;
  }
  if (total != config.n_players) {
    invalid("roster has " + std::to_string(total) + " bots but n_players is " + std::to_string(config.n_players));
  }
}

std::vector<BotKind> SimSpec::seats() const {
  std::vector<BotKind> out;
  for (const auto& entry : roster) out.insert(out.end(), static_cast<std::size_t>(entry.count), entry.kind);
  return out;
}

std::string SimSpec::roster_label() const {
  std::string label;
  for (const auto& entry : roster) {
    if (entry.count == 0) continue;
    if (!label.empty()) label += '+';
    label += std::string(agents::to_string(entry.kind)) + 'x' + std::to_string(entry.count);
  }
  return label;
}

std::vector<RosterEntry> parse_roster(const nlohmann::json& doc) {
  std::vector<RosterEntry> roster;
  try {
    if (doc.is_object()) {
      for (const auto& [kind, count] : doc.items()) roster.push_back({parse_kind(kind), count.get<int>()});
    } else if (doc.is_array()) {
      for (const auto& entry : doc) {
        roster.push_back({parse_kind(entry.at("kind").get<std::string>()), entry.at("count").get<int>()});
      }
    } else {
      invalid("roster must be an object or an array");
    }
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("malformed roster: ") + e.what());
  }
  for (const auto& entry : roster) {
    if (entry.count < 0) invalid("roster counts must be non-negative");
  }
  return roster;
}

std::uint64_t bot_seed(std::uint64_t game_seed, PlayerId seat) {
  return derive_seed(game_seed, kBotStreamBase + seat.value);
}

SimSpec parse_spec(const nlohmann::json& doc) {
  if (!doc.is_object()) invalid("spec must be a JSON object");
  SimSpec spec;
  nlohmann::json config_doc = nlohmann::json::object();
  for (const auto& [key, value] : doc.items()) {
    if (key == "roster") {
      spec.roster = parse_roster(value);
    } else if (key == "seeds") {
      if (!value.is_number_integer()) invalid("seeds must be an integer");
      spec.seeds = value.get<int>();
    } else if (key == "base_seed") {
      if (!value.is_number_unsigned()) invalid("base_seed must be a non-negative integer");
      spec.base_seed = value.get<std::uint64_t>();
    } else {
      config_doc[key] = value;
    }
  }
  spec.config = config_doc.get<GameConfig>();
  if (!doc.contains("base_seed")) spec.base_seed = spec.config.seed;
  spec.validate();
  return spec;
}

SimSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open spec '" + path.string() + "'");
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) invalid("spec '" + path.string() + "' is not valid JSON");
  return parse_spec(doc);
}

// ---------------------------------------------------------------------------
// Running games

std::vector<agents::Bot> make_bots(const std::vector<BotKind>& seats, std::uint64_t game_seed) {
  std::vector<std::optional<BotKind>> kinds(seats.begin(), seats.end());
  std::vector<agents::Bot> bots;
  for (const auto& ctx : agents::assign_roster(kinds)) {
    bots.emplace_back(*ctx, seats.size(), bot_seed(game_seed, ctx->self));
  }
  return bots;
}

void play_to_end(Game& game, std::vector<agents::Bot>& bots) {
  const GameConfig& config = game.config();
  while (!game.over()) {
    switch (game.phase()) {
      case Phase::Choice: {
        std::map<PlayerId, ChoiceAction> choices;
        for (auto& bot : bots) choices[bot.id()] = bot.choose(view_for(game.state(), bot.id()));
        game.resolve_choice_phase(choices);
        break;
      }
      case Phase::Invest:
        for (PlayerId p : game.pending_actors()) {
          game.resolve_investment(p, bots[p.value].invest(view_for(game.state(), p), config));
        }
        game.close_invest_phase();
        break;
      case Phase::Distribute:
        for (PlayerId p : game.pending_actors()) {
          game.apply_distribution(p, bots[p.value].distribute(view_for(game.state(), p)));
        }
        game.close_distribute_phase();
        break;
      case Phase::Shop:
        for (auto& bot : bots) game.apply_purchases(bot.id(), bot.shop(view_for(game.state(), bot.id()), config));
        game.close_shop_phase();
        break;
      case Phase::Over:
        break;
    }
  }
}

GameRun run_game(const GameConfig& config, const std::vector<BotKind>& seats) {
  std::vector<std::string> kinds;
  for (BotKind k : seats) kinds.emplace_back(agents::to_string(k));
  Game game(config, kinds);
  auto bots = make_bots(seats, config.seed);
  play_to_end(game, bots);
  return {game.log(), metrics::summarize(game.log().events())};
}

Aggregate aggregate(const std::vector<metrics::GameSummary>& games) {
  Aggregate a;
  a.games = games.size();
  if (games.empty()) return a;
  for (const auto& g : games) {
    a.mean_gini += g.gini;
    a.mean_earnings += g.earnings_fraction;
  }
  const auto n = static_cast<double>(games.size());
  a.mean_gini /= n;
  a.mean_earnings /= n;
  if (games.size() > 1) {
    for (const auto& g : games) {
      a.stddev_gini += (g.gini - a.mean_gini) * (g.gini - a.mean_gini);
      a.stddev_earnings += (g.earnings_fraction - a.mean_earnings) * (g.earnings_fraction - a.mean_earnings);
    }
    a.stddev_gini = std::sqrt(a.stddev_gini / (n - 1));
    a.stddev_earnings = std::sqrt(a.stddev_earnings / (n - 1));
  }
  return a;
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10f", x);
  return buf;
}

std::string games_csv_header() { return "seed,roster,gini,earnings_fraction,rounds,end_reason"; }

std::string games_csv_row(const metrics::GameSummary& game, const std::string& roster) {
  std::ostringstream row;
  row << game.seed << ',' << roster << ',' << format_real(game.gini) << ',' << format_real(game.earnings_fraction)
      << ',' << game.rounds << ',' << to_string(game.end_reason);
  return row.str();
}

BatchResult run_batch(const SimSpec& spec) {
  spec.validate();
  BatchResult result;
  result.roster = spec.roster_label();
  const auto seats = spec.seats();
  for (int k = 0; k < spec.seeds; ++k) {
    GameConfig config = spec.config;
    config.seed = spec.base_seed + static_cast<std::uint64_t>(k);
    auto run = run_game(config, seats);
    result.games.push_back(std::move(run.summary));
    result.logs.push_back(run.log.to_jsonl());
  }
  result.aggregate = aggregate(result.games);
  if (!spec.out_dir.empty()) write_batch(result, spec.out_dir);
  return result;
}

void write_batch(const BatchResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "logs");
  std::string games = games_csv_header() + "\n";
  std::string scatter = "gini,earnings_fraction\n";
  for (std::size_t i = 0; i < result.games.size(); ++i) {
    const auto& g = result.games[i];
    games += games_csv_row(g, result.roster) + "\n";
    scatter += format_real(g.gini) + "," + format_real(g.earnings_fraction) + "\n";
    write_file(dir / "logs" / ("game_" + std::to_string(g.seed) + ".jsonl"), result.logs[i]);
  }
  const auto& a = result.aggregate;
  std::string agg = "roster,games,mean_gini,stddev_gini,mean_earnings_fraction,stddev_earnings_fraction\n";
  agg += result.roster + "," + std::to_string(a.games) + "," + format_real(a.mean_gini) + "," +
         format_real(a.stddev_gini) + "," + format_real(a.mean_earnings) + "," + format_real(a.stddev_earnings) + "\n";
  write_file(dir / "games.csv", games);
  write_file(dir / "scatter.csv", scatter);
  write_file(dir / "aggregate.csv", agg);
}

std::vector<Baseline> baseline_specs(const GameConfig& base, int seeds, std::uint64_t base_seed) {
  std::vector<Baseline> out;
  for (BotKind kind : agents::kAllBotKinds) {
    Baseline b;
    b.name = std::string(agents::to_string(kind));
    b.spec.config = base;
    b.spec.roster = {{kind, base.n_players}};
    b.spec.seeds = seeds;
    b.spec.base_seed = base_seed;
    out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replay

namespace {

class Replayer {
 public:
  explicit Replayer(const ParsedLog& log) : log_(log) {}

  ReplayReport run() {
    ReplayReport report;
    report.events = log_.events.size();
    if (log_.events.empty()) throw GameError(ErrorCode::TruncatedLog, "empty log");
    const Event& created = log_.events.front();
    if (created.kind != event_kind::kGameCreated) {
      report.divergence = Divergence{1, "log does not start with game_created", log_.lines.front(), {}};
      return report;
    }
    try {
      const GameConfig config = parse_config(created.payload.at("config"));
      std::vector<std::string> kinds;
      for (const auto& p : created.payload.at("players")) kinds.push_back(p.at("kind").get<std::string>());
      game_.emplace(config, kinds);
    } catch (const std::exception& e) {
      report.divergence = Divergence{1, std::string("cannot rebuild game: ") + e.what(), log_.lines.front(), {}};
      return report;
    }

    for (std::size_t k = 0; k < log_.events.size() && !report.divergence; ++k) {
      try {
        step(log_.events[k]);
      } catch (const std::exception& e) {
        report.divergence = Divergence{k + 1, std::string("engine rejected logged input: ") + e.what(),
                                       log_.lines[k], {}};
        break;
      }
      report.divergence = compare();
    }
    if (!report.divergence && game_->log().size() != log_.events.size()) {
      const std::size_t line = std::min(game_->log().size(), log_.events.size()) + 1;
      report.divergence = Divergence{line, "event count differs", {}, {}};
    }
    if (log_.chain_break && (!report.divergence || *log_.chain_break < report.divergence->line)) {
      const std::size_t line = *log_.chain_break;
      report.divergence = Divergence{line, "hash chain mismatch", log_.lines[line - 1], {}};
    }
    // A log of a game still in progress replays fine but has no summary.
    if (!report.divergence && game_->over()) report.summary = metrics::summarize(log_.events);
    return report;
  }

 private:
  void step(const Event& e) {
    Game& game = *game_;
    const auto& p = e.payload;
    const auto defaulted = [&] { return p.value("defaulted", false); };
    if (e.kind == event_kind::kChoiceSubmitted) {
      if (!defaulted()) choices_[p.at("player").get<PlayerId>()] = p.get<ChoiceAction>();
    } else if (e.kind == event_kind::kChoicesResolved) {
      if (game.phase() == Phase::Choice) {
        game.resolve_choice_phase(choices_);
        choices_.clear();
      }
    } else if (e.kind == event_kind::kInvestSubmitted) {
      if (!defaulted()) game.resolve_investment(p.at("player").get<PlayerId>(), p.at("amount").get<Coins>());
    } else if (e.kind == event_kind::kDistributionSubmitted) {
      if (!defaulted()) {
        game.apply_distribution(p.at("investor").get<PlayerId>(), p.at("allocations").get<DistributionPlan>());
      }
    } else if (e.kind == event_kind::kPurchaseSubmitted) {
      game.apply_purchases(p.at("player").get<PlayerId>(), p.at("order").get<PurchaseOrder>());
    } else if (e.kind == event_kind::kPhaseStarted) {
      const auto phase = p.at("phase").get<Phase>();
      if (phase == Phase::Distribute && game.phase() == Phase::Invest) game.close_invest_phase();
      if (phase == Phase::Shop && game.phase() == Phase::Distribute) game.close_distribute_phase();
    } else if (e.kind == event_kind::kRoundStarted) {
      if (game.phase() == Phase::Shop) game.close_shop_phase();
    } else if (e.kind == event_kind::kGameOver) {
      if (p.at("reason").get<EndReason>() == EndReason::Aborted) {
        if (!game.over()) game.abort();
      } else if (game.phase() == Phase::Shop) {
        game.close_shop_phase();
      }
    }
  }

  std::optional<Divergence> compare() {
    const auto& regenerated = game_->log().events();
    for (; compared_ < regenerated.size(); ++compared_) {
      std::string actual = serialize_event(regenerated[compared_]);
      if (compared_ >= log_.lines.size()) {
        return Divergence{compared_ + 1, "engine produced events beyond the end of the log", {}, actual};
      }
      if (actual != log_.lines[compared_]) {
        return Divergence{compared_ + 1, "event differs from re-execution", log_.lines[compared_], actual};
      }
    }
    return std::nullopt;
  }

  const ParsedLog& log_;
  std::optional<Game> game_;
  std::map<PlayerId, ChoiceAction> choices_;
  std::size_t compared_ = 0;
};

}  // namespace

ReplayReport replay(const ParsedLog& log) { return Replayer(log).run(); }

ReplayReport replay_file(const std::filesystem::path& path) { return replay(read_log_file(path.string())); }

}  // namespace trustya::sim
