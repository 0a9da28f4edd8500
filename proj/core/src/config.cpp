#include "trustya/config.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <string_view>

#include "trustya/detail/fnv.hpp"

namespace trustya {
namespace detail {

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace detail

namespace {

constexpr std::size_t kCatalogSize = 10;

constexpr std::array<std::string_view, 18> kConfigKeys{
    "n_players",     "c_ppp",          "c_give",           "c_take",     "v_jack",
    "v_queen",       "v_king",         "round_limit",      "termination_prob",
    "hard_stop",     "min_invest_threshold", "pcard_costs", "pcard_thresholds",
    "emoji_catalog", "equal_price_mode",     "alpha_override", "purchase_sink", "seed"};

[[noreturn]] void invalid(const std::string& what) { throw GameError(ErrorCode::InvalidConfig, what); }

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

std::vector<EmojiItem> default_emoji_catalog() {
  std::vector<EmojiItem> catalog;
  for (int rank = 1; rank <= static_cast<int>(kCatalogSize); ++rank) catalog.push_back({rank, Coins{50} * rank});
  return catalog;
}

void GameConfig::validate() const {
  if (n_players < 3) invalid("a game needs 3 or more players");
  if (c_ppp <= 0) invalid("c_ppp must be positive");
  if (c_give <= 0) invalid("c_give must be positive");
  if (c_take <= 0) invalid("c_take must be positive");
  if (v_jack < 1) invalid("face values must be at least 1");
  if (!(v_jack <= v_queen && v_queen <= v_king)) invalid("face values must satisfy v_jack <= v_queen <= v_king");
  if (round_limit < 1) invalid("round_limit must be at least 1");
  if (!(termination_prob >= 0.0 && termination_prob <= 1.0)) invalid("termination_prob must lie in [0, 1]");
  if (min_invest_threshold < 0) invalid("min_invest_threshold must be non-negative");
  if (pcard_costs[Face::Jack] <= 0) invalid("P-card costs must be positive");
  if (!(pcard_costs[Face::Jack] < pcard_costs[Face::Queen] && pcard_costs[Face::Queen] < pcard_costs[Face::King])) {
    invalid("P-card costs must be strictly increasing J < Q < K");
  }
  if (pcard_thresholds) {
    for (Face f : kFaces) {
      if ((*pcard_thresholds)[f] < 0) invalid("P-card thresholds must be non-negative");
    }
  }
  if (emoji_catalog.size() != kCatalogSize) invalid("emoji_catalog must list exactly 10 symbols");
  std::set<int> ids;
  for (const auto& item : emoji_catalog) {
    if (item.price <= 0) invalid("emoji prices must be positive");
    if (!ids.insert(item.id).second) invalid("duplicate emoji id " + std::to_string(item.id));
  }
  if (alpha_override && !(*alpha_override > 0.0)) invalid("alpha_override must be positive");
}

double GameConfig::alpha() const { return alpha_override ? *alpha_override : 50.0 / n_players; }

int GameConfig::face_value(Face face) const {
  switch (face) {
    case Face::Jack:
      return v_jack;
    case Face::Queen:
      return v_queen;
    case Face::King:
      return v_king;
  }
  return 0;
}

int GameConfig::pcard_threshold(Face face) const {
  if (pcard_thresholds) return (*pcard_thresholds)[face];
  switch (face) {
    case Face::Jack:
      return 1;
    case Face::Queen:
      return ceil_div(n_players, 4);
    case Face::King:
      return ceil_div(n_players, 2);
  }
  return 0;
}

bool GameConfig::has_emoji(int emoji_id) const {
  return std::any_of(emoji_catalog.begin(), emoji_catalog.end(), [&](const EmojiItem& e) { return e.id == emoji_id; });
}

Coins GameConfig::emoji_price(int emoji_id) const {
  auto it = std::find_if(emoji_catalog.begin(), emoji_catalog.end(),
                         [&](const EmojiItem& e) { return e.id == emoji_id; });
  if (it == emoji_catalog.end()) throw GameError(ErrorCode::UnknownItem, "unknown emoji id " + std::to_string(emoji_id));
  return equal_price_mode ? emoji_catalog.front().price : it->price;
}

int GameConfig::cheapest_emoji() const {
  auto it = std::min_element(emoji_catalog.begin(), emoji_catalog.end(), [&](const EmojiItem& a, const EmojiItem& b) {
    return emoji_price(a.id) < emoji_price(b.id);
  });
  return it->id;
}

void to_json(nlohmann::json& j, const GameConfig& c) {
  nlohmann::json catalog = nlohmann::json::array();
  for (const auto& item : c.emoji_catalog) catalog.push_back({{"id", item.id}, {"price", item.price}});
  j = nlohmann::json{
      {"n_players", c.n_players},
      {"c_ppp", c.c_ppp},
      {"c_give", c.c_give},
      {"c_take", c.c_take},
      {"v_jack", c.v_jack},
      {"v_queen", c.v_queen},
      {"v_king", c.v_king},
      {"round_limit", c.round_limit},
      {"termination_prob", c.termination_prob},
      {"hard_stop", c.hard_stop},
      {"min_invest_threshold", c.min_invest_threshold},
      {"pcard_costs", c.pcard_costs},
      {"pcard_thresholds", c.pcard_thresholds ? nlohmann::json(*c.pcard_thresholds) : nlohmann::json(nullptr)},
      {"emoji_catalog", catalog},
      {"equal_price_mode", c.equal_price_mode},
      {"alpha_override", c.alpha_override ? nlohmann::json(*c.alpha_override) : nlohmann::json(nullptr)},
      {"purchase_sink", c.purchase_sink == PurchaseSink::Pile ? "pile" : "burn"},
      {"seed", c.seed},
  };
}

void from_json(const nlohmann::json& j, GameConfig& c) {
  if (!j.is_object()) invalid("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      invalid("unknown config key '" + key + "'");
    }
  }
  GameConfig out;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("n_players", out.n_players);
    get("c_ppp", out.c_ppp);
    get("c_give", out.c_give);
    get("c_take", out.c_take);
    get("v_jack", out.v_jack);
    get("v_queen", out.v_queen);
    get("v_king", out.v_king);
    get("round_limit", out.round_limit);
    get("termination_prob", out.termination_prob);
    get("hard_stop", out.hard_stop);
    get("min_invest_threshold", out.min_invest_threshold);
    get("pcard_costs", out.pcard_costs);
    if (j.contains("pcard_thresholds") && !j.at("pcard_thresholds").is_null()) {
      out.pcard_thresholds = j.at("pcard_thresholds").get<PerFace<int>>();
    }
    if (j.contains("emoji_catalog")) {
      out.emoji_catalog.clear();
      for (const auto& item : j.at("emoji_catalog")) {
        if (!item.is_object() || item.size() != 2) invalid("emoji_catalog entries are {id, price}");
        out.emoji_catalog.push_back({item.at("id").get<int>(), item.at("price").get<Coins>()});
      }
    }
    get("equal_price_mode", out.equal_price_mode);
    if (j.contains("alpha_override") && !j.at("alpha_override").is_null()) {
      out.alpha_override = j.at("alpha_override").get<double>();
    }
    if (j.contains("purchase_sink")) {
      const auto sink = j.at("purchase_sink").get<std::string>();
      if (sink == "pile") {
        out.purchase_sink = PurchaseSink::Pile;
      } else if (sink == "burn") {
        out.purchase_sink = PurchaseSink::Burn;
      } else {
        invalid("purchase_sink must be \"pile\" or \"burn\"");
      }
    }
    get("seed", out.seed);
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("malformed config: ") + e.what());
  }
  c = std::move(out);
}

GameConfig parse_config(const nlohmann::json& j) {
  GameConfig c = j.get<GameConfig>();
  c.validate();
  return c;
}

std::string config_digest(const GameConfig& config) {
  return detail::to_hex(detail::fnv1a(nlohmann::json(config).dump()));
}

}  // namespace trustya
