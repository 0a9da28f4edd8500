#include "trustya/formulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trustya {
namespace {

double growth(Coins invested) { return std::max(std::exp2(static_cast<double>(invested) / 2.0) - 1.0, 0.0); }

}  // namespace

Coins round_half_away(double x) {
  constexpr double kMax = 9.2e18;
  if (!(x < kMax)) return std::numeric_limits<Coins>::max();
  if (!(x > -kMax)) return std::numeric_limits<Coins>::min();
  return static_cast<Coins>(std::round(x));
}

Coins payout(Coins invested, int value, double alpha) {
  if (invested <= 0) return 0;
  return round_half_away(growth(invested) * value * alpha);
}

Coins payout(Coins invested, int value, const GameConfig& config) {
  if (invested <= 0) return 0;
  if (config.alpha_override) return payout(invested, value, *config.alpha_override);
  return round_half_away(growth(invested) * value * 50.0 / config.n_players);
}

Coins penalty(Coins savings, Coins available, Coins invested, int value) {
  if (invested <= 0 || available <= 0 || invested > available) {
    throw GameError(ErrorCode::InvalidAmount, "penalty requires 0 < invested <= available");
  }
  if (savings < 0) throw GameError(ErrorCode::InvalidAmount, "savings must be non-negative");
  const Coins exposed = savings + (available - invested);
  // exposed * i * v / (100 r), rounded half away from zero (all terms >= 0).
  const __int128 num = static_cast<__int128>(exposed) * invested * value;
  const __int128 den = static_cast<__int128>(100) * available;
  const auto rounded = static_cast<Coins>((2 * num + den) / (2 * den));
  return std::min(rounded, exposed);
}

}  // namespace trustya
