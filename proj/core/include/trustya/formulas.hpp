#pragma once

#include "trustya/config.hpp"
#include "trustya/types.hpp"

namespace trustya {

// Half-way cases round away from zero. Saturates at the Coins range.
Coins round_half_away(double x);

// Payout for investing `invested` coins on a card of value `value`:
//   round(max(2^(i/2) - 1, 0) * v * alpha)
Coins payout(Coins invested, int value, double alpha);
// Same, with alpha taken from the config. The default alpha = 50 / N is
// applied as (... * 50) / N so exact half-way values survive.
Coins payout(Coins invested, int value, const GameConfig& config);

// Savings lost on an unprotected face draw:
//   round((s + r - i) * (i / r) * (v / 100)), capped at s + (r - i).
// Evaluated in exact integer arithmetic. Throws InvalidAmount unless 0 < i <= r.
Coins penalty(Coins savings, Coins available, Coins invested, int value);

}  // namespace trustya
