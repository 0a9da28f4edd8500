#include <array>

#include <gtest/gtest.h>

#include "support.hpp"

namespace trustya {
namespace {

using test::P;

TEST(ChoicePhase, AllTakeMovesTwoEach) {
  Game g = test::make_game(10);
  g.resolve_choice_phase({});  // everyone defaults to Take
  EXPECT_EQ(g.state().central_pile, 99980);
  for (const auto& p : g.state().players) EXPECT_EQ(p.savings, 2);
  EXPECT_EQ(g.phase(), Phase::Invest);
  EXPECT_EQ(g.state().ledger.takers.size(), 10u);
}

TEST(ChoicePhase, NineGiversFillOneReceivedPool) {
  Game g = test::make_game(10);
  const auto& ledger = g.resolve_choice_phase(test::all_give_to(g, P(1)));
  EXPECT_EQ(g.state().player(P(1)).received_pool, 18);
  EXPECT_EQ(ledger.supporters_of(P(1)), 9);
  EXPECT_EQ(ledger.backers_of(P(1)).size(), 9u);
  EXPECT_EQ(g.state().player(P(1)).savings, 2);
  EXPECT_EQ(g.state().central_pile, 100000 - 18 - 2);
}

TEST(ChoicePhase, LedgerListsEveryActorOnce) {
  Game g = test::make_game(6);
  std::map<PlayerId, ChoiceAction> choices{{P(0), ChoiceAction::give(P(3))},
                                           {P(1), ChoiceAction::give(P(3))},
                                           {P(2), ChoiceAction::give(P(0))}};
  const auto& ledger = g.resolve_choice_phase(choices);
  EXPECT_EQ(ledger.gives.size() + ledger.takers.size(), 6u);
  EXPECT_EQ(ledger.supporters_of(P(3)), 2);
  EXPECT_EQ(ledger.supporters_of(P(0)), 1);
  EXPECT_EQ(ledger.supporters_of(P(5)), 0);
}

TEST(ChoicePhase, MissingChoicesDefaultToTakeAndAreMarked) {
  Game g = test::make_game(3);
  g.resolve_choice_phase({{P(0), ChoiceAction::give(P(1))}});
  int defaulted = 0;
  for (const auto& e : g.log().events()) {
    if (e.kind == event_kind::kChoiceSubmitted && e.payload.value("defaulted", false)) {
      ++defaulted;
      EXPECT_EQ(e.payload["action"], "take");
    }
  }
  EXPECT_EQ(defaulted, 2);
  EXPECT_EQ(g.state().player(P(2)).savings, 2);
}

TEST(ChoicePhase, InvalidTargetsRejectedWithoutStateChange) {
  Game g = test::make_game(4);
  const auto before = g.log().size();
  try {
    g.validate_choice(P(0), ChoiceAction::give(P(0)));
    FAIL();
  } catch (const GameError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidTarget);
  }
  EXPECT_THROW(g.validate_choice(P(0), ChoiceAction::give(P(9))), GameError);
  EXPECT_THROW(g.resolve_choice_phase({{P(1), ChoiceAction::give(P(1))}}), GameError);
  EXPECT_EQ(g.log().size(), before);
  EXPECT_EQ(g.phase(), Phase::Choice);
}

TEST(ChoicePhase, WrongPhaseOperationsRejected) {
  Game g = test::make_game(3);
  try {
    g.resolve_investment(P(0), 0);
    FAIL();
  } catch (const GameError& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongPhase);
  }
  g.resolve_choice_phase({});
  EXPECT_THROW(g.resolve_choice_phase({}), GameError);
}

// Moves coins from the pile into player 0's savings so the conserved total
// is unchanged while the pile shrinks to `pile`.
void shrink_pile(Game& g, Coins pile) {
  auto& st = g.state_for_testing();
  st.players[0].savings += st.central_pile - pile;
  st.central_pile = pile;
}

TEST(ChoicePhase, ExhaustedPileFundsInRandomOrderAndFlagsEnd) {
  Game g = test::make_game(3);
  shrink_pile(g, 3);
  const auto total = g.state().conserved_total();
  const auto& ledger = g.resolve_choice_phase({});
  EXPECT_EQ(g.state().central_pile, 1);
  EXPECT_EQ(ledger.takers.size(), 1u);
  EXPECT_EQ(ledger.unfunded.size(), 2u);
  EXPECT_TRUE(g.state().end_flag);
  EXPECT_EQ(g.state().conserved_total(), total);
}

TEST(ChoicePhase, FundingOrderIsUniform) {
  std::array<int, 3> funded{};
  constexpr int kGames = 3000;
  for (int seed = 0; seed < kGames; ++seed) {
    Game g = test::make_game(3, static_cast<std::uint64_t>(seed));
    shrink_pile(g, 2);
    const auto& ledger = g.resolve_choice_phase({});
    ASSERT_EQ(ledger.takers.size(), 1u);
    ++funded[ledger.takers.front().value];
  }
  // Each seat should be funded a third of the time; 5 sigma is about 130.
  for (int count : funded) EXPECT_NEAR(count, kGames / 3, 130);
}

TEST(ChoicePhase, UnfundedGivesAreNotInTheLedger) {
  Game g = test::make_game(4);
  shrink_pile(g, 2);
  const auto& ledger = g.resolve_choice_phase(test::all_give_to(g, P(3)));
  EXPECT_EQ(ledger.gives.size() + ledger.takers.size(), 1u);
  EXPECT_EQ(g.state().central_pile, 0);
  EXPECT_EQ(ledger.supporters_of(P(3)), static_cast<int>(ledger.gives.size()));
}

}  // namespace
}  // namespace trustya
