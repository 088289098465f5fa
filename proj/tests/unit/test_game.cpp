#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>

#include "facevalue/error.hpp"
#include "facevalue/game.hpp"
#include "facevalue/random.hpp"
#include "support.hpp"

using namespace facevalue;
using boost::multiprecision::cpp_rational;

namespace {

// Independent oracle: arbitrary-precision rationals, no cross-multiplication.
int oracle_label(std::int64_t removed, std::int64_t total, std::int64_t count, int d, std::int64_t delta) {
  const cpp_rational mean(total, count);
  const int base = cpp_rational(removed + delta) < mean ? 1 : -1;
  return d * base;
}

Sign sign(int v) { return v > 0 ? Sign::kPositive : Sign::kNegative; }

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::kIoError;
}

}  // namespace

TEST_CASE("money and prize sets") {
  CHECK(format_pounds(Money{1733100}) == "\xC2\xA3" "17,331");
  CHECK(format_pounds(Money{25000000}) == "\xC2\xA3" "250,000");
  CHECK(format_pounds(Money{5}) == "\xC2\xA3" "0.05");
  CHECK(code_of([] { Money::from_pence(-1); }) == Errc::kInvalidMoney);
  CHECK(code_of([] { PrizeSet({5, 1, 5}); }) == Errc::kDuplicatePrize);
  const PrizeSet s{100000, 1, 1000};
  REQUIRE(s.size() == 3);
  CHECK(s.values()[0] == Money{1});
  CHECK(s.values()[2] == Money{100000});
  CHECK(code_of([&] { s.without(Money{7}); }) == Errc::kPrizeNotPresent);
}

TEST_CASE("default board") {
  const PrizeSet b = default_board();
  CHECK(b.size() == kStandardBoardSize);
  CHECK(b.values().front() == Money{1});
  CHECK(b.values().back() == Money::from_pounds(250000));
}

TEST_CASE("expected value is exact") {
  CHECK(expected_value(PrizeSet{1, 1000, 100000}) == ExactMean{101001, 3});
  CHECK(expected_value(PrizeSet{500}) == ExactMean{500, 1});
  CHECK(expected_value(PrizeSet{1, 1000, 100000, 25000000}) == ExactMean{25101001, 4});
  CHECK(code_of([] { expected_value(PrizeSet{}); }) == Errc::kEmptyPrizeSet);
}

TEST_CASE("label rule examples") {
  const Money delta{75000};
  // £5 removed while five boxes average £17,331.
  const ExactMean fig1{1733100 * 5, 5};
  CHECK(label_event(Money{500}, fig1, Sign::kPositive, delta) == Sign::kPositive);
  CHECK(label_event(Money{500}, fig1, Sign::kNegative, delta) == Sign::kNegative);

  // removed + delta exactly equal to the mean is bad.
  const ExactMean boundary{2 * (1000 + 75000), 2};
  CHECK(label_event(Money{1000}, boundary, Sign::kPositive, delta) == Sign::kNegative);
  const ExactMean just_above{2 * (1000 + 75000) + 1, 2};
  CHECK(label_event(Money{1000}, just_above, Sign::kPositive, delta) == Sign::kPositive);

  CHECK(code_of([&] { label_event(Money{1}, ExactMean{1, 1}, Sign::kPositive, delta); }) ==
        Errc::kDegenerateRemoval);
}

TEST_CASE("prose rule is a separate predicate") {
  // {0, 100000, 200000}: removing 0 raises the mean from 100000 to 150000.
  const ExactMean before{300000, 3};
  const ExactMean after{300000, 2};
  CHECK(mean_gain_exceeds_margin(before, after, Money{40000}));
  CHECK_FALSE(mean_gain_exceeds_margin(before, after, Money{50000}));
  // The labeling rule disagrees for delta = 60000: 0 + 60000 < 100000 is good.
  CHECK(label_event(Money{0}, before, Sign::kPositive, Money{60000}) == Sign::kPositive);
  CHECK_FALSE(mean_gain_exceeds_margin(before, after, Money{60000}));
}

TEST_CASE("apply_open example and errors") {
  const GameState s = initial_state(PrizeSet{1, 1000, 100000, 25000000});
  const OpenResult r = apply_open(s, Money{1000});
  CHECK(r.event.mean_before == ExactMean{25101001, 4});
  CHECK(r.event.mean_after == ExactMean{25100001, 3});
  CHECK(r.event.label == Sign::kPositive);
  CHECK(r.event.round == 1);
  CHECK(r.state.round == 1);
  CHECK(r.state.remaining == PrizeSet{1, 100000, 25000000});

  CHECK(code_of([&] { apply_open(s, Money{2}); }) == Errc::kPrizeNotPresent);
  const GameState with_box = initial_state(PrizeSet{1, 1000}, Money{1000});
  CHECK(code_of([&] { apply_open(with_box, Money{1000}); }) == Errc::kPlayerBoxOpened);
  const GameState last = initial_state(PrizeSet{7});
  CHECK(code_of([&] { apply_open(last, Money{7}); }) == Errc::kDegenerateRemoval);
}

TEST_CASE("deal flips later labels") {
  GameState s = initial_state(PrizeSet{1, 2});
  s = apply_deal(s, Money::from_pounds(10000));
  CHECK(s.deal.d == Sign::kNegative);
  CHECK(s.deal.accepted_offer == Money{1000000});
  CHECK(code_of([&] { apply_deal(s, Money{1}); }) == Errc::kDealAlreadyTaken);
}

TEST_CASE("full board: 21 opens leave the player's box") {
  RandomStream rng(11);
  const PrizeSet board = default_board();
  const Money box = board.values()[rng.below(board.size())];
  GameState s = initial_state(board, box);
  int events = 0;
  while (s.remaining.size() > 1) {
    std::vector<Money> choices;
    for (Money m : s.remaining.values()) {
      if (m != box) choices.push_back(m);
    }
    s = apply_open(s, choices[rng.below(choices.size())]).state;
    ++events;
  }
  CHECK(events == 21);
  CHECK(s.remaining == PrizeSet{box.pence});
}

TEST_CASE("replay of a hand-built mini episode") {
  // Board {1, 1000, 100000, 25000000}; deal accepted at round 2.
  Episode e{"mini", PrizeSet{1, 1000, 100000, 25000000}, {}};
  e.actions = {Action::open(1, Money{25000000}), Action::offer(1, Money{20000}), Action::no_deal(1),
               Action::open(2, Money{1}),        Action::offer(2, Money{30000}), Action::deal(2),
               Action::open(3, Money{1000})};
  const auto ev = replay_episode(e);
  REQUIRE(ev.size() == 3);
  // 25000000 + 75000 >= 25101001/4: bad.
  CHECK(ev[0].label == Sign::kNegative);
  CHECK(ev[0].mean_after == ExactMean{101001, 3});
  // 1 + 75000 >= 101001/3 = 33667: bad, the margin outweighs the tiny prize.
  CHECK(ev[1].label == Sign::kNegative);
  CHECK(ev[1].d == Sign::kPositive);
  // After the deal: 1000 + 75000 >= 101000/2 is bad, flipped to good.
  CHECK(ev[2].d == Sign::kNegative);
  CHECK(ev[2].mean_before == ExactMean{101000, 2});
  CHECK(ev[2].label == Sign::kPositive);
}

TEST_CASE("property: labels agree with the rational oracle") {
  RandomStream rng(2024);
  for (int i = 0; i < 20000; ++i) {
    const std::int64_t count = 2 + static_cast<std::int64_t>(rng.below(40));
    const std::int64_t total = static_cast<std::int64_t>(rng.below(count * 25'000'000));
    const std::int64_t removed = static_cast<std::int64_t>(rng.below(25'000'001));
    const std::int64_t delta = static_cast<std::int64_t>(rng.below(200'000));
    const int d = rng.below(2) ? 1 : -1;
    const Sign got = label_event(Money{removed}, ExactMean{total, count}, sign(d), Money{delta});
    REQUIRE(to_int(got) == oracle_label(removed, total, count, d, delta));
  }
}

TEST_CASE("property: exactness, antisymmetry and monotonicity") {
  RandomStream rng(77);
  for (int i = 0; i < 2000; ++i) {
    const Episode e = fvtest::random_episode(rng, "p");
    GameState s = initial_state(e.board);
    for (const Action& a : e.actions) {
      if (a.kind != ActionKind::kOpen) continue;
      const std::int64_t m = static_cast<std::int64_t>(s.remaining.size());
      const OpenResult r = apply_open(s, *a.amount);
      // mean_after * (m - 1) + removed == mean_before * m, as integers.
      CHECK(r.event.mean_after.numerator + a.amount->pence == r.event.mean_before.numerator);
      CHECK(r.event.mean_before.denominator == m);
      CHECK(r.event.mean_after.denominator == m - 1);
      s = r.state;
    }
    const auto opens = std::count_if(e.actions.begin(), e.actions.end(),
                                     [](const Action& a) { return a.kind == ActionKind::kOpen; });
    CHECK(s.remaining.size() == e.board.size() - static_cast<std::size_t>(opens));
  }

  for (int i = 0; i < 2000; ++i) {
    const ExactMean mean{static_cast<std::int64_t>(rng.below(1'000'000'000)),
                         2 + static_cast<std::int64_t>(rng.below(20))};
    const Money delta{static_cast<std::int64_t>(rng.below(100000))};
    Sign prev = Sign::kPositive;
    for (std::int64_t x = 0; x < 100'000'000; x += 1 + static_cast<std::int64_t>(rng.below(5'000'000))) {
      const Sign pos = label_event(Money{x}, mean, Sign::kPositive, delta);
      CHECK(label_event(Money{x}, mean, Sign::kNegative, delta) == negate(pos));
      // Non-increasing in the removed amount.
      CHECK_FALSE((prev == Sign::kNegative && pos == Sign::kPositive));
      prev = pos;
      // A larger margin never turns bad into good.
      if (pos == Sign::kNegative) {
        CHECK(label_event(Money{x}, mean, Sign::kPositive, Money{delta.pence + 1000}) == Sign::kNegative);
      }
    }
  }
}

TEST_CASE("replay is deterministic") {
  RandomStream rng(5);
  for (int i = 0; i < 200; ++i) {
    const Episode e = fvtest::random_episode(rng, "r" + std::to_string(i));
    CHECK(replay_episode(e) == replay_episode(e));
  }
}
