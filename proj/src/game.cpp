#include "facevalue/game.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace facevalue {

__extension__ using i128 = __int128;

// ---------------------------------------------------------------------------
// Money and prize sets

Money Money::from_pence(std::int64_t pence) {
  if (pence < 0 || pence > kMaxPence) {
    throw Error(Errc::kInvalidMoney, "amount out of range: " + std::to_string(pence));
  }
  return Money{pence};
}

std::string format_pounds(Money m) {
  std::string whole = std::to_string(m.pence / 100);
  std::string grouped;
  const int n = static_cast<int>(whole.size());
  for (int i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) grouped += ',';
    grouped += whole[i];
  }
  const auto frac = m.pence % 100;
  std::string out = "\xC2\xA3" + grouped;  // UTF-8 pound sign
  if (frac != 0) {
    out += '.';
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
  }
  return out;
}

PrizeSet::PrizeSet(std::vector<Money> prizes) : prizes_(std::move(prizes)) {
  std::sort(prizes_.begin(), prizes_.end());
  auto dup = std::adjacent_find(prizes_.begin(), prizes_.end());
  if (dup != prizes_.end()) {
    throw Error(Errc::kDuplicatePrize, std::to_string(dup->pence) + " pence listed twice");
  }
}

PrizeSet::PrizeSet(std::initializer_list<std::int64_t> pence)
    : PrizeSet([&] {
        std::vector<Money> v;
        v.reserve(pence.size());
        for (auto p : pence) v.push_back(Money::from_pence(p));
        return v;
      }()) {}

bool PrizeSet::contains(Money m) const noexcept {
  return std::binary_search(prizes_.begin(), prizes_.end(), m);
}

PrizeSet PrizeSet::without(Money m) const {
  auto it = std::lower_bound(prizes_.begin(), prizes_.end(), m);
  if (it == prizes_.end() || *it != m) {
    throw Error(Errc::kPrizeNotPresent, std::to_string(m.pence) + " pence is not in the set");
  }
  PrizeSet out;
  out.prizes_.reserve(prizes_.size() - 1);
  out.prizes_.insert(out.prizes_.end(), prizes_.begin(), it);
  out.prizes_.insert(out.prizes_.end(), it + 1, prizes_.end());
  return out;
}

bool ExactMean::exceeds(Money amount) const noexcept {
  return static_cast<i128>(amount.pence) * denominator < static_cast<i128>(numerator);
}

std::string ExactMean::to_string() const {
  return std::to_string(numerator) + "/" + std::to_string(denominator);
}

std::strong_ordering compare(const ExactMean& a, const ExactMean& b) noexcept {
  const auto lhs = static_cast<i128>(a.numerator) * b.denominator;
  const auto rhs = static_cast<i128>(b.numerator) * a.denominator;
  return lhs <=> rhs;
}

// ---------------------------------------------------------------------------
// Game state

PrizeSet default_board() {
  return PrizeSet{1,       10,      50,      100,     500,      1000,     5000,     10000,
                  25000,   50000,   75000,   100000,  300000,   500000,   1000000,  1500000,
                  2000000, 3500000, 5000000, 7500000, 10000000, 25000000};
}

GameState initial_state(PrizeSet board, std::optional<Money> player_box) {
  if (player_box && !board.contains(*player_box)) {
    throw Error(Errc::kPrizeNotPresent, "player box is not on the board");
  }
  GameState s;
  s.remaining = std::move(board);
  s.player_box = player_box;
  return s;
}

ExactMean expected_value(const PrizeSet& prizes) {
  if (prizes.empty()) throw Error(Errc::kEmptyPrizeSet, "mean of an empty prize set");
  std::int64_t total = 0;
  for (Money m : prizes.values()) total += m.pence;
  return ExactMean{total, static_cast<std::int64_t>(prizes.size())};
}

Sign label_event(Money removed, const ExactMean& mean_before, Sign d, Money delta) {
  if (mean_before.denominator < 2) {
    throw Error(Errc::kDegenerateRemoval, "removal would leave an empty prize set");
  }
  const auto lhs = (static_cast<i128>(removed.pence) + delta.pence) * mean_before.denominator;
  const Sign outcome = lhs < mean_before.numerator ? Sign::kPositive : Sign::kNegative;
  return d * outcome;
}

bool mean_gain_exceeds_margin(const ExactMean& mean_before, const ExactMean& mean_after,
                              Money delta) {
  // after.num/after.den > (before.num + delta*before.den)/before.den
  const auto lhs = static_cast<i128>(mean_after.numerator) * mean_before.denominator;
  const auto rhs =
      (static_cast<i128>(mean_before.numerator) +
       static_cast<i128>(delta.pence) * mean_before.denominator) *
      mean_after.denominator;
  return lhs > rhs;
}

OpenResult apply_open(const GameState& state, Money removed, Money delta) {
  if (!state.remaining.contains(removed)) {
    throw Error(Errc::kPrizeNotPresent, std::to_string(removed.pence) + " pence is not in play");
  }
  if (state.player_box && *state.player_box == removed) {
    throw Error(Errc::kPlayerBoxOpened, "the player's own box cannot be opened");
  }
  if (state.remaining.size() < 2) {
    throw Error(Errc::kDegenerateRemoval, "cannot open the last remaining prize");
  }
  const ExactMean before = expected_value(state.remaining);

  OpenResult r;
  r.state = state;
  r.state.remaining = state.remaining.without(removed);
  r.state.round = state.round + 1;
  r.event.round = r.state.round;
  r.event.removed = removed;
  r.event.mean_before = before;
  r.event.mean_after = ExactMean{before.numerator - removed.pence, before.denominator - 1};
  r.event.d = state.deal.d;
  r.event.label = label_event(removed, before, state.deal.d, delta);
  return r;
}

GameState apply_deal(const GameState& state, Money offer) {
  if (state.deal.d == Sign::kNegative) {
    throw Error(Errc::kDealAlreadyTaken, "a deal was already accepted");
  }
  GameState s = state;
  s.deal = DealStatus{Sign::kNegative, offer};
  return s;
}

std::vector<BoxEvent> replay_episode(const Episode& episode, Money delta) {
  std::vector<BoxEvent> events;
  GameState state = initial_state(episode.board);
  std::optional<Money> pending_offer;
  for (const Action& a : episode.actions) {
    try {
      switch (a.kind) {
        case ActionKind::kOpen: {
          auto r = apply_open(state, *a.amount, delta);
          state = std::move(r.state);
          events.push_back(r.event);
          break;
        }
        case ActionKind::kOffer:
          pending_offer = a.amount;
          break;
        case ActionKind::kDeal:
          if (!pending_offer) {
            throw Error(Errc::kResponseWithoutOffer, "DEAL without a preceding OFFER");
          }
          state = apply_deal(state, *pending_offer);
          pending_offer.reset();
          break;
        case ActionKind::kNoDeal:
          pending_offer.reset();
          break;
      }
    } catch (const Error& e) {
      if (e.line() != 0 || a.source.line == 0) throw;
      throw Error(e.code(), e.detail(), a.source.line,
                  a.source.amount_column ? a.source.amount_column : 1);
    }
  }
  return events;
}

}  // namespace facevalue
