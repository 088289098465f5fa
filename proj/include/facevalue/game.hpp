#pragma once

// Prize-elimination model of the game show and the objective event-labeling
// rule. All types are immutable values; every operation returns a new state.

#include <optional>
#include <vector>

#include "facevalue/episode.hpp"
#include "facevalue/money.hpp"

namespace facevalue {

/// Default labeling margin: £750.
inline constexpr Money kDefaultDelta{75'000};
/// Number of prizes on the show's board.
inline constexpr std::size_t kStandardBoardSize = 22;

/// The reconstructed 22-prize UK board (1p .. £250,000). Only the range is
/// documented publicly; intermediate values are a reconstruction.
PrizeSet default_board();

struct DealStatus {
  Sign d = Sign::kPositive;
  std::optional<Money> accepted_offer;

  bool operator==(const DealStatus&) const = default;
};

struct GameState {
  PrizeSet remaining;
  int round = 0;
  DealStatus deal;
  std::optional<Money> player_box;

  bool operator==(const GameState&) const = default;
};

/// One labeled prize elimination.
struct BoxEvent {
  int round = 0;
  Money removed;
  ExactMean mean_before;
  ExactMean mean_after;
  Sign d = Sign::kPositive;
  Sign label = Sign::kPositive;

  bool operator==(const BoxEvent&) const = default;
};

/// Starting state; `player_box`, when given, must be on the board.
GameState initial_state(PrizeSet board, std::optional<Money> player_box = std::nullopt);

/// Exact mean of the prize set. Throws EmptyPrizeSet.
ExactMean expected_value(const PrizeSet& prizes);

/// d * (+1 if removed + delta < mean_before, else -1). Requires
/// mean_before.denominator >= 2 (DegenerateRemoval otherwise).
Sign label_event(Money removed, const ExactMean& mean_before, Sign d, Money delta);

/// The stricter "E_t > E_{t-1} + delta" reading of a good event. Diagnostic
/// only; labels always come from label_event.
bool mean_gain_exceeds_margin(const ExactMean& mean_before, const ExactMean& mean_after,
                              Money delta);

struct OpenResult {
  GameState state;
  BoxEvent event;
};

/// Removes `removed` from the state. Throws PrizeNotPresent, PlayerBoxOpened
/// or DegenerateRemoval.
OpenResult apply_open(const GameState& state, Money removed, Money delta = kDefaultDelta);

/// Accepts the banker's offer; later events are labeled with d = -1.
/// Throws DealAlreadyTaken.
GameState apply_deal(const GameState& state, Money offer);

/// Replays every OPEN of a validated episode, one event per OPEN in order.
/// Errors carry the offending action's source line when known.
std::vector<BoxEvent> replay_episode(const Episode& episode, Money delta = kDefaultDelta);

}  // namespace facevalue
