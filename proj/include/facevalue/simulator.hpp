#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "facevalue/episode.hpp"
#include "facevalue/game.hpp"

namespace facevalue {

struct RoundBlock {
  int opens = 1;
  bool offer_after = true;

  bool operator==(const RoundBlock&) const = default;
};

enum class PolicyKind { kNeverDeal, kThreshold };

/// kThreshold accepts the first offer >= rho * current expected value.
struct ContestantPolicy {
  PolicyKind kind = PolicyKind::kNeverDeal;
  double rho = 1.0;

  bool operator==(const ContestantPolicy&) const = default;
};

/// 5-3-3-3-3-3-1 openings with an offer after every block.
std::vector<RoundBlock> default_schedule();
/// Linear ramp 0.3 -> 0.9 over the default schedule's seven offers.
std::vector<double> default_banker_fractions();

struct SimConfig {
  PrizeSet board = default_board();
  std::vector<RoundBlock> schedule = default_schedule();
  std::vector<double> banker_fractions = default_banker_fractions();
  ContestantPolicy policy;
  std::uint64_t seed = 2017;
  std::string id_prefix = "sim";

  bool operator==(const SimConfig&) const = default;
};

/// Throws ConfigError whose message starts with the offending field name.
void validate_config(const SimConfig& config);

/// Plays one game: the player's box is uniform over the board, each opening
/// is uniform over the unopened non-player prizes, and each offer is
/// round(fraction * expected value). Deterministic in (config, id).
Episode simulate_episode(const SimConfig& config, std::string_view id);

/// Id of the i-th episode of a batch: "<prefix>-00042".
std::string batch_episode_id(const SimConfig& config, std::size_t index);

/// Episode i is simulated with seed mix_seed(config.seed, i). The result is
/// identical for every thread count.
std::vector<Episode> simulate_batch(const SimConfig& config, std::size_t n, unsigned threads = 1);

}  // namespace facevalue
