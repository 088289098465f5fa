#pragma once

#include <string_view>
#include <vector>

#include "facevalue/actor.hpp"
#include "facevalue/simulator.hpp"
#include "facevalue/tracks.hpp"

namespace facevalue {

/// Relative split sizes. Episodes cycle through train, val, test buckets so
/// that 3:1:1 over any multiple of five episodes is exactly 60/20/20.
struct SplitWeights {
  unsigned train = 3;
  unsigned val = 1;
  unsigned test = 1;

  bool operator==(const SplitWeights&) const = default;
};

/// Function of the episode id alone: uses the id's trailing decimal index
/// when present, otherwise a stable hash of the whole id.
Split assign_split(std::string_view episode_id, const SplitWeights& weights = {});

struct GeneratedDataset {
  std::vector<Episode> episodes;
  LabeledTrackSet tracks;
};

/// Simulates n episodes, replays each into labeled box events and emits one
/// synthetic face track per event. Episodes never straddle splits.
GeneratedDataset generate_dataset(const SimConfig& sim, std::size_t n_episodes,
                                  const ActorConfig& actor, const SplitWeights& weights = {},
                                  unsigned threads = 1, Money delta = kDefaultDelta);

}  // namespace facevalue
