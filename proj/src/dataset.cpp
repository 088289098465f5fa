#include "facevalue/dataset.hpp"

#include <cctype>
#include <thread>

#include "facevalue/error.hpp"
#include "facevalue/random.hpp"

namespace facevalue {

Split assign_split(std::string_view episode_id, const SplitWeights& weights) {
  const std::uint64_t total = std::uint64_t{weights.train} + weights.val + weights.test;
  if (total == 0) throw Error(Errc::kConfigError, "split weights: all zero");

  std::size_t digits = 0;
  while (digits < episode_id.size() && digits < 18 &&
         std::isdigit(static_cast<unsigned char>(episode_id[episode_id.size() - 1 - digits]))) {
    ++digits;
  }
  std::uint64_t key = 0;
  if (digits > 0) {
    for (char c : episode_id.substr(episode_id.size() - digits)) key = key * 10 + (c - '0');
  } else {
    key = fnv1a(episode_id);
  }
  const std::uint64_t bucket = key % total;
  if (bucket < weights.train) return Split::kTrain;
  if (bucket < std::uint64_t{weights.train} + weights.val) return Split::kVal;
  return Split::kTest;
}

GeneratedDataset generate_dataset(const SimConfig& sim, std::size_t n_episodes,
                                  const ActorConfig& actor_config, const SplitWeights& weights,
                                  unsigned threads, Money delta) {
  if (n_episodes < 1) throw Error(Errc::kConfigError, "n_episodes: must be at least 1");
  const SyntheticActor actor(actor_config);

  GeneratedDataset out;
  out.episodes = simulate_batch(sim, n_episodes, threads);

  std::vector<std::vector<LabeledTrack>> per_episode(n_episodes);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Episode& ep = out.episodes[i];
      const Split split = assign_split(ep.id, weights);
      const auto episode_seed = mix_seed(actor_config.seed, fnv1a(ep.id));
      for (const BoxEvent& ev : replay_episode(ep, delta)) {
        RandomStream stream(mix_seed(episode_seed, static_cast<std::uint64_t>(ev.round)));
        per_episode[i].push_back({actor.emit_track(ev, ep.id, stream), split});
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, n_episodes);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_episodes + threads - 1) / threads;
    for (std::size_t b = 0; b < n_episodes; b += chunk) {
      pool.emplace_back(work, b, std::min(n_episodes, b + chunk));
    }
  }

  out.tracks.feature_dim = actor_config.feature_dim;
  out.tracks.frames_per_track = actor_config.frames_per_track;
  for (auto& v : per_episode) {
    for (auto& t : v) out.tracks.tracks.push_back(std::move(t));
  }
  return out;
}

}  // namespace facevalue
