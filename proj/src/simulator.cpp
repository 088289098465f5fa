#include "facevalue/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <thread>

#include "facevalue/random.hpp"

namespace facevalue {

std::vector<RoundBlock> default_schedule() {
  return {{5, true}, {3, true}, {3, true}, {3, true}, {3, true}, {3, true}, {1, true}};
}

std::vector<double> default_banker_fractions() { return {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

void validate_config(const SimConfig& config) {
  auto fail = [](const std::string& msg) { throw Error(Errc::kConfigError, msg); };
  if (config.board.size() < 2) fail("board: needs at least two prizes");
  if (config.schedule.empty()) fail("rounds_schedule: empty");
  std::size_t total = 0;
  std::size_t offers = 0;
  for (const auto& block : config.schedule) {
    if (block.opens < 1) fail("rounds_schedule: opens_per_round must be positive");
    total += static_cast<std::size_t>(block.opens);
    if (block.offer_after) ++offers;
  }
  if (total > config.board.size() - 1) {
    fail("rounds_schedule: " + std::to_string(total) + " openings exceed board size - 1");
  }
  if (config.banker_fractions.size() != offers) {
    fail("banker_fractions: expected " + std::to_string(offers) + " values, got " +
         std::to_string(config.banker_fractions.size()));
  }
  for (double f : config.banker_fractions) {
    if (!(f > 0.0 && f <= 1.0)) fail("banker_fractions: values must lie in (0, 1]");
  }
  if (config.policy.kind == PolicyKind::kThreshold &&
      !(std::isfinite(config.policy.rho) && config.policy.rho > 0.0)) {
    fail("contestant_policy: threshold rho must be positive and finite");
  }
  if (!is_valid_episode_id(config.id_prefix)) fail("id_prefix: must be printable without spaces");
}

Episode simulate_episode(const SimConfig& config, std::string_view id) {
  validate_config(config);
  RandomStream rng(mix_seed(config.seed, fnv1a(id)));

  Episode ep;
  ep.id = std::string(id);
  ep.board = config.board;

  const auto prizes = config.board.values();
  const Money player_box = prizes[rng.below(prizes.size())];
  std::vector<Money> closed;
  for (Money m : prizes) {
    if (m != player_box) closed.push_back(m);
  }

  PrizeSet remaining = config.board;
  int opens = 0;
  std::size_t offer_index = 0;
  bool dealt = false;
  for (const RoundBlock& block : config.schedule) {
    for (int k = 0; k < block.opens; ++k) {
      const auto pick = rng.below(closed.size());
      const Money x = closed[pick];
      closed.erase(closed.begin() + static_cast<std::ptrdiff_t>(pick));
      remaining = remaining.without(x);
      ep.actions.push_back(Action::open(++opens, x));
    }
    if (!block.offer_after) continue;
    const double fraction = config.banker_fractions[offer_index++];
    if (dealt) continue;
    const ExactMean ev = expected_value(remaining);
    const double offer_value = std::round(fraction * ev.to_double());
    const Money offer = Money::from_pence(static_cast<std::int64_t>(offer_value));
    ep.actions.push_back(Action::offer(opens, offer));
    const bool accept = config.policy.kind == PolicyKind::kThreshold &&
                        static_cast<double>(offer.pence) >= config.policy.rho * ev.to_double();
    if (accept) {
      ep.actions.push_back(Action::deal(opens));
      dealt = true;
    } else {
      ep.actions.push_back(Action::no_deal(opens));
    }
  }
  return ep;
}

std::string batch_episode_id(const SimConfig& config, std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "-%05zu", index);
  return config.id_prefix + buf;
}

std::vector<Episode> simulate_batch(const SimConfig& config, std::size_t n, unsigned threads) {
  validate_config(config);
  std::vector<Episode> out(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SimConfig c = config;
      c.seed = mix_seed(config.seed, i);
      out[i] = simulate_episode(c, batch_episode_id(config, i));
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    work(0, n);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      pool.emplace_back(work, begin, std::min(n, begin + chunk));
    }
  }
  return out;
}

}  // namespace facevalue
