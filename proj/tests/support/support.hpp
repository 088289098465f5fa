#pragma once

// Shared test helpers: scratch directories and random valid episodes.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "facevalue/episode.hpp"
#include "facevalue/random.hpp"

namespace fvtest {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "fvtest-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// A valid episode: a random board, a random prefix of openings, and offers
/// answered by DEAL (at most once) or NODEAL.
inline facevalue::Episode random_episode(facevalue::RandomStream& rng, const std::string& id) {
  using namespace facevalue;
  const std::size_t n = 2 + rng.below(20);
  std::vector<Money> prizes;
  while (prizes.size() < n) {
    const Money m{static_cast<std::int64_t>(rng.below(rng.below(2) ? 1000 : 100'000'000))};
    bool dup = false;
    for (Money p : prizes) dup = dup || p == m;
    if (!dup) prizes.push_back(m);
  }
  Episode e{id, PrizeSet(prizes), {}};
  std::vector<Money> order(e.board.values().begin(), e.board.values().end());
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const std::size_t opens = rng.below(n);  // at most n - 1
  bool dealt = false;
  int last_offer = 0;
  for (std::size_t i = 0; i < opens; ++i) {
    const int round = static_cast<int>(i) + 1;
    e.actions.push_back(Action::open(round, order[i]));
    if (round > last_offer && rng.below(3) == 0) {
      e.actions.push_back(Action::offer(round, Money{static_cast<std::int64_t>(rng.below(50'000'000))}));
      last_offer = round;
      if (!dealt && rng.below(4) == 0) {
        e.actions.push_back(Action::deal(round));
        dealt = true;
      } else {
        e.actions.push_back(Action::no_deal(round));
      }
    }
  }
  return e;
}

}  // namespace fvtest
