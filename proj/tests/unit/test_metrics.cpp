#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numeric>

#include "facevalue/actor.hpp"
#include "facevalue/error.hpp"
#include "facevalue/metrics.hpp"
#include "facevalue/random.hpp"

using namespace facevalue;
using boost::multiprecision::cpp_rational;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::kIoError;
}

// Counts every (positive, negative) pair directly.
double pairwise_auc(const ScoredPredictions& sp) {
  std::int64_t wins2 = 0, pos = 0, neg = 0;
  for (const auto& p : sp) (p.label == Sign::kPositive ? pos : neg)++;
  for (const auto& p : sp) {
    if (p.label != Sign::kPositive) continue;
    for (const auto& n : sp) {
      if (n.label != Sign::kNegative) continue;
      wins2 += p.score > n.score ? 2 : p.score == n.score ? 1 : 0;
    }
  }
  return static_cast<double>(wins2) / static_cast<double>(2 * pos * neg);
}

// Fleiss' kappa straight from the textbook formula, in exact arithmetic.
cpp_rational fleiss_oracle(const std::vector<std::vector<int>>& m) {
  const int n = std::accumulate(m[0].begin(), m[0].end(), 0);
  const std::size_t k = m[0].size();
  cpp_rational p_bar = 0;
  std::vector<cpp_rational> col(k, 0);
  for (const auto& row : m) {
    int sq = 0;
    for (std::size_t j = 0; j < k; ++j) {
      sq += row[j] * row[j];
      col[j] += row[j];
    }
    p_bar += cpp_rational(sq - n, n * (n - 1));
  }
  p_bar /= static_cast<int>(m.size());
  cpp_rational p_e = 0;
  for (auto& c : col) {
    c /= static_cast<int>(m.size()) * n;
    p_e += c * c;
  }
  return (p_bar - p_e) / (1 - p_e);
}

ScoredPredictions random_instance(RandomStream& rng) {
  ScoredPredictions sp;
  const std::size_t n = 2 + rng.below(199);
  const std::uint64_t levels = 1 + rng.below(20);  // few levels force ties
  for (std::size_t i = 0; i < n; ++i) {
    sp.push_back({static_cast<double>(rng.below(levels)) - 3.5, rng.below(2) ? Sign::kPositive : Sign::kNegative});
  }
  sp[0].label = Sign::kPositive;
  sp[1].label = Sign::kNegative;
  return sp;
}

class IndexClassifier final : public FrameEmotionClassifier {
 public:
  Emotion classify(std::span<const double> frame) const override { return static_cast<Emotion>(frame[0]); }
  std::size_t feature_dim() const override { return 2; }
};

}  // namespace

TEST_CASE("accuracy") {
  using P = std::pair<Sign, Sign>;
  const Sign g = Sign::kPositive, b = Sign::kNegative;
  const std::vector<P> three_of_four{{g, g}, {b, b}, {g, b}, {b, b}};
  CHECK(accuracy(three_of_four) == 0.75);
  CHECK(accuracy(std::vector<P>{{g, b}, {b, g}}) == 0.0);
  CHECK(accuracy(std::vector<P>{{g, g}}) == 1.0);
  CHECK(code_of([] { accuracy(std::vector<P>{}); }) == Errc::kEmptyInput);
}

TEST_CASE("roc_auc examples") {
  const Sign g = Sign::kPositive, b = Sign::kNegative;
  CHECK(roc_auc(ScoredPredictions{{0.1, b}, {0.4, b}, {0.35, g}, {0.8, g}}) == 0.75);
  CHECK(roc_auc(ScoredPredictions{{-1, b}, {-2, b}, {3, g}}) == 1.0);
  CHECK(roc_auc(ScoredPredictions{{2, b}, {2, g}, {2, g}, {2, b}}) == 0.5);
  CHECK(code_of([&] { roc_auc(ScoredPredictions{{1, g}, {2, g}}); }) == Errc::kDegenerateLabels);
  CHECK(code_of([&] { roc_auc(ScoredPredictions{{NAN, g}, {2, b}}); }) == Errc::kEmptyInput);
}

TEST_CASE("property: roc_auc equals the pairwise oracle") {
  RandomStream rng(1234);
  for (int i = 0; i < 500; ++i) {
    ScoredPredictions sp = random_instance(rng);
    const double auc = roc_auc(sp);
    CHECK(std::abs(auc - pairwise_auc(sp)) <= 1e-9);

    // Strictly increasing transform.
    ScoredPredictions t = sp;
    for (auto& p : t) p.score = std::exp(p.score / 4.0) * 3.0 - 7.0;
    CHECK(std::abs(roc_auc(t) - auc) <= 1e-12);

    // Negated scores with flipped labels.
    ScoredPredictions f = sp;
    for (auto& p : f) {
      p.score = -p.score;
      p.label = negate(p.label);
    }
    CHECK(std::abs(roc_auc(f) - auc) <= 1e-12);
  }
}

TEST_CASE("fleiss examples") {
  CHECK(std::abs(fleiss_kappa(RatingMatrix({{4, 0}, {2, 2}, {0, 4}})) - 5.0 / 9.0) <= 1e-12);
  CHECK(fleiss_oracle({{4, 0}, {2, 2}, {0, 4}}) == cpp_rational(5, 9));
  CHECK(fleiss_kappa(RatingMatrix({{4, 0}, {0, 4}, {4, 0}})) == 1.0);
  CHECK(fleiss_kappa(RatingMatrix({{0, 3, 0}, {0, 3, 0}})) == 1.0);
  CHECK(code_of([] { fleiss_kappa(RatingMatrix({{4, 0}, {2, 1}})); }) == Errc::kUnequalRaters);
  CHECK(code_of([] { fleiss_kappa(RatingMatrix({{1, 0}, {0, 1}})); }) == Errc::kUnequalRaters);
  CHECK(code_of([] { fleiss_kappa(RatingMatrix{}); }) == Errc::kEmptyInput);
}

TEST_CASE("property: fleiss matches the exact oracle and is permutation invariant") {
  RandomStream rng(55);
  for (int i = 0; i < 300; ++i) {
    const std::size_t k = 2 + rng.below(6), items = 1 + rng.below(30);
    const int n = 2 + static_cast<int>(rng.below(8));
    std::vector<std::vector<int>> m(items, std::vector<int>(k, 0));
    for (auto& row : m) {
      for (int r = 0; r < n; ++r) ++row[rng.below(k)];
    }
    // Skip the all-one-category case; it is covered above.
    std::vector<int> col(k, 0);
    for (const auto& row : m) {
      for (std::size_t j = 0; j < k; ++j) col[j] += row[j];
    }
    if (std::count(col.begin(), col.end(), 0) == static_cast<long>(k - 1)) continue;

    const double kappa = fleiss_kappa(RatingMatrix(m));
    CHECK(kappa <= 1.0);
    CHECK(std::abs(kappa - static_cast<double>(fleiss_oracle(m))) <= 1e-12);

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t j = k; j > 1; --j) std::swap(perm[j - 1], perm[rng.below(j)]);
    auto permuted = m;
    for (std::size_t r = 0; r < items; ++r) {
      for (std::size_t j = 0; j < k; ++j) permuted[r][j] = m[r][perm[j]];
    }
    CHECK(std::abs(fleiss_kappa(RatingMatrix(permuted)) - kappa) <= 1e-12);
  }
}

TEST_CASE("committee examples") {
  const Sign g = Sign::kPositive, b = Sign::kNegative;
  const std::vector<CommitteeItem> items{
      {"a", g, {g, g, g}}, {"b", g, {g, g, b}}, {"c", b, {g, b}}, {"d", b, {b}}};
  const CommitteeResult r = committee_aggregate(items);
  REQUIRE(r.scored.size() == 4);
  CHECK(r.scored[0].score == 1.0);
  CHECK(r.scored[1].score == doctest::Approx(1.0 / 3.0));
  CHECK(r.predicted[1] == g);
  CHECK(r.scored[2].score == 0.0);
  CHECK(r.predicted[2] == b);
  CHECK(r.scored[3].label == b);
  CHECK(r.accuracy() == 1.0);

  const std::vector<CommitteeItem> missing{{"a", g, {g}}, {"gap", b, {}}};
  try {
    committee_aggregate(missing);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kMissingAnnotations);
    CHECK(e.detail().find("gap") != std::string::npos);
  }
}

TEST_CASE("property: a committee of independent annotators beats the average member") {
  RandomStream rng(808);
  for (double p : {0.55, 0.62, 0.7}) {
    std::vector<CommitteeItem> items;
    std::size_t correct = 0, answers = 0;
    for (int i = 0; i < 3000; ++i) {
      CommitteeItem item{"i" + std::to_string(i), rng.below(2) ? Sign::kPositive : Sign::kNegative, {}};
      for (int a = 0; a < 5; ++a) {
        const bool right = rng.uniform() < p;
        item.guesses.push_back(right ? item.truth : negate(item.truth));
        correct += right;
        ++answers;
      }
      items.push_back(std::move(item));
    }
    const double mean = static_cast<double>(correct) / static_cast<double>(answers);
    CHECK(std::abs(mean - p) <= 0.02);
    CHECK(committee_aggregate(items).accuracy() >= mean);
  }
}

TEST_CASE("emotion distributions") {
  const IndexClassifier fec;
  auto make = [](std::vector<Emotion> frames, double side) {
    FaceTrack t;
    t.frames = Matrix(frames.size(), 2);
    for (std::size_t r = 0; r < frames.size(); ++r) {
      t.frames(r, 0) = static_cast<double>(index_of(frames[r]));
      t.frames(r, 1) = side;
    }
    return t;
  };
  using E = Emotion;
  std::vector<FaceTrack> tracks{make({E::kHappiness, E::kHappiness, E::kNeutral}, 1.0),
                                make({E::kHappiness, E::kSurprise}, 1.0),
                                make({E::kSadness, E::kAnger, E::kSadness, E::kFear}, -1.0)};
  LinearTrackModel m{{0.0, 1.0}, 0.0, PoolingMode::kAverage, Normalization::kNone};
  std::vector<const FaceTrack*> ptrs;
  for (const auto& t : tracks) ptrs.push_back(&t);

  const EmotionDistributionPair d = emotion_distributions(ptrs, m, fec);
  CHECK(d.good_tracks == 2);
  CHECK(d.bad_tracks == 1);
  CHECK(d.good[index_of(E::kHappiness)] == doctest::Approx(0.6));
  CHECK(d.bad[index_of(E::kSadness)] == doctest::Approx(0.5));
  CHECK(std::abs(std::accumulate(d.good.begin(), d.good.end(), 0.0) - 1.0) <= 1e-12);
  CHECK(std::abs(std::accumulate(d.bad.begin(), d.bad.end(), 0.0) - 1.0) <= 1e-12);

  std::reverse(ptrs.begin(), ptrs.end());
  const EmotionDistributionPair r = emotion_distributions(ptrs, m, fec);
  CHECK(r.good == d.good);
  CHECK(r.bad == d.bad);

  const LinearTrackModel all_good{{0.0, 0.0}, 1.0, PoolingMode::kAverage, Normalization::kNone};
  const EmotionDistributionPair e = emotion_distributions(ptrs, all_good, fec);
  CHECK(e.bad_empty);
  CHECK_FALSE(e.good_empty);
  CHECK(std::all_of(e.bad.begin(), e.bad.end(), [](double v) { return v == 0.0; }));

  CHECK(code_of([&] { emotion_distributions(std::vector<const FaceTrack*>{}, m, fec); }) == Errc::kEmptyInput);
}

TEST_CASE("sample standard deviation") {
  auto [mean, sd] = mean_and_stddev(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(mean == 5.0);
  CHECK(sd == doctest::Approx(std::sqrt(32.0 / 7.0)));
  auto [m1, s1] = mean_and_stddev(std::vector<double>{0.62});
  CHECK(m1 == 0.62);
  CHECK(s1 == 0.0);
}
