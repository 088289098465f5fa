#include "facevalue/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "facevalue/error.hpp"

namespace facevalue {

__extension__ using i128 = __int128;

double accuracy(std::span<const std::pair<Sign, Sign>> predictions) {
  if (predictions.empty()) throw Error(Errc::kEmptyInput, "no predictions");
  std::size_t hits = 0;
  for (const auto& [predicted, truth] : predictions) hits += predicted == truth ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double roc_auc(std::span<const ScoredPrediction> predictions) {
  std::size_t n_pos = 0;
  for (const auto& p : predictions) {
    if (!std::isfinite(p.score)) throw Error(Errc::kEmptyInput, "non-finite score");
    n_pos += p.label == Sign::kPositive ? 1 : 0;
  }
  const std::size_t n_neg = predictions.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(Errc::kDegenerateLabels, "ROC-AUC needs both classes");
  }

  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].score < predictions[b].score;
  });

  // Sum of 1-based average ranks of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && predictions[order[j + 1]].score == predictions[order[i]].score) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (predictions[order[k]].label == Sign::kPositive) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

RatingMatrix::RatingMatrix(std::vector<std::vector<int>> counts) : counts_(std::move(counts)) {
  for (const auto& row : counts_) {
    if (row.size() != counts_[0].size()) {
      throw Error(Errc::kDimensionMismatch, "rating rows have different category counts");
    }
    for (int c : row) {
      if (c < 0) throw Error(Errc::kEmptyInput, "negative rating count");
    }
  }
}

double fleiss_kappa(const RatingMatrix& m) {
  if (m.items() == 0 || m.categories() == 0) throw Error(Errc::kEmptyInput, "empty rating matrix");
  const long long n = std::accumulate(m.row(0).begin(), m.row(0).end(), 0LL);
  if (n < 2) throw Error(Errc::kUnequalRaters, "every item needs at least two raters");

  const std::size_t N = m.items();
  const std::size_t k = m.categories();
  std::vector<long long> column(k, 0);
  double agreement_sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& row = m.row(i);
    long long total = 0;
    long long squares = 0;
    for (std::size_t j = 0; j < k; ++j) {
      total += row[j];
      squares += static_cast<long long>(row[j]) * row[j];
      column[j] += row[j];
    }
    if (total != n) {
      throw Error(Errc::kUnequalRaters, "item " + std::to_string(i) + " has " + std::to_string(total) +
                                            " ratings, expected " + std::to_string(n));
    }
    agreement_sum += static_cast<double>(squares - n) / static_cast<double>(n * (n - 1));
  }
  const double p_bar = agreement_sum / static_cast<double>(N);

  const long long all = static_cast<long long>(N) * n;
  i128 col_squares = 0;
  for (long long c : column) col_squares += static_cast<i128>(c) * c;
  if (col_squares == static_cast<i128>(all) * all) {
    // Every rating in one category: chance agreement is 1.
    if (p_bar == 1.0) return 1.0;
    throw Error(Errc::kDegenerateChance, "chance agreement is 1");
  }
  double p_e = 0.0;
  for (long long c : column) {
    const double p = static_cast<double>(c) / static_cast<double>(all);
    p_e += p * p;
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

double CommitteeResult::accuracy() const {
  std::vector<std::pair<Sign, Sign>> pairs;
  pairs.reserve(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) pairs.emplace_back(predicted[i], scored[i].label);
  return facevalue::accuracy(pairs);
}

CommitteeResult committee_aggregate(std::span<const CommitteeItem> items) {
  CommitteeResult r;
  r.scored.reserve(items.size());
  r.predicted.reserve(items.size());
  for (const auto& item : items) {
    if (item.guesses.empty()) {
      throw Error(Errc::kMissingAnnotations, "item '" + item.item_id + "' has no annotations");
    }
    int sum = 0;
    for (Sign g : item.guesses) sum += to_int(g);
    const double score = static_cast<double>(sum) / static_cast<double>(item.guesses.size());
    r.scored.push_back({score, item.truth});
    r.predicted.push_back(sign_of(score));
  }
  return r;
}

EmotionDistributionPair emotion_distributions(std::span<const FaceTrack* const> tracks,
                                              const LinearTrackModel& model,
                                              const FrameEmotionClassifier& fec) {
  if (tracks.empty()) throw Error(Errc::kEmptyInput, "no tracks");
  std::array<std::size_t, kEmotionCount> good{};
  std::array<std::size_t, kEmotionCount> bad{};
  EmotionDistributionPair out;
  for (const FaceTrack* t : tracks) {
    const bool is_good = predicted_label(predict(model, *t)) == Sign::kPositive;
    auto& hist = is_good ? good : bad;
    (is_good ? out.good_tracks : out.bad_tracks) += 1;
    for (std::size_t f = 0; f < t->frames.rows(); ++f) {
      hist[index_of(fec.classify(t->frames.row(f)))] += 1;
    }
  }
  auto normalize = [](const std::array<std::size_t, kEmotionCount>& h, EmotionRow& row) {
    const std::size_t total = std::accumulate(h.begin(), h.end(), std::size_t{0});
    if (total == 0) return false;
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
      row[i] = static_cast<double>(h[i]) / static_cast<double>(total);
    }
    return true;
  };
  out.good_empty = !normalize(good, out.good);
  out.bad_empty = !normalize(bad, out.bad);
  return out;
}

std::pair<double, double> mean_and_stddev(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::kEmptyInput, "no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace facevalue
