#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "facevalue/actor.hpp"
#include "facevalue/classify.hpp"
#include "facevalue/money.hpp"
#include "facevalue/tracks.hpp"

namespace facevalue {

struct ScoredPrediction {
  double score = 0.0;
  Sign label = Sign::kNegative;  // ground truth
};
using ScoredPredictions = std::vector<ScoredPrediction>;

/// Fraction of (predicted, truth) pairs that agree. Throws EmptyInput.
double accuracy(std::span<const std::pair<Sign, Sign>> predictions);

/// Area under the ROC curve from average ranks (tied pairs count one half).
/// Throws DegenerateLabels when a class is absent, EmptyInput on non-finite
/// scores.
double roc_auc(std::span<const ScoredPrediction> predictions);

/// Items x categories table of rating counts.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  explicit RatingMatrix(std::vector<std::vector<int>> counts);

  std::size_t items() const noexcept { return counts_.size(); }
  std::size_t categories() const noexcept { return counts_.empty() ? 0 : counts_[0].size(); }
  const std::vector<int>& row(std::size_t i) const { return counts_[i]; }

 private:
  std::vector<std::vector<int>> counts_;
};

/// Fleiss' kappa. Every row must have the same number of raters n >= 2
/// (UnequalRaters). When all ratings fall in one category the chance term is
/// 1 and kappa is defined as 1.
double fleiss_kappa(const RatingMatrix& m);

struct CommitteeItem {
  std::string item_id;
  Sign truth = Sign::kNegative;
  std::vector<Sign> guesses;
};

struct CommitteeResult {
  /// Mean vote per item in [-1, 1], paired with the item's ground truth.
  ScoredPredictions scored;
  /// Majority decision per item; a tied vote predicts the negative class.
  std::vector<Sign> predicted;

  double accuracy() const;
};

/// Throws MissingAnnotations naming the first item without guesses.
CommitteeResult committee_aggregate(std::span<const CommitteeItem> items);

struct EmotionDistributionPair {
  EmotionRow good{};  // frame-emotion histogram of tracks predicted good
  EmotionRow bad{};   // ... and of tracks predicted bad
  std::size_t good_tracks = 0;
  std::size_t bad_tracks = 0;
  /// A partition with no tracks is flagged and its row left at zero.
  bool good_empty = true;
  bool bad_empty = true;
};

/// Partitions tracks by the model's predicted label and histograms every
/// frame's recognized emotion per partition. Throws EmptyInput.
EmotionDistributionPair emotion_distributions(std::span<const FaceTrack* const> tracks,
                                              const LinearTrackModel& model,
                                              const FrameEmotionClassifier& fec);

/// Sample mean and standard deviation (n - 1 denominator; 0 for a single value).
std::pair<double, double> mean_and_stddev(std::span<const double> values);

}  // namespace facevalue
