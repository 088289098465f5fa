#pragma once

// Track-level valence predictors: the per-frame emotion voting baseline and
// the learned temporal-pooling linear model.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facevalue/money.hpp"
#include "facevalue/tracks.hpp"

namespace facevalue {

/// Per-frame emotion recognizer. Implementations must be thread-safe.
class FrameEmotionClassifier {
 public:
  virtual ~FrameEmotionClassifier() = default;
  virtual Emotion classify(std::span<const double> frame) const = 0;
  virtual std::size_t feature_dim() const = 0;
};

/// argmin of Euclidean distance to the seven centroids; ties go to the lowest
/// emotion index.
class NearestCentroidClassifier final : public FrameEmotionClassifier {
 public:
  explicit NearestCentroidClassifier(Matrix centroids);

  Emotion classify(std::span<const double> frame) const override;
  std::size_t feature_dim() const override { return centroids_.cols(); }

 private:
  Matrix centroids_;
};

enum class ValenceClass { kPositive, kNegative, kIgnored };

/// Assignment of every emotion to exactly one of positive, negative, ignored.
class ValenceMap {
 public:
  /// happiness positive; sadness, fear, anger, disgust negative; neutral and
  /// surprise ignored.
  ValenceMap();
  explicit ValenceMap(std::array<ValenceClass, kEmotionCount> classes) : classes_(classes) {}

  ValenceClass operator[](Emotion e) const { return classes_[index_of(e)]; }

 private:
  std::array<ValenceClass, kEmotionCount> classes_;
};

struct VoteResult {
  double score = 0.0;  // (n_pos - n_neg) / T
  Sign label = Sign::kNegative;
  int positive_votes = 0;
  int negative_votes = 0;
};

/// Throws EmptyTrack. Ties (score 0) predict the negative class.
VoteResult voting_score(const FaceTrack& track, const FrameEmotionClassifier& fec,
                        const ValenceMap& map = {});

enum class PoolingMode { kAverage, kMax };
enum class Normalization { kL1, kNone };

std::string_view to_string(PoolingMode m);
std::string_view to_string(Normalization n);

struct PooledVector {
  std::vector<double> values;
  /// Set when L1 normalization met an all-zero vector and passed it through.
  bool zero_norm = false;
};

/// Coordinate-wise mean or max over frames, then optional L1 normalization.
/// Throws EmptyTrack.
PooledVector pool_frames(const Matrix& frames, PoolingMode mode, Normalization normalize);
PooledVector pool_track(const FaceTrack& track, PoolingMode mode, Normalization normalize);

/// Per-frame feature map applied before pooling. The identity is the default;
/// other embedders can feed precomputed features.
class FrameEmbedder {
 public:
  virtual ~FrameEmbedder() = default;
  virtual Matrix embed(const Matrix& frames) const = 0;
};

class IdentityEmbedder final : public FrameEmbedder {
 public:
  Matrix embed(const Matrix& frames) const override { return frames; }
};

struct LinearTrackModel {
  std::vector<double> w;
  double b = 0.0;
  PoolingMode pooling_mode = PoolingMode::kAverage;
  Normalization normalize = Normalization::kL1;

  static LinearTrackModel zeros(std::size_t dim, PoolingMode mode = PoolingMode::kAverage,
                                Normalization normalize = Normalization::kL1) {
    return {std::vector<double>(dim, 0.0), 0.0, mode, normalize};
  }

  bool operator==(const LinearTrackModel&) const = default;
};

/// w . z + b for an already pooled vector. Throws DimensionMismatch.
double score_pooled(const LinearTrackModel& model, std::span<const double> pooled);

/// w . pool(track) + b. Throws DimensionMismatch or EmptyTrack.
double predict(const LinearTrackModel& model, const FaceTrack& track);
double predict(const LinearTrackModel& model, const FaceTrack& track, const FrameEmbedder& embedder);

inline Sign predicted_label(double score) { return sign_of(score); }

struct HingeEvaluation {
  double value = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

/// max(0, 1 - y(w.z + b)) + (lambda/2)|w|^2 and its subgradient; at the kink
/// the zero-loss branch is taken.
HingeEvaluation hinge_objective(const LinearTrackModel& model, std::span<const double> pooled,
                                Sign y, double l2_lambda);

/// Text model file:
///   FVMODEL 1 feature_dim=<d> pooling=<average|max> normalize=<l1|none>
///   <b>
///   <w_1> ... <w_d>            one value per line
std::string write_model(const LinearTrackModel& model);
/// Throws MalformedFile.
LinearTrackModel read_model(std::string_view text);

}  // namespace facevalue
