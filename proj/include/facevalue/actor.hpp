#pragma once

// Synthetic contestant: maps event valence to a sequence of emotions and each
// emotion to a noisy feature vector around a per-emotion centroid.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "facevalue/game.hpp"
#include "facevalue/random.hpp"
#include "facevalue/tracks.hpp"

namespace facevalue {

using EmotionRow = std::array<double, kEmotionCount>;

/// P(emotion | good event), indexed by Emotion.
EmotionRow default_good_row();
/// P(emotion | bad event), indexed by Emotion.
EmotionRow default_bad_row();

struct ActorConfig {
  EmotionRow good_row = default_good_row();
  EmotionRow bad_row = default_bad_row();
  std::size_t frames_per_track = 7;
  /// Probability that a frame keeps the previous frame's emotion.
  double persistence = 0.5;
  std::size_t feature_dim = 64;
  double centroid_separation = 1.0;
  double noise_sigma = 0.7;
  std::uint64_t seed = 4242;

  const EmotionRow& row(Sign valence) const {
    return valence == Sign::kPositive ? good_row : bad_row;
  }

  bool operator==(const ActorConfig&) const = default;
};

/// Throws ConfigError naming the field.
void validate_config(const ActorConfig& config);

/// 7 x d matrix of orthonormal directions scaled by centroid_separation. The
/// directions come from a fixed-seed Gaussian matrix, so they depend only on d.
/// Throws DimensionTooSmall when d < 7.
Matrix emotion_centroids(const ActorConfig& config);

std::vector<Emotion> sample_emotion_sequence(Sign valence, const ActorConfig& config,
                                             RandomStream& stream);

/// Caches the centroids for repeated track emission.
class SyntheticActor {
 public:
  explicit SyntheticActor(ActorConfig config);

  const ActorConfig& config() const noexcept { return config_; }
  const Matrix& centroids() const noexcept { return centroids_; }

  /// Frame t = centroid(emotion_t) + N(0, noise_sigma^2 I).
  FaceTrack emit_track(const BoxEvent& event, std::string_view episode_id,
                       RandomStream& stream) const;

 private:
  ActorConfig config_;
  Matrix centroids_;
};

FaceTrack emit_track(const BoxEvent& event, std::string_view episode_id,
                     const ActorConfig& config, RandomStream& stream);

}  // namespace facevalue
