#include "facevalue/actor.hpp"

#include <cmath>
#include <numeric>

#include "facevalue/error.hpp"

namespace facevalue {

namespace {

// Centroid directions must not move when unrelated config fields change.
constexpr std::uint64_t kCentroidSeed = 0x5eed'ce47'0001ULL;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

EmotionRow default_good_row() {
  // anger, disgust, fear, happiness, sadness, surprise, neutral
  return {0.03, 0.02, 0.02, 0.55, 0.03, 0.20, 0.15};
}

EmotionRow default_bad_row() { return {0.15, 0.08, 0.10, 0.02, 0.25, 0.20, 0.20}; }

void validate_config(const ActorConfig& config) {
  auto fail = [](const std::string& msg) { throw Error(Errc::kConfigError, msg); };
  for (const auto* row : {&config.good_row, &config.bad_row}) {
    const char* name = row == &config.good_row ? "emotion_given_valence.good" : "emotion_given_valence.bad";
    double sum = 0.0;
    for (double p : *row) {
      if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + ": probabilities must lie in [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) fail(std::string(name) + ": row must sum to 1");
  }
  if (config.frames_per_track == 0) fail("frames_per_track: must be positive");
  if (!(config.persistence >= 0.0 && config.persistence <= 1.0)) fail("persistence: must lie in [0, 1]");
  if (config.feature_dim == 0) fail("feature_dim: must be positive");
  if (!(std::isfinite(config.centroid_separation) && config.centroid_separation >= 0.0)) {
    fail("centroid_separation: must be finite and non-negative");
  }
  if (!(std::isfinite(config.noise_sigma) && config.noise_sigma >= 0.0)) {
    fail("noise_sigma: must be finite and non-negative");
  }
}

Matrix emotion_centroids(const ActorConfig& config) {
  const std::size_t d = config.feature_dim;
  if (d < kEmotionCount) {
    throw Error(Errc::kDimensionTooSmall,
                "feature_dim " + std::to_string(d) + " cannot hold 7 orthogonal centroids");
  }
  RandomStream rng(kCentroidSeed);
  Matrix q(kEmotionCount, d);
  for (std::size_t r = 0; r < kEmotionCount; ++r) {
    for (std::size_t c = 0; c < d; ++c) q(r, c) = rng.normal();
  }
  // Modified Gram-Schmidt, two passes for orthogonality to machine precision.
  for (std::size_t r = 0; r < kEmotionCount; ++r) {
    auto v = q.row(r);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < r; ++k) {
        const double proj = dot(v, q.row(k));
        auto u = q.row(k);
        for (std::size_t c = 0; c < d; ++c) v[c] -= proj * u[c];
      }
    }
    const double norm = std::sqrt(dot(v, v));
    for (double& x : v) x /= norm;
  }
  for (std::size_t r = 0; r < kEmotionCount; ++r) {
    for (double& x : q.row(r)) x *= config.centroid_separation;
  }
  return q;
}

std::vector<Emotion> sample_emotion_sequence(Sign valence, const ActorConfig& config,
                                             RandomStream& stream) {
  const EmotionRow& row = config.row(valence);
  std::vector<Emotion> seq;
  seq.reserve(config.frames_per_track);
  for (std::size_t t = 0; t < config.frames_per_track; ++t) {
    if (t > 0 && stream.uniform() < config.persistence) {
      seq.push_back(seq.back());
    } else {
      seq.push_back(static_cast<Emotion>(stream.categorical(row)));
    }
  }
  return seq;
}

SyntheticActor::SyntheticActor(ActorConfig config) : config_(std::move(config)) {
  validate_config(config_);
  centroids_ = emotion_centroids(config_);
}

FaceTrack SyntheticActor::emit_track(const BoxEvent& event, std::string_view episode_id,
                                     RandomStream& stream) const {
  FaceTrack track;
  track.event_ref = {std::string(episode_id), event.round};
  track.label = event.label;
  auto emotions = sample_emotion_sequence(event.label, config_, stream);
  track.frames = Matrix(config_.frames_per_track, config_.feature_dim);
  for (std::size_t t = 0; t < emotions.size(); ++t) {
    auto centroid = centroids_.row(index_of(emotions[t]));
    auto frame = track.frames.row(t);
    for (std::size_t c = 0; c < config_.feature_dim; ++c) {
      frame[c] = centroid[c] + config_.noise_sigma * stream.normal();
    }
  }
  track.true_emotions = std::move(emotions);
  return track;
}

FaceTrack emit_track(const BoxEvent& event, std::string_view episode_id,
                     const ActorConfig& config, RandomStream& stream) {
  return SyntheticActor(config).emit_track(event, episode_id, stream);
}

}  // namespace facevalue
