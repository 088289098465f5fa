#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facevalue/money.hpp"

namespace facevalue {

/// The six basic emotions plus neutral, in their canonical index order.
enum class Emotion : int {
  kAnger = 0,
  kDisgust,
  kFear,
  kHappiness,
  kSadness,
  kSurprise,
  kNeutral,
};

inline constexpr std::size_t kEmotionCount = 7;
inline constexpr std::array<Emotion, kEmotionCount> kAllEmotions = {
    Emotion::kAnger,   Emotion::kDisgust,  Emotion::kFear,   Emotion::kHappiness,
    Emotion::kSadness, Emotion::kSurprise, Emotion::kNeutral};

constexpr std::size_t index_of(Emotion e) noexcept { return static_cast<std::size_t>(e); }
std::string_view emotion_name(Emotion e);
std::optional<Emotion> emotion_from_name(std::string_view name);

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct EventRef {
  std::string episode_id;
  int round = 0;

  bool operator==(const EventRef&) const = default;
};

/// T frames of d features recorded after one box event.
struct FaceTrack {
  EventRef event_ref;
  Matrix frames;
  std::optional<std::vector<Emotion>> true_emotions;
  Sign label = Sign::kPositive;

  bool operator==(const FaceTrack&) const = default;
};

enum class Split { kTrain, kVal, kTest };
std::string_view split_name(Split s);
std::optional<Split> split_from_name(std::string_view name);

struct LabeledTrack {
  FaceTrack track;
  Split split = Split::kTrain;

  bool operator==(const LabeledTrack&) const = default;
};

struct LabeledTrackSet {
  std::size_t feature_dim = 0;
  std::size_t frames_per_track = 0;
  std::vector<LabeledTrack> tracks;

  std::size_t count(Split s) const;
  /// Tracks of one split, in stored order.
  std::vector<const FaceTrack*> split(Split s) const;

  bool operator==(const LabeledTrackSet&) const = default;
};

/// 17 significant digits; parses back to the identical double.
std::string format_double(double v);
/// Strict decimal parse of a whole token; rejects nan and inf.
std::optional<double> parse_double(std::string_view s);

/// Text track file: a header line
///   FVTRACKS 1 feature_dim=<d> frames_per_track=<T> train=<n> val=<n> test=<n>
/// then one line per track:
///   <episode_id> <round> <split> <+1|-1> <e1,e2,...|-> <T*d features>
std::string write_track_set(const LabeledTrackSet& set);
/// Throws MalformedFile with the offending line.
LabeledTrackSet read_track_set(std::string_view text);

}  // namespace facevalue
