#include "facevalue/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "facevalue/error.hpp"

namespace facevalue {

NearestCentroidClassifier::NearestCentroidClassifier(Matrix centroids)
    : centroids_(std::move(centroids)) {
  if (centroids_.rows() != kEmotionCount) {
    throw Error(Errc::kDimensionMismatch, "expected one centroid per emotion");
  }
}

Emotion NearestCentroidClassifier::classify(std::span<const double> frame) const {
  if (frame.size() != centroids_.cols()) {
    throw Error(Errc::kDimensionMismatch, "frame has " + std::to_string(frame.size()) +
                                              " features, classifier expects " +
                                              std::to_string(centroids_.cols()));
  }
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    auto c = centroids_.row(k);
    double dist = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
      const double diff = frame[i] - c[i];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return static_cast<Emotion>(best);
}

ValenceMap::ValenceMap() {
  classes_.fill(ValenceClass::kIgnored);
  classes_[index_of(Emotion::kHappiness)] = ValenceClass::kPositive;
  for (Emotion e : {Emotion::kSadness, Emotion::kFear, Emotion::kAnger, Emotion::kDisgust}) {
    classes_[index_of(e)] = ValenceClass::kNegative;
  }
}

VoteResult voting_score(const FaceTrack& track, const FrameEmotionClassifier& fec,
                        const ValenceMap& map) {
  const std::size_t T = track.frames.rows();
  if (T == 0) throw Error(Errc::kEmptyTrack, "track has no frames");
  VoteResult r;
  for (std::size_t t = 0; t < T; ++t) {
    switch (map[fec.classify(track.frames.row(t))]) {
      case ValenceClass::kPositive: ++r.positive_votes; break;
      case ValenceClass::kNegative: ++r.negative_votes; break;
      case ValenceClass::kIgnored: break;
    }
  }
  r.score = static_cast<double>(r.positive_votes - r.negative_votes) / static_cast<double>(T);
  r.label = r.score > 0.0 ? Sign::kPositive : Sign::kNegative;
  return r;
}

std::string_view to_string(PoolingMode m) { return m == PoolingMode::kAverage ? "average" : "max"; }
std::string_view to_string(Normalization n) { return n == Normalization::kL1 ? "l1" : "none"; }

PooledVector pool_frames(const Matrix& frames, PoolingMode mode, Normalization normalize) {
  const std::size_t T = frames.rows();
  if (T == 0) throw Error(Errc::kEmptyTrack, "track has no frames");
  const std::size_t d = frames.cols();
  PooledVector out;
  out.values.assign(frames.row(0).begin(), frames.row(0).end());
  for (std::size_t t = 1; t < T; ++t) {
    auto f = frames.row(t);
    if (mode == PoolingMode::kAverage) {
      for (std::size_t i = 0; i < d; ++i) out.values[i] += f[i];
    } else {
      for (std::size_t i = 0; i < d; ++i) out.values[i] = std::max(out.values[i], f[i]);
    }
  }
  if (mode == PoolingMode::kAverage) {
    for (double& v : out.values) v /= static_cast<double>(T);
  }
  if (normalize == Normalization::kL1) {
    double norm = 0.0;
    for (double v : out.values) norm += std::abs(v);
    if (norm == 0.0) {
      out.zero_norm = true;
    } else {
      for (double& v : out.values) v /= norm;
    }
  }
  return out;
}

PooledVector pool_track(const FaceTrack& track, PoolingMode mode, Normalization normalize) {
  return pool_frames(track.frames, mode, normalize);
}

double score_pooled(const LinearTrackModel& model, std::span<const double> pooled) {
  if (pooled.size() != model.w.size()) {
    throw Error(Errc::kDimensionMismatch, "model has " + std::to_string(model.w.size()) +
                                              " weights, features have " +
                                              std::to_string(pooled.size()));
  }
  double s = model.b;
  for (std::size_t i = 0; i < pooled.size(); ++i) s += model.w[i] * pooled[i];
  return s;
}

double predict(const LinearTrackModel& model, const FaceTrack& track) {
  if (track.frames.cols() != model.w.size()) {
    throw Error(Errc::kDimensionMismatch, "track feature_dim differs from the model's");
  }
  return score_pooled(model, pool_track(track, model.pooling_mode, model.normalize).values);
}

double predict(const LinearTrackModel& model, const FaceTrack& track, const FrameEmbedder& embedder) {
  const Matrix embedded = embedder.embed(track.frames);
  if (embedded.cols() != model.w.size()) {
    throw Error(Errc::kDimensionMismatch, "embedded feature_dim differs from the model's");
  }
  return score_pooled(model, pool_frames(embedded, model.pooling_mode, model.normalize).values);
}

HingeEvaluation hinge_objective(const LinearTrackModel& model, std::span<const double> pooled,
                                Sign y, double l2_lambda) {
  const double margin = static_cast<double>(to_int(y)) * score_pooled(model, pooled);
  const double slack = 1.0 - margin;
  HingeEvaluation h;
  h.grad_w.resize(model.w.size());
  double wnorm2 = 0.0;
  for (double w : model.w) wnorm2 += w * w;
  h.value = std::max(0.0, slack) + 0.5 * l2_lambda * wnorm2;
  const double ys = static_cast<double>(to_int(y));
  for (std::size_t i = 0; i < model.w.size(); ++i) {
    h.grad_w[i] = l2_lambda * model.w[i] - (slack > 0.0 ? ys * pooled[i] : 0.0);
  }
  h.grad_b = slack > 0.0 ? -ys : 0.0;
  return h;
}

std::string write_model(const LinearTrackModel& model) {
  std::string out = "FVMODEL 1 feature_dim=" + std::to_string(model.w.size()) +
                    " pooling=" + std::string(to_string(model.pooling_mode)) +
                    " normalize=" + std::string(to_string(model.normalize)) + "\n";
  out += format_double(model.b) + "\n";
  for (double w : model.w) out += format_double(w) + "\n";
  return out;
}

LinearTrackModel read_model(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl == text.npos ? text.size() : nl + 1;
  }
  auto fail = [](const std::string& msg, int line) {
    throw Error(Errc::kMalformedFile, msg, line, 1);
  };
  if (lines.empty()) fail("empty model file", 1);

  const std::string_view header = lines[0];
  constexpr std::string_view kPrefix = "FVMODEL 1 feature_dim=";
  if (header.substr(0, kPrefix.size()) != kPrefix) fail("bad model header", 1);
  auto rest = header.substr(kPrefix.size());
  const auto sp = rest.find(' ');
  if (sp == rest.npos) fail("bad model header", 1);
  std::size_t dim = 0;
  {
    auto digits = rest.substr(0, sp);
    auto v = parse_double(digits);
    if (!v || *v < 1 || *v != std::floor(*v) || *v > 1e7) fail("bad feature_dim", 1);
    dim = static_cast<std::size_t>(*v);
  }
  rest = rest.substr(sp + 1);
  LinearTrackModel m;
  if (rest == "pooling=average normalize=l1") {
    m.pooling_mode = PoolingMode::kAverage;
    m.normalize = Normalization::kL1;
  } else if (rest == "pooling=average normalize=none") {
    m.pooling_mode = PoolingMode::kAverage;
    m.normalize = Normalization::kNone;
  } else if (rest == "pooling=max normalize=l1") {
    m.pooling_mode = PoolingMode::kMax;
    m.normalize = Normalization::kL1;
  } else if (rest == "pooling=max normalize=none") {
    m.pooling_mode = PoolingMode::kMax;
    m.normalize = Normalization::kNone;
  } else {
    fail("bad pooling/normalize fields", 1);
  }
  std::size_t count = lines.size();
  while (count > 1 && lines[count - 1].empty()) --count;
  if (count != dim + 2) fail("expected bias and " + std::to_string(dim) + " weights", static_cast<int>(count));
  auto value = [&](std::size_t i) {
    auto v = parse_double(lines[i]);
    if (!v || !std::isfinite(*v)) fail("bad parameter value", static_cast<int>(i) + 1);
    return *v;
  };
  m.b = value(1);
  m.w.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) m.w[i] = value(i + 2);
  return m;
}

}  // namespace facevalue
