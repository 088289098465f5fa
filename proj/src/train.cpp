#include "facevalue/train.hpp"

#include <cmath>
#include <numeric>

#include "facevalue/error.hpp"
#include "facevalue/metrics.hpp"
#include "facevalue/random.hpp"

namespace facevalue {

void validate_config(const TrainConfig& config) {
  auto fail = [](const std::string& msg) { throw Error(Errc::kConfigError, msg); };
  if (!(std::isfinite(config.learning_rate) && config.learning_rate > 0.0)) {
    fail("learning_rate: must be positive");
  }
  if (config.epochs < 1) fail("epochs: must be positive");
  if (!(std::isfinite(config.l2_lambda) && config.l2_lambda >= 0.0)) {
    fail("l2_lambda: must be non-negative");
  }
  if (config.batch_size < 1) fail("batch_size: must be positive");
}

double mean_hinge_loss(const LinearTrackModel& model, const std::vector<std::vector<double>>& pooled,
                       const std::vector<Sign>& labels, double l2_lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const double margin = static_cast<double>(to_int(labels[i])) * score_pooled(model, pooled[i]);
    loss += std::max(0.0, 1.0 - margin);
  }
  loss /= static_cast<double>(pooled.size());
  double wnorm2 = 0.0;
  for (double w : model.w) wnorm2 += w * w;
  return loss + 0.5 * l2_lambda * wnorm2;
}

namespace {

struct PooledSplit {
  std::vector<std::vector<double>> x;
  std::vector<Sign> y;

  bool has_both_classes() const {
    bool pos = false, neg = false;
    for (Sign s : y) (s == Sign::kPositive ? pos : neg) = true;
    return pos && neg;
  }
};

PooledSplit pool_split(const LabeledTrackSet& set, Split which, const LinearTrackModel& model) {
  PooledSplit out;
  for (const FaceTrack* t : set.split(which)) {
    if (t->frames.cols() != model.w.size()) {
      throw Error(Errc::kDimensionMismatch, "track " + t->event_ref.episode_id + "/" +
                                                std::to_string(t->event_ref.round) +
                                                " does not match the model dimension");
    }
    out.x.push_back(pool_track(*t, model.pooling_mode, model.normalize).values);
    out.y.push_back(t->label);
  }
  return out;
}

double split_auc(const LinearTrackModel& model, const PooledSplit& split) {
  ScoredPredictions sp;
  sp.reserve(split.x.size());
  for (std::size_t i = 0; i < split.x.size(); ++i) sp.push_back({score_pooled(model, split.x[i]), split.y[i]});
  return roc_auc(sp);
}

bool finite_model(const LinearTrackModel& m) {
  if (!std::isfinite(m.b)) return false;
  for (double w : m.w) {
    if (!std::isfinite(w)) return false;
  }
  return true;
}

}  // namespace

TrainResult train(const LabeledTrackSet& dataset, const TrainConfig& config,
                  const LinearTrackModel& init) {
  validate_config(config);
  if (!finite_model(init)) throw Error(Errc::kConfigError, "init: non-finite parameters");
  const PooledSplit tr = pool_split(dataset, Split::kTrain, init);
  if (tr.x.empty()) throw Error(Errc::kEmptySplit, "training split is empty");
  const PooledSplit val = pool_split(dataset, Split::kVal, init);
  const bool use_val = val.has_both_classes();

  TrainResult result;
  LinearTrackModel model = init;
  auto record = [&](int epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = mean_hinge_loss(model, tr.x, tr.y, config.l2_lambda);
    if (!std::isfinite(rec.train_loss) || !finite_model(model)) {
      throw Error(Errc::kDivergenceDetected, "non-finite loss at epoch " + std::to_string(epoch));
    }
    if (use_val) rec.val_auc = split_auc(model, val);
    result.log.push_back(rec);
    return rec;
  };

  const EpochRecord first = record(0);
  result.model = model;
  double best_auc = first.val_auc.value_or(0.0);

  const std::size_t n = tr.x.size();
  const std::size_t d = model.w.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad_w(d);

  // The bias moves as the weight of a constant feature whose squared norm is
  // the mean squared norm of the pooled training vectors. Without this, l1
  // normalized inputs leave the weights orders of magnitude slower than b.
  double bias_scale = 0.0;
  for (const auto& z : tr.x) bias_scale += std::inner_product(z.begin(), z.end(), z.begin(), 0.0);
  bias_scale /= static_cast<double>(n);
  if (!(bias_scale > 0.0)) bias_scale = 1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    RandomStream rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    // Diminishing step size; a constant step keeps the bias oscillating.
    const double eta = config.learning_rate / std::sqrt(static_cast<double>(epoch));

    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& z = tr.x[order[k]];
        const double ys = static_cast<double>(to_int(tr.y[order[k]]));
        if (1.0 - ys * score_pooled(model, z) > 0.0) {
          for (std::size_t j = 0; j < d; ++j) grad_w[j] -= ys * z[j];
          grad_b -= ys;
        }
      }
      for (std::size_t j = 0; j < d; ++j) {
        model.w[j] -= eta * (grad_w[j] * inv + config.l2_lambda * model.w[j]);
      }
      model.b -= eta * bias_scale * grad_b * inv;
    }

    const EpochRecord rec = record(epoch);
    if (use_val) {
      if (*rec.val_auc > best_auc) {
        best_auc = *rec.val_auc;
        result.model = model;
        result.best_epoch = epoch;
      }
    } else {
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

}  // namespace facevalue
