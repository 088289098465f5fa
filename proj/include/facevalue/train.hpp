#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "facevalue/classify.hpp"
#include "facevalue/tracks.hpp"

namespace facevalue {

struct TrainConfig {
  double learning_rate = 300.0;
  int epochs = 60;
  double l2_lambda = 1e-4;
  std::size_t batch_size = 32;
  std::uint64_t seed = 7;

  bool operator==(const TrainConfig&) const = default;
};

/// Throws ConfigError naming the field.
void validate_config(const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;  // 0 is the initial model
  double train_loss = 0.0;
  std::optional<double> val_auc;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  LinearTrackModel model;
  int best_epoch = 0;
  std::vector<EpochRecord> log;
};

/// Mini-batch subgradient descent on the mean regularized hinge loss over the
/// training split, step size learning_rate/sqrt(epoch). Batches are reshuffled
/// every epoch from config.seed only.
/// Returns the checkpoint with the best validation ROC-AUC (earliest on ties,
/// epoch 0 included); without a usable validation split the final epoch is
/// returned. Throws EmptySplit, DimensionMismatch, DivergenceDetected.
TrainResult train(const LabeledTrackSet& dataset, const TrainConfig& config,
                  const LinearTrackModel& init);

/// Mean of max(0, 1 - y(w.z + b)) over the examples plus (lambda/2)|w|^2.
double mean_hinge_loss(const LinearTrackModel& model, const std::vector<std::vector<double>>& pooled,
                       const std::vector<Sign>& labels, double l2_lambda);

}  // namespace facevalue
