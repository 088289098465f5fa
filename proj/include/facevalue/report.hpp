#pragma once

// Train-and-evaluate driver and its machine-readable report.

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "facevalue/config.hpp"
#include "facevalue/metrics.hpp"
#include "facevalue/train.hpp"

namespace facevalue {

/// INI-style document: "[section]" headers followed by "key = value" lines.
/// Keys are unique within a section; order is preserved.
class Report {
 public:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    Section& set(std::string key, std::string value);
    Section& set(std::string key, double value);
  };

  Section& section(std::string_view name);
  std::optional<std::string> get(std::string_view section, std::string_view key) const;
  const std::deque<Section>& sections() const noexcept { return sections_; }

  std::string render() const;
  /// Throws MalformedFile.
  static Report parse(std::string_view text);

 private:
  std::deque<Section> sections_;  // section() references stay valid
};

struct SplitMetrics {
  std::size_t tracks = 0;
  std::optional<double> auc;       // absent when a class is missing
  std::optional<double> accuracy;  // absent for an empty split
};

struct EvaluationResult {
  TrainResult training;
  SplitMetrics pooling_val, pooling_test;
  SplitMetrics voting_val, voting_test;
  /// Over the test split (all tracks when the test split is empty).
  EmotionDistributionPair distributions;
};

/// Trains the pooling model and scores both predictors on val and test. The
/// voting baseline recognizes frames with nearest-centroid decoding of the
/// actor's centroids.
EvaluationResult train_and_evaluate(const LabeledTrackSet& dataset, const PipelineConfig& config);

Report build_report(const EvaluationResult& result, std::string_view dataset_sha256);

/// Tab-separated "partition  emotion  mass" rows for external plotting.
std::string distribution_plot_table(const EmotionDistributionPair& d);

}  // namespace facevalue
