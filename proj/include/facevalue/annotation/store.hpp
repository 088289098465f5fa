#pragma once

// Human-baseline annotation state: datasets, sessions, the guess log, and the
// statistics derived from it. All mutations go through one writer and reach
// disk before the call returns.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace facevalue::annotation {

struct AnnotationItem {
  std::string item_id;
  std::string dataset;
  std::string media_ref;
  std::vector<std::string> choices;
  int fold = 0;
  std::string ground_truth;
};

/// What a client may see before answering: everything but ground_truth.
nlohmann::json public_view(const AnnotationItem& item);

struct Dataset {
  std::string name;
  std::vector<std::string> choices;
  std::vector<AnnotationItem> items;  // sorted by item_id

  const AnnotationItem* find(std::string_view item_id) const;
  bool is_binary() const noexcept { return choices.size() == 2; }
};

/// Parses {"name", "choices", "items": [{"item_id", "media_ref",
/// "ground_truth"}]}. Folds are assigned from item ids. Throws MalformedFile.
Dataset dataset_from_json(const nlohmann::json& j, int fold_count);
nlohmann::json dataset_to_json(const Dataset& d);

int fold_of(std::string_view item_id, int fold_count);

struct ServiceConfig {
  std::filesystem::path data_dir;  // holds datasets/*.json and annotations.log
  int fold_count = 5;
  int min_annotations = 4;      // items below this are left out of kappa and the committee
  int min_ranked_answers = 10;  // leaderboard threshold
};

/// Throws ConfigError.
void validate_config(const ServiceConfig& config);

struct AnnotationRecord {
  std::string annotator_id;
  std::string dataset;
  std::string item_id;
  std::string guess;
  bool correct = false;
  std::int64_t timestamp_ms = 0;
};

struct SessionState {
  std::string session_id;
  std::string annotator_id;
  std::string dataset;
  int answered = 0;
  int correct = 0;
  int assigned_fold = 0;

  nlohmann::json to_json() const;
};

/// Either the next item to show or done.
struct NextItem {
  std::optional<AnnotationItem> item;
  bool done() const noexcept { return !item.has_value(); }
};

struct AnswerResult {
  bool correct = false;
  double running_accuracy = 0.0;
  int answered = 0;

  nlohmann::json to_json() const;
};

struct LeaderboardEntry {
  std::string annotator_id;
  double accuracy = 0.0;
  int answered = 0;

  bool operator==(const LeaderboardEntry&) const = default;
};

struct Leaderboard {
  std::vector<LeaderboardEntry> ranked;
  std::vector<LeaderboardEntry> unranked;  // below min_ranked_answers

  nlohmann::json to_json() const;
  bool operator==(const Leaderboard&) const = default;
};

struct AnnotatorStats {
  std::string annotator_id;
  int answered = 0;
  double accuracy = 0.0;
  std::optional<double> auc;  // binary datasets, when both classes were seen

  bool operator==(const AnnotatorStats&) const = default;
};

struct HumanStats {
  std::vector<AnnotatorStats> annotators;  // by annotator_id
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation
  int answers = 0;
  /// Items with at least min_annotations guesses; each uses its first
  /// min_annotations guesses in log order.
  int committee_items = 0;
  std::optional<double> fleiss_kappa;
  std::optional<double> committee_accuracy;
  std::optional<double> committee_auc;  // binary datasets only

  nlohmann::json to_json() const;
  bool operator==(const HumanStats&) const = default;
};

/// Loads every dataset under data_dir/datasets and replays the log. A torn
/// final log line (crash mid-append) is cut off; any other bad line throws
/// MalformedFile.
class AnnotationStore {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit AnnotationStore(ServiceConfig config, Clock clock = {});
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  const ServiceConfig& config() const noexcept { return config_; }
  std::vector<std::string> dataset_names() const;
  /// Throws UnknownDataset.
  const Dataset& dataset(std::string_view name) const;

  /// Binds the annotator to the fold with the fewest annotators (ties to the
  /// lowest index), or returns the existing session. Throws UnknownDataset.
  SessionState create_session(const std::string& annotator_id, const std::string& dataset);
  /// Throws UnknownSession.
  SessionState session(std::string_view session_id) const;
  /// Unanswered item of the session's fold with the fewest annotations, ties
  /// to the smallest item_id. Throws UnknownSession.
  NextItem next_item(std::string_view session_id) const;
  /// Throws UnknownSession, UnknownItem (also for items outside the fold),
  /// InvalidChoice, AlreadyAnswered, IoError.
  AnswerResult submit_answer(std::string_view session_id, const std::string& item_id,
                             const std::string& guess);

  /// Throws UnknownDataset.
  Leaderboard leaderboard(std::string_view dataset) const;
  /// Throws UnknownDataset, NoData.
  HumanStats human_stats(std::string_view dataset) const;

  /// Every answer in log order.
  std::vector<AnnotationRecord> records(std::string_view dataset) const;

 private:
  struct Session {
    SessionState state;
    std::map<std::string, bool, std::less<>> answered;  // item_id -> correct
  };

  void load_datasets();
  void replay_log();
  void append(const nlohmann::json& line);
  void apply_session(const std::string& annotator_id, const std::string& dataset, int fold);
  void apply_answer(const AnnotationRecord& record);
  Session& session_for(std::string_view session_id);
  const Session& session_for(std::string_view session_id) const;

  ServiceConfig config_;
  Clock clock_;
  std::map<std::string, Dataset, std::less<>> datasets_;
  std::map<std::string, Session, std::less<>> sessions_;  // by session id
  std::map<std::string, std::map<std::string, int, std::less<>>, std::less<>> annotation_counts_;
  std::vector<AnnotationRecord> records_;
  int log_fd_ = -1;
  mutable std::shared_mutex mutex_;
};

/// Stable id for an (annotator, dataset) pair.
std::string session_id_for(std::string_view annotator_id, std::string_view dataset);

}  // namespace facevalue::annotation
