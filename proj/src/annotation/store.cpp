#include "facevalue/annotation/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>

#include "facevalue/config.hpp"
#include "facevalue/error.hpp"
#include "facevalue/metrics.hpp"
#include "facevalue/random.hpp"

namespace facevalue::annotation {

using nlohmann::json;

namespace {

constexpr const char* kLogName = "annotations.log";

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

[[noreturn]] void io_error(const std::string& what) {
  throw Error(Errc::kIoError, what + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("append to annotation log failed");
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void fsync_dir(const std::filesystem::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) io_error("cannot open " + dir.string());
  const int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) io_error("fsync " + dir.string());
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(Errc::kMalformedFile, where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

// Exact ordering on correct/answered without rounding.
bool better(const LeaderboardEntry& a, int a_correct, const LeaderboardEntry& b, int b_correct) {
  const long long lhs = static_cast<long long>(a_correct) * b.answered;
  const long long rhs = static_cast<long long>(b_correct) * a.answered;
  if (lhs != rhs) return lhs > rhs;
  if (a.answered != b.answered) return a.answered > b.answered;
  return a.annotator_id < b.annotator_id;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

int fold_of(std::string_view item_id, int fold_count) {
  return static_cast<int>(fnv1a(item_id) % static_cast<std::uint64_t>(fold_count));
}

std::string session_id_for(std::string_view annotator_id, std::string_view dataset) {
  std::string key(annotator_id);
  key += '\x1f';
  key += dataset;
  const std::uint64_t h = splitmix64(fnv1a(key));
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "s";
  for (int shift = 60; shift >= 0; shift -= 4) out += kHex[(h >> shift) & 0xf];
  return out;
}

json public_view(const AnnotationItem& item) {
  return {{"item_id", item.item_id},
          {"dataset", item.dataset},
          {"media_ref", item.media_ref},
          {"choices", item.choices},
          {"fold", item.fold}};
}

const AnnotationItem* Dataset::find(std::string_view item_id) const {
  auto it = std::lower_bound(items.begin(), items.end(), item_id,
                             [](const AnnotationItem& a, std::string_view id) { return a.item_id < id; });
  return it != items.end() && it->item_id == item_id ? &*it : nullptr;
}

Dataset dataset_from_json(const json& j, int fold_count) {
  if (!j.is_object()) throw Error(Errc::kMalformedFile, "dataset: expected an object");
  Dataset d;
  d.name = require_string(j, "name", "dataset");
  if (d.name.empty()) throw Error(Errc::kMalformedFile, "dataset: empty name");
  const std::string where = "dataset " + d.name;
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->size() < 2) {
    throw Error(Errc::kMalformedFile, where + ": 'choices' must list at least two categories");
  }
  for (const auto& c : *choices) {
    if (!c.is_string()) throw Error(Errc::kMalformedFile, where + ": choices must be strings");
    const auto name = c.get<std::string>();
    if (std::find(d.choices.begin(), d.choices.end(), name) != d.choices.end()) {
      throw Error(Errc::kMalformedFile, where + ": duplicate choice '" + name + "'");
    }
    d.choices.push_back(name);
  }
  auto items = j.find("items");
  if (items == j.end() || !items->is_array()) {
    throw Error(Errc::kMalformedFile, where + ": 'items' must be an array");
  }
  for (const auto& it : *items) {
    AnnotationItem item;
    item.item_id = require_string(it, "item_id", where);
    item.media_ref = require_string(it, "media_ref", where);
    item.ground_truth = require_string(it, "ground_truth", where);
    if (item.item_id.empty()) throw Error(Errc::kMalformedFile, where + ": empty item_id");
    if (std::find(d.choices.begin(), d.choices.end(), item.ground_truth) == d.choices.end()) {
      throw Error(Errc::kMalformedFile, where + ": item " + item.item_id + " has ground truth outside choices");
    }
    item.dataset = d.name;
    item.choices = d.choices;
    item.fold = fold_of(item.item_id, fold_count);
    d.items.push_back(std::move(item));
  }
  std::sort(d.items.begin(), d.items.end(),
            [](const AnnotationItem& a, const AnnotationItem& b) { return a.item_id < b.item_id; });
  for (std::size_t i = 1; i < d.items.size(); ++i) {
    if (d.items[i].item_id == d.items[i - 1].item_id) {
      throw Error(Errc::kMalformedFile, where + ": duplicate item_id " + d.items[i].item_id);
    }
  }
  return d;
}

json dataset_to_json(const Dataset& d) {
  json items = json::array();
  for (const auto& it : d.items) {
    items.push_back({{"item_id", it.item_id}, {"media_ref", it.media_ref}, {"ground_truth", it.ground_truth}});
  }
  return {{"name", d.name}, {"choices", d.choices}, {"items", items}};
}

void validate_config(const ServiceConfig& config) {
  if (config.fold_count < 1) throw Error(Errc::kConfigError, "fold_count: must be positive");
  if (config.min_annotations < 2) throw Error(Errc::kConfigError, "min_annotations: must be at least 2");
  if (config.min_ranked_answers < 0) throw Error(Errc::kConfigError, "min_ranked_answers: must be non-negative");
}

json SessionState::to_json() const {
  return {{"session_id", session_id}, {"annotator_id", annotator_id}, {"dataset", dataset},
          {"answered", answered},     {"correct", correct},           {"assigned_fold", assigned_fold}};
}

json AnswerResult::to_json() const {
  return {{"correct", correct}, {"running_accuracy", running_accuracy}, {"answered", answered}};
}

json Leaderboard::to_json() const {
  auto rows = [](const std::vector<LeaderboardEntry>& v) {
    json arr = json::array();
    for (const auto& e : v) {
      arr.push_back({{"annotator_id", e.annotator_id}, {"accuracy", e.accuracy}, {"answered", e.answered}});
    }
    return arr;
  };
  return {{"ranked", rows(ranked)}, {"unranked", rows(unranked)}};
}

json HumanStats::to_json() const {
  json per = json::array();
  for (const auto& a : annotators) {
    per.push_back({{"annotator_id", a.annotator_id},
                   {"answered", a.answered},
                   {"accuracy", a.accuracy},
                   {"auc", optional_json(a.auc)}});
  }
  return {{"annotators", per},
          {"mean_accuracy", mean_accuracy},
          {"std_accuracy", std_accuracy},
          {"answers", answers},
          {"committee_items", committee_items},
          {"fleiss_kappa", optional_json(fleiss_kappa)},
          {"committee_accuracy", optional_json(committee_accuracy)},
          {"committee_auc", optional_json(committee_auc)}};
}

AnnotationStore::AnnotationStore(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(clock ? std::move(clock) : Clock(wall_clock_ms)) {
  validate_config(config_);
  load_datasets();
  replay_log();
}

AnnotationStore::~AnnotationStore() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void AnnotationStore::load_datasets() {
  const auto dir = config_.data_dir / "datasets";
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_file(f));
    } catch (const json::parse_error& e) {
      throw Error(Errc::kMalformedFile, f.string() + ": " + e.what());
    }
    Dataset d = dataset_from_json(j, config_.fold_count);
    if (datasets_.count(d.name) != 0) {
      throw Error(Errc::kMalformedFile, f.string() + ": dataset '" + d.name + "' defined twice");
    }
    annotation_counts_[d.name];
    std::string name = d.name;
    datasets_.emplace(std::move(name), std::move(d));
  }
}

void AnnotationStore::replay_log() {
  const auto path = config_.data_dir / kLogName;
  std::error_code ec;
  const bool existed = std::filesystem::exists(path, ec);
  std::string text = existed ? read_file(path) : std::string();

  // A crash can only tear the last append; drop it before appending again.
  if (!text.empty() && text.back() != '\n') {
    const std::size_t nl = text.rfind('\n');
    text.resize(nl == std::string::npos ? 0 : nl + 1);
    std::filesystem::resize_file(path, text.size());
  }

  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(Errc::kMalformedFile, std::string(kLogName) + ": " + e.what(), line_no, 1);
    }
    try {
      const std::string type = require_string(j, "type", kLogName);
      if (type == "session") {
        const std::string ds = require_string(j, "dataset", kLogName);
        if (datasets_.count(ds) == 0) throw Error(Errc::kMalformedFile, "unknown dataset '" + ds + "'");
        apply_session(require_string(j, "annotator_id", kLogName), ds, j.at("fold").get<int>());
      } else if (type == "answer") {
        AnnotationRecord r;
        r.annotator_id = require_string(j, "annotator_id", kLogName);
        r.dataset = require_string(j, "dataset", kLogName);
        r.item_id = require_string(j, "item_id", kLogName);
        r.guess = require_string(j, "guess", kLogName);
        r.correct = j.at("correct").get<bool>();
        r.timestamp_ms = j.at("timestamp").get<std::int64_t>();
        auto ds = datasets_.find(r.dataset);
        if (ds == datasets_.end() || ds->second.find(r.item_id) == nullptr) {
          throw Error(Errc::kMalformedFile, "answer for unknown item " + r.dataset + "/" + r.item_id);
        }
        if (sessions_.count(session_id_for(r.annotator_id, r.dataset)) == 0) {
          throw Error(Errc::kMalformedFile, "answer before session for " + r.annotator_id);
        }
        apply_answer(r);
      } else {
        throw Error(Errc::kMalformedFile, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw Error(Errc::kMalformedFile, std::string(kLogName) + ": " + e.what(), line_no, 1);
    } catch (const Error& e) {
      if (e.line() != 0) throw;
      throw Error(Errc::kMalformedFile, std::string(kLogName) + ": " + e.detail(), line_no, 1);
    }
  }

  std::filesystem::create_directories(config_.data_dir, ec);
  log_fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (log_fd_ < 0) io_error("cannot open " + path.string());
  if (!existed) fsync_dir(config_.data_dir);
}

void AnnotationStore::append(const json& line) {
  const std::string bytes = line.dump() + "\n";
  const off_t before = ::lseek(log_fd_, 0, SEEK_END);
  try {
    write_all(log_fd_, bytes);
    if (::fsync(log_fd_) != 0) io_error("fsync annotation log");
  } catch (...) {
    // Leave no partial record in the middle of the log.
    if (before >= 0 && ::ftruncate(log_fd_, before) == 0) ::fsync(log_fd_);
    throw;
  }
}

void AnnotationStore::apply_session(const std::string& annotator_id, const std::string& dataset, int fold) {
  if (fold < 0 || fold >= config_.fold_count) {
    throw Error(Errc::kMalformedFile, "fold " + std::to_string(fold) + " out of range");
  }
  const std::string id = session_id_for(annotator_id, dataset);
  auto [it, inserted] = sessions_.try_emplace(id);
  if (!inserted) {
    if (it->second.state.annotator_id != annotator_id || it->second.state.dataset != dataset) {
      throw Error(Errc::kIoError, "session id collision for " + annotator_id);
    }
    return;
  }
  it->second.state = {id, annotator_id, dataset, 0, 0, fold};
}

void AnnotationStore::apply_answer(const AnnotationRecord& record) {
  Session& s = sessions_.at(session_id_for(record.annotator_id, record.dataset));
  if (!s.answered.emplace(record.item_id, record.correct).second) {
    throw Error(Errc::kMalformedFile, "second answer by " + record.annotator_id + " for " + record.item_id);
  }
  ++s.state.answered;
  if (record.correct) ++s.state.correct;
  ++annotation_counts_[record.dataset][record.item_id];
  records_.push_back(record);
}

AnnotationStore::Session& AnnotationStore::session_for(std::string_view session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(Errc::kUnknownSession, "no session " + std::string(session_id));
  return it->second;
}

const AnnotationStore::Session& AnnotationStore::session_for(std::string_view session_id) const {
  return const_cast<AnnotationStore*>(this)->session_for(session_id);
}

std::vector<std::string> AnnotationStore::dataset_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : datasets_) out.push_back(name);
  return out;
}

const Dataset& AnnotationStore::dataset(std::string_view name) const {
  auto it = datasets_.find(name);
  if (it == datasets_.end()) throw Error(Errc::kUnknownDataset, "no dataset '" + std::string(name) + "'");
  return it->second;
}

SessionState AnnotationStore::create_session(const std::string& annotator_id, const std::string& dataset_name) {
  if (annotator_id.empty()) throw Error(Errc::kConfigError, "annotator_id: must not be empty");
  std::unique_lock lock(mutex_);
  dataset(dataset_name);
  const std::string id = session_id_for(annotator_id, dataset_name);
  if (auto it = sessions_.find(id); it != sessions_.end()) {
    if (it->second.state.annotator_id != annotator_id || it->second.state.dataset != dataset_name) {
      throw Error(Errc::kIoError, "session id collision for " + annotator_id);
    }
    return it->second.state;
  }

  std::vector<int> load(static_cast<std::size_t>(config_.fold_count), 0);
  for (const auto& [_, s] : sessions_) {
    if (s.state.dataset == dataset_name) ++load[static_cast<std::size_t>(s.state.assigned_fold)];
  }
  const int fold = static_cast<int>(std::min_element(load.begin(), load.end()) - load.begin());
  append({{"type", "session"}, {"annotator_id", annotator_id}, {"dataset", dataset_name}, {"fold", fold}});
  apply_session(annotator_id, dataset_name, fold);
  return sessions_.at(id).state;
}

SessionState AnnotationStore::session(std::string_view session_id) const {
  std::shared_lock lock(mutex_);
  return session_for(session_id).state;
}

NextItem AnnotationStore::next_item(std::string_view session_id) const {
  std::shared_lock lock(mutex_);
  const Session& s = session_for(session_id);
  const Dataset& d = dataset(s.state.dataset);
  const auto& counts = annotation_counts_.at(s.state.dataset);
  const AnnotationItem* best = nullptr;
  int best_count = 0;
  for (const auto& item : d.items) {
    if (item.fold != s.state.assigned_fold || s.answered.count(item.item_id) != 0) continue;
    auto c = counts.find(item.item_id);
    const int n = c == counts.end() ? 0 : c->second;
    if (best == nullptr || n < best_count) {
      best = &item;
      best_count = n;
    }
  }
  return best ? NextItem{*best} : NextItem{};
}

AnswerResult AnnotationStore::submit_answer(std::string_view session_id, const std::string& item_id,
                                            const std::string& guess) {
  std::unique_lock lock(mutex_);
  Session& s = session_for(session_id);
  const Dataset& d = dataset(s.state.dataset);
  const AnnotationItem* item = d.find(item_id);
  if (item == nullptr || item->fold != s.state.assigned_fold) {
    throw Error(Errc::kUnknownItem, "item '" + item_id + "' is not in this session's fold");
  }
  if (std::find(d.choices.begin(), d.choices.end(), guess) == d.choices.end()) {
    throw Error(Errc::kInvalidChoice, "'" + guess + "' is not a choice of " + d.name);
  }
  if (s.answered.count(item_id) != 0) {
    throw Error(Errc::kAlreadyAnswered, s.state.annotator_id + " already answered " + item_id);
  }

  AnnotationRecord r{s.state.annotator_id, d.name, item_id, guess, guess == item->ground_truth, clock_()};
  append({{"type", "answer"},
          {"annotator_id", r.annotator_id},
          {"dataset", r.dataset},
          {"item_id", r.item_id},
          {"guess", r.guess},
          {"correct", r.correct},
          {"timestamp", r.timestamp_ms}});
  apply_answer(r);
  return {r.correct, static_cast<double>(s.state.correct) / s.state.answered, s.state.answered};
}

Leaderboard AnnotationStore::leaderboard(std::string_view dataset_name) const {
  std::shared_lock lock(mutex_);
  dataset(dataset_name);
  struct Row {
    LeaderboardEntry entry;
    int correct;
  };
  std::vector<Row> ranked, unranked;
  for (const auto& [_, s] : sessions_) {
    if (s.state.dataset != dataset_name || s.state.answered == 0) continue;
    Row row{{s.state.annotator_id, static_cast<double>(s.state.correct) / s.state.answered, s.state.answered},
            s.state.correct};
    (s.state.answered >= config_.min_ranked_answers ? ranked : unranked).push_back(std::move(row));
  }
  auto order = [](const Row& a, const Row& b) { return better(a.entry, a.correct, b.entry, b.correct); };
  std::sort(ranked.begin(), ranked.end(), order);
  std::sort(unranked.begin(), unranked.end(), order);
  Leaderboard board;
  for (auto& r : ranked) board.ranked.push_back(std::move(r.entry));
  for (auto& r : unranked) board.unranked.push_back(std::move(r.entry));
  return board;
}

std::vector<AnnotationRecord> AnnotationStore::records(std::string_view dataset_name) const {
  std::shared_lock lock(mutex_);
  std::vector<AnnotationRecord> out;
  for (const auto& r : records_) {
    if (r.dataset == dataset_name) out.push_back(r);
  }
  return out;
}

HumanStats AnnotationStore::human_stats(std::string_view dataset_name) const {
  std::shared_lock lock(mutex_);
  const Dataset& d = dataset(dataset_name);
  std::vector<const AnnotationRecord*> recs;
  for (const auto& r : records_) {
    if (r.dataset == dataset_name) recs.push_back(&r);
  }
  if (recs.empty()) throw Error(Errc::kNoData, "no annotations for dataset '" + d.name + "'");

  const auto positive = [&](const std::string& category) {
    return category == d.choices[0] ? Sign::kPositive : Sign::kNegative;
  };

  HumanStats st;
  st.answers = static_cast<int>(recs.size());
  std::map<std::string, std::vector<const AnnotationRecord*>> by_annotator;
  std::map<std::string, std::vector<const AnnotationRecord*>> by_item;
  for (const auto* r : recs) {
    by_annotator[r->annotator_id].push_back(r);
    by_item[r->item_id].push_back(r);
  }

  std::vector<double> accuracies;
  for (const auto& [annotator, rs] : by_annotator) {
    AnnotatorStats a;
    a.annotator_id = annotator;
    a.answered = static_cast<int>(rs.size());
    int correct = 0;
    ScoredPredictions sp;
    for (const auto* r : rs) {
      correct += r->correct ? 1 : 0;
      const AnnotationItem* item = d.find(r->item_id);
      sp.push_back({static_cast<double>(to_int(positive(r->guess))), positive(item->ground_truth)});
    }
    a.accuracy = static_cast<double>(correct) / a.answered;
    if (d.is_binary()) {
      try {
        a.auc = roc_auc(sp);
      } catch (const Error& e) {
        if (e.code() != Errc::kDegenerateLabels) throw;
      }
    }
    accuracies.push_back(a.accuracy);
    st.annotators.push_back(std::move(a));
  }
  std::tie(st.mean_accuracy, st.std_accuracy) = mean_and_stddev(accuracies);

  const auto k = static_cast<std::size_t>(config_.min_annotations);
  std::vector<std::vector<int>> counts;
  std::vector<CommitteeItem> committee;
  int plurality_correct = 0;
  for (const auto& [item_id, rs] : by_item) {
    if (rs.size() < k) continue;
    const AnnotationItem* item = d.find(item_id);
    std::vector<int> row(d.choices.size(), 0);
    CommitteeItem ci{item_id, positive(item->ground_truth), {}};
    for (std::size_t i = 0; i < k; ++i) {
      const auto c = std::find(d.choices.begin(), d.choices.end(), rs[i]->guess) - d.choices.begin();
      ++row[static_cast<std::size_t>(c)];
      ci.guesses.push_back(positive(rs[i]->guess));
    }
    // Plurality; a tie goes to the earliest listed choice.
    const auto top = std::max_element(row.begin(), row.end()) - row.begin();
    plurality_correct += d.choices[static_cast<std::size_t>(top)] == item->ground_truth ? 1 : 0;
    counts.push_back(std::move(row));
    committee.push_back(std::move(ci));
  }
  st.committee_items = static_cast<int>(counts.size());
  if (!counts.empty()) {
    try {
      st.fleiss_kappa = fleiss_kappa(RatingMatrix(counts));
    } catch (const Error& e) {
      if (e.code() != Errc::kDegenerateChance) throw;
    }
    if (d.is_binary()) {
      const CommitteeResult cr = committee_aggregate(committee);
      st.committee_accuracy = cr.accuracy();
      try {
        st.committee_auc = roc_auc(cr.scored);
      } catch (const Error& e) {
        if (e.code() != Errc::kDegenerateLabels) throw;
      }
    } else {
      st.committee_accuracy = static_cast<double>(plurality_correct) / static_cast<double>(counts.size());
    }
  }
  return st;
}

}  // namespace facevalue::annotation
