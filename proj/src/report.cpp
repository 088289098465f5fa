#include "facevalue/report.hpp"

#include "facevalue/error.hpp"
#include "facevalue/manifest.hpp"

namespace facevalue {

Report::Section& Report::Section::set(std::string key, std::string value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return *this;
    }
  }
  entries.emplace_back(std::move(key), std::move(value));
  return *this;
}

Report::Section& Report::Section::set(std::string key, double value) {
  return set(std::move(key), format_double(value));
}

Report::Section& Report::section(std::string_view name) {
  for (auto& s : sections_) {
    if (s.name == name) return s;
  }
  sections_.push_back({std::string(name), {}});
  return sections_.back();
}

std::optional<std::string> Report::get(std::string_view section, std::string_view key) const {
  for (const auto& s : sections_) {
    if (s.name != section) continue;
    for (const auto& [k, v] : s.entries) {
      if (k == key) return v;
    }
  }
  return std::nullopt;
}

std::string Report::render() const {
  std::string out;
  for (const auto& s : sections_) {
    if (!out.empty()) out += '\n';
    out += "[" + s.name + "]\n";
    for (const auto& [k, v] : s.entries) out += k + " = " + v + "\n";
  }
  return out;
}

Report Report::parse(std::string_view text) {
  Report r;
  Section* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
    pos = nl == text.npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::kMalformedFile, "unterminated section", line_no, 1);
      current = &r.section(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == line.npos || current == nullptr) {
      throw Error(Errc::kMalformedFile, "expected 'key = value'", line_no, 1);
    }
    current->set(std::string(line.substr(0, eq)), std::string(line.substr(eq + 3)));
  }
  return r;
}

namespace {

SplitMetrics pooling_metrics(const LinearTrackModel& model, const std::vector<const FaceTrack*>& tracks) {
  SplitMetrics m;
  m.tracks = tracks.size();
  if (tracks.empty()) return m;
  ScoredPredictions sp;
  std::vector<std::pair<Sign, Sign>> pairs;
  for (const FaceTrack* t : tracks) {
    const double s = predict(model, *t);
    sp.push_back({s, t->label});
    pairs.emplace_back(predicted_label(s), t->label);
  }
  m.accuracy = accuracy(pairs);
  try {
    m.auc = roc_auc(sp);
  } catch (const Error& e) {
    if (e.code() != Errc::kDegenerateLabels) throw;
  }
  return m;
}

SplitMetrics voting_metrics(const FrameEmotionClassifier& fec, const std::vector<const FaceTrack*>& tracks) {
  SplitMetrics m;
  m.tracks = tracks.size();
  if (tracks.empty()) return m;
  ScoredPredictions sp;
  std::vector<std::pair<Sign, Sign>> pairs;
  const ValenceMap map;
  for (const FaceTrack* t : tracks) {
    const VoteResult v = voting_score(*t, fec, map);
    sp.push_back({v.score, t->label});
    pairs.emplace_back(v.label, t->label);
  }
  m.accuracy = accuracy(pairs);
  try {
    m.auc = roc_auc(sp);
  } catch (const Error& e) {
    if (e.code() != Errc::kDegenerateLabels) throw;
  }
  return m;
}

void put_metrics(Report::Section& s, std::string_view prefix, const SplitMetrics& m) {
  const std::string p(prefix);
  s.set(p + "_tracks", std::to_string(m.tracks));
  s.set(p + "_auc", m.auc ? format_double(*m.auc) : "n/a");
  s.set(p + "_accuracy", m.accuracy ? format_double(*m.accuracy) : "n/a");
}

}  // namespace

EvaluationResult train_and_evaluate(const LabeledTrackSet& dataset, const PipelineConfig& config) {
  if (dataset.feature_dim != config.actor.feature_dim) {
    throw Error(Errc::kDimensionMismatch, "dataset feature_dim " + std::to_string(dataset.feature_dim) +
                                              " differs from actor.feature_dim " +
                                              std::to_string(config.actor.feature_dim));
  }
  EvaluationResult r;
  const auto init = LinearTrackModel::zeros(dataset.feature_dim, config.pooling, config.normalize);
  r.training = train(dataset, config.training, init);

  const NearestCentroidClassifier fec(emotion_centroids(config.actor));
  const auto val = dataset.split(Split::kVal);
  const auto test = dataset.split(Split::kTest);
  r.pooling_val = pooling_metrics(r.training.model, val);
  r.pooling_test = pooling_metrics(r.training.model, test);
  r.voting_val = voting_metrics(fec, val);
  r.voting_test = voting_metrics(fec, test);

  std::vector<const FaceTrack*> pool = test;
  if (pool.empty()) {
    for (const auto& lt : dataset.tracks) pool.push_back(&lt.track);
  }
  r.distributions = emotion_distributions(pool, r.training.model, fec);
  return r;
}

Report build_report(const EvaluationResult& result, std::string_view dataset_sha256) {
  Report rep;
  rep.section("run")
      .set("tool", "facevalue " + tool_version())
      .set("dataset_sha256", std::string(dataset_sha256))
      .set("best_epoch", std::to_string(result.training.best_epoch));

  auto& pooling = rep.section("pooling");
  put_metrics(pooling, "val", result.pooling_val);
  put_metrics(pooling, "test", result.pooling_test);
  auto& voting = rep.section("voting");
  put_metrics(voting, "val", result.voting_val);
  put_metrics(voting, "test", result.voting_test);

  const auto& d = result.distributions;
  auto& good = rep.section("emotions.predicted_good");
  good.set("tracks", std::to_string(d.good_tracks)).set("empty", d.good_empty ? "true" : "false");
  auto& bad = rep.section("emotions.predicted_bad");
  bad.set("tracks", std::to_string(d.bad_tracks)).set("empty", d.bad_empty ? "true" : "false");
  for (Emotion e : kAllEmotions) {
    good.set(std::string(emotion_name(e)), d.good[index_of(e)]);
    bad.set(std::string(emotion_name(e)), d.bad[index_of(e)]);
  }

  auto& log = rep.section("training_log");
  for (const auto& rec : result.training.log) {
    log.set("epoch_" + std::to_string(rec.epoch),
            "loss=" + format_double(rec.train_loss) +
                " val_auc=" + (rec.val_auc ? format_double(*rec.val_auc) : "n/a"));
  }
  return rep;
}

std::string distribution_plot_table(const EmotionDistributionPair& d) {
  std::string out = "partition\temotion\tmass\n";
  for (Emotion e : kAllEmotions) {
    out += "predicted_good\t" + std::string(emotion_name(e)) + "\t" + format_double(d.good[index_of(e)]) + "\n";
  }
  for (Emotion e : kAllEmotions) {
    out += "predicted_bad\t" + std::string(emotion_name(e)) + "\t" + format_double(d.bad[index_of(e)]) + "\n";
  }
  return out;
}

}  // namespace facevalue
