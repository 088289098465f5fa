#include "facevalue/config.hpp"

#include <fstream>
#include <sstream>

#include "facevalue/error.hpp"

namespace facevalue {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(Errc::kConfigError, field + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) config_error(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!key.empty() && key[0] == '_') continue;
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) config_error(where.empty() ? key : where + "." + key, "unknown field");
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    config_error(where.empty() ? key : where + "." + key, "wrong type");
  }
}

std::string_view policy_name(PolicyKind k) {
  return k == PolicyKind::kNeverDeal ? "never_deal" : "threshold";
}

json emotion_row_json(const EmotionRow& row) {
  json j = json::object();
  for (Emotion e : kAllEmotions) j[std::string(emotion_name(e))] = row[index_of(e)];
  return j;
}

EmotionRow emotion_row_from(const json& j, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected an object keyed by emotion");
  EmotionRow row{};
  for (const auto& [key, value] : j.items()) {
    auto e = emotion_from_name(key);
    if (!e) config_error(where + "." + key, "unknown emotion");
    if (!value.is_number()) config_error(where + "." + key, "wrong type");
    row[index_of(*e)] = value.get<double>();
  }
  return row;
}

}  // namespace

json to_json(const PipelineConfig& c) {
  json board = json::array();
  for (Money m : c.simulation.board.values()) board.push_back(m.pence);
  json schedule = json::array();
  for (const auto& b : c.simulation.schedule) {
    schedule.push_back({{"opens", b.opens}, {"offer_after", b.offer_after}});
  }
  json policy = {{"kind", policy_name(c.simulation.policy.kind)}};
  if (c.simulation.policy.kind == PolicyKind::kThreshold) policy["rho"] = c.simulation.policy.rho;

  return {
      {"episodes", c.episodes},
      {"delta_pence", c.delta.pence},
      {"simulation",
       {{"board_pence", board},
        {"rounds_schedule", schedule},
        {"banker_fractions", c.simulation.banker_fractions},
        {"contestant_policy", policy},
        {"seed", c.simulation.seed},
        {"id_prefix", c.simulation.id_prefix}}},
      {"actor",
       {{"emotion_given_valence",
         {{"good", emotion_row_json(c.actor.good_row)}, {"bad", emotion_row_json(c.actor.bad_row)}}},
        {"frames_per_track", c.actor.frames_per_track},
        {"persistence", c.actor.persistence},
        {"feature_dim", c.actor.feature_dim},
        {"centroid_separation", c.actor.centroid_separation},
        {"noise_sigma", c.actor.noise_sigma},
        {"seed", c.actor.seed}}},
      {"training",
       {{"learning_rate", c.training.learning_rate},
        {"epochs", c.training.epochs},
        {"l2_lambda", c.training.l2_lambda},
        {"batch_size", c.training.batch_size},
        {"seed", c.training.seed},
        {"pooling", to_string(c.pooling)},
        {"normalize", to_string(c.normalize)}}},
      {"splits", {{"train", c.splits.train}, {"val", c.splits.val}, {"test", c.splits.test}}},
  };
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  reject_unknown(j, "", {"episodes", "delta_pence", "simulation", "actor", "training", "splits"});
  read(j, "", "episodes", c.episodes);
  std::int64_t delta = c.delta.pence;
  read(j, "", "delta_pence", delta);
  if (delta < 0 || delta > Money::kMaxPence) config_error("delta_pence", "out of range");
  c.delta = Money{delta};

  if (auto it = j.find("simulation"); it != j.end()) {
    const json& s = *it;
    reject_unknown(s, "simulation",
                   {"board_pence", "rounds_schedule", "banker_fractions", "contestant_policy", "seed",
                    "id_prefix"});
    if (auto b = s.find("board_pence"); b != s.end()) {
      std::vector<std::int64_t> pence;
      read(s, "simulation", "board_pence", pence);
      std::vector<Money> prizes;
      for (auto p : pence) {
        if (p < 0 || p > Money::kMaxPence) config_error("simulation.board_pence", "amount out of range");
        prizes.push_back(Money{p});
      }
      try {
        c.simulation.board = PrizeSet(std::move(prizes));
      } catch (const Error& e) {
        config_error("simulation.board_pence", e.detail());
      }
    }
    if (auto r = s.find("rounds_schedule"); r != s.end()) {
      if (!r->is_array()) config_error("simulation.rounds_schedule", "expected an array");
      c.simulation.schedule.clear();
      for (const auto& block : *r) {
        reject_unknown(block, "simulation.rounds_schedule[]", {"opens", "offer_after"});
        RoundBlock rb;
        read(block, "simulation.rounds_schedule[]", "opens", rb.opens);
        read(block, "simulation.rounds_schedule[]", "offer_after", rb.offer_after);
        c.simulation.schedule.push_back(rb);
      }
    }
    read(s, "simulation", "banker_fractions", c.simulation.banker_fractions);
    if (auto p = s.find("contestant_policy"); p != s.end()) {
      reject_unknown(*p, "simulation.contestant_policy", {"kind", "rho"});
      std::string kind = "never_deal";
      read(*p, "simulation.contestant_policy", "kind", kind);
      if (kind == "never_deal") c.simulation.policy.kind = PolicyKind::kNeverDeal;
      else if (kind == "threshold") c.simulation.policy.kind = PolicyKind::kThreshold;
      else config_error("simulation.contestant_policy.kind", "expected never_deal or threshold");
      read(*p, "simulation.contestant_policy", "rho", c.simulation.policy.rho);
    }
    read(s, "simulation", "seed", c.simulation.seed);
    read(s, "simulation", "id_prefix", c.simulation.id_prefix);
  }

  if (auto it = j.find("actor"); it != j.end()) {
    const json& a = *it;
    reject_unknown(a, "actor",
                   {"emotion_given_valence", "frames_per_track", "persistence", "feature_dim",
                    "centroid_separation", "noise_sigma", "seed"});
    if (auto t = a.find("emotion_given_valence"); t != a.end()) {
      reject_unknown(*t, "actor.emotion_given_valence", {"good", "bad"});
      if (auto g = t->find("good"); g != t->end()) {
        c.actor.good_row = emotion_row_from(*g, "actor.emotion_given_valence.good");
      }
      if (auto b = t->find("bad"); b != t->end()) {
        c.actor.bad_row = emotion_row_from(*b, "actor.emotion_given_valence.bad");
      }
    }
    read(a, "actor", "frames_per_track", c.actor.frames_per_track);
    read(a, "actor", "persistence", c.actor.persistence);
    read(a, "actor", "feature_dim", c.actor.feature_dim);
    read(a, "actor", "centroid_separation", c.actor.centroid_separation);
    read(a, "actor", "noise_sigma", c.actor.noise_sigma);
    read(a, "actor", "seed", c.actor.seed);
  }

  if (auto it = j.find("training"); it != j.end()) {
    const json& t = *it;
    reject_unknown(t, "training",
                   {"learning_rate", "epochs", "l2_lambda", "batch_size", "seed", "pooling", "normalize"});
    read(t, "training", "learning_rate", c.training.learning_rate);
    read(t, "training", "epochs", c.training.epochs);
    read(t, "training", "l2_lambda", c.training.l2_lambda);
    read(t, "training", "batch_size", c.training.batch_size);
    read(t, "training", "seed", c.training.seed);
    std::string pooling(to_string(c.pooling));
    std::string normalize(to_string(c.normalize));
    read(t, "training", "pooling", pooling);
    read(t, "training", "normalize", normalize);
    if (pooling == "average") c.pooling = PoolingMode::kAverage;
    else if (pooling == "max") c.pooling = PoolingMode::kMax;
    else config_error("training.pooling", "expected average or max");
    if (normalize == "l1") c.normalize = Normalization::kL1;
    else if (normalize == "none") c.normalize = Normalization::kNone;
    else config_error("training.normalize", "expected l1 or none");
  }

  if (auto it = j.find("splits"); it != j.end()) {
    reject_unknown(*it, "splits", {"train", "val", "test"});
    read(*it, "splits", "train", c.splits.train);
    read(*it, "splits", "val", c.splits.val);
    read(*it, "splits", "test", c.splits.test);
    if (c.splits.train + c.splits.val + c.splits.test == 0) config_error("splits", "all weights are zero");
  }

  validate_config(c.simulation);
  validate_config(c.actor);
  validate_config(c.training);
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::kIoError, "read failed: " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::kIoError, "write failed: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::kIoError, "cannot rename into " + path.string() + ": " + ec.message());
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kConfigError, path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(j);
}

}  // namespace facevalue
