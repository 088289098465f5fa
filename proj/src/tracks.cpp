#include "facevalue/tracks.hpp"

#include <charconv>
#include <cmath>

#include "facevalue/error.hpp"

namespace facevalue {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "disgust", "fear", "happiness", "sadness", "surprise", "neutral"};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<std::size_t> parse_size(std::string_view s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::size_t> keyed_size(std::string_view token, std::string_view key) {
  if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key ||
      token[key.size()] != '=') {
    return std::nullopt;
  }
  return parse_size(token.substr(key.size() + 1));
}

}  // namespace

std::string_view emotion_name(Emotion e) { return kEmotionNames[index_of(e)]; }

std::optional<Emotion> emotion_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::optional<Split> split_from_name(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

std::size_t LabeledTrackSet::count(Split s) const {
  std::size_t n = 0;
  for (const auto& t : tracks) n += t.split == s ? 1 : 0;
  return n;
}

std::vector<const FaceTrack*> LabeledTrackSet::split(Split s) const {
  std::vector<const FaceTrack*> out;
  for (const auto& t : tracks) {
    if (t.split == s) out.push_back(&t.track);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string write_track_set(const LabeledTrackSet& set) {
  std::string out = "FVTRACKS 1 feature_dim=" + std::to_string(set.feature_dim) +
                    " frames_per_track=" + std::to_string(set.frames_per_track) +
                    " train=" + std::to_string(set.count(Split::kTrain)) +
                    " val=" + std::to_string(set.count(Split::kVal)) +
                    " test=" + std::to_string(set.count(Split::kTest)) + "\n";
  for (const auto& lt : set.tracks) {
    const FaceTrack& t = lt.track;
    out += t.event_ref.episode_id;
    out += ' ';
    out += std::to_string(t.event_ref.round);
    out += ' ';
    out += split_name(lt.split);
    out += t.label == Sign::kPositive ? " +1 " : " -1 ";
    if (t.true_emotions) {
      for (std::size_t i = 0; i < t.true_emotions->size(); ++i) {
        if (i) out += ',';
        out += std::to_string(index_of((*t.true_emotions)[i]));
      }
    } else {
      out += '-';
    }
    for (double v : t.frames.data()) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

LabeledTrackSet read_track_set(std::string_view text) {
  LabeledTrackSet set;
  int line_no = 0;
  std::size_t pos = 0;
  bool header = false;
  std::size_t expect[3] = {0, 0, 0};
  auto fail = [&](const std::string& msg) { throw Error(Errc::kMalformedFile, msg, line_no, 1); };

  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
    pos = nl == text.npos ? text.size() : nl + 1;
    ++line_no;
    auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (!header) {
      if (tok.size() != 7 || tok[0] != "FVTRACKS" || tok[1] != "1") fail("bad track file header");
      auto d = keyed_size(tok[2], "feature_dim");
      auto t = keyed_size(tok[3], "frames_per_track");
      auto a = keyed_size(tok[4], "train");
      auto b = keyed_size(tok[5], "val");
      auto c = keyed_size(tok[6], "test");
      if (!d || !t || !a || !b || !c || *d == 0 || *t == 0) fail("bad track file header");
      set.feature_dim = *d;
      set.frames_per_track = *t;
      expect[0] = *a;
      expect[1] = *b;
      expect[2] = *c;
      header = true;
      continue;
    }

    const std::size_t T = set.frames_per_track;
    const std::size_t D = set.feature_dim;
    if (tok.size() != 5 + T * D) {
      fail("expected " + std::to_string(5 + T * D) + " fields, got " + std::to_string(tok.size()));
    }
    LabeledTrack lt;
    lt.track.event_ref.episode_id = std::string(tok[0]);
    auto round = parse_size(tok[1]);
    if (!round || *round > 1'000'000) fail("bad round");
    lt.track.event_ref.round = static_cast<int>(*round);
    auto split = split_from_name(tok[2]);
    if (!split) fail("bad split '" + std::string(tok[2]) + "'");
    lt.split = *split;
    if (tok[3] == "+1") lt.track.label = Sign::kPositive;
    else if (tok[3] == "-1") lt.track.label = Sign::kNegative;
    else fail("bad label");
    if (tok[4] != "-") {
      std::vector<Emotion> emotions;
      std::string_view list = tok[4];
      std::size_t start = 0;
      while (start <= list.size()) {
        std::size_t comma = list.find(',', start);
        auto item = list.substr(start, comma == list.npos ? list.npos : comma - start);
        auto idx = parse_size(item);
        if (!idx || *idx >= kEmotionCount) fail("bad emotion list");
        emotions.push_back(static_cast<Emotion>(*idx));
        if (comma == list.npos) break;
        start = comma + 1;
      }
      if (emotions.size() != T) fail("emotion list length differs from frames_per_track");
      lt.track.true_emotions = std::move(emotions);
    }
    lt.track.frames = Matrix(T, D);
    for (std::size_t r = 0; r < T; ++r) {
      for (std::size_t c = 0; c < D; ++c) {
        auto v = parse_double(tok[5 + r * D + c]);
        if (!v || !std::isfinite(*v)) fail("bad feature value");
        lt.track.frames(r, c) = *v;
      }
    }
    set.tracks.push_back(std::move(lt));
  }
  if (!header) throw Error(Errc::kMalformedFile, "empty track file");
  if (set.count(Split::kTrain) != expect[0] || set.count(Split::kVal) != expect[1] ||
      set.count(Split::kTest) != expect[2]) {
    throw Error(Errc::kMalformedFile, "split counts differ from the header", 1, 1);
  }
  return set;
}

}  // namespace facevalue
