#include "facevalue/annotation/builder.hpp"

#include <cstdio>

#include "facevalue/config.hpp"
#include "facevalue/error.hpp"

namespace facevalue::annotation {

namespace {

struct Glyph {
  const char* brows;
  const char* eyes;
  const char* mouth;
};

Glyph glyph_for(Emotion e) {
  switch (e) {
    case Emotion::kAnger:
      return {"M28 32 L44 38 M72 32 L56 38", "<circle cx='38' cy='44' r='3'/><circle cx='62' cy='44' r='3'/>",
              "M34 72 Q50 64 66 72"};
    case Emotion::kDisgust:
      return {"M28 34 L44 36 M56 38 L72 32", "<path d='M33 44 h10 M57 44 h10'/>",
              "M32 68 Q41 60 50 68 Q59 76 68 66"};
    case Emotion::kFear:
      return {"M28 30 Q36 24 44 32 M56 32 Q64 24 72 30",
              "<circle cx='38' cy='44' r='5'/><circle cx='62' cy='44' r='5'/>",
              "M38 70 Q50 62 62 70 Q50 76 38 70"};
    case Emotion::kHappiness:
      return {"M30 32 Q37 28 44 32 M56 32 Q63 28 70 32", "<path d='M33 45 Q38 40 43 45 M57 45 Q62 40 67 45'/>",
              "M30 62 Q50 82 70 62"};
    case Emotion::kSadness:
      return {"M28 36 L44 30 M56 30 L72 36", "<circle cx='38' cy='45' r='3'/><circle cx='62' cy='45' r='3'/>",
              "M32 74 Q50 60 68 74"};
    case Emotion::kSurprise:
      return {"M28 28 Q36 20 44 28 M56 28 Q64 20 72 28",
              "<circle cx='38' cy='44' r='5'/><circle cx='62' cy='44' r='5'/>",
              "M50 62 m-8 0 a8 10 0 1 0 16 0 a8 10 0 1 0 -16 0"};
    case Emotion::kNeutral:
      break;
  }
  return {"M30 32 h14 M56 32 h14", "<circle cx='38' cy='44' r='3'/><circle cx='62' cy='44' r='3'/>",
          "M34 68 h32"};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string item_id_for(const EventRef& ref) { return ref.episode_id + "-r" + std::to_string(ref.round); }

std::string render_glyph_svg(std::span<const Emotion> frames, double frame_seconds) {
  if (frames.empty()) throw Error(Errc::kEmptyTrack, "no frames to render");
  if (!(frame_seconds > 0.0)) throw Error(Errc::kConfigError, "frame_seconds: must be positive");
  const std::size_t n = frames.size();
  std::string svg =
      "<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 100 100' width='240' height='240'>\n"
      "<rect width='100' height='100' fill='#f4f1ea'/>\n"
      "<circle cx='50' cy='50' r='40' fill='#f2d3a8' stroke='#5a4632' stroke-width='2'/>\n";
  const std::string dur = fmt(frame_seconds * static_cast<double>(n)) + "s";
  for (std::size_t i = 0; i < n; ++i) {
    const Glyph g = glyph_for(frames[i]);
    svg += "<g fill='#3b2b1e' stroke='#3b2b1e' stroke-width='2.5' stroke-linecap='round'";
    if (n > 1) svg += " visibility='hidden'";
    svg += ">\n";
    if (n > 1) {
      // Discrete keyframes: visible during [i/n, (i+1)/n) of each cycle.
      std::string values, times;
      const double begin = static_cast<double>(i) / static_cast<double>(n);
      const double end = static_cast<double>(i + 1) / static_cast<double>(n);
      if (i == 0) {
        values = "visible;hidden";
        times = "0;" + fmt(end);
      } else if (i + 1 == n) {
        values = "hidden;visible";
        times = "0;" + fmt(begin);
      } else {
        values = "hidden;visible;hidden";
        times = "0;" + fmt(begin) + ";" + fmt(end);
      }
      svg += "<animate attributeName='visibility' calcMode='discrete' dur='" + dur +
             "' repeatCount='indefinite' values='" + values + "' keyTimes='" + times + "'/>\n";
    }
    svg += "<path fill='none' d='" + std::string(g.brows) + "'/>\n";
    svg += std::string(g.eyes) + "\n";
    svg += "<path fill='none' d='" + std::string(g.mouth) + "'/>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

Dataset build_annotation_dataset(const LabeledTrackSet& tracks, const FrameEmotionClassifier& fec,
                                 const BuildOptions& options, const std::filesystem::path& data_dir) {
  if (options.name.empty() || options.name.find_first_of("/\\.") != std::string::npos) {
    throw Error(Errc::kConfigError, "name: must be a plain file name");
  }
  if (options.fold_count < 1) throw Error(Errc::kConfigError, "fold_count: must be positive");

  const auto media_dir = data_dir / "media" / options.name;
  std::error_code ec;
  std::filesystem::create_directories(media_dir, ec);
  if (ec) throw Error(Errc::kIoError, "cannot create " + media_dir.string() + ": " + ec.message());
  std::filesystem::create_directories(data_dir / "datasets", ec);
  if (ec) throw Error(Errc::kIoError, "cannot create datasets directory: " + ec.message());

  nlohmann::json items = nlohmann::json::array();
  for (const auto& lt : tracks.tracks) {
    if (options.split && lt.split != *options.split) continue;
    const FaceTrack& t = lt.track;
    std::vector<Emotion> seq;
    if (t.true_emotions) {
      seq = *t.true_emotions;
    } else {
      for (std::size_t r = 0; r < t.frames.rows(); ++r) seq.push_back(fec.classify(t.frames.row(r)));
    }
    const std::string id = item_id_for(t.event_ref);
    write_file(media_dir / (id + ".svg"), render_glyph_svg(seq, options.frame_seconds));
    items.push_back({{"item_id", id},
                     {"media_ref", "/media/" + options.name + "/" + id + ".svg"},
                     {"ground_truth", t.label == Sign::kPositive ? "good" : "bad"}});
  }
  if (items.empty()) throw Error(Errc::kEmptyInput, "no tracks selected for the annotation dataset");

  const nlohmann::json j = {{"name", options.name}, {"choices", {"good", "bad"}}, {"items", items}};
  Dataset d = dataset_from_json(j, options.fold_count);
  write_file(data_dir / "datasets" / (options.name + ".json"), dataset_to_json(d).dump(2) + "\n");
  return d;
}

}  // namespace facevalue::annotation
