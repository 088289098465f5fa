#pragma once

// Turns synthetic face tracks into an annotation dataset. Each track becomes
// an animated SVG of expression glyphs, one per frame, looping.

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "facevalue/annotation/store.hpp"
#include "facevalue/classify.hpp"
#include "facevalue/tracks.hpp"

namespace facevalue::annotation {

struct BuildOptions {
  std::string name = "facevalue";
  std::optional<Split> split;  // all tracks when unset
  double frame_seconds = 0.4;
  int fold_count = 5;
};

/// Looping SVG animation, frame_seconds per glyph.
std::string render_glyph_svg(std::span<const Emotion> frames, double frame_seconds);

/// Writes data_dir/datasets/<name>.json and data_dir/media/<name>/<item>.svg.
/// Frames show the track's true emotions, or the classifier's reading when a
/// track carries none. Choices are "good" and "bad" from the track label.
/// Throws ConfigError, EmptyInput, IoError.
Dataset build_annotation_dataset(const LabeledTrackSet& tracks, const FrameEmotionClassifier& fec,
                                 const BuildOptions& options, const std::filesystem::path& data_dir);

std::string item_id_for(const EventRef& ref);

}  // namespace facevalue::annotation
