#pragma once

// Pipeline commands behind the `facevalue` executable. Each artifact command
// writes manifest.json next to its outputs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "facevalue/config.hpp"
#include "facevalue/report.hpp"

namespace facevalue::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Defaults when path is empty. A seed replaces the simulation seed and
/// derives the actor and training seeds from it.
PipelineConfig resolve_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed);

struct ConfigSource {
  PipelineConfig config;
  std::filesystem::path path;  // empty for built-in defaults
};

/// Writes out_dir/<id>.dond for n episodes.
void cmd_simulate(const ConfigSource& source, std::size_t n, const std::filesystem::path& out_dir,
                  unsigned threads = 1);

/// One tab-separated row per labeled box event of every .dond file in the
/// directory, in file-name order. Throws Error with the file in the message.
std::string cmd_label(const std::filesystem::path& episodes_dir, Money delta);

/// Writes out_dir/tracks.fvt and out_dir/episodes/<id>.dond.
void cmd_generate(const ConfigSource& source, const std::filesystem::path& out_dir, unsigned threads = 1);

/// Trains on the track file and returns the report. With an out_dir, also
/// writes model.txt, report.ini and emotions.tsv there.
Report cmd_train_eval(const ConfigSource& source, const std::filesystem::path& tracks_path,
                      const std::optional<std::filesystem::path>& out_dir);

/// Entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace facevalue::cli
