#include "facevalue/cli.hpp"

#include <signal.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <iostream>
#include <thread>

#include "facevalue/annotation/builder.hpp"
#include "facevalue/annotation/http.hpp"
#include "facevalue/dataset.hpp"
#include "facevalue/episode.hpp"
#include "facevalue/error.hpp"
#include "facevalue/manifest.hpp"
#include "facevalue/random.hpp"

namespace facevalue::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json seeds_json(const PipelineConfig& c) {
  return {{"simulation", c.simulation.seed}, {"actor", c.actor.seed}, {"training", c.training.seed}};
}

std::vector<FileDigest> input_digests(const ConfigSource& source) {
  if (source.path.empty()) return {};
  return {{source.path.string(), sha256_hex(read_file(source.path))}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(Errc::kIoError, "cannot create " + dir.string());
}

// Writes contents under root and records its digest by relative path.
void emit(const fs::path& root, const fs::path& rel, const std::string& contents, RunManifest& manifest) {
  write_file(root / rel, contents);
  manifest.outputs.push_back({rel.generic_string(), sha256_hex(contents)});
}

void write_manifest(const fs::path& dir, const RunManifest& manifest) {
  write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

void write_episodes(const fs::path& root, const fs::path& sub, const std::vector<Episode>& episodes,
                    RunManifest& manifest) {
  ensure_dir(root / sub);
  for (const auto& e : episodes) emit(root, sub / (e.id + ".dond"), serialize_episode(e), manifest);
}

std::vector<fs::path> episode_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::kIoError, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".dond") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

PipelineConfig resolve_config(const fs::path& path, std::optional<std::uint64_t> seed) {
  PipelineConfig c = path.empty() ? PipelineConfig{} : load_config(path);
  if (seed) {
    c.simulation.seed = *seed;
    c.actor.seed = mix_seed(*seed, 1);
    c.training.seed = mix_seed(*seed, 2);
  }
  return c;
}

void cmd_simulate(const ConfigSource& source, std::size_t n, const fs::path& out_dir, unsigned threads) {
  ensure_dir(out_dir);
  RunManifest m;
  m.command = "simulate";
  m.config = to_json(source.config);
  m.seeds = seeds_json(source.config);
  m.parameters = {{"episodes", n}};
  m.inputs = input_digests(source);
  write_episodes(out_dir, "", simulate_batch(source.config.simulation, n, threads), m);
  write_manifest(out_dir, m);
}

std::string cmd_label(const fs::path& episodes_dir, Money delta) {
  std::string out = "episode\tround\tremoved_pence\tmean_before\tmean_after\td\ty\n";
  for (const auto& file : episode_files(episodes_dir)) {
    const ParseOutcome parsed = try_parse_episode(read_file(file));
    if (!parsed.episode) {
      std::string msg;
      for (const auto& d : parsed.diagnostics) {
        if (!msg.empty()) msg += "\n";
        msg += file.string() + ": " + d.to_string();
      }
      throw Error(parsed.diagnostics.front().code, msg);
    }
    std::vector<BoxEvent> events;
    try {
      events = replay_episode(*parsed.episode, delta);
    } catch (const Error& e) {
      throw Error(e.code(), file.string() + ": " + e.detail(), e.line(), e.column());
    }
    for (const auto& ev : events) {
      out += parsed.episode->id + "\t" + std::to_string(ev.round) + "\t" + std::to_string(ev.removed.pence) +
             "\t" + ev.mean_before.to_string() + "\t" + ev.mean_after.to_string() + "\t" +
             std::to_string(to_int(ev.d)) + "\t" + std::to_string(to_int(ev.label)) + "\n";
    }
  }
  return out;
}

void cmd_generate(const ConfigSource& source, const fs::path& out_dir, unsigned threads) {
  const PipelineConfig& c = source.config;
  if (c.episodes < 1) throw Error(Errc::kConfigError, "episodes: must be positive");
  ensure_dir(out_dir);
  const GeneratedDataset ds = generate_dataset(c.simulation, c.episodes, c.actor,
                                               c.splits, threads, c.delta);
  RunManifest m;
  m.command = "generate";
  m.config = to_json(c);
  m.seeds = seeds_json(c);
  m.parameters = {{"episodes", c.episodes}, {"tracks", ds.tracks.tracks.size()}};
  m.inputs = input_digests(source);
  write_episodes(out_dir, "episodes", ds.episodes, m);
  emit(out_dir, "tracks.fvt", write_track_set(ds.tracks), m);
  write_manifest(out_dir, m);
}

Report cmd_train_eval(const ConfigSource& source, const fs::path& tracks_path,
                      const std::optional<fs::path>& out_dir) {
  const std::string text = read_file(tracks_path);
  const std::string digest = sha256_hex(text);
  const LabeledTrackSet set = read_track_set(text);
  const EvaluationResult result = train_and_evaluate(set, source.config);
  Report report = build_report(result, digest);
  if (out_dir) {
    ensure_dir(*out_dir);
    RunManifest m;
    m.command = "train-eval";
    m.config = to_json(source.config);
    m.seeds = seeds_json(source.config);
    m.inputs = input_digests(source);
    m.inputs.push_back({tracks_path.filename().string(), digest});
    emit(*out_dir, "model.txt", write_model(result.training.model), m);
    emit(*out_dir, "report.ini", report.render(), m);
    emit(*out_dir, "emotions.tsv", distribution_plot_table(result.distributions), m);
    write_manifest(*out_dir, m);
  }
  return report;
}

namespace {

int serve(const annotation::ServiceConfig& config, annotation::HttpOptions http, std::ostream& out) {
  annotation::AnnotationStore store(config);
  if (store.dataset_names().empty()) {
    throw Error(Errc::kNoData, "no datasets under " + (config.data_dir / "datasets").string());
  }
  annotation::ApiServer server(store, std::move(http));

  // Signals go to a dedicated thread so stop() runs outside a handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  const int port = server.bind();
  out << "listening on port " << port << std::endl;

  std::atomic<bool> signalled = false;
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    signalled = true;
    server.stop();
  });
  server.serve();
  // serve() also returns when the listener fails; wake the waiter then.
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Face-track labeling, training and human-baseline tools", "facevalue"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned threads = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Seed for simulation; actor and training seeds derive from it");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate episodes into .dond files");
  add_common(simulate);
  std::optional<std::size_t> n_episodes;
  simulate->add_option("-n,--episodes", n_episodes, "Episode count (default from config)");
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--threads", threads, "Worker threads; output does not depend on it");

  auto* label = app.add_subcommand("label", "Replay episodes and print labeled box events");
  std::string episodes_dir;
  label->add_option("episodes", episodes_dir, "Directory of .dond files")->required();
  label->add_option("--config", config_path, "JSON configuration file (for delta_pence)")
      ->check(CLI::ExistingFile);
  std::optional<std::int64_t> delta_pence;
  label->add_option("--delta-pence", delta_pence, "Margin in pence (default from config)");
  label->add_option("--out", out_dir, "Write the table here instead of stdout");

  auto* generate = app.add_subcommand("generate", "Simulate episodes and emit synthetic face tracks");
  add_common(generate);
  generate->add_option("-n,--episodes", n_episodes, "Episode count (default from config)");
  generate->add_option("--out", out_dir, "Output directory")->required();
  generate->add_option("--threads", threads, "Worker threads; output does not depend on it");

  auto* train_eval = app.add_subcommand("train-eval", "Train the pooling model and compare with voting");
  add_common(train_eval);
  std::string tracks_path;
  train_eval->add_option("tracks", tracks_path, "Track file from generate")->required()->check(CLI::ExistingFile);
  train_eval->add_option("--out", out_dir, "Directory for model, report, plot table and manifest");

  auto* build = app.add_subcommand("build-annotation", "Render tracks into an annotation dataset");
  build->add_option("tracks", tracks_path, "Track file from generate")->required()->check(CLI::ExistingFile);
  build->add_option("--config", config_path, "JSON configuration file (for the actor)")->check(CLI::ExistingFile);
  std::string data_dir;
  build->add_option("--data-dir", data_dir, "Service data directory")->required()->envname("FACEVALUE_DATA_DIR");
  annotation::BuildOptions build_opts;
  build->add_option("--name", build_opts.name, "Dataset name");
  std::string split_name_opt = "val";
  build->add_option("--split", split_name_opt, "train, val, test or all");
  build->add_option("--folds", build_opts.fold_count, "Fold count");

  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation service");
  annotation::ServiceConfig service;
  annotation::HttpOptions http;
  serve_cmd->add_option("--data-dir", data_dir, "Service data directory")->required()->envname("FACEVALUE_DATA_DIR");
  serve_cmd->add_option("--port", http.port, "TCP port, 0 for any")->envname("FACEVALUE_PORT");
  serve_cmd->add_option("--host", http.host, "Bind address")->envname("FACEVALUE_HOST");
  std::string ui_dir;
  serve_cmd->add_option("--ui-dir", ui_dir, "Static UI bundle")->envname("FACEVALUE_UI_DIR");
  serve_cmd->add_option("--folds", service.fold_count, "Fold count")->envname("FACEVALUE_FOLDS");
  serve_cmd->add_option("--min-annotations", service.min_annotations, "Annotations per item for kappa")
      ->envname("FACEVALUE_MIN_ANNOTATIONS");
  serve_cmd->add_option("--min-ranked", service.min_ranked_answers, "Answers needed for a leaderboard rank")
      ->envname("FACEVALUE_MIN_RANKED");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const ConfigSource source{resolve_config(config_path, seed), config_path};
    if (simulate->parsed()) {
      const auto n = n_episodes.value_or(source.config.episodes);
      cmd_simulate(source, n, out_dir, threads);
    } else if (label->parsed()) {
      const Money delta = delta_pence ? Money::from_pence(*delta_pence) : source.config.delta;
      const std::string table = cmd_label(episodes_dir, delta);
      if (out_dir.empty()) out << table;
      else write_file(out_dir, table);
    } else if (generate->parsed()) {
      ConfigSource s = source;
      if (n_episodes) s.config.episodes = *n_episodes;
      cmd_generate(s, out_dir, threads);
    } else if (train_eval->parsed()) {
      const Report report =
          cmd_train_eval(source, tracks_path, out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir));
      out << report.render();
    } else if (build->parsed()) {
      if (split_name_opt != "all") {
        build_opts.split = split_from_name(split_name_opt);
        if (!build_opts.split) throw Error(Errc::kConfigError, "split: expected train, val, test or all");
      }
      const LabeledTrackSet set = read_track_set(read_file(tracks_path));
      const NearestCentroidClassifier fec(emotion_centroids(source.config.actor));
      const auto d = annotation::build_annotation_dataset(set, fec, build_opts, data_dir);
      out << "dataset " << d.name << ": " << d.items.size() << " items\n";
    } else if (serve_cmd->parsed()) {
      service.data_dir = data_dir;
      http.ui_dir = ui_dir;
      return serve(service, http, out);
    }
  } catch (const Error& e) {
    err << "facevalue: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "facevalue: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace facevalue::cli
