// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if any
// fails. Usage: acceptance [path-to-facevalue-binary]

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include <atomic>
#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "facevalue/classify.hpp"
#include "facevalue/config.hpp"
#include "facevalue/dataset.hpp"
#include "facevalue/episode.hpp"
#include "facevalue/game.hpp"
#include "facevalue/metrics.hpp"
#include "facevalue/random.hpp"
#include "facevalue/report.hpp"
#include "facevalue/simulator.hpp"
#include "support.hpp"

extern char** environ;

using namespace facevalue;
using boost::multiprecision::cpp_rational;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kLabelSeconds = 1.0;
constexpr double kEpisodeIoSeconds = 10.0;
constexpr double kSimulateSeconds = 5.0;
constexpr double kTrainSeconds = 60.0;
constexpr double kAucTolerance = 1e-9;
constexpr double kKappaTolerance = 1e-12;
constexpr double kGradientRelError = 1e-4;
constexpr double kFiniteDifferenceStep = 1e-5;
constexpr double kMinPoolingTestAuc = 0.85;

std::string g_cli = FACEVALUE_CLI;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---- process helpers ----

struct Child {
  pid_t pid = -1;
  int stdout_fd = -1;
};

Child spawn(const std::vector<std::string>& args, const std::string& stdout_file = {}) {
  std::vector<char*> argv;
  std::vector<std::string> copy = args;
  copy.insert(copy.begin(), g_cli);
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  int pipe_fds[2] = {-1, -1};
  if (stdout_file.empty()) {
    if (::pipe(pipe_fds) != 0) throw std::runtime_error("pipe failed");
    posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, pipe_fds[0]);
    posix_spawn_file_actions_addclose(&actions, pipe_fds[1]);
  } else {
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, stdout_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC,
                                     0644);
  }
  Child c;
  const int rc = posix_spawn(&c.pid, g_cli.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (pipe_fds[1] >= 0) ::close(pipe_fds[1]);
  if (rc != 0) throw std::runtime_error("cannot start " + g_cli);
  c.stdout_fd = pipe_fds[0];
  return c;
}

int wait_exit(pid_t pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_cli(const std::vector<std::string>& args, const fs::path& stdout_file) {
  return wait_exit(spawn(args, stdout_file.string()).pid);
}

class Server {
 public:
  explicit Server(const fs::path& data_dir) {
    child_ = spawn({"serve", "--data-dir", data_dir.string(), "--port", "0", "--min-ranked", "10"});
    std::string line;
    char ch;
    while (::read(child_.stdout_fd, &ch, 1) == 1 && ch != '\n') line += ch;
    const std::string prefix = "listening on port ";
    if (line.rfind(prefix, 0) != 0) throw std::runtime_error("server did not start: '" + line + "'");
    port_ = std::stoi(line.substr(prefix.size()));
  }
  ~Server() { stop(); }

  int port() const { return port_; }
  int stop() {
    if (child_.pid < 0) return 0;
    ::kill(child_.pid, SIGTERM);
    const int code = wait_exit(child_.pid);
    ::close(child_.stdout_fd);
    child_.pid = -1;
    return code;
  }

 private:
  Child child_;
  int port_ = 0;
};

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) names.push_back(fs::relative(e.path(), a).string());
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (names.size() != count_b || names.empty()) {
    why = "file sets differ";
    return false;
  }
  for (const auto& n : names) {
    if (!fs::exists(b / n) || read_file(a / n) != read_file(b / n)) {
      why = n + " differs";
      return false;
    }
  }
  return true;
}

// ---- criteria ----

Outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Money delta = kDefaultDelta;
  // £5 removed while the remaining boxes average £17,331.
  const ExactMean fig1{1733100 * 7, 7};
  const bool before = label_event(Money{500}, fig1, Sign::kPositive, delta) == Sign::kPositive;
  const bool after = label_event(Money{500}, fig1, Sign::kNegative, delta) == Sign::kNegative;

  RandomStream rng(20170101);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t count = 2 + static_cast<std::int64_t>(rng.below(21));
    const std::int64_t total = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(count) * 25'000'000));
    const std::int64_t x = static_cast<std::int64_t>(rng.below(25'000'001));
    const std::int64_t dl = static_cast<std::int64_t>(rng.below(200'000));
    const int d = rng.below(2) ? 1 : -1;
    const int oracle = d * (cpp_rational(x + dl) < cpp_rational(total, count) ? 1 : -1);
    const Sign got = label_event(Money{x}, ExactMean{total, count}, d > 0 ? Sign::kPositive : Sign::kNegative,
                                 Money{dl});
    mismatches += to_int(got) != oracle;
  }
  const double secs = seconds_since(t0);
  return {before && after && mismatches == 0 && secs < kLabelSeconds,
          "example +1/-1: " + std::string(before && after ? "ok" : "wrong") + ", oracle mismatches " +
              std::to_string(mismatches) + "/1000, " + fmt(secs) + " s"};
}

Outcome criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  RandomStream rng(424242);
  int roundtrip_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const Episode e = fvtest::random_episode(rng, "acc-" + std::to_string(i));
    const std::string text = serialize_episode(e);
    const ParseOutcome back = try_parse_episode(text);
    if (!back.episode || !(*back.episode == e) || serialize_episode(*back.episode) != text) ++roundtrip_failures;
  }
  int silent = 0, rejected = 0, benign = 0;
  for (int i = 0; i < 10000; ++i) {
    const Episode e = fvtest::random_episode(rng, "c" + std::to_string(i));
    std::string text = serialize_episode(e);
    const std::size_t pos = rng.below(text.size());
    char c;
    do {
      c = static_cast<char>(rng.below(256));
    } while (c == text[pos]);
    text[pos] = c;
    const ParseOutcome out = try_parse_episode(text);
    if (!out.episode) {
      rejected += !out.diagnostics.empty();
      silent += out.diagnostics.empty();
    } else if (*out.episode == e) {
      ++benign;
    } else {
      ++silent;
    }
  }
  const double secs = seconds_since(t0);
  return {roundtrip_failures == 0 && silent == 0 && secs < kEpisodeIoSeconds,
          "round-trip failures " + std::to_string(roundtrip_failures) + "/1000, corruptions rejected " +
              std::to_string(rejected) + ", harmless " + std::to_string(benign) + ", silent " +
              std::to_string(silent) + ", " + fmt(secs) + " s"};
}

Outcome criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig c;
  c.policy = {PolicyKind::kNeverDeal, 1.0};
  std::size_t events = 0;
  for (const Episode& e : simulate_batch(c, 100)) events += replay_episode(e).size();
  const double mean = static_cast<double>(events) / 100.0;
  const double secs = seconds_since(t0);
  return {mean >= 18.0 && mean <= 21.0 && secs < kSimulateSeconds,
          "mean events/episode " + fmt(mean) + ", " + fmt(secs) + " s"};
}

Outcome criterion_4() {
  RandomStream rng(4040);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    ScoredPredictions sp;
    const std::size_t n = 2 + rng.below(199);
    const std::uint64_t levels = 1 + rng.below(25);
    for (std::size_t k = 0; k < n; ++k) {
      sp.push_back({static_cast<double>(rng.below(levels)) * 0.25, rng.below(2) ? Sign::kPositive : Sign::kNegative});
    }
    sp[0].label = Sign::kPositive;
    sp[1].label = Sign::kNegative;
    std::int64_t wins2 = 0, pos = 0, neg = 0;
    for (const auto& p : sp) (p.label == Sign::kPositive ? pos : neg)++;
    for (const auto& p : sp) {
      for (const auto& q : sp) {
        if (p.label == Sign::kPositive && q.label == Sign::kNegative) {
          wins2 += p.score > q.score ? 2 : p.score == q.score ? 1 : 0;
        }
      }
    }
    const double oracle = static_cast<double>(wins2) / static_cast<double>(2 * pos * neg);
    worst = std::max(worst, std::abs(roc_auc(sp) - oracle));
  }
  return {worst <= kAucTolerance, "max |auc - pairwise| over 100 instances = " + fmt(worst)};
}

Outcome criterion_5() {
  const double perfect = fleiss_kappa(RatingMatrix({{4, 0}, {0, 4}, {4, 0}, {0, 4}}));
  const double k = fleiss_kappa(RatingMatrix({{4, 0}, {2, 2}, {0, 4}}));
  const std::vector<std::vector<int>> m{{3, 1, 0}, {0, 2, 2}, {1, 1, 2}, {4, 0, 0}};
  const std::vector<std::vector<int>> permuted{{0, 3, 1}, {2, 0, 2}, {2, 1, 1}, {0, 4, 0}};
  const double a = fleiss_kappa(RatingMatrix(m)), b = fleiss_kappa(RatingMatrix(permuted));
  const bool pass = perfect == 1.0 && std::abs(k - 5.0 / 9.0) <= kKappaTolerance && std::abs(a - b) <= kKappaTolerance;
  return {pass, "perfect " + fmt(perfect) + ", [[4,0],[2,2],[0,4]] " + fmt(k) + " (5/9), permutation delta " +
                    fmt(std::abs(a - b))};
}

Outcome criterion_6() {
  RandomStream rng(6006);
  int points = 0;
  double worst = 0.0;
  while (points < 100) {
    const std::size_t d = 1 + rng.below(16);
    LinearTrackModel m = LinearTrackModel::zeros(d);
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) {
      m.w[j] = rng.normal();
      z[j] = rng.normal();
    }
    m.b = rng.normal();
    const Sign y = rng.below(2) ? Sign::kPositive : Sign::kNegative;
    const double lambda = 0.01 + rng.uniform();
    if (std::abs(1.0 - to_int(y) * score_pooled(m, z)) < 1e-2) continue;  // too close to the kink
    const HingeEvaluation h = hinge_objective(m, z, y, lambda);
    std::vector<double> analytic = h.grad_w, numeric(d + 1);
    analytic.push_back(h.grad_b);
    auto central = [&](double& p) {
      const double saved = p;
      p = saved + kFiniteDifferenceStep;
      const double up = hinge_objective(m, z, y, lambda).value;
      p = saved - kFiniteDifferenceStep;
      const double down = hinge_objective(m, z, y, lambda).value;
      p = saved;
      return (up - down) / (2 * kFiniteDifferenceStep);
    };
    for (std::size_t j = 0; j < d; ++j) numeric[j] = central(m.w[j]);
    numeric[d] = central(m.b);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j <= d; ++j) {
      diff += (numeric[j] - analytic[j]) * (numeric[j] - analytic[j]);
      norm += analytic[j] * analytic[j];
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12));
    ++points;
  }
  return {worst < kGradientRelError, "max relative gradient error over 100 points = " + fmt(worst)};
}

struct DefaultRun {
  EvaluationResult result;
  double seconds = 0.0;
};

const DefaultRun& default_run() {
  static const DefaultRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineConfig c;
    const GeneratedDataset ds = generate_dataset(c.simulation, c.episodes, c.actor, c.splits, 1, c.delta);
    DefaultRun r{train_and_evaluate(ds.tracks, c), 0.0};
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome criterion_7() {
  const DefaultRun& r = default_run();
  const auto& e = r.result;
  if (!e.pooling_val.auc || !e.voting_val.auc || !e.pooling_test.auc) return {false, "missing AUC"};
  const bool pass = *e.pooling_val.auc > *e.voting_val.auc && *e.pooling_test.auc >= kMinPoolingTestAuc &&
                    r.seconds < kTrainSeconds;
  return {pass, "val AUC pooling " + fmt(*e.pooling_val.auc) + " vs voting " + fmt(*e.voting_val.auc) +
                    ", pooling test AUC " + fmt(*e.pooling_test.auc) + ", " + fmt(r.seconds) + " s"};
}

Outcome criterion_8() {
  const auto& d = default_run().result.distributions;
  if (d.good_empty || d.bad_empty) return {false, "a predicted partition is empty"};
  const double happy_good = d.good[index_of(Emotion::kHappiness)];
  const double happy_bad = d.bad[index_of(Emotion::kHappiness)];
  auto negative = [](const EmotionRow& row) {
    return row[index_of(Emotion::kSadness)] + row[index_of(Emotion::kAnger)] + row[index_of(Emotion::kFear)] +
           row[index_of(Emotion::kDisgust)];
  };
  const bool pass = happy_good > happy_bad && negative(d.bad) > negative(d.good);
  return {pass, "happiness good " + fmt(happy_good) + " vs bad " + fmt(happy_bad) + "; negative mass bad " +
                    fmt(negative(d.bad)) + " vs good " + fmt(negative(d.good))};
}

Outcome criterion_9() {
  fvtest::TempDir dir;
  const fs::path log = dir.path() / "stdout.txt";
  std::string why;
  for (const char* run : {"a", "b"}) {
    const fs::path base = dir.path() / run;
    if (run_cli({"simulate", "-n", "25", "--seed", "31", "--out", (base / "sim").string()}, log) != 0 ||
        run_cli({"generate", "-n", "25", "--seed", "31", "--out", (base / "gen").string()}, log) != 0) {
      return {false, "simulate or generate failed"};
    }
  }
  // Both trainings read the same track file so their manifests can agree.
  const fs::path tracks = dir.path() / "a" / "gen" / "tracks.fvt";
  for (const char* run : {"a", "b"}) {
    if (run_cli({"train-eval", tracks.string(), "--seed", "31", "--out", (dir.path() / run / "train").string()},
                dir.path() / run / "report.txt") != 0) {
      return {false, "train-eval failed"};
    }
  }
  for (const char* part : {"sim", "gen", "train"}) {
    if (!same_tree(dir.path() / "a" / part, dir.path() / "b" / part, why)) return {false, std::string(part) + ": " + why};
  }
  if (read_file(dir.path() / "a" / "report.txt") != read_file(dir.path() / "b" / "report.txt")) {
    return {false, "printed reports differ"};
  }
  return {true, "simulate, generate and train-eval artifacts byte-identical across two process runs"};
}

Outcome criterion_10() {
  fvtest::TempDir dir;
  const fs::path data = dir.path() / "data";
  const fs::path log = dir.path() / "stdout.txt";
  if (run_cli({"generate", "-n", "15", "--out", (dir.path() / "gen").string()}, log) != 0 ||
      run_cli({"build-annotation", (dir.path() / "gen" / "tracks.fvt").string(), "--data-dir", data.string(),
               "--name", "demo", "--split", "all"},
              log) != 0) {
    return {false, "could not prepare the dataset"};
  }

  auto snapshot = [](httplib::Client& cli) {
    auto lb = cli.Get("/api/leaderboard?dataset=demo");
    auto st = cli.Get("/api/stats?dataset=demo");
    auto se = cli.Post("/api/session", R"({"annotator_id":"alice","dataset":"demo"})", "application/json");
    if (!lb || !st || !se || lb->status != 200 || st->status != 200 || se->status != 200) {
      throw std::runtime_error("snapshot request failed");
    }
    return lb->body + "\n" + st->body + "\n" + se->body;
  };

  std::string before, after;
  std::string session_id;
  {
    Server server(data);
    httplib::Client cli("127.0.0.1", server.port());
    auto res = cli.Post("/api/session", R"({"annotator_id":"alice","dataset":"demo"})", "application/json");
    if (!res || res->status != 200) return {false, "session create failed"};
    session_id = json::parse(res->body)["session_id"];
    for (int i = 0; i < 20; ++i) {
      auto next = cli.Get("/api/session/" + session_id + "/next");
      if (!next || next->status != 200) return {false, "next failed"};
      const json item = json::parse(next->body);
      if (item["done"] != false || item.contains("ground_truth")) return {false, "bad next payload"};
      const json body{{"item_id", item["item_id"]}, {"guess", i % 3 ? "good" : "bad"}};
      auto ans = cli.Post("/api/session/" + session_id + "/answer", body.dump(), "application/json");
      if (!ans || ans->status != 200) return {false, "answer " + std::to_string(i) + " failed"};
    }
    before = snapshot(cli);
    if (server.stop() != 0) return {false, "server did not exit cleanly"};
  }

  int ok = 0, conflicts = 0, other = 0, answers_after_race = -1;
  {
    Server server(data);
    httplib::Client cli("127.0.0.1", server.port());
    after = snapshot(cli);

    auto next = cli.Get("/api/session/" + session_id + "/next");
    if (!next) return {false, "next after restart failed"};
    const std::string body = json{{"item_id", json::parse(next->body)["item_id"]}, {"guess", "good"}}.dump();
    std::atomic<int> a_ok{0}, a_conflict{0}, a_other{0};
    std::vector<std::thread> racers;
    for (int t = 0; t < 8; ++t) {
      racers.emplace_back([&, port = server.port()] {
        httplib::Client c("127.0.0.1", port);
        auto r = c.Post("/api/session/" + session_id + "/answer", body, "application/json");
        if (r && r->status == 200) ++a_ok;
        else if (r && r->status == 409) ++a_conflict;
        else ++a_other;
      });
    }
    for (auto& t : racers) t.join();
    ok = a_ok;
    conflicts = a_conflict;
    other = a_other;
    server.stop();
  }
  {
    Server server(data);
    httplib::Client cli("127.0.0.1", server.port());
    auto st = cli.Get("/api/stats?dataset=demo");
    if (st && st->status == 200) answers_after_race = json::parse(st->body)["answers"];
  }
  const bool identical = before == after;
  const bool pass = identical && ok == 1 && conflicts == 7 && other == 0 && answers_after_race == 21;
  return {pass, std::string("leaderboard/stats/session ") + (identical ? "identical" : "DIFFER") +
                    " across restart; race: " + std::to_string(ok) + " accepted, " + std::to_string(conflicts) +
                    " conflicts, " + std::to_string(other) + " other; logged answers " +
                    std::to_string(answers_after_race) + "/21"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];
  ::signal(SIGPIPE, SIG_IGN);
  const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                       criterion_5, criterion_6, criterion_7, criterion_8,
                                                       criterion_9, criterion_10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
