// Acceptance run: one PASS/FAIL line per criterion. argv[1] is the CLI binary
// (used for the re-run determinism check).
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "sec/catalogue/balancer.hpp"
#include "sec/harness/config.hpp"
#include "sec/harness/experiment.hpp"
#include "sec/harness/results.hpp"
#include "sec/io/catalogue_store.hpp"
#include "sec/io/files.hpp"
#include "sec/io/qtable_file.hpp"
#include "sec/rl/sarsa.hpp"

using namespace sec;
using namespace sec::harness;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& body) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s  C%d %s: %s [%.2fs]\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(), secs);
  std::fflush(stdout);
  failures += !v.pass;
}

std::string fmt(double v, int digits = 3) { return io::format_fixed(v, digits); }

const std::uint64_t kSeeds[] = {1, 2, 3};

int default_workers() {
  return workers_from_env(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
}

ExperimentConfig desk_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.workers = default_workers();
  return cfg;
}

// Training is shared by criteria 3, 4, 6, 7 and 8.
const std::map<std::uint64_t, TrainingResult>& trained() {
  static const auto runs = [] {
    std::map<std::uint64_t, TrainingResult> out;
    for (auto seed : kSeeds) out.emplace(seed, run_training(desk_config(seed)));
    return out;
  }();
  return runs;
}

const std::map<std::uint64_t, EvaluationResult>& evaluated(Mode mode) {
  static std::map<Mode, std::map<std::uint64_t, EvaluationResult>> cache;
  auto& slot = cache[mode];
  if (slot.empty())
    for (auto seed : kSeeds)
      slot.emplace(seed, run_evaluation(desk_config(seed), mode, mode == Mode::sec ? &trained().at(seed).catalogue : nullptr));
  return slot;
}

std::map<int, std::pair<long, long>> pooled(const std::map<std::uint64_t, EvaluationResult>& runs) {
  std::map<int, std::pair<long, long>> out;
  for (const auto& [seed, ev] : runs)
    for (const auto& s : ev.levels) {
      out[s.level].first += s.kills;
      out[s.level].second += s.deaths;
    }
  return out;
}

// ---- criterion 1 ----------------------------------------------------------

Verdict sarsa_oracle() {
  const auto t0 = Clock::now();
  const rl::LearnerConfig cfg;
  const rl::ActionId left = rl::ActionId::from_ordinal(0), right = rl::ActionId::from_ordinal(1);
  auto key = [](int s) { return rl::StateKey{0, 0, 0, s}; };
  rl::QTable q;
  std::map<std::pair<int, int>, double> oq, oe;
  std::mt19937_64 rng(2718);
  std::bernoulli_distribution go_right(0.55);
  auto oracle = [&](int s, int a, double target) {
    const double delta = target - oq[{s, a}];
    oe[{s, a}] = 1.0;
    for (auto it = oe.begin(); it != oe.end();) {
      oq[it->first] += cfg.alpha * delta * it->second;
      it->second *= cfg.gamma * cfg.lambda;
      it = it->second < cfg.trace_floor ? oe.erase(it) : std::next(it);
    }
  };
  int steps = 0;
  for (int episode = 0; episode < 50; ++episode) {
    rl::reset_traces(q);
    oe.clear();
    int s = 0;
    bool r = go_right(rng);
    while (true) {
      ++steps;
      const int next = r ? s + 1 : std::max(0, s - 1);
      if (next > 2) {
        rl::sarsa_lambda_terminal_update(q, key(s), r ? right : left, 10.0, cfg);
        oracle(s, r, 10.0);
        break;
      }
      const bool r2 = go_right(rng);
      rl::sarsa_lambda_update(q, key(s), r ? right : left, -1.0, key(next), r2 ? right : left, cfg);
      oracle(s, r, -1.0 + cfg.gamma * oq[{next, r2}]);
      s = next;
      r = r2;
    }
  }
  double worst = 0.0;
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 2; ++a) worst = std::max(worst, std::abs(q.value(key(s), a ? right : left) - oq[{s, a}]));
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {worst <= 1e-9 && secs < 1.0,
          "50 episodes, " + std::to_string(steps) + " steps, max |dQ| = " + io::format_double(worst) + ", " +
              fmt(secs, 4) + "s"};
}

// ---- criterion 2 ----------------------------------------------------------

Verdict balancer_oracle() {
  std::mt19937_64 rng(4242);
  long incidents = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t size = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    catalogue::Catalogue cat(100);
    for (std::size_t k = 1; k < size; ++k) {
      rl::QTable t;
      t.set_value_at(k, static_cast<double>(k));
      cat.append(static_cast<long>(k) * 100, t);
    }
    catalogue::Balancer b(cat, {5, 0});
    rl::QTable live = b.initial_table();
    long index = 0;
    int kdd = 0;
    const int len = std::uniform_int_distribution<int>(0, 500)(rng);
    const double bias = std::uniform_real_distribution<double>(0.15, 0.85)(rng);
    for (int i = 0; i < len; ++i, ++incidents) {
      const bool kill = std::bernoulli_distribution(bias)(rng);
      const long before = index;
      kdd += kill ? 1 : -1;
      if (kill && kdd > 5 && index > 0) --index;
      if (!kill && kdd < -5 && index < static_cast<long>(size) - 1) ++index;
      b.on_incident(kill ? Event::kill : Event::death, live);
      const auto& st = b.state();
      if (static_cast<long>(st.current_index) != index || st.kdd != kdd)
        return {false, "trial " + std::to_string(trial) + " step " + std::to_string(i) + " diverged from oracle"};
      if (st.current_index >= cat.size()) return {false, "index left the catalogue"};
      if (std::abs(kdd) <= 5 && index != before) return {false, "moved inside the match range"};
    }
  }
  return {true, "1000 sequences, " + std::to_string(incidents) + " incidents, trajectories identical"};
}

// ---- criterion 3 ----------------------------------------------------------

Verdict learning_progress() {
  const auto t0 = Clock::now();
  int significant = 0;
  double q1 = 0.0, q4 = 0.0;
  std::string per_seed;
  for (auto seed : kSeeds) {
    const auto& tr = trained().at(seed);
    const auto& kd = *std::find_if(tr.quartiles.begin(), tr.quartiles.end(),
                                   [](const QuartileRow& r) { return r.metric == "kd_ratio"; });
    const bool up = kd.significant && kd.last.mean > kd.first.mean;
    significant += up;
    q1 += kd.first.mean;
    q4 += kd.last.mean;
    per_seed += " seed" + std::to_string(seed) + "(Q1 " + fmt(kd.first.mean) + " Q4 " + fmt(kd.last.mean) + " p=" +
                fmt(kd.test.p, 4) + ")";
  }
  q1 /= 3.0;
  q4 /= 3.0;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {q4 > q1 && significant >= 2 && secs <= 180.0,
          "pooled Q1 " + fmt(q1) + " -> Q4 " + fmt(q4) + ", significant in " + std::to_string(significant) +
              "/3;" + per_seed};
}

// ---- criteria 4, 5, 6 -----------------------------------------------------

Verdict balancing() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& [level, kd] : pooled(evaluated(Mode::sec))) {
    const double r = kd_ratio(kd.first, kd.second);
    ok = ok && r >= 0.85 && r <= 1.15;
    detail += " L" + std::to_string(level) + "=" + fmt(r);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {ok && secs <= 240.0, "pooled SEC KD in [0.85, 1.15]:" + detail};
}

Verdict baseline_contrast() {
  const auto kd = pooled(evaluated(Mode::rl_only));
  bool monotone = true;
  std::string detail;
  double prev = 1e9;
  for (const auto& [level, p] : kd) {
    const double r = kd_ratio(p.first, p.second);
    monotone = monotone && r <= prev;
    prev = r;
    detail += " L" + std::to_string(level) + "=" + fmt(r);
  }
  const double l1 = kd_ratio(kd.at(1).first, kd.at(1).second);
  const double l5 = kd_ratio(kd.at(5).first, kd.at(5).second);
  return {monotone && l1 >= 1.5 * l5,
          "RL-only KD" + detail + (monotone ? " (monotone)" : " (NOT monotone)") + ", L1/L5 = " + fmt(l1 / l5)};
}

Verdict level_one_signature() {
  int games = 0, bad = 0;
  std::string offenders;
  for (const auto& [seed, ev] : evaluated(Mode::sec)) {
    for (const auto& g : ev.games.at(1)) {
      ++games;
      if (g.max_milestone != 0 || g.clearances <= 0) {
        ++bad;
        offenders += " seed" + std::to_string(seed) + "/game" + std::to_string(g.game) + "(max " +
                     std::to_string(g.max_milestone) + ", clearances " + std::to_string(g.clearances) + ")";
      }
    }
  }
  return {bad == 0, std::to_string(games - bad) + "/" + std::to_string(games) +
                        " level-1 games stayed at milestone 0 with clearances" + offenders};
}

// ---- criterion 7 ----------------------------------------------------------

Verdict catalogue_ordering() {
  const auto cfg = desk_config(1);
  const auto& cat = trained().at(1).catalogue;
  const std::size_t picks[] = {0, cat.max_index() / 2, cat.max_index()};
  double prev = -1.0;
  bool ok = true;
  std::string detail;
  for (std::size_t idx : picks) {
    const auto [k, d] = probe_milestone(cfg, cat, idx, 5, 10);
    const double r = kd_ratio(k, d);
    ok = ok && r >= prev;
    prev = r;
    detail += " m" + std::to_string(idx) + "=" + fmt(r);
  }
  return {ok, "greedy KD vs level 5 over 10 games each:" + detail};
}

// ---- criterion 8 ----------------------------------------------------------

Verdict persistence_round_trip() {
  const fs::path dir = fs::temp_directory_path() / ("sec_acceptance_" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::mt19937_64 rng(8);
  int tables = 0;
  for (int round = 0; round < 5; ++round) {
    rl::QTable q;
    std::vector<std::size_t> idx(q.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::uniform_real_distribution<double> v(-1e4, 1e4);
    for (std::size_t i = 0; i < 10000; ++i) q.set_value_at(idx[i], v(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20));
    const fs::path p = dir / ("fuzz" + std::to_string(round) + ".qt");
    io::write_qtable(q, p);
    const auto back = io::read_qtable(p, rl::BucketShape{});
    if (!(back == q)) return {false, "fuzz table " + std::to_string(round) + " changed on round trip"};
    if (io::serialize_qtable(back) != io::read_file(p)) return {false, "re-serialisation not byte-stable"};
    ++tables;
  }
  const auto& cat = trained().at(1).catalogue;
  io::save_catalogue(cat, dir / "cat");
  const auto back = io::load_catalogue(dir / "cat");
  if (!(back == cat)) return {false, "catalogue changed on round trip"};
  io::save_catalogue(back, dir / "cat2");
  for (const auto& e : fs::directory_iterator(dir / "cat"))
    if (io::read_file(e.path()) != io::read_file(dir / "cat2" / e.path().filename()))
      return {false, e.path().filename().string() + " not byte-stable"};
  fs::remove_all(dir);
  return {true, std::to_string(tables) + " x 10000-entry tables and a " + std::to_string(cat.size()) +
                    "-milestone catalogue: exact and byte-stable"};
}

// ---- criterion 9 ----------------------------------------------------------

Verdict cli_determinism(const std::string& cli) {
  if (cli.empty()) return {false, "CLI path not given"};
  const fs::path base = fs::temp_directory_path() / ("sec_acceptance_cli_" + std::to_string(getpid()));
  fs::remove_all(base);
  std::map<std::string, std::string> runs[2];
  for (int r = 0; r < 2; ++r) {
    const fs::path out = base / ("run" + std::to_string(r));
    const std::string flags = " -o " + out.string() + " --seed 7 -j " + std::to_string(r == 0 ? 1 : 4) + " > /dev/null";
    for (const std::string cmd : {"train", "evaluate --mode sec --level all", "evaluate --mode rl-only --level all",
                                  "report"}) {
      const std::string line = cli + " " + cmd + flags;
      if (std::system(line.c_str()) != 0) return {false, "command failed: " + line};
    }
    for (const auto& e : fs::recursive_directory_iterator(out))
      if (e.is_regular_file()) runs[r][fs::relative(e.path(), out).string()] = io::read_file(e.path());
  }
  fs::remove_all(base);
  int csv = 0;
  for (const auto& [name, text] : runs[0]) {
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != text) return {false, name + " differs between runs"};
    csv += name.ends_with(".csv");
  }
  if (runs[0].size() != runs[1].size()) return {false, "different file sets"};
  return {true, std::to_string(runs[0].size()) + " files (" + std::to_string(csv) +
                    " CSV) byte-identical across two runs with 1 and 4 workers"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const auto t0 = Clock::now();
  report(1, "SARSA(lambda) matches step-by-step oracle", sarsa_oracle);
  report(2, "balancer matches transition-rule oracle", balancer_oracle);
  report(3, "training improves KD ratio (Q1 vs Q4)", learning_progress);
  report(4, "SEC balances every level", balancing);
  report(5, "RL-only KD falls with opponent level", baseline_contrast);
  report(6, "level 1 never leaves milestone 0", level_one_signature);
  report(7, "milestones form a progressive timeline", catalogue_ordering);
  report(8, "persistence round-trip", persistence_round_trip);
  report(9, "re-runs are byte-identical", [&] { return cli_determinism(cli); });
  std::printf("%d/9 criteria passed in %.1fs\n", 9 - failures,
              std::chrono::duration<double>(Clock::now() - t0).count());
  return failures == 0 ? 0 : 1;
}
