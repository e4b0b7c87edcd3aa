#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sec/catalogue/balancer.hpp"
#include "sec/catalogue/catalogue.hpp"
#include "sec/harness/config.hpp"
#include "sec/harness/stats.hpp"
#include "sec/rl/sarsa.hpp"
#include "sec/sim/arena.hpp"

namespace sec::harness {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent per-game seed; games in different streams never share one.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

enum class SeedStream : std::uint64_t { training = 1, evaluation = 2, milestone_probe = 3 };

// Runs f(i) for i in [0, n) on up to `workers` threads. The first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, int workers, F&& f) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---- training -------------------------------------------------------------

struct TrainingGame {
  int game = 0;  // 1-based
  int kills = 0;
  int deaths = 0;
  sim::Outcome outcome = sim::Outcome::draw;
  long cumulative_deaths = 0;
  std::size_t milestones = 0;

  double kd() const { return kd_ratio(kills, deaths); }
};

struct QuartileRow {
  std::string metric;
  Summary first;
  Summary last;
  WelchResult test;
  bool significant = false;  // p < 0.05
};

struct TrainingResult {
  std::vector<TrainingGame> games;
  catalogue::Catalogue catalogue;
  std::vector<QuartileRow> quartiles;  // kills, deaths, kd_ratio
  int wins = 0;
  int losses = 0;
  int draws = 0;
  int second_half_wins = 0;
};

inline sim::MatchConfig match_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  sim::MatchConfig mc;
  mc.ticks = cfg.game_ticks;
  mc.seed = seed;
  mc.params = cfg.sim;
  mc.discretizer = cfg.discretizer;
  return mc;
}

// First vs last quarter of the games (quarter = n / 4 games each).
inline std::vector<QuartileRow> compare_quartiles(const std::vector<TrainingGame>& games) {
  const std::size_t q = games.size() / 4;
  if (q < 2) return {};
  auto column = [&](auto pick, std::size_t from) {
    std::vector<double> out;
    for (std::size_t i = from; i < from + q; ++i) out.push_back(pick(games[i]));
    return out;
  };
  std::vector<QuartileRow> rows;
  auto add = [&](const char* name, auto pick) {
    const auto first = column(pick, 0);
    const auto last = column(pick, games.size() - q);
    QuartileRow r;
    r.metric = name;
    r.first = summarize(first);
    r.last = summarize(last);
    r.test = welch_t_test(last, first);
    r.significant = r.test.p < 0.05;
    rows.push_back(r);
  };
  add("kills", [](const TrainingGame& g) { return static_cast<double>(g.kills); });
  add("deaths", [](const TrainingGame& g) { return static_cast<double>(g.deaths); });
  add("kd_ratio", [](const TrainingGame& g) { return g.kd(); });
  return rows;
}

// Plays the training games in order against one opponent with learning on,
// capturing a milestone every `interval` learner deaths.
inline TrainingResult run_training(const ExperimentConfig& cfg) {
  cfg.validate();
  TrainingResult out{{}, catalogue::Catalogue(cfg.interval), {}, 0, 0, 0, 0};
  rl::SarsaLearner learner(cfg.learner);
  sim::MilestoneRecorder recorder{&out.catalogue, 0};
  const auto profile = sim::opponent_profile(cfg.training_level);
  for (int g = 0; g < cfg.training_games; ++g) {
    const auto seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(SeedStream::training),
                                  static_cast<std::uint64_t>(g));
    const auto r = sim::run_game(match_config(cfg, seed), profile, learner, nullptr, &recorder);
    TrainingGame tg{g + 1, r.kills, r.deaths, r.outcome, recorder.deaths, out.catalogue.size()};
    out.games.push_back(tg);
    if (r.outcome == sim::Outcome::win) {
      ++out.wins;
      if (g >= cfg.training_games / 2) ++out.second_half_wins;
    } else if (r.outcome == sim::Outcome::lose) {
      ++out.losses;
    } else {
      ++out.draws;
    }
  }
  out.quartiles = compare_quartiles(out.games);
  return out;
}

// ---- evaluation -----------------------------------------------------------

enum class Mode { sec, rl_only };

inline std::string_view mode_name(Mode m) { return m == Mode::sec ? "sec" : "rl_only"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "sec") return Mode::sec;
  if (s == "rl-only" || s == "rl_only") return Mode::rl_only;
  throw std::invalid_argument("mode must be sec or rl-only, got " + std::string(s));
}

struct EvalGame {
  int level = 0;
  int game = 0;  // 1-based within the level
  std::uint64_t seed = 0;
  int kills = 0;
  int deaths = 0;
  sim::Outcome outcome = sim::Outcome::draw;
  int max_milestone = -1;  // -1 in rl_only mode
  int final_milestone = -1;
  int adjustments_up = 0;
  int adjustments_down = 0;
  int clearances = 0;
  sim::GameLog log;

  double kd() const { return kd_ratio(kills, deaths); }
};

struct LevelSummary {
  int level = 0;
  int games = 0;
  int wins = 0;
  int losses = 0;
  int draws = 0;
  long kills = 0;
  long deaths = 0;
  int adjustments_up = 0;
  int adjustments_down = 0;
  int clearances = 0;
  int max_milestone = -1;

  double kd() const { return kd_ratio(kills, deaths); }
};

struct EvaluationResult {
  Mode mode = Mode::sec;
  std::map<int, std::vector<EvalGame>> games;  // by level
  std::vector<LevelSummary> levels;
};

inline LevelSummary summarize_level(int level, const std::vector<EvalGame>& games) {
  LevelSummary s;
  s.level = level;
  for (const auto& g : games) {
    ++s.games;
    s.wins += g.outcome == sim::Outcome::win;
    s.losses += g.outcome == sim::Outcome::lose;
    s.draws += g.outcome == sim::Outcome::draw;
    s.kills += g.kills;
    s.deaths += g.deaths;
    s.adjustments_up += g.adjustments_up;
    s.adjustments_down += g.adjustments_down;
    s.clearances += g.clearances;
    s.max_milestone = std::max(s.max_milestone, g.max_milestone);
  }
  return s;
}

// One evaluation game. Every game starts from no knowledge: an empty table in
// rl_only mode, milestone 0 under the balancer in sec mode.
inline EvalGame play_evaluation_game(const ExperimentConfig& cfg, Mode mode,
                                     const catalogue::Catalogue* cat, int level, int game) {
  EvalGame eg;
  eg.level = level;
  eg.game = game + 1;
  eg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(SeedStream::evaluation),
                        static_cast<std::uint64_t>(level) * 1000003ULL + static_cast<std::uint64_t>(game));
  rl::SarsaLearner learner(cfg.learner);
  const auto profile = sim::opponent_profile(level);
  sim::GameResult r;
  if (mode == Mode::sec) {
    catalogue::Balancer balancer(*cat, catalogue::BalancerConfig{cfg.threshold, 0});
    r = sim::run_game(match_config(cfg, eg.seed), profile, learner, &balancer);
    eg.max_milestone = static_cast<int>(r.balancer->max_index_reached);
    eg.final_milestone = static_cast<int>(r.balancer->current_index);
    eg.adjustments_up = r.balancer->adjustments_up;
    eg.adjustments_down = r.balancer->adjustments_down;
    eg.clearances = r.balancer->clearances;
  } else {
    r = sim::run_game(match_config(cfg, eg.seed), profile, learner);
  }
  eg.kills = r.kills;
  eg.deaths = r.deaths;
  eg.outcome = r.outcome;
  eg.log = std::move(r.log);
  return eg;
}

inline EvaluationResult run_evaluation(const ExperimentConfig& cfg, Mode mode,
                                       const catalogue::Catalogue* cat) {
  cfg.validate();
  if (mode == Mode::sec && cat == nullptr)
    throw std::invalid_argument("sec mode needs a trained catalogue");
  struct Job {
    int level;
    int game;
  };
  std::vector<Job> jobs;
  for (int level : cfg.levels)
    for (int g = 0; g < cfg.eval_games; ++g) jobs.push_back({level, g});
  std::vector<EvalGame> played(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    played[i] = play_evaluation_game(cfg, mode, cat, jobs[i].level, jobs[i].game);
  });

  EvaluationResult out;
  out.mode = mode;
  for (auto& g : played) out.games[g.level].push_back(std::move(g));
  for (int level : cfg.levels) out.levels.push_back(summarize_level(level, out.games[level]));
  return out;
}

// Frozen greedy play (epsilon 0, no learning) from one milestone; returns
// (kills, deaths) pooled over `games` games. Seeds depend only on the game
// number, so every milestone faces the same sequence of worlds.
inline std::pair<long, long> probe_milestone(const ExperimentConfig& cfg,
                                             const catalogue::Catalogue& cat, std::size_t index,
                                             int level, int games) {
  long kills = 0, deaths = 0;
  std::vector<std::pair<int, int>> per_game(static_cast<std::size_t>(games));
  parallel_for(per_game.size(), cfg.workers, [&](std::size_t g) {
    rl::LearnerConfig lc = cfg.learner;
    lc.epsilon = 0.0;
    rl::SarsaLearner learner(lc);
    learner.set_learning(false);
    learner.replace_table(catalogue::load_milestone(cat, index));
    const auto seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(SeedStream::milestone_probe),
                                  static_cast<std::uint64_t>(g));
    const auto r = sim::run_game(match_config(cfg, seed), sim::opponent_profile(level), learner);
    per_game[g] = {r.kills, r.deaths};
  });
  for (const auto& [k, d] : per_game) {
    kills += k;
    deaths += d;
  }
  return {kills, deaths};
}

// Cumulative KD ratio after every kill/death incident, games concatenated in order.
inline std::vector<double> kd_trace(const std::vector<EvalGame>& games) {
  std::vector<double> trace;
  long kills = 0, deaths = 0;
  for (const auto& g : games) {
    for (const auto& r : g.log.records()) {
      if (r.event == Event::kill) ++kills;
      else if (r.event == Event::death) ++deaths;
      else continue;
      trace.push_back(kd_ratio(kills, deaths));
    }
  }
  return trace;
}

}  // namespace sec::harness
