#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sec/catalogue/balancer.hpp"
#include "sec/harness/config.hpp"
#include "sec/harness/experiment.hpp"
#include "sec/io/catalogue_store.hpp"
#include "sec/io/qtable_file.hpp"
#include "sec/sim/arena.hpp"

namespace sec::harness {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::uint64_t catalogue_digest(const catalogue::Catalogue& cat) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& m : cat.milestones()) h = io::fnv1a64(io::serialize_qtable(*m.snapshot), h);
  return h;
}

}  // namespace detail

// Small, fast runs of every structural invariant. `scratch` receives a
// throwaway catalogue for the persistence check.
inline std::vector<CheckResult> run_invariant_suite(const ExperimentConfig& base,
                                                    const std::filesystem::path& scratch) {
  std::vector<CheckResult> out;
  ExperimentConfig cfg = base;
  cfg.game_ticks = std::min(cfg.game_ticks, 1000);

  // determinism replay
  {
    const auto mc = match_config(cfg, derive_seed(cfg.seed, 7, 0));
    rl::SarsaLearner a(cfg.learner), b(cfg.learner);
    const auto ra = sim::run_game(mc, sim::opponent_profile(5), a);
    const auto rb = sim::run_game(mc, sim::opponent_profile(5), b);
    const bool same = ra.log == rb.log && a.table() == b.table();
    out.push_back({"determinism replay", same,
                   std::to_string(ra.log.records().size()) + " log records, tables " + (same ? "equal" : "differ")});
  }

  // conservation and respawn totality, tick by tick
  {
    bool conserved = true, alive = true;
    int ticks = 0;
    for (int level = 1; level <= 5; ++level) {
      rl::SarsaLearner learner(cfg.learner);
      sim::Match m(match_config(cfg, derive_seed(cfg.seed, 7, static_cast<std::uint64_t>(level))),
                   sim::opponent_profile(level), learner);
      while (!m.finished()) {
        m.step();
        ++ticks;
        const auto& w = m.world();
        conserved = conserved && w.learner.kills == w.opponent.deaths && w.learner.deaths == w.opponent.kills &&
                    m.log().learner_kills() == m.log().opponent_deaths() &&
                    m.log().learner_deaths() == m.log().opponent_kills();
        alive = alive && w.learner.health > 0 && w.opponent.health > 0;
      }
    }
    out.push_back({"conservation", conserved, std::to_string(ticks) + " ticks over levels 1-5"});
    out.push_back({"respawn totality", alive, std::to_string(ticks) + " ticks over levels 1-5"});
  }

  // balancer clamping on random incident sequences
  {
    std::mt19937_64 rng(derive_seed(cfg.seed, 8, 0));
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
      const std::size_t max_index = std::uniform_int_distribution<std::size_t>(0, 9)(rng);
      catalogue::BalancerState st;
      st.threshold = cfg.threshold;
      const int len = std::uniform_int_distribution<int>(1, 500)(rng);
      for (int i = 0; i < len && ok; ++i) {
        const Event e = rng() & 1 ? Event::kill : Event::death;
        const std::size_t before = st.current_index;
        catalogue::transition(st, e, max_index);
        const bool in_band = st.kdd >= -st.threshold && st.kdd <= st.threshold;
        ok = st.current_index <= max_index && (!in_band || st.current_index == before) &&
             (st.current_index + 1 >= before && st.current_index <= before + 1);
      }
    }
    out.push_back({"balancer clamping", ok, "200 random incident sequences"});
  }

  // a small real catalogue for the remaining checks
  ExperimentConfig small = cfg;
  small.training_games = 2;
  small.interval = 10;
  const TrainingResult tr = run_training(small);

  {
    const auto before = detail::catalogue_digest(tr.catalogue);
    small.eval_games = 1;
    small.levels = {1, 5};
    const auto ev = run_evaluation(small, Mode::sec, &tr.catalogue);
    const bool pure = before == detail::catalogue_digest(tr.catalogue);
    out.push_back({"snapshot purity", pure,
                   std::to_string(tr.catalogue.size()) + " milestones hashed before and after SEC games"});

    bool tallies = true;
    for (const auto& s : ev.levels) tallies = tallies && s.wins + s.losses + s.draws == s.games;
    for (const auto& s : run_evaluation(small, Mode::rl_only, nullptr).levels)
      tallies = tallies && s.wins + s.losses + s.draws == s.games;
    out.push_back({"win+lose+draw = games", tallies, "sec and rl_only, levels 1 and 5"});
  }

  {
    std::string detail;
    bool ok = false;
    try {
      const auto dir = scratch / "verify_catalogue";
      io::save_catalogue(tr.catalogue, dir);
      const auto back = io::load_catalogue(dir);
      ok = back == tr.catalogue;
      for (const auto& m : tr.catalogue.milestones())
        ok = ok && io::serialize_qtable(*back.at(m.index).snapshot) == io::serialize_qtable(*m.snapshot);
      detail = std::to_string(tr.catalogue.size()) + " milestones round-tripped";
      std::filesystem::remove_all(dir);
    } catch (const std::exception& e) {
      detail = e.what();
    }
    out.push_back({"persistence round-trip", ok, detail});
  }
  return out;
}

}  // namespace sec::harness
