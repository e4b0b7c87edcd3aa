#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "sec/harness/config.hpp"
#include "sec/harness/experiment.hpp"
#include "sec/io/files.hpp"

namespace sec::harness {

namespace fs = std::filesystem;

inline fs::path results_dir(const ExperimentConfig& cfg) { return fs::path(cfg.output_dir) / "results"; }
inline fs::path catalogue_dir(const ExperimentConfig& cfg) { return fs::path(cfg.output_dir) / "catalogue"; }

inline std::string eval_file(Mode m, int level) {
  return "eval_" + std::string(mode_name(m)) + "_level" + std::to_string(level) + ".csv";
}
inline std::string incidents_file(Mode m, int level) {
  return "incidents_" + std::string(mode_name(m)) + "_level" + std::to_string(level) + ".csv";
}
inline std::string summary_file(Mode m) { return "eval_" + std::string(mode_name(m)) + "_summary.csv"; }

// ---- writing ----------------------------------------------------------------

class CsvBuilder {
 public:
  explicit CsvBuilder(const std::string& provenance) { out_ << "# " << provenance << '\n'; }

  template <class... Ts>
  CsvBuilder& row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
    return *this;
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return io::format_fixed(v, 6); }
  template <class T>
  static std::string cell(const T& v) { return std::to_string(v); }

  std::ostringstream out_;
};

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": cannot create output directory");
}

inline void write_training(const ExperimentConfig& cfg, const TrainingResult& tr) {
  const fs::path dir = results_dir(cfg);
  ensure_dir(dir);
  const std::string prov = cfg.provenance();

  CsvBuilder games(prov);
  games.row("game", "kills", "deaths", "outcome", "kd_ratio", "cumulative_deaths", "milestones");
  for (const auto& g : tr.games)
    games.row(g.game, g.kills, g.deaths, sim::to_string(g.outcome), g.kd(), g.cumulative_deaths, g.milestones);
  io::write_file_atomic(dir / "training_games.csv", games.str());

  CsvBuilder quart(prov);
  quart.row("metric", "q1_mean", "q1_std_error", "q4_mean", "q4_std_error", "t", "df", "p", "significant");
  for (const auto& q : tr.quartiles)
    quart.row(q.metric, q.first.mean, q.first.std_error, q.last.mean, q.last.std_error, q.test.t, q.test.df,
              q.test.p, q.significant ? "yes" : "no");
  io::write_file_atomic(dir / "training_quartiles.csv", quart.str());

  CsvBuilder summary(prov);
  summary.row("games", "wins", "losses", "draws", "second_half_wins", "learner_deaths", "milestones");
  summary.row(tr.games.size(), tr.wins, tr.losses, tr.draws, tr.second_half_wins,
              tr.games.empty() ? 0L : tr.games.back().cumulative_deaths, tr.catalogue.size());
  io::write_file_atomic(dir / "training_summary.csv", summary.str());
}

inline void write_evaluation(const ExperimentConfig& cfg, const EvaluationResult& ev) {
  const fs::path dir = results_dir(cfg);
  ensure_dir(dir);
  const std::string prov = cfg.provenance();
  for (const auto& [level, games] : ev.games) {
    CsvBuilder per_game(prov);
    per_game.row("game", "seed", "kills", "deaths", "outcome", "kd_ratio", "max_milestone", "final_milestone",
                 "adjustments_up", "adjustments_down", "clearances");
    CsvBuilder incidents(prov);
    incidents.row("game", "tick", "actor", "event", "learner_kills", "learner_deaths", "milestone_index");
    for (const auto& g : games) {
      per_game.row(g.game, g.seed, g.kills, g.deaths, sim::to_string(g.outcome), g.kd(), g.max_milestone,
                   g.final_milestone, g.adjustments_up, g.adjustments_down, g.clearances);
      for (const auto& r : g.log.records())
        incidents.row(g.game, r.tick, to_string(r.actor), to_string(r.event), r.learner_kills, r.learner_deaths,
                      r.milestone_index);
    }
    io::write_file_atomic(dir / eval_file(ev.mode, level), per_game.str());
    io::write_file_atomic(dir / incidents_file(ev.mode, level), incidents.str());
  }
  CsvBuilder summary(prov);
  summary.row("level", "games", "wins", "losses", "draws", "kills", "deaths", "kd_ratio", "adjustments_up",
              "adjustments_down", "clearances", "max_milestone");
  for (const auto& s : ev.levels)
    summary.row(s.level, s.games, s.wins, s.losses, s.draws, s.kills, s.deaths, s.kd(), s.adjustments_up,
                s.adjustments_down, s.clearances, s.max_milestone);
  io::write_file_atomic(dir / summary_file(ev.mode), summary.str());
}

// ---- reading ----------------------------------------------------------------

struct CsvTable {
  std::string provenance;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("missing column " + name);
  }
  double number(std::size_t row, const std::string& name) const { return std::stod(rows[row][column(name)]); }
  const std::string& text(std::size_t row, const std::string& name) const { return rows[row][column(name)]; }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(const fs::path& path) {
  const std::string text = io::read_file(path);
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw FormatError(path.string(), "expected a provenance line");
  t.provenance = line.substr(2);
  if (!std::getline(in, line)) throw TruncatedFile(path.string(), "missing header row");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.header.size())
      throw FormatError(path.string(), "row has " + std::to_string(cells.size()) + " cells, header has " +
                                           std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace sec::harness
