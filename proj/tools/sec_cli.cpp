#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sec/harness/config.hpp"
#include "sec/harness/experiment.hpp"
#include "sec/harness/report.hpp"
#include "sec/harness/results.hpp"
#include "sec/harness/verify.hpp"
#include "sec/io/catalogue_store.hpp"

namespace fs = std::filesystem;
using namespace sec;
using namespace sec::harness;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out;
  long long seed = -1;
  int workers = 0;
};

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig cfg;
  cfg.workers = workers_from_env(1);
  if (!c.config_file.empty()) cfg.merge_text(io::read_file(c.config_file));
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    cfg.set(ExperimentConfig::trim(kv.substr(0, eq)), ExperimentConfig::trim(kv.substr(eq + 1)));
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  if (c.workers > 0) cfg.workers = c.workers;
  cfg.validate();
  return cfg;
}

// Effective config next to the results, so a run can be repeated from it.
void echo_config(const ExperimentConfig& cfg, const std::string& command) {
  ensure_dir(results_dir(cfg));
  io::write_file_atomic(results_dir(cfg) / ("config_" + command + ".txt"),
                        "# " + cfg.provenance() + "\n" + cfg.canonical());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_file, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("-s,--set", c.overrides, "override one config key (key=value), repeatable");
  sub->add_option("-o,--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "base seed");
  sub->add_option("-j,--workers", c.workers, "parallel games (default: SEC_WORKERS or 1)");
}

int cmd_train(const Common& c) {
  const auto cfg = load_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainingResult tr = run_training(cfg);
  write_training(cfg, tr);
  io::save_catalogue(tr.catalogue, catalogue_dir(cfg));
  echo_config(cfg, "train");
  std::printf("trained %zu games vs level %d: %d wins, %d losses, %d draws (%d wins in second half)\n",
              tr.games.size(), cfg.training_level, tr.wins, tr.losses, tr.draws, tr.second_half_wins);
  for (const auto& q : tr.quartiles)
    std::printf("  %-9s Q1 %.3f (%.3f)  Q4 %.3f (%.3f)  t=%.3f p=%.4f%s\n", q.metric.c_str(), q.first.mean,
                q.first.std_error, q.last.mean, q.last.std_error, q.test.t, q.test.p, q.significant ? " *" : "");
  std::printf("catalogue: %zu milestones in %s  [%.1fs]\n", tr.catalogue.size(),
              catalogue_dir(cfg).string().c_str(), seconds_since(t0));
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& mode_text, const std::string& level_text) {
  auto cfg = load_config(c);
  cfg.levels = ExperimentConfig::parse_levels(level_text);
  cfg.validate();
  const Mode mode = parse_mode(mode_text);
  std::optional<catalogue::Catalogue> cat;
  if (mode == Mode::sec) cat = io::load_catalogue(catalogue_dir(cfg));
  const auto t0 = std::chrono::steady_clock::now();
  const auto ev = run_evaluation(cfg, mode, cat ? &*cat : nullptr);
  write_evaluation(cfg, ev);
  echo_config(cfg, "evaluate_" + std::string(mode_name(mode)));
  std::printf("%-7s %5s %4s %4s %4s %6s %6s %7s\n", "level", "games", "win", "lose", "draw", "kills", "deaths", "kd");
  for (const auto& s : ev.levels)
    std::printf("%-7d %5d %4d %4d %4d %6ld %6ld %7.3f\n", s.level, s.games, s.wins, s.losses, s.draws, s.kills,
                s.deaths, s.kd());
  std::printf("results in %s  [%.1fs]\n", results_dir(cfg).string().c_str(), seconds_since(t0));
  return 0;
}

int cmd_report(const Common& c, const std::string& dir) {
  const fs::path results = dir.empty() ? results_dir(load_config(c)) : fs::path(dir);
  const auto rep = make_report(results);
  for (const auto& p : rep.written) std::printf("wrote %s\n", p.string().c_str());
  return 0;
}

int cmd_verify(const Common& c) {
  const auto cfg = load_config(c);
  ensure_dir(cfg.output_dir);
  int failed = 0;
  for (const auto& r : run_invariant_suite(cfg, cfg.output_dir)) {
    std::printf("%s  %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skill-balancing RL bot: training, evaluation, reports"};
  app.require_subcommand(1);

  Common train_opts, eval_opts, report_opts, verify_opts;
  std::string mode = "sec", level = "all", report_dir;

  auto* train = app.add_subcommand("train", "train vs the level-5 opponent and store the catalogue");
  add_common(train, train_opts);

  auto* evaluate = app.add_subcommand("evaluate", "play evaluation games vs opponent levels");
  add_common(evaluate, eval_opts);
  evaluate->add_option("-m,--mode", mode, "sec or rl-only")->check(CLI::IsMember({"sec", "rl-only", "rl_only"}));
  evaluate->add_option("-l,--level", level, "all, or a level 1..5 (comma list allowed)");

  auto* report = app.add_subcommand("report", "render SVG charts and summary CSV from results");
  add_common(report, report_opts);
  report->add_option("-r,--results", report_dir, "results directory (default: <out>/results)");

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(verify, verify_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_opts);
    if (*evaluate) return cmd_evaluate(eval_opts, mode, level);
    if (*report) return cmd_report(report_opts, report_dir);
    if (*verify) return cmd_verify(verify_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
