#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sec/io/files.hpp"
#include "sec/rl/sarsa.hpp"
#include "sec/sim/arena.hpp"

namespace sec::harness {

// Everything that determines an experiment's numbers. `output_dir` and
// `workers` only decide where and how fast, so they stay out of the hash.
struct ExperimentConfig {
  int game_ticks = 1800;
  int training_games = 30;
  int eval_games = 5;
  int training_level = 5;
  std::vector<int> levels{1, 2, 3, 4, 5};
  rl::LearnerConfig learner{};
  int threshold = 5;
  long interval = 100;
  std::uint64_t seed = 1;
  sim::SimParams sim{};
  rl::DiscretizerConfig discretizer{};

  std::string output_dir = "sec_out";
  int workers = 1;

  void validate() const {
    if (game_ticks <= 0) throw std::invalid_argument("game_ticks must be positive");
    if (training_games <= 0) throw std::invalid_argument("training_games must be positive");
    if (eval_games <= 0) throw std::invalid_argument("eval_games must be positive");
    if (training_level < 1 || training_level > 5)
      throw std::invalid_argument("training_level must be 1..5");
    if (levels.empty()) throw std::invalid_argument("levels must not be empty");
    for (int l : levels)
      if (l < 1 || l > 5) throw std::invalid_argument("levels must be within 1..5");
    if (!learner.valid()) throw std::invalid_argument("learner hyperparameters out of range");
    if (threshold < 0) throw std::invalid_argument("threshold must be non-negative");
    if (interval <= 0) throw std::invalid_argument("interval must be positive");
    if (workers <= 0) throw std::invalid_argument("workers must be positive");
  }

  // Sorted key=value lines covering every hashed field.
  std::string canonical() const {
    std::map<std::string, std::string> kv;
    kv["game_ticks"] = std::to_string(game_ticks);
    kv["training_games"] = std::to_string(training_games);
    kv["eval_games"] = std::to_string(eval_games);
    kv["training_level"] = std::to_string(training_level);
    std::string lv;
    for (std::size_t i = 0; i < levels.size(); ++i) lv += (i ? "," : "") + std::to_string(levels[i]);
    kv["levels"] = lv;
    kv["alpha"] = io::format_double(learner.alpha);
    kv["gamma"] = io::format_double(learner.gamma);
    kv["lambda"] = io::format_double(learner.lambda);
    kv["epsilon"] = io::format_double(learner.epsilon);
    kv["hit_reward"] = io::format_double(learner.hit_reward);
    kv["miss_penalty"] = io::format_double(learner.miss_penalty);
    kv["threshold"] = std::to_string(threshold);
    kv["interval"] = std::to_string(interval);
    kv["seed"] = std::to_string(seed);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
  }

  std::uint64_t hash() const { return io::fnv1a64(canonical()); }

  // One line at the top of every emitted artifact.
  std::string provenance() const {
    return "seed=" + std::to_string(seed) + " config_hash=" + io::hex64(hash());
  }

  void set(const std::string& key, const std::string& value) {
    auto to_int = [&] {
      std::size_t used = 0;
      const long long v = std::stoll(value, &used);
      if (used != value.size()) throw std::invalid_argument("bad integer for " + key + ": " + value);
      return v;
    };
    auto to_real = [&] {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("bad number for " + key + ": " + value);
      return v;
    };
    if (key == "game_ticks") game_ticks = static_cast<int>(to_int());
    else if (key == "training_games") training_games = static_cast<int>(to_int());
    else if (key == "eval_games") eval_games = static_cast<int>(to_int());
    else if (key == "training_level") training_level = static_cast<int>(to_int());
    else if (key == "levels") levels = parse_levels(value);
    else if (key == "alpha") learner.alpha = to_real();
    else if (key == "gamma") learner.gamma = to_real();
    else if (key == "lambda") learner.lambda = to_real();
    else if (key == "epsilon") learner.epsilon = to_real();
    else if (key == "hit_reward") learner.hit_reward = to_real();
    else if (key == "miss_penalty") learner.miss_penalty = to_real();
    else if (key == "threshold") threshold = static_cast<int>(to_int());
    else if (key == "interval") interval = static_cast<long>(to_int());
    else if (key == "seed") seed = static_cast<std::uint64_t>(to_int());
    else if (key == "output_dir") output_dir = value;
    else if (key == "workers") workers = static_cast<int>(to_int());
    else throw std::invalid_argument("unknown config key: " + key);
  }

  // `key = value` lines; blank lines and `#` comments are ignored.
  void merge_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash_pos = line.find('#');
      if (hash_pos != std::string::npos) line.erase(hash_pos);
      const auto eq = line.find('=');
      if (trim(line).empty()) continue;
      if (eq == std::string::npos)
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  static std::vector<int> parse_levels(const std::string& value) {
    if (value == "all") return {1, 2, 3, 4, 5};
    std::vector<int> out;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stoi(trim(item)));
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
};

// Worker count from SEC_WORKERS, or `fallback` when unset or invalid.
inline int workers_from_env(int fallback = 1) {
  if (const char* v = std::getenv("SEC_WORKERS")) {
    const int n = std::atoi(v);
    if (n > 0) return n;
  }
  return fallback;
}

}  // namespace sec::harness
