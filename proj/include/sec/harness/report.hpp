#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sec/harness/results.hpp"
#include "sec/harness/stats.hpp"
#include "sec/io/files.hpp"

namespace sec::harness {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

// Results the report needs but could not find, named relative to the results dir.
class MissingResults : public std::runtime_error {
 public:
  explicit MissingResults(std::vector<std::string> files)
      : std::runtime_error(message(files)), files_(std::move(files)) {}
  const std::vector<std::string>& files() const { return files_; }

 private:
  static std::string message(const std::vector<std::string>& files) {
    std::string m = "missing or incomplete results; expected:";
    for (const auto& f : files) m += "\n  " + f;
    return m;
  }
  std::vector<std::string> files_;
};

namespace detail {

inline std::string num(double v) { return io::format_fixed(v, 2); }

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// A "nice" upper bound for an axis.
inline double nice_ceiling(double v) {
  if (v <= 0.0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double step : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (step * mag >= v) return step * mag;
  return 10.0 * mag;
}

}  // namespace detail

// Plain SVG line chart. Output depends only on the arguments.
inline std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                                  const std::vector<Series>& series, const std::string& provenance,
                                  std::optional<double> reference_y = std::nullopt) {
  constexpr double W = 720, H = 400, left = 64, right = 150, top = 40, bottom = 52;
  const double pw = W - left - right, ph = H - top - bottom;
  double x_min = 0.0, x_max = 1.0, y_max = 0.0;
  bool any = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!any) x_min = x_max = x;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_max = std::max(y_max, y);
      any = true;
    }
  if (reference_y) y_max = std::max(y_max, *reference_y);
  if (x_max <= x_min) x_max = x_min + 1.0;
  y_max = detail::nice_ceiling(y_max);
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return top + ph - y / y_max * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
  svg << "<desc>" << detail::escape(provenance) << "</desc>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << detail::num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << detail::escape(title) << "</text>\n";

  // grid and axes
  for (int i = 0; i <= 4; ++i) {
    const double y = y_max * i / 4.0;
    svg << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(py(y)) << "\" x2=\"" << detail::num(left + pw)
        << "\" y2=\"" << detail::num(py(y)) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << detail::num(left - 6) << "\" y=\"" << detail::num(py(y) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << io::format_fixed(y, y_max < 10 ? 2 : 0)
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double x = x_min + (x_max - x_min) * i / 4.0;
    svg << "<text x=\"" << detail::num(px(x)) << "\" y=\"" << detail::num(top + ph + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << io::format_fixed(x, 0)
        << "</text>\n";
  }
  svg << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(top + ph) << "\" x2=\"" << detail::num(left + pw)
      << "\" y2=\"" << detail::num(top + ph) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(top) << "\" x2=\"" << detail::num(left)
      << "\" y2=\"" << detail::num(top + ph) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << detail::num(left + pw / 2) << "\" y=\"" << detail::num(H - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << detail::escape(x_label)
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << detail::num(top + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\" transform=\"rotate(-90 16 " << detail::num(top + ph / 2) << ")\">" << detail::escape(y_label)
      << "</text>\n";

  if (reference_y)
    svg << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(py(*reference_y)) << "\" x2=\""
        << detail::num(left + pw) << "\" y2=\"" << detail::num(py(*reference_y))
        << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < s.points.size(); ++j)
      svg << (j ? " " : "") << detail::num(px(s.points[j].first)) << ',' << detail::num(py(s.points[j].second));
    svg << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << detail::num(left + pw + 12) << "\" y1=\"" << detail::num(ly) << "\" x2=\""
        << detail::num(left + pw + 32) << "\" y2=\"" << detail::num(ly) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << detail::num(left + pw + 38) << "\" y=\"" << detail::num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::escape(s.name) << "</text>\n";
  }
  svg << "<text x=\"" << detail::num(W - 6) << "\" y=\"" << detail::num(H - 4)
      << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"9\" fill=\"#666666\">"
      << detail::escape(provenance) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

// Cumulative KD ratio after each kill/death row of an incidents table.
inline std::vector<double> kd_trace_from_incidents(const CsvTable& t) {
  std::vector<double> trace;
  long kills = 0, deaths = 0;
  const std::size_t ev = t.column("event");
  for (const auto& row : t.rows) {
    if (row[ev] == "kill") ++kills;
    else if (row[ev] == "death") ++deaths;
    else continue;
    trace.push_back(kd_ratio(kills, deaths));
  }
  return trace;
}

inline double last_quartile_mean(const std::vector<double>& trace) {
  if (trace.empty()) return 0.0;
  const std::size_t from = trace.size() - std::max<std::size_t>(1, trace.size() / 4);
  double sum = 0.0;
  for (std::size_t i = from; i < trace.size(); ++i) sum += trace[i];
  return sum / static_cast<double>(trace.size() - from);
}

struct ReportOutput {
  std::vector<std::filesystem::path> written;
};

// Renders SVG charts and report/summary.csv from a results directory.
inline ReportOutput make_report(const std::filesystem::path& results) {
  namespace fs = std::filesystem;
  const Mode modes[] = {Mode::sec, Mode::rl_only};

  std::vector<std::string> missing;
  auto need = [&](const std::string& name) {
    if (!fs::is_regular_file(results / name)) missing.push_back(name);
  };
  need("training_games.csv");
  for (Mode m : modes) need(summary_file(m));
  if (!missing.empty()) {
    for (Mode m : modes)
      for (int level = 1; level <= 5; ++level)
        if (!fs::is_regular_file(results / summary_file(m))) {
          missing.push_back(eval_file(m, level));
          missing.push_back(incidents_file(m, level));
        }
    throw MissingResults(missing);
  }

  std::map<Mode, std::vector<int>> levels;
  for (Mode m : modes) {
    const CsvTable s = read_csv(results / summary_file(m));
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      const int level = static_cast<int>(s.number(r, "level"));
      levels[m].push_back(level);
      need(eval_file(m, level));
      need(incidents_file(m, level));
    }
  }
  if (!missing.empty()) throw MissingResults(missing);

  const fs::path out = results / "report";
  ensure_dir(out);
  ReportOutput report;
  auto emit = [&](const std::string& name, const std::string& content) {
    io::write_file_atomic(out / name, content);
    report.written.push_back(out / name);
  };

  // training win/loss
  const CsvTable training = read_csv(results / "training_games.csv");
  {
    Series wins{"cumulative wins", "#1f77b4", {}}, losses{"cumulative losses", "#d62728", {}};
    int w = 0, l = 0;
    for (std::size_t r = 0; r < training.rows.size(); ++r) {
      const std::string& o = training.text(r, "outcome");
      w += o == "win";
      l += o == "lose";
      const double g = training.number(r, "game");
      wins.points.emplace_back(g, w);
      losses.points.emplace_back(g, l);
    }
    emit("training_win_loss.svg",
         line_chart_svg("Training vs level 5: wins and losses", "game", "games", {wins, losses}, training.provenance));
  }

  CsvBuilder summary(training.provenance);
  summary.row("mode", "level", "games", "wins", "losses", "draws", "kills", "deaths", "kd_ratio", "incidents",
              "trace_last_quartile_kd");

  std::map<std::pair<Mode, int>, std::vector<double>> traces;
  for (Mode m : modes) {
    const CsvTable s = read_csv(results / summary_file(m));
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      const int level = static_cast<int>(s.number(r, "level"));
      const CsvTable games = read_csv(results / eval_file(m, level));
      Series killed{"killed", "#2ca02c", {}}, was_killed{"was killed", "#d62728", {}};
      for (std::size_t g = 0; g < games.rows.size(); ++g) {
        const double game = games.number(g, "game");
        killed.points.emplace_back(game, games.number(g, "kills"));
        was_killed.points.emplace_back(game, games.number(g, "deaths"));
      }
      const std::string label = m == Mode::sec ? "SEC" : "RL only";
      emit("killed_" + std::string(mode_name(m)) + "_level" + std::to_string(level) + ".svg",
           line_chart_svg(label + " vs level " + std::to_string(level) + ": killed and was killed per game", "game",
                          "count", {killed, was_killed}, games.provenance));

      const CsvTable incidents = read_csv(results / incidents_file(m, level));
      auto trace = kd_trace_from_incidents(incidents);
      summary.row(std::string(mode_name(m)), level, s.text(r, "games"), s.text(r, "wins"), s.text(r, "losses"),
                  s.text(r, "draws"), s.text(r, "kills"), s.text(r, "deaths"), s.text(r, "kd_ratio"), trace.size(),
                  last_quartile_mean(trace));
      traces[{m, level}] = std::move(trace);
    }
  }

  std::set<int> both;
  for (int level : levels[Mode::sec])
    if (std::find(levels[Mode::rl_only].begin(), levels[Mode::rl_only].end(), level) != levels[Mode::rl_only].end())
      both.insert(level);
  for (int level : both) {
    std::vector<Series> lines;
    for (Mode m : modes) {
      Series s{m == Mode::sec ? "SEC" : "RL only", m == Mode::sec ? "#1f77b4" : "#ff7f0e", {}};
      const auto& t = traces[{m, level}];
      for (std::size_t i = 0; i < t.size(); ++i) s.points.emplace_back(static_cast<double>(i + 1), t[i]);
      lines.push_back(std::move(s));
    }
    emit("kd_trace_level" + std::to_string(level) + ".svg",
         line_chart_svg("KD ratio per incident vs level " + std::to_string(level), "incident", "KD ratio", lines,
                        training.provenance, 1.0));
  }

  emit("summary.csv", summary.str());
  return report;
}

}  // namespace sec::harness
