#pragma once

#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "sec/catalogue/catalogue.hpp"
#include "sec/errors.hpp"
#include "sec/io/files.hpp"
#include "sec/io/qtable_file.hpp"

namespace sec::io {

// Directory layout:
//   manifest.tsv          header lines, then one row per milestone:
//                         index <TAB> file <TAB> deaths_at_capture <TAB> checksum
//   milestone_<index>.qt  Q-table files; the checksum is FNV-1a over the whole file.
inline constexpr int kCatalogueFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.tsv";

inline std::string milestone_file_name(std::size_t index) {
  return "milestone_" + std::to_string(index) + ".qt";
}

inline void save_catalogue(const catalogue::Catalogue& cat, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "format\tsec-catalogue\t" << kCatalogueFormatVersion << '\n'
           << "interval\t" << cat.interval() << '\n'
           << "milestones\t" << cat.size() << '\n'
           << "index\tfile\tdeaths_at_capture\tchecksum\n";
  for (const auto& m : cat.milestones()) {
    const std::string text = serialize_qtable(*m.snapshot);
    const std::string name = milestone_file_name(m.index);
    write_file_atomic(dir / name, text);
    manifest << m.index << '\t' << name << '\t' << m.deaths_at_capture << '\t'
             << hex64(fnv1a64(text)) << '\n';
  }
  // Manifest last: a crash mid-save leaves the previous manifest (or none).
  write_file_atomic(dir / kManifestName, manifest.str());
}

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ls(line);
  while (std::getline(ls, cell, '\t')) out.push_back(cell);
  return out;
}

}  // namespace detail

inline catalogue::Catalogue load_catalogue(const std::filesystem::path& dir) {
  const std::filesystem::path manifest_path = dir / kManifestName;
  if (!std::filesystem::exists(manifest_path))
    throw MissingFile(manifest_path.string(), "catalogue manifest not found");
  const std::string origin = manifest_path.string();
  std::istringstream in(read_file(manifest_path));
  std::string line;

  auto header = [&](const char* key) {
    if (!std::getline(in, line)) throw TruncatedFile(origin, std::string("missing ") + key);
    auto cells = detail::split_tabs(line);
    if (cells.empty() || cells[0] != key) throw FormatError(origin, std::string("expected ") + key);
    return cells;
  };
  {
    auto cells = header("format");
    if (cells.size() != 3 || cells[1] != "sec-catalogue") throw FormatError(origin, "bad format line");
    if (std::stoi(cells[2]) != kCatalogueFormatVersion)
      throw VersionMismatch(origin, "unsupported catalogue version " + cells[2]);
  }
  const long interval = std::stol(header("interval").at(1));
  const std::size_t count = std::stoul(header("milestones").at(1));
  header("index");

  std::vector<catalogue::Milestone> milestones;
  for (std::size_t r = 0; r < count; ++r) {
    if (!std::getline(in, line))
      throw TruncatedFile(origin, "expected " + std::to_string(count) + " milestones");
    auto cells = detail::split_tabs(line);
    if (cells.size() != 4) throw FormatError(origin, "malformed milestone row");
    const std::size_t index = std::stoul(cells[0]);
    if (index != r)
      throw NonContiguousIndices(origin, "milestone index " + cells[0] + " where " +
                                             std::to_string(r) + " was expected");
    const std::filesystem::path file = dir / cells[1];
    if (!std::filesystem::exists(file)) throw MissingFile(file.string(), "milestone file missing");
    const std::string text = read_file(file);
    if (hex64(fnv1a64(text)) != cells[3])
      throw ChecksumMismatch(file.string(), "content does not match manifest checksum");
    auto table = std::make_shared<const rl::QTable>(parse_qtable(text, file.string()));
    milestones.push_back(catalogue::Milestone{index, std::stol(cells[2]), std::move(table)});
  }
  if (milestones.empty()) throw FormatError(origin, "catalogue has no milestones");
  try {
    return catalogue::Catalogue::from_milestones(interval, std::move(milestones));
  } catch (const std::invalid_argument& e) {
    throw FormatError(origin, e.what());
  }
}

}  // namespace sec::io
