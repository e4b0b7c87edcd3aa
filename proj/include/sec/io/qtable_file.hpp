#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sec/errors.hpp"
#include "sec/io/files.hpp"
#include "sec/rl/qtable.hpp"

namespace sec::io {

// Line-oriented Q-table text format:
//
//   SECQTABLE <version>
//   buckets <speed> <direction> <rotation> <distance>
//   actions <horizontal> <vertical>
//   entries <n>
//   <speed> <direction> <rotation> <distance> <action> <value>   (n lines)
//   checksum <fnv1a64 of the record lines, hex>
//
// Only nonzero values are stored, in (state ordinal, action ordinal) order.
inline constexpr int kQTableFormatVersion = 1;
inline constexpr const char* kQTableMagic = "SECQTABLE";

inline std::string serialize_qtable(const rl::QTable& q) {
  const auto& shape = q.shape();
  std::string body;
  std::size_t n = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double v = q.value_at(i);
    if (v == 0.0) continue;
    const rl::StateKey s = rl::state_from_ordinal(i / rl::ActionId::kCount, shape);
    body += std::to_string(s.speed) + ' ' + std::to_string(s.direction) + ' ' +
            std::to_string(s.rotation) + ' ' + std::to_string(s.distance) + ' ' +
            std::to_string(i % rl::ActionId::kCount) + ' ' + format_double(v) + '\n';
    ++n;
  }
  std::ostringstream os;
  os << kQTableMagic << ' ' << kQTableFormatVersion << '\n'
     << "buckets " << shape.speed << ' ' << shape.direction << ' ' << shape.rotation << ' '
     << shape.distance << '\n'
     << "actions " << rl::ActionId::kHorizontalCount << ' ' << rl::ActionId::kVerticalCount
     << '\n'
     << "entries " << n << '\n'
     << body << "checksum " << hex64(fnv1a64(body)) << '\n';
  return os.str();
}

// Parses a serialized table. `origin` names the source in error messages;
// a given `expected` shape rejects tables built for another state space.
inline rl::QTable parse_qtable(const std::string& text, const std::string& origin,
                               std::optional<rl::BucketShape> expected = std::nullopt) {
  if (text.empty()) throw TruncatedFile(origin, "empty file");
  if (text.back() != '\n') throw TruncatedFile(origin, "file ends mid-line");
  std::istringstream in(text);
  std::string line;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw TruncatedFile(origin, std::string("missing ") + what);
    return std::istringstream(line);
  };

  {
    auto ls = next("header");
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != kQTableMagic)
      throw FormatError(origin, "not a Q-table file");
    if (version != kQTableFormatVersion)
      throw VersionMismatch(origin, "unsupported format version " + std::to_string(version));
  }
  rl::BucketShape shape;
  {
    auto ls = next("bucket line");
    std::string key;
    if (!(ls >> key >> shape.speed >> shape.direction >> shape.rotation >> shape.distance) ||
        key != "buckets" || !shape.valid())
      throw FormatError(origin, "malformed bucket line");
    if (expected && *expected != shape) throw ShapeMismatch(origin, "state space does not match");
  }
  {
    auto ls = next("action line");
    std::string key;
    int h = 0, v = 0;
    if (!(ls >> key >> h >> v) || key != "actions") throw FormatError(origin, "malformed action line");
    if (h != rl::ActionId::kHorizontalCount || v != rl::ActionId::kVerticalCount)
      throw ShapeMismatch(origin, "action grid does not match");
  }
  std::size_t n = 0;
  {
    auto ls = next("entry count");
    std::string key;
    if (!(ls >> key >> n) || key != "entries") throw FormatError(origin, "malformed entry count");
  }

  rl::QTable q(shape);
  std::string body;
  for (std::size_t r = 0; r < n; ++r) {
    if (!std::getline(in, line) || line.rfind("checksum", 0) == 0)
      throw TruncatedFile(origin, "expected " + std::to_string(n) + " records, found " +
                                      std::to_string(r));
    body += line + '\n';
    std::istringstream ls(line);
    rl::StateKey s;
    std::size_t action = 0;
    std::string value_text;
    if (!(ls >> s.speed >> s.direction >> s.rotation >> s.distance >> action >> value_text) ||
        !rl::in_range(s, shape) || action >= rl::ActionId::kCount)
      throw FormatError(origin, "malformed record on line " + std::to_string(r + 5));
    char* end = nullptr;
    const double v = std::strtod(value_text.c_str(), &end);
    if (end != value_text.c_str() + value_text.size())
      throw FormatError(origin, "malformed value on line " + std::to_string(r + 5));
    q.set_value_at(rl::state_ordinal(s, shape) * rl::ActionId::kCount + action, v);
  }
  if (!std::getline(in, line)) throw TruncatedFile(origin, "missing checksum");
  std::istringstream ls(line);
  std::string key, sum;
  if (!(ls >> key >> sum) || key != "checksum") throw FormatError(origin, "malformed checksum line");
  std::uint64_t stored = 0;
  try {
    stored = parse_hex64(sum);
  } catch (const std::exception&) {
    throw FormatError(origin, "malformed checksum value");
  }
  if (stored != fnv1a64(body)) throw ChecksumMismatch(origin, "record checksum mismatch");
  return q;
}

inline void write_qtable(const rl::QTable& q, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_qtable(q));
}

inline rl::QTable read_qtable(const std::filesystem::path& path,
                              std::optional<rl::BucketShape> expected = std::nullopt) {
  return parse_qtable(read_file(path), path.string(), expected);
}

}  // namespace sec::io
