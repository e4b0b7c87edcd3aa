#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "sec/catalogue/catalogue.hpp"
#include "sec/io/catalogue_store.hpp"
#include "sec/io/files.hpp"
#include "sec/io/qtable_file.hpp"

using namespace sec;
using namespace sec::io;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sec_persist_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

rl::QTable random_table(std::size_t entries, std::uint64_t seed) {
  rl::QTable q;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> idx(0, q.size() - 1);
  std::uniform_real_distribution<double> mag(-1e6, 1e6);
  std::uniform_int_distribution<int> exp(-300, 300);
  std::set<std::size_t> used;
  while (used.size() < entries) {
    const std::size_t i = idx(rng);
    if (!used.insert(i).second) continue;
    // mix ordinary magnitudes with extreme exponents and awkward fractions
    double v = mag(rng);
    if (used.size() % 3 == 0) v = std::ldexp(mag(rng) / 1e6, exp(rng));
    if (v == 0.0) v = 1e-300;
    q.set_value_at(i, v);
  }
  return q;
}

catalogue::Catalogue random_catalogue(std::size_t milestones, std::uint64_t seed) {
  catalogue::Catalogue c(100);
  for (std::size_t k = 1; k < milestones; ++k) c.append(static_cast<long>(k) * 100, random_table(50 + k, seed + k));
  return c;
}

void flip_byte(const fs::path& p, std::size_t offset_from_end) {
  std::string text = read_file(p);
  char& c = text[text.size() - offset_from_end];
  c = c == '1' ? '2' : '1';
  write_file_atomic(p, text);
}

}  // namespace

TEST(QTableFile, EmptyTableIsHeaderOnly) {
  const std::string text = serialize_qtable(rl::QTable{});
  EXPECT_NE(text.find("entries 0\n"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(parse_qtable(text, "mem").nonzero_count(), 0u);
}

TEST(QTableFile, SameTableSerializesToSameBytes) {
  rl::QTable q;
  q.set_value({1, 2, 3, 4}, {0, 0}, 0.1);
  q.set_value({0, 0, 0, 0}, {-2, -1}, -1.0 / 3.0);
  q.set_value({3, 7, 7, 4}, {2, 1}, 250.0);
  q.set_trace_at(5, 0.9);  // traces never reach the file
  const std::string a = serialize_qtable(q);
  const std::string b = serialize_qtable(q.snapshot());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("0.9\n"), std::string::npos);
}

TEST(QTableFile, RecordsSortedByStateThenAction) {
  const auto q = random_table(200, 4);
  const std::string text = serialize_qtable(q);
  std::istringstream in(text);
  std::string line;
  for (int i = 0; i < 4; ++i) std::getline(in, line);
  long prev = -1;
  for (int r = 0; r < 200; ++r) {
    std::getline(in, line);
    std::istringstream ls(line);
    rl::StateKey s;
    long a;
    ls >> s.speed >> s.direction >> s.rotation >> s.distance >> a;
    const long key = static_cast<long>(rl::state_ordinal(s, q.shape())) * 15 + a;
    EXPECT_GT(key, prev);
    prev = key;
  }
}

TEST_F(TempDir, TenThousandEntriesRoundTripExactly) {
  const auto q = random_table(10000, 2024);
  ASSERT_EQ(q.nonzero_count(), 10000u);
  const fs::path p = dir_ / "big.qt";
  write_qtable(q, p);
  const auto back = read_qtable(p, rl::BucketShape{});
  for (std::size_t i = 0; i < q.size(); ++i) ASSERT_EQ(q.value_at(i), back.value_at(i)) << "entry " << i;
  EXPECT_EQ(serialize_qtable(back), read_file(p));
  EXPECT_FALSE(fs::exists(dir_ / "big.qt.tmp"));
}

TEST(QTableFile, VersionChecksumAndTruncationAreDistinctErrors) {
  rl::QTable q;
  q.set_value_at(10, 1.5);
  q.set_value_at(20, -2.5);
  const std::string good = serialize_qtable(q);

  std::string future = good;
  future.replace(future.find(" 1\n"), 3, " 9\n");
  EXPECT_THROW(parse_qtable(future, "v"), VersionMismatch);

  std::string tampered = good;
  tampered.replace(tampered.find("1.5"), 3, "1.6");
  EXPECT_THROW(parse_qtable(tampered, "c"), ChecksumMismatch);

  const std::string cut = good.substr(0, good.find("checksum"));
  EXPECT_THROW(parse_qtable(cut, "t"), TruncatedFile);
  EXPECT_THROW(parse_qtable(good.substr(0, good.size() - 4), "t"), TruncatedFile);
  EXPECT_THROW(parse_qtable("", "t"), TruncatedFile);
  std::string short_body = good;
  short_body.replace(short_body.find("entries 2"), 9, "entries 3");
  EXPECT_THROW(parse_qtable(short_body, "t"), TruncatedFile);

  EXPECT_THROW(parse_qtable("garbage\n", "g"), FormatError);
  try {
    parse_qtable(tampered, "named.qt");
    FAIL();
  } catch (const ChecksumMismatch& e) {
    EXPECT_EQ(e.path(), "named.qt");
  }
}

TEST(QTableFile, RejectsMismatchedStateSpace) {
  rl::BucketShape other;
  other.distance = 6;
  rl::QTable q(other);
  q.set_value_at(0, 1.0);
  const std::string text = serialize_qtable(q);
  EXPECT_THROW(parse_qtable(text, "s", rl::BucketShape{}), ShapeMismatch);
  EXPECT_TRUE(parse_qtable(text, "s", other) == q);
  std::string grid = serialize_qtable(rl::QTable{});
  grid.replace(grid.find("actions 5 3"), 11, "actions 7 3");
  EXPECT_THROW(parse_qtable(grid, "a"), ShapeMismatch);
}

TEST_F(TempDir, CatalogueOfNinetyRoundTrips) {
  const auto c = random_catalogue(90, 7);
  save_catalogue(c, dir_ / "cat");
  const auto back = load_catalogue(dir_ / "cat");
  ASSERT_EQ(back.size(), 90u);
  EXPECT_TRUE(back == c);
  EXPECT_EQ(back.interval(), 100);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.at(i).deaths_at_capture, c.at(i).deaths_at_capture);
    EXPECT_EQ(serialize_qtable(*back.at(i).snapshot), serialize_qtable(*c.at(i).snapshot));
  }
  // saving the reloaded catalogue reproduces every byte
  save_catalogue(back, dir_ / "again");
  for (const auto& entry : fs::directory_iterator(dir_ / "cat"))
    EXPECT_EQ(read_file(entry.path()), read_file(dir_ / "again" / entry.path().filename())) << entry.path();
  for (const auto& entry : fs::recursive_directory_iterator(dir_))
    EXPECT_NE(entry.path().extension(), ".tmp");
}

TEST_F(TempDir, EmptyDirectoryIsAnErrorNotAnEmptyCatalogue) {
  EXPECT_THROW(load_catalogue(dir_), MissingFile);
  EXPECT_THROW(load_catalogue(dir_ / "does_not_exist"), MissingFile);
}

TEST_F(TempDir, CorruptMilestoneNamesTheFile) {
  save_catalogue(random_catalogue(4, 1), dir_);
  const fs::path victim = dir_ / milestone_file_name(2);
  flip_byte(victim, 30);
  try {
    load_catalogue(dir_);
    FAIL() << "expected a checksum error";
  } catch (const ChecksumMismatch& e) {
    EXPECT_EQ(e.path(), victim.string());
    EXPECT_NE(std::string(e.what()).find("milestone_2.qt"), std::string::npos);
  }
}

TEST_F(TempDir, MissingMilestoneFile) {
  save_catalogue(random_catalogue(3, 2), dir_);
  fs::remove(dir_ / milestone_file_name(1));
  EXPECT_THROW(load_catalogue(dir_), MissingFile);
}

TEST_F(TempDir, NonContiguousIndices) {
  save_catalogue(random_catalogue(3, 3), dir_);
  std::string manifest = read_file(dir_ / kManifestName);
  manifest.replace(manifest.find("\n2\t"), 3, "\n5\t");
  write_file_atomic(dir_ / kManifestName, manifest);
  EXPECT_THROW(load_catalogue(dir_), NonContiguousIndices);
}

TEST_F(TempDir, ManifestVersionAndTruncation) {
  save_catalogue(random_catalogue(3, 4), dir_);
  const std::string manifest = read_file(dir_ / kManifestName);
  std::string future = manifest;
  future.replace(future.find("sec-catalogue\t1"), 15, "sec-catalogue\t7");
  write_file_atomic(dir_ / kManifestName, future);
  EXPECT_THROW(load_catalogue(dir_), VersionMismatch);
  write_file_atomic(dir_ / kManifestName, manifest.substr(0, manifest.rfind("2\t")));
  EXPECT_THROW(load_catalogue(dir_), TruncatedFile);
}

TEST_F(TempDir, AtomicWriteReplacesWholeFile) {
  const fs::path p = dir_ / "f.txt";
  write_file_atomic(p, "first version, longer\n");
  write_file_atomic(p, "second\n");
  EXPECT_EQ(read_file(p), "second\n");
  EXPECT_FALSE(fs::exists(dir_ / "f.txt.tmp"));
  EXPECT_THROW(write_file_atomic(dir_ / "no" / "such" / "dir.txt", "x"), std::runtime_error);
}

TEST(Formatting, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10000; ++i) {
    double v;
    const std::uint64_t bits = rng();
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    ASSERT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(parse_hex64("af63dc4c8601ec8c"), fnv1a64("a"));
}
