#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "hardpage/detail/rng.hpp"
#include "hardpage/page_store.hpp"
#include "test_util.hpp"

using namespace hardpage;
using hardpage::detail::SplitMix64;
using hardpage::testing::TempDir;

namespace {

PageImage make_image(std::uint32_t table_id, std::uint32_t page_index, std::uint64_t fill_seed) {
  PageImage image;
  PageHeader h;
  h.table_id = table_id;
  h.page_index = page_index;
  h.slot_size = 32;
  h.slot_count = slots_per_page(32);
  h.record_count = 0;
  image.view().format(h);
  SplitMix64 rng(fill_seed);
  for (std::size_t i = kPageHeaderSize; i < kPageSize; ++i) {
    image.data()[i] = static_cast<std::uint8_t>(rng.next());
  }
  return image;
}

void flip_file_bit(const std::filesystem::path& path, std::uint64_t bit) {
  std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
  REQUIRE(f.good());
  f.seekg(static_cast<std::streamoff>(bit / 8));
  char byte = 0;
  f.read(&byte, 1);
  byte = static_cast<char>(byte ^ (1u << (bit % 8)));
  f.seekp(static_cast<std::streamoff>(bit / 8));
  f.write(&byte, 1);
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  return read_file_bytes(path);
}

bool code_is(const Error& e, Errc c) { return e.code() == c; }

#define REQUIRE_ERRC(expr, errc)                                    \
  REQUIRE_THROWS_MATCHES(expr, Error,                               \
                         Catch::Matchers::Predicate<Error>(         \
                             [](const Error& e) { return code_is(e, errc); }))

} // namespace

TEST_CASE("page paths follow the fan-out formula", "[page_store]") {
  std::filesystem::path root = "r";
  CHECK(page_path(root, {2, 259}) == root / "t2" / "d1" / "p3.pg");
  CHECK(page_path(root, {0, 0}) == root / "t0" / "d0" / "p0.pg");
  CHECK(page_path(root, {7, 255}) == root / "t7" / "d0" / "p255.pg");
  CHECK(page_path(root, {7, 256}) == root / "t7" / "d1" / "p0.pg");
}

TEST_CASE("written page files are exactly 4608 bytes", "[page_store]") {
  TempDir dir("ps");
  PageImage image = make_image(1, 0, 7);
  write_page(dir.path(), {1, 0}, image);
  REQUIRE(std::filesystem::file_size(page_path(dir.path(), {1, 0})) == ecc::kBlockEncodedBytes);
}

TEST_CASE("all-zero image writes an all-zero file", "[page_store]") {
  TempDir dir("ps");
  PageImage zero;
  write_page(dir.path(), {3, 1}, zero);
  auto bytes = slurp(page_path(dir.path(), {3, 1}));
  REQUIRE(bytes.size() == ecc::kBlockEncodedBytes);
  for (auto b : bytes) REQUIRE(b == 0);
}

TEST_CASE("write/read round trip preserves arbitrary images", "[page_store]") {
  TempDir dir("ps");
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::uint32_t idx = static_cast<std::uint32_t>(rng.below(1000));
    PageImage image = make_image(5, idx, rng.next());
    write_page(dir.path(), {5, idx}, image);
    auto r = read_page(dir.path(), {5, idx});
    REQUIRE(r.image == image);
    REQUIRE(r.report.corrected_count == 0);
    REQUIRE(r.report.uncorrectable_words.empty());
  }
}

TEST_CASE("single flips anywhere in the file are corrected on read", "[page_store]") {
  TempDir dir("ps");
  PageImage image = make_image(4, 9, 0xABCD);
  write_page(dir.path(), {4, 9}, image);
  auto path = page_path(dir.path(), {4, 9});
  auto pristine = slurp(path);

  SplitMix64 rng(0xF1);
  for (int trial = 0; trial < 60; ++trial) {
    std::uint64_t bit = rng.below(ecc::kBlockEncodedBytes * 8);
    flip_file_bit(path, bit);
    auto r = read_page(dir.path(), {4, 9});
    INFO("bit " << bit);
    REQUIRE(r.image == image);
    REQUIRE(r.report.corrected_count == 1);
    // Reads never rewrite the file.
    auto after = slurp(path);
    REQUIRE(after != pristine);
    flip_file_bit(path, bit); // restore
    REQUIRE(slurp(path) == pristine);
  }
}

TEST_CASE("double flip in one slot-area codeword is reported, not fatal", "[page_store]") {
  TempDir dir("ps");
  PageImage image = make_image(4, 2, 0x77);
  write_page(dir.path(), {4, 2}, image);
  auto path = page_path(dir.path(), {4, 2});

  // Word 100 lies well inside the slot area (header is words 0..7).
  const std::size_t word = 100;
  flip_file_bit(path, word * 64 + 3);
  flip_file_bit(path, word * 64 + 40);
  auto r = read_page(dir.path(), {4, 2});
  REQUIRE(r.report.uncorrectable_words == std::vector<std::uint16_t>{word});
  // All other bytes decode to the original image.
  for (std::size_t i = 0; i < kPageSize; ++i) {
    if (i / 8 == word) continue;
    REQUIRE(r.image.data()[i] == image.data()[i]);
  }
}

TEST_CASE("uncorrectable damage in the header makes the page unreadable", "[page_store]") {
  TempDir dir("ps");
  PageImage image = make_image(4, 3, 0x83);
  write_page(dir.path(), {4, 3}, image);
  auto path = page_path(dir.path(), {4, 3});
  flip_file_bit(path, 2 * 64 + 1); // header word 2
  flip_file_bit(path, 2 * 64 + 9);
  REQUIRE_ERRC(read_page(dir.path(), {4, 3}), Errc::PageCorrupt);
}

TEST_CASE("header mismatch is detected", "[page_store]") {
  TempDir dir("ps");
  PageImage image = make_image(6, 1, 0x9);
  // Write the image under a different id than its header claims.
  write_page(dir.path(), {6, 2}, image);
  REQUIRE_ERRC(read_page(dir.path(), {6, 2}), Errc::PageMismatch);
}

TEST_CASE("missing pages raise PageNotFound", "[page_store]") {
  TempDir dir("ps");
  REQUIRE_ERRC(read_page(dir.path(), {9, 9}), Errc::PageNotFound);
}

TEST_CASE("truncated page files are corrupt", "[page_store]") {
  TempDir dir("ps");
  PageImage image = make_image(1, 1, 1);
  write_page(dir.path(), {1, 1}, image);
  auto path = page_path(dir.path(), {1, 1});
  std::filesystem::resize_file(path, 1000);
  REQUIRE_ERRC(read_page(dir.path(), {1, 1}), Errc::PageCorrupt);
}

TEST_CASE("delete removes the file and keeps siblings", "[page_store]") {
  TempDir dir("ps");
  write_page(dir.path(), {2, 0}, make_image(2, 0, 1));
  write_page(dir.path(), {2, 1}, make_image(2, 1, 2));
  delete_page(dir.path(), {2, 0});
  REQUIRE_ERRC(read_page(dir.path(), {2, 0}), Errc::PageNotFound);
  REQUIRE_ERRC(delete_page(dir.path(), {2, 0}), Errc::PageNotFound);
  REQUIRE(read_page(dir.path(), {2, 1}).image == make_image(2, 1, 2));
}

TEST_CASE("scrub repairs a single flip back to the original encoding", "[page_store]") {
  TempDir dir("ps");
  PageImage image = make_image(8, 0, 0x5C);
  write_page(dir.path(), {8, 0}, image);
  auto path = page_path(dir.path(), {8, 0});
  auto pristine = slurp(path);

  SplitMix64 rng(0x5C12);
  for (int trial = 0; trial < 20; ++trial) {
    flip_file_bit(path, rng.below(ecc::kBlockEncodedBytes * 8));
    auto report = scrub_page(dir.path(), {8, 0});
    REQUIRE(report.corrected_count == 1);
    REQUIRE(report.uncorrectable_words.empty());
    REQUIRE(slurp(path) == pristine);
  }
}

TEST_CASE("scrub of a clean page leaves the bytes alone", "[page_store]") {
  TempDir dir("ps");
  write_page(dir.path(), {8, 1}, make_image(8, 1, 3));
  auto path = page_path(dir.path(), {8, 1});
  auto pristine = slurp(path);
  auto report = scrub_page(dir.path(), {8, 1});
  REQUIRE(report.corrected_count == 0);
  REQUIRE(slurp(path) == pristine);
}

TEST_CASE("scrub leaves uncorrectable files untouched", "[page_store]") {
  TempDir dir("ps");
  write_page(dir.path(), {8, 2}, make_image(8, 2, 4));
  auto path = page_path(dir.path(), {8, 2});
  flip_file_bit(path, 50 * 64 + 0);
  flip_file_bit(path, 50 * 64 + 1);
  auto damaged = slurp(path);
  auto report = scrub_page(dir.path(), {8, 2});
  REQUIRE(report.uncorrectable_words.size() == 1);
  REQUIRE(slurp(path) == damaged);
}

TEST_CASE("257 pages span at least two fan-out directories", "[page_store]") {
  TempDir dir("ps");
  for (std::uint32_t i = 0; i < 257; ++i) {
    write_page(dir.path(), {1, i}, make_image(1, i, i));
  }
  REQUIRE(std::filesystem::exists(dir.path() / "t1" / "d0"));
  REQUIRE(std::filesystem::exists(dir.path() / "t1" / "d1"));
  REQUIRE(std::filesystem::exists(page_path(dir.path(), {1, 256})));
}

TEST_CASE("list_page_files is sorted and complete", "[page_store]") {
  TempDir dir("ps");
  write_page(dir.path(), {1, 0}, make_image(1, 0, 1));
  write_page(dir.path(), {1, 1}, make_image(1, 1, 2));
  write_page(dir.path(), {0, 0}, make_image(0, 0, 3));
  auto files = list_page_files(dir.path());
  REQUIRE(files.size() == 3);
  REQUIRE(std::is_sorted(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.generic_string() < b.generic_string();
  }));
}

TEST_CASE("lock file is exclusive", "[page_store]") {
  TempDir dir("ps");
  {
    LockFile lock(dir.path());
    REQUIRE_ERRC(LockFile(dir.path()), Errc::RootLocked);
  }
  // Released on destruction; can be taken again.
  LockFile again(dir.path());
}

TEST_CASE("page header golden layout", "[page_store]") {
  PageImage image;
  PageHeader h;
  h.table_id = 0x04030201;
  h.page_index = 0x08070605;
  h.slot_size = 0x0A09;
  h.slot_count = 0x0C0B;
  h.record_count = 0x0E0D;
  image.view().format(h);
  const std::uint8_t* p = image.data();
  const std::uint8_t expected[20] = {'H', 'P', 'G', '1', 0x01, 0x00, 0x01, 0x02, 0x03, 0x04,
                                     0x05, 0x06, 0x07, 0x08, 0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x0E};
  REQUIRE(std::memcmp(p, expected, sizeof expected) == 0);
  for (std::size_t i = 20; i < kPageHeaderSize; ++i) REQUIRE(p[i] == 0);
}
