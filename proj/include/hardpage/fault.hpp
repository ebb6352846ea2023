#pragma once

// Fault harness: deterministic bit-flip injection over persisted page
// files, snapshot/verify through the normal read path, and a crash
// simulator for the atomic-rename write protocol.
//
// The harness works on a root that no live engine holds open; flip and
// inject take the root lock themselves, and verify opens its own engine.

#include <cstdint>
#include <fcntl.h>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include "hardpage/detail/rng.hpp"
#include "hardpage/errors.hpp"
#include "hardpage/page_store.hpp"
#include "hardpage/table_engine.hpp"

namespace hardpage {

struct FlipRecord {
  std::string path;
  std::uint64_t bit_offset = 0; // LSB-first within each byte
  int original_bit = 0;         // value before the flip

  friend bool operator==(const FlipRecord&, const FlipRecord&) = default;
};

struct InjectionPlan {
  std::uint64_t seed = 0;
  // Exactly one of the two counts is nonzero: per-file flips visit every
  // page file, a total spreads flips over randomly chosen files.
  std::size_t flips_per_file = 0;
  std::size_t total_flips = 0;
};

// Inverts exactly one bit of one file, in place. Flipping the same offset
// twice restores the file byte-exactly. The caller guarantees no live
// engine holds the enclosing root; inject and revert take the root lock.
inline FlipRecord flip_bit(const std::filesystem::path& path, std::uint64_t bit_offset) {
  int fd = ::open(path.c_str(), O_RDWR);
  if (fd < 0) throw Error(Errc::PageNotFound, path.string());
  struct Closer {
    int fd;
    ~Closer() { ::close(fd); }
  } closer{fd};

  off_t size = ::lseek(fd, 0, SEEK_END);
  if (size < 0 || bit_offset >= static_cast<std::uint64_t>(size) * 8) {
    throw Error(Errc::InvalidOffset, "bit " + std::to_string(bit_offset) + " of " +
                                         std::to_string(size) + "-byte " + path.string());
  }

  off_t byte_at = static_cast<off_t>(bit_offset / 8);
  int bit = static_cast<int>(bit_offset % 8);
  std::uint8_t byte = 0;
  if (::pread(fd, &byte, 1, byte_at) != 1) {
    throw Error(Errc::StorageError, "read failed for " + path.string());
  }
  FlipRecord rec{path.string(), bit_offset, (byte >> bit) & 1};
  byte ^= static_cast<std::uint8_t>(1u << bit);
  if (::pwrite(fd, &byte, 1, byte_at) != 1) {
    throw Error(Errc::StorageError, "write failed for " + path.string());
  }
  return rec;
}

// Applies a seeded plan over every page file under root and returns the
// audit trail. Offsets are distinct within each file, so k requested
// flips are k effective flips.
inline std::vector<FlipRecord> inject(const std::filesystem::path& root,
                                      const InjectionPlan& plan) {
  LockFile lock(root);
  std::vector<std::filesystem::path> files = list_page_files(root);
  if (files.empty()) throw Error(Errc::NothingToInject, "no page files under " + root.string());

  detail::SplitMix64 rng(plan.seed);
  std::vector<FlipRecord> records;
  std::map<std::size_t, std::set<std::uint64_t>> used; // file index -> offsets taken

  auto flip_in_file = [&](std::size_t file_idx) {
    const std::filesystem::path& path = files[file_idx];
    std::uint64_t bits = std::filesystem::file_size(path) * 8;
    std::uint64_t offset = rng.below(bits);
    auto& taken = used[file_idx];
    while (taken.contains(offset)) offset = rng.below(bits);
    taken.insert(offset);
    records.push_back(flip_bit(path, offset));
  };

  if (plan.flips_per_file > 0) {
    for (std::size_t f = 0; f < files.size(); ++f) {
      for (std::size_t k = 0; k < plan.flips_per_file; ++k) flip_in_file(f);
    }
  } else {
    for (std::size_t k = 0; k < plan.total_flips; ++k) {
      flip_in_file(static_cast<std::size_t>(rng.below(files.size())));
    }
  }
  return records;
}

// Re-applies every recorded flip, restoring the tree the records came
// from (flip is an involution).
inline void revert(const std::filesystem::path& root, const std::vector<FlipRecord>& records) {
  LockFile lock(root);
  for (const FlipRecord& rec : records) {
    flip_bit(rec.path, rec.bit_offset);
  }
}

// One audit line per flip: <path>\t<bit_offset>\t<original_bit>\n
inline std::string format_audit_log(const std::vector<FlipRecord>& records) {
  std::string out;
  for (const FlipRecord& rec : records) {
    out += rec.path;
    out += '\t';
    out += std::to_string(rec.bit_offset);
    out += '\t';
    out += std::to_string(rec.original_bit);
    out += '\n';
  }
  return out;
}

inline std::vector<FlipRecord> parse_audit_log(std::string_view text) {
  std::vector<FlipRecord> records;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    std::size_t t1 = line.rfind('\t');
    if (t1 == std::string_view::npos || t1 == 0) {
      throw Error(Errc::StorageError, "malformed audit line: " + std::string(line));
    }
    std::size_t t0 = line.rfind('\t', t1 - 1);
    if (t0 == std::string_view::npos) {
      throw Error(Errc::StorageError, "malformed audit line: " + std::string(line));
    }
    FlipRecord rec;
    rec.path = std::string(line.substr(0, t0));
    rec.bit_offset = std::stoull(std::string(line.substr(t0 + 1, t1 - t0 - 1)));
    rec.original_bit = std::stoi(std::string(line.substr(t1 + 1)));
    records.push_back(rec);
  }
  return records;
}

// ---------------------------------------------------------------------------
// Snapshot and verify

struct Snapshot {
  // table name -> rows captured via scan, in page-major order
  std::map<std::string, std::vector<ScannedRow>> tables;
};

inline Snapshot take_snapshot(TableEngine& engine) {
  Snapshot snap;
  for (const std::string& name : engine.tables()) {
    snap.tables.emplace(name, engine.scan(name));
  }
  return snap;
}

struct VerifyReport {
  std::size_t matched = 0;
  std::size_t mismatched = 0;
  std::size_t unreadable = 0;

  bool clean(std::size_t expected_rows) const {
    return matched == expected_rows && mismatched == 0 && unreadable == 0;
  }
};

// Re-reads every snapshotted row through a fresh engine (cold cache,
// normal read path) and classifies it. Failures count, they never throw.
inline VerifyReport verify(const std::filesystem::path& root, const Snapshot& expected,
                           const CacheConfig& cache = {}) {
  VerifyReport report;
  std::unique_ptr<TableEngine> engine;
  try {
    engine = std::make_unique<TableEngine>(EngineConfig{root, cache});
  } catch (const Error&) {
    for (const auto& [name, rows] : expected.tables) report.unreadable += rows.size();
    return report;
  }
  for (const auto& [name, rows] : expected.tables) {
    for (const ScannedRow& want : rows) {
      try {
        RowValue got = engine->get_row(name, want.rid);
        if (got == want.row) {
          report.matched += 1;
        } else {
          report.mismatched += 1;
        }
      } catch (const Error&) {
        report.unreadable += 1;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Crash simulation

enum class CrashVerdict { OldImage, NewImage, Torn };

struct CrashOutcome {
  WritePoint point;
  CrashVerdict verdict;
};

struct CrashReport {
  std::vector<CrashOutcome> outcomes;
  bool passed = false; // old-or-new at every point, new once renamed
};

namespace detail_fault {

// Not an Error: must never be mistaken for a storage failure by code
// under test.
struct CrashInterrupt {
  WritePoint point;
};

struct CrashHook final : WriteFaultHook {
  WritePoint trip;
  void at(WritePoint point) override {
    if (point == trip) throw CrashInterrupt{point};
  }
};

} // namespace detail_fault

// Interrupts a page overwrite at every protocol point in turn and checks
// that the stored page always reads back as exactly the old or the new
// image. Uses a scratch page id under the given root.
inline CrashReport crash_write_test(const std::filesystem::path& root) {
  LockFile lock(root);
  const PageId pid{42, 0};

  PageHeader header;
  header.table_id = pid.table_id;
  header.page_index = pid.page_index;
  header.slot_size = 16;
  header.slot_count = 4;

  PageImage old_image;
  old_image.view().format(header);
  old_image.bytes()[64] = 0xAA;
  PageImage new_image;
  new_image.view().format(header);
  new_image.bytes()[64] = 0xBB;

  const WritePoint points[] = {WritePoint::TempOpened, WritePoint::TempHalfWritten,
                               WritePoint::TempWritten, WritePoint::TempSynced,
                               WritePoint::Renamed};

  CrashReport report;
  report.passed = true;
  for (WritePoint point : points) {
    write_page(root, pid, old_image);
    detail_fault::CrashHook hook;
    hook.trip = point;
    bool interrupted = false;
    try {
      write_page(root, pid, new_image, &hook);
    } catch (const detail_fault::CrashInterrupt&) {
      interrupted = true;
    }

    CrashVerdict verdict = CrashVerdict::Torn;
    try {
      ReadPageResult r = read_page(root, pid);
      if (r.image == old_image) verdict = CrashVerdict::OldImage;
      else if (r.image == new_image) verdict = CrashVerdict::NewImage;
    } catch (const Error&) {
      verdict = CrashVerdict::Torn;
    }
    report.outcomes.push_back({point, verdict});

    bool ok = interrupted &&
              (point == WritePoint::Renamed ? verdict == CrashVerdict::NewImage
                                            : verdict != CrashVerdict::Torn);
    if (!ok) report.passed = false;

    // Clear any leftover temp file so the next round starts clean.
    std::error_code ec;
    std::filesystem::remove(page_path(root, pid).concat(".tmp"), ec);
  }

  // Control run: no interruption ends with the new image.
  write_page(root, pid, old_image);
  write_page(root, pid, new_image);
  if (!(read_page(root, pid).image == new_image)) report.passed = false;

  return report;
}

} // namespace hardpage
