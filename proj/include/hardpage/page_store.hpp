#pragma once

// Persists page images as one ECC-encoded file per page, fragmented across
// a directory tree:
//
//   <root>/t<table_id>/d<page_index / 256>/p<page_index % 256>.pg
//
// Every file is exactly 4608 bytes: the 4096 image bytes followed by the
// 512 check bytes (see ecc.hpp for the exact layout). Page lookup is pure
// path arithmetic; enumeration and placement are delegated to the
// filesystem. The catalog lives at <root>/catalog.pg and each table's
// column layout at <root>/t<id>/schema.pg, in the same encoded format.
//
// Writes are atomic-by-rename: the encoding goes to a sibling .tmp file,
// is synced, then renamed over the target, so a crash leaves either the old
// or the new file. A WriteFaultHook can interrupt the protocol at each step
// for crash testing.
//
// Reads correct single-bit errors in flight but never rewrite the file;
// correction at rest is an explicit scrub pass.

#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "hardpage/ecc.hpp"
#include "hardpage/errors.hpp"
#include "hardpage/page.hpp"

namespace hardpage {

inline constexpr std::uint32_t kDirectoryFanout = 256;
inline constexpr std::uint32_t kCatalogTableId = 0xFFFFFFFFu;
inline constexpr std::uint32_t kSchemaPageIndex = 0xFFFFFFFFu;
inline constexpr std::size_t kPageHeaderWords = kPageHeaderSize / 8;

inline std::filesystem::path page_path(const std::filesystem::path& root, PageId pid) {
  return root / ("t" + std::to_string(pid.table_id)) /
         ("d" + std::to_string(pid.page_index / kDirectoryFanout)) /
         ("p" + std::to_string(pid.page_index % kDirectoryFanout) + ".pg");
}

inline std::filesystem::path catalog_path(const std::filesystem::path& root) {
  return root / "catalog.pg";
}

inline std::filesystem::path table_dir(const std::filesystem::path& root, std::uint32_t table_id) {
  return root / ("t" + std::to_string(table_id));
}

inline std::filesystem::path schema_path(const std::filesystem::path& root,
                                         std::uint32_t table_id) {
  return table_dir(root, table_id) / "schema.pg";
}

enum class WritePoint {
  TempOpened,
  TempHalfWritten,
  TempWritten,
  TempSynced,
  Renamed,
};

// Test seam for the atomic-write protocol. at() is invoked with the file in
// exactly the state the point names; throwing from it abandons the write
// mid-protocol the way a crash would.
class WriteFaultHook {
public:
  virtual ~WriteFaultHook() = default;
  virtual void at(WritePoint point) = 0;
};

namespace detail_io {

class Fd {
public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  void close_now() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

private:
  int fd_;
};

inline void write_all(int fd, const std::uint8_t* p, std::size_t n, const std::string& path) {
  std::size_t done = 0;
  while (done < n) {
    ssize_t w = ::write(fd, p + done, n - done);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::StorageError, "write failed for " + path);
    }
    done += static_cast<std::size_t>(w);
  }
}

} // namespace detail_io

// Writes bytes to path via a sibling .tmp file and rename. The target is
// never observable in a partially written state.
inline void atomic_write_file(const std::filesystem::path& path,
                              std::span<const std::uint8_t> bytes,
                              WriteFaultHook* hook = nullptr) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::StorageError, "cannot create " + path.parent_path().string());

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  detail_io::Fd fd(::open(tmp.c_str(), O_CREAT | O_TRUNC | O_WRONLY, 0644));
  if (fd.get() < 0) throw Error(Errc::StorageError, "cannot open " + tmp.string());
  if (hook) hook->at(WritePoint::TempOpened);

  std::size_t half = bytes.size() / 2;
  detail_io::write_all(fd.get(), bytes.data(), half, tmp.string());
  if (hook) hook->at(WritePoint::TempHalfWritten);
  detail_io::write_all(fd.get(), bytes.data() + half, bytes.size() - half, tmp.string());
  if (hook) hook->at(WritePoint::TempWritten);

  if (::fsync(fd.get()) != 0) throw Error(Errc::StorageError, "fsync failed for " + tmp.string());
  if (hook) hook->at(WritePoint::TempSynced);
  fd.close_now();

  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::StorageError, "rename failed for " + path.string());
  if (hook) hook->at(WritePoint::Renamed);
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::PageNotFound, path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

// Encodes and atomically writes one page image.
inline void write_image_file(const std::filesystem::path& path, const PageImage& image,
                             WriteFaultHook* hook = nullptr) {
  std::vector<std::uint8_t> enc(ecc::kBlockEncodedBytes);
  ecc::encode_block(image.bytes(), enc);
  atomic_write_file(path, enc, hook);
}

// Reads and decodes one page image. Uncorrectable damage inside the header
// region makes the page unusable as a whole; damage confined to the slot
// area is returned in the report for per-slot handling.
inline ecc::BlockReport read_image_file(const std::filesystem::path& path, PageImage& out) {
  std::vector<std::uint8_t> enc = read_file_bytes(path);
  if (enc.size() != ecc::kBlockEncodedBytes) {
    throw Error(Errc::PageCorrupt, path.string() + " has size " + std::to_string(enc.size()) +
                                       ", expected " + std::to_string(ecc::kBlockEncodedBytes));
  }
  ecc::BlockReport report = ecc::decode_block(enc, out.bytes());
  for (std::uint16_t w : report.uncorrectable_words) {
    if (w < kPageHeaderWords) {
      throw Error(Errc::PageCorrupt, path.string() + " header word " + std::to_string(w) +
                                         " is uncorrectable");
    }
  }
  PageHeader h = out.header();
  if (!out.view().magic_ok() || h.format_version != kFormatVersion) {
    throw Error(Errc::PageMismatch, path.string() + " has wrong magic or version");
  }
  return report;
}

struct ReadPageResult {
  PageImage image;
  ecc::BlockReport report;
};

inline void write_page(const std::filesystem::path& root, PageId pid, const PageImage& image,
                       WriteFaultHook* hook = nullptr) {
  write_image_file(page_path(root, pid), image, hook);
}

inline ReadPageResult read_page(const std::filesystem::path& root, PageId pid) {
  ReadPageResult r;
  auto path = page_path(root, pid);
  r.report = read_image_file(path, r.image);
  PageHeader h = r.image.header();
  if (h.table_id != pid.table_id || h.page_index != pid.page_index) {
    throw Error(Errc::PageMismatch, path.string() + " header names t" +
                                        std::to_string(h.table_id) + "/p" +
                                        std::to_string(h.page_index));
  }
  return r;
}

inline void delete_page(const std::filesystem::path& root, PageId pid) {
  auto path = page_path(root, pid);
  std::error_code ec;
  if (!std::filesystem::remove(path, ec) || ec) {
    throw Error(Errc::PageNotFound, path.string());
  }
}

// Reads, corrects, and rewrites one encoded file in place. The rewrite only
// happens when something was corrected and nothing was uncorrectable; a
// file with uncorrectable words is left untouched for forensics.
inline ecc::BlockReport scrub_file(const std::filesystem::path& path) {
  std::vector<std::uint8_t> enc = read_file_bytes(path);
  if (enc.size() != ecc::kBlockEncodedBytes) {
    throw Error(Errc::PageCorrupt, path.string() + " has size " + std::to_string(enc.size()));
  }
  PageImage image;
  ecc::BlockReport report = ecc::decode_block(enc, image.bytes());
  if (!report.uncorrectable_words.empty()) {
    return report;
  }
  if (!image.view().magic_ok() || image.header().format_version != kFormatVersion) {
    throw Error(Errc::PageMismatch, path.string() + " has wrong magic or version");
  }
  if (report.corrected_count > 0) {
    write_image_file(path, image);
  }
  return report;
}

inline ecc::BlockReport scrub_page(const std::filesystem::path& root, PageId pid) {
  auto path = page_path(root, pid);
  ecc::BlockReport report = scrub_file(path);
  if (report.uncorrectable_words.empty()) {
    PageImage image;
    read_image_file(path, image);
    PageHeader h = image.header();
    if (h.table_id != pid.table_id || h.page_index != pid.page_index) {
      throw Error(Errc::PageMismatch, path.string() + " header names t" +
                                          std::to_string(h.table_id) + "/p" +
                                          std::to_string(h.page_index));
    }
  }
  return report;
}

// Lists every encoded page file under root (data pages, schema pages, and
// the catalog) in lexicographic path order.
inline std::vector<std::filesystem::path> list_page_files(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::exists(root)) return files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pg") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
  return files;
}

// Exclusive-use marker for a storage root. The engine holds one for its
// lifetime; offline tools take it so they never race a live engine.
class LockFile {
public:
  explicit LockFile(const std::filesystem::path& root) {
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw Error(Errc::StorageError, "cannot create root " + root.string());
    path_ = root / ".lock";
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      throw Error(Errc::RootLocked, path_.string() + " exists; another process owns this root");
    }
    ::close(fd);
  }

  ~LockFile() { release(); }

  LockFile(LockFile&& other) noexcept : path_(std::move(other.path_)) { other.path_.clear(); }
  LockFile& operator=(LockFile&& other) noexcept {
    if (this != &other) {
      release();
      path_ = std::move(other.path_);
      other.path_.clear();
    }
    return *this;
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

  void release() {
    if (!path_.empty()) {
      std::error_code ec;
      std::filesystem::remove(path_, ec);
      path_.clear();
    }
  }

private:
  std::filesystem::path path_;
};

} // namespace hardpage
