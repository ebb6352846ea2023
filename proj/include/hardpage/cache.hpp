#pragma once

// Global page cache: pinning, clock (second-chance) eviction over unpinned
// frames, dirty write-back, and a bounded overflow pool serving fetches
// that arrive while every frame is pinned.
//
// One mutex guards the whole structure. The only operation that releases
// it mid-flight is eviction write-back: the victim's key is parked in
// writing_back_ while its bytes are flushed, so fetches of other keys
// proceed and fetches of the victim wait for the flush to land. Frames are
// drawn from a fixed BlockPool at construction; the steady state allocates
// nothing beyond the overflow pool's preallocated blocks.

#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hardpage/block_pool.hpp"
#include "hardpage/errors.hpp"
#include "hardpage/page.hpp"
#include "hardpage/page_store.hpp"

namespace hardpage {

enum class CacheKeyKind : std::uint8_t { Catalog = 0, TablePage = 1 };

// Catalog keys ignore table_id/page_index; the factory zeroes them so
// equal keys also hash equal.
struct CacheKey {
  CacheKeyKind kind = CacheKeyKind::Catalog;
  std::uint32_t table_id = 0;
  std::uint32_t page_index = 0;

  static CacheKey catalog() { return CacheKey{CacheKeyKind::Catalog, 0, 0}; }
  static CacheKey table_page(std::uint32_t table_id, std::uint32_t page_index) {
    return CacheKey{CacheKeyKind::TablePage, table_id, page_index};
  }

  friend bool operator==(const CacheKey& a, const CacheKey& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == CacheKeyKind::Catalog) return true;
    return a.table_id == b.table_id && a.page_index == b.page_index;
  }
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const {
    std::uint64_t x = static_cast<std::uint64_t>(k.kind);
    if (k.kind == CacheKeyKind::TablePage) {
      x ^= (static_cast<std::uint64_t>(k.table_id) << 8) ^
           (static_cast<std::uint64_t>(k.page_index) << 40);
    }
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return static_cast<std::size_t>(x ^ (x >> 31));
  }
};

// Storage access seam. The cache calls load/store with whole decoded page
// images; tests substitute an in-memory map, production uses StorePageIo.
// load returns the ECC report so uncorrectable slot-area words stay
// attached to the cached frame for per-slot damage handling upstream.
class PageIo {
 public:
  virtual ~PageIo() = default;
  virtual ecc::BlockReport load(const CacheKey& key, std::span<std::uint8_t> frame) = 0;
  virtual void store(const CacheKey& key, std::span<const std::uint8_t> frame) = 0;
};

class StorePageIo : public PageIo {
 public:
  explicit StorePageIo(std::filesystem::path root) : root_(std::move(root)) {}

  ecc::BlockReport load(const CacheKey& key, std::span<std::uint8_t> frame) override {
    PageImage image;
    ecc::BlockReport report;
    if (key.kind == CacheKeyKind::Catalog) {
      report = read_image_file(catalog_path(root_), image);
      if (image.header().table_id != kCatalogTableId) {
        throw Error(Errc::PageMismatch, catalog_path(root_).string() + " is not a catalog page");
      }
    } else {
      ReadPageResult r = read_page(root_, PageId{key.table_id, key.page_index});
      image = r.image;
      report = r.report;
    }
    std::memcpy(frame.data(), image.bytes().data(), kPageSize);
    return report;
  }

  void store(const CacheKey& key, std::span<const std::uint8_t> frame) override {
    PageImage image;
    std::memcpy(image.bytes().data(), frame.data(), kPageSize);
    if (key.kind == CacheKeyKind::Catalog) {
      write_image_file(catalog_path(root_), image);
    } else {
      write_page(root_, PageId{key.table_id, key.page_index}, image);
    }
  }

 private:
  std::filesystem::path root_;
};

struct CacheConfig {
  std::size_t capacity = 64;
  std::size_t overflow_capacity = 8;
};

struct CacheStats {
  std::size_t capacity = 0;
  std::size_t resident = 0;
  std::size_t pinned = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::size_t overflow_peak = 0;
};

class PageCache;

// Move-only pin guard. Destruction unpins; mark_dirty() makes the unpin
// carry the dirty flag.
class PinnedPage {
 public:
  PinnedPage() = default;
  PinnedPage(PageCache* cache, CacheKey key, std::span<std::uint8_t> bytes,
             const std::vector<std::uint16_t>* damage)
      : cache_(cache), key_(key), bytes_(bytes), damage_(damage) {}
  PinnedPage(PinnedPage&& other) noexcept { *this = std::move(other); }
  PinnedPage& operator=(PinnedPage&& other) noexcept {
    release_quiet();
    cache_ = other.cache_;
    key_ = other.key_;
    bytes_ = other.bytes_;
    damage_ = other.damage_;
    dirty_ = other.dirty_;
    other.cache_ = nullptr;
    return *this;
  }
  PinnedPage(const PinnedPage&) = delete;
  PinnedPage& operator=(const PinnedPage&) = delete;

  // Unpin failures (write-back of a retiring overflow entry) propagate from
  // an explicit release() but not from the destructor.
  ~PinnedPage() { release_quiet(); }

  std::span<std::uint8_t> bytes() { return bytes_; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }
  PageView view() { return PageView(bytes_.data()); }
  const CacheKey& key() const { return key_; }
  void mark_dirty() { dirty_ = true; }
  bool valid() const { return cache_ != nullptr; }

  // Word indices the ECC decode flagged uncorrectable when this frame was
  // loaded; empty for clean and freshly created pages. Valid while pinned.
  std::span<const std::uint16_t> damaged_words() const {
    static const std::vector<std::uint16_t> kNone;
    return damage_ != nullptr ? *damage_ : kNone;
  }

  void release();

 private:
  void release_quiet() noexcept {
    try {
      release();
    } catch (...) {
    }
  }

  PageCache* cache_ = nullptr;
  CacheKey key_{};
  std::span<std::uint8_t> bytes_{};
  const std::vector<std::uint16_t>* damage_ = nullptr;
  bool dirty_ = false;
};

class PageCache {
 public:
  PageCache(PageIo& io, const CacheConfig& config = {})
      : io_(io),
        capacity_(config.capacity),
        frame_pool_(std::max<std::size_t>(config.capacity, 1), kPageSize),
        overflow_pool_(std::max<std::size_t>(config.overflow_capacity, 1), kPageSize),
        overflow_capacity_(config.overflow_capacity),
        slots_(config.capacity) {
    if (capacity_ == 0) throw Error(Errc::InvalidPoolConfig, "cache capacity must be >= 1");
    for (auto& s : slots_) {
      s.handle = frame_pool_.alloc();
      s.frame = frame_pool_.block(s.handle);
    }
  }

  PageCache(const PageCache&) = delete;
  PageCache& operator=(const PageCache&) = delete;

  // Returns the page pinned. Hit: pin count up, reference bit set. Miss:
  // loaded into a free frame, else into a frame freed by clock eviction,
  // else (everything pinned) into an overflow buffer.
  PinnedPage fetch(const CacheKey& key) { return fetch_impl(key, nullptr); }

  // Pins a frame for a page that does not exist on storage yet. The frame
  // starts as the given image (zeroed when absent) and is born dirty, so
  // the page reaches disk at write-back even if never touched again.
  PinnedPage fetch_new(const CacheKey& key, const PageImage* initial = nullptr) {
    static const PageImage kZero{};
    return fetch_impl(key, initial != nullptr ? initial : &kZero);
  }

  void unpin(const CacheKey& key, bool dirty) {
    std::unique_lock<std::mutex> lock(mutex_);
    if (auto it = resident_.find(key); it != resident_.end()) {
      Slot& s = slots_[it->second];
      if (s.pins == 0) throw Error(Errc::PinUnderflow, "unpin of unpinned page");
      s.pins -= 1;
      s.dirty = s.dirty || dirty;
      return;
    }
    if (auto it = overflow_.find(key); it != overflow_.end()) {
      OverflowEntry& e = it->second;
      if (e.pins == 0) throw Error(Errc::PinUnderflow, "unpin of unpinned page");
      e.pins -= 1;
      e.dirty = e.dirty || dirty;
      if (e.pins == 0) {
        if (e.dirty) io_.store(key, overflow_pool_.block(e.handle));
        overflow_pool_.release(e.handle);
        overflow_.erase(it);
        cv_.notify_all();
      }
      return;
    }
    throw Error(Errc::PinUnderflow, "unpin of uncached page");
  }

  // Writes every dirty entry back and clears its dirty flag; entries stay
  // resident. Returns the number of pages written.
  std::size_t flush_all() {
    std::unique_lock<std::mutex> lock(mutex_);
    std::size_t written = 0;
    for (Slot& s : slots_) {
      if (s.used && s.dirty) {
        io_.store(s.key, s.frame);
        s.dirty = false;
        written += 1;
      }
    }
    for (auto& [key, e] : overflow_) {
      if (e.dirty) {
        io_.store(key, overflow_pool_.block(e.handle));
        e.dirty = false;
        written += 1;
      }
    }
    return written;
  }

  // Discards every resident page of the table without write-back. The
  // caller must hold no pins on them (enforced).
  void invalidate_table(std::uint32_t table_id) {
    std::unique_lock<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      Slot& s = slots_[i];
      if (!s.used || s.key.kind != CacheKeyKind::TablePage || s.key.table_id != table_id) continue;
      if (s.pins > 0) {
        throw Error(Errc::StorageError, "invalidate of pinned page t" + std::to_string(table_id) +
                                            "/p" + std::to_string(s.key.page_index));
      }
      resident_.erase(s.key);
      s.used = false;
      s.dirty = false;
      s.ref = false;
    }
    for (const auto& [key, e] : overflow_) {
      if (key.kind == CacheKeyKind::TablePage && key.table_id == table_id) {
        throw Error(Errc::StorageError, "invalidate of pinned page t" + std::to_string(table_id) +
                                            "/p" + std::to_string(key.page_index));
      }
    }
  }

  // State probe for tests; does not touch reference bits or counters.
  bool resident(const CacheKey& key) const {
    std::unique_lock<std::mutex> lock(mutex_);
    return resident_.contains(key);
  }

  CacheStats stats() const {
    std::unique_lock<std::mutex> lock(mutex_);
    CacheStats st;
    st.capacity = capacity_;
    st.hits = hits_;
    st.misses = misses_;
    st.evictions = evictions_;
    st.overflow_peak = overflow_peak_;
    for (const Slot& s : slots_) {
      if (s.used) st.resident += 1;
      if (s.used && s.pins > 0) st.pinned += 1;
    }
    st.pinned += overflow_.size();
    return st;
  }

 private:
  friend class PinnedPage;

  struct Slot {
    BlockHandle handle{};
    std::span<std::uint8_t> frame{};
    bool used = false;
    CacheKey key{};
    std::uint32_t pins = 0;
    bool ref = false;
    bool dirty = false;
    std::vector<std::uint16_t> damage;
  };

  struct OverflowEntry {
    BlockHandle handle{};
    std::uint32_t pins = 0;
    bool dirty = false;
    std::vector<std::uint16_t> damage;
  };

  PinnedPage fetch_impl(const CacheKey& key, const PageImage* initial) {
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
      if (writing_back_.contains(key)) {
        cv_.wait(lock);
        continue;
      }
      if (auto it = resident_.find(key); it != resident_.end()) {
        if (initial != nullptr) {
          throw Error(Errc::StorageError, "fetch_new of an already cached page");
        }
        Slot& s = slots_[it->second];
        s.pins += 1;
        s.ref = true;
        hits_ += 1;
        return PinnedPage(this, key, s.frame, &s.damage);
      }
      if (auto it = overflow_.find(key); it != overflow_.end()) {
        if (initial != nullptr) {
          throw Error(Errc::StorageError, "fetch_new of an already cached page");
        }
        OverflowEntry& e = it->second;
        e.pins += 1;
        hits_ += 1;
        return PinnedPage(this, key, overflow_pool_.block(e.handle), &e.damage);
      }
      break;
    }
    misses_ += 1;

    std::size_t slot_index = capacity_;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!slots_[i].used) {
        slot_index = i;
        break;
      }
    }
    if (slot_index == capacity_) {
      std::size_t unpinned = 0;
      for (const Slot& s : slots_) {
        if (s.pins == 0) unpinned += 1;
      }
      if (unpinned == 0) return fetch_overflow(lock, key, initial);
      slot_index = evict_one(lock, key);
    }

    Slot& s = slots_[slot_index];
    s.used = true;
    s.key = key;
    s.pins = 1;
    s.ref = true;
    s.dirty = initial != nullptr;
    s.damage.clear();
    if (initial != nullptr) {
      std::memcpy(s.frame.data(), initial->bytes().data(), kPageSize);
    } else {
      try {
        ecc::BlockReport report = io_.load(key, s.frame);
        s.damage = std::move(report.uncorrectable_words);
      } catch (...) {
        s.used = false;
        s.pins = 0;
        s.dirty = false;
        s.ref = false;
        throw;
      }
    }
    resident_.emplace(key, slot_index);
    return PinnedPage(this, key, s.frame, &s.damage);
  }

  // Clock sweep: skip pinned entries, give referenced entries a second
  // chance, take the first unpinned entry with a clear bit. The hand ends
  // just past the victim. At least one unpinned entry exists (checked by
  // the caller), so the sweep terminates within two passes.
  //
  // A dirty victim is flushed with the mutex released. Both the victim key
  // and the incoming key are parked in writing_back_ for that window:
  // fetches of the victim must not reload it before the store lands, and
  // fetches of the incoming key must not load it into a second frame.
  std::size_t evict_one(std::unique_lock<std::mutex>& lock, const CacheKey& incoming) {
    for (;;) {
      Slot& s = slots_[hand_];
      std::size_t here = hand_;
      hand_ = (hand_ + 1) % capacity_;
      if (!s.used || s.pins > 0) continue;
      if (s.ref) {
        s.ref = false;
        continue;
      }
      CacheKey victim_key = s.key;
      bool victim_dirty = s.dirty;
      resident_.erase(victim_key);
      s.used = true; // claimed for the incoming key, invisible until mapped
      s.key = incoming;
      s.pins = 1;
      s.ref = false;
      s.dirty = false;
      evictions_ += 1;
      if (victim_dirty) {
        writing_back_.insert(victim_key);
        writing_back_.insert(incoming);
        lock.unlock();
        try {
          io_.store(victim_key, s.frame);
        } catch (...) {
          // Put the victim back untouched; its dirty bytes are still in the
          // frame and must not be dropped on a failed write.
          lock.lock();
          writing_back_.erase(victim_key);
          writing_back_.erase(incoming);
          s.key = victim_key;
          s.pins = 0;
          s.ref = false;
          s.dirty = true;
          resident_.emplace(victim_key, here);
          evictions_ -= 1;
          cv_.notify_all();
          throw;
        }
        lock.lock();
        writing_back_.erase(victim_key);
        writing_back_.erase(incoming);
        cv_.notify_all();
      }
      return here;
    }
  }

  PinnedPage fetch_overflow(std::unique_lock<std::mutex>&, const CacheKey& key,
                            const PageImage* initial) {
    if (overflow_.size() >= overflow_capacity_) {
      throw Error(Errc::CacheSaturated, "all frames pinned and overflow pool exhausted");
    }
    std::optional<BlockHandle> handle = overflow_pool_.try_alloc();
    if (!handle) {
      throw Error(Errc::CacheSaturated, "all frames pinned and overflow pool exhausted");
    }
    std::span<std::uint8_t> buf = overflow_pool_.block(*handle);
    OverflowEntry e;
    e.handle = *handle;
    e.pins = 1;
    e.dirty = initial != nullptr;
    if (initial != nullptr) {
      std::memcpy(buf.data(), initial->bytes().data(), kPageSize);
    } else {
      try {
        ecc::BlockReport report = io_.load(key, buf);
        e.damage = std::move(report.uncorrectable_words);
      } catch (...) {
        overflow_pool_.release(*handle);
        throw;
      }
    }
    auto [it, inserted] = overflow_.emplace(key, std::move(e));
    overflow_peak_ = std::max(overflow_peak_, overflow_.size());
    return PinnedPage(this, key, buf, &it->second.damage);
  }

  PageIo& io_;
  std::size_t capacity_;
  BlockPool frame_pool_;
  BlockPool overflow_pool_;
  std::size_t overflow_capacity_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Slot> slots_;
  std::unordered_map<CacheKey, std::size_t, CacheKeyHash> resident_;
  std::unordered_map<CacheKey, OverflowEntry, CacheKeyHash> overflow_;
  std::unordered_set<CacheKey, CacheKeyHash> writing_back_;
  std::size_t hand_ = 0;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t evictions_ = 0;
  std::size_t overflow_peak_ = 0;
};

inline void PinnedPage::release() {
  if (cache_ == nullptr) return;
  PageCache* cache = cache_;
  cache_ = nullptr;
  cache->unpin(key_, dirty_);
}

} // namespace hardpage
