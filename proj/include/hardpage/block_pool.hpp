#pragma once

// Fixed-size block pool over one contiguous region sized at construction.
// Free blocks are chained through their own first 8 bytes (intrusive
// singly-linked list, LIFO), so allocate and release are O(1) head
// operations. A side bitmap of live blocks catches double releases.
//
// Steady state performs no heap allocation: everything the pool hands out
// comes from the region created up front.

#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hardpage/detail/bytes.hpp"
#include "hardpage/errors.hpp"

namespace hardpage {

struct BlockHandle {
  std::uint32_t index = 0;

  friend bool operator==(const BlockHandle&, const BlockHandle&) = default;
};

struct PoolStats {
  std::size_t free = 0;
  std::size_t used = 0;
};

class BlockPool {
public:
  static constexpr std::uint64_t kNoneLink = ~0ULL;
  static constexpr std::size_t kMinBlockSize = 8; // free-list link width

  BlockPool(std::size_t block_count, std::size_t block_size)
      : block_size_(block_size), block_count_(block_count) {
    if (block_count == 0 || block_size < kMinBlockSize) {
      throw Error(Errc::InvalidPoolConfig,
                  "need block_count > 0 and block_size >= 8, got " +
                      std::to_string(block_count) + " x " + std::to_string(block_size));
    }
    storage_.resize(block_count * block_size);
    live_bitmap_.resize((block_count + 63) / 64, 0);
    // Thread the free list through the blocks in ascending index order.
    for (std::size_t i = 0; i < block_count; ++i) {
      std::uint64_t next = (i + 1 < block_count) ? i + 1 : kNoneLink;
      detail::store_u64(block_ptr(i), next);
    }
    free_head_ = 0;
    free_count_ = block_count;
  }

  BlockPool(const BlockPool&) = delete;
  BlockPool& operator=(const BlockPool&) = delete;

  BlockHandle alloc() {
    if (auto h = try_alloc()) return *h;
    throw Error(Errc::PoolExhausted, "no free blocks");
  }

  std::optional<BlockHandle> try_alloc() {
    std::lock_guard lock(mu_);
    if (free_count_ == 0) return std::nullopt;
    std::uint64_t index = free_head_;
    free_head_ = detail::load_u64(block_ptr(index));
    ++link_ops_;
    --free_count_;
    set_live(index, true);
    return BlockHandle{static_cast<std::uint32_t>(index)};
  }

  void release(BlockHandle handle) {
    std::lock_guard lock(mu_);
    if (handle.index >= block_count_) {
      throw Error(Errc::InvalidHandle, "block index " + std::to_string(handle.index) +
                                           " out of range (" + std::to_string(block_count_) + ")");
    }
    if (!is_live(handle.index)) {
      throw Error(Errc::DoubleFree, "block " + std::to_string(handle.index) + " is already free");
    }
    detail::store_u64(block_ptr(handle.index), free_head_);
    ++link_ops_;
    free_head_ = handle.index;
    ++free_count_;
    set_live(handle.index, false);
  }

  PoolStats stats() const {
    std::lock_guard lock(mu_);
    return {free_count_, block_count_ - free_count_};
  }

  // The block's memory; valid between alloc and release of the handle.
  std::span<std::uint8_t> block(BlockHandle handle) {
    return {block_ptr(handle.index), block_size_};
  }

  std::size_t block_size() const { return block_size_; }
  std::size_t block_count() const { return block_count_; }

  // Cumulative count of free-list link reads/writes; each alloc or release
  // touches exactly one link regardless of pool occupancy.
  std::uint64_t link_ops() const {
    std::lock_guard lock(mu_);
    return link_ops_;
  }

private:
  std::uint8_t* block_ptr(std::uint64_t index) { return storage_.data() + index * block_size_; }
  const std::uint8_t* block_ptr(std::uint64_t index) const {
    return storage_.data() + index * block_size_;
  }

  bool is_live(std::uint64_t index) const {
    return (live_bitmap_[index / 64] >> (index % 64)) & 1;
  }
  void set_live(std::uint64_t index, bool live) {
    if (live) {
      live_bitmap_[index / 64] |= 1ULL << (index % 64);
    } else {
      live_bitmap_[index / 64] &= ~(1ULL << (index % 64));
    }
  }

  mutable std::mutex mu_;
  std::size_t block_size_;
  std::size_t block_count_;
  std::vector<std::uint8_t> storage_;
  std::vector<std::uint64_t> live_bitmap_;
  std::uint64_t free_head_ = kNoneLink;
  std::size_t free_count_ = 0;
  std::uint64_t link_ops_ = 0;
};

} // namespace hardpage
