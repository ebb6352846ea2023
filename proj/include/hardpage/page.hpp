#pragma once

// 4096-byte logical page: a 64-byte header followed by a 4032-byte slot
// area. The whole image, header included, is ECC-protected when persisted.
//
// Header layout (little-endian, offsets fixed; golden-file tested):
//
//   offset 0   magic           4 bytes  "HPG1"
//   offset 4   format_version  u16      currently 1
//   offset 6   table_id        u32
//   offset 10  page_index      u32
//   offset 14  slot_size       u16      bytes per slot, occupancy byte included
//   offset 16  slot_count      u16      floor(4032 / slot_size)
//   offset 18  record_count    u16      occupied slots
//   offset 20  reserved        zero through byte 63
//
// Each slot starts with one occupancy byte (0x00 free, 0x5A occupied)
// followed by the fixed-width row encoding. Bytes past
// slot_count * slot_size are zero.

#include <array>
#include <cstdint>
#include <cstring>
#include <span>

#include "hardpage/detail/bytes.hpp"

namespace hardpage {

inline constexpr std::size_t kPageSize = 4096;
inline constexpr std::size_t kPageHeaderSize = 64;
inline constexpr std::size_t kSlotAreaSize = kPageSize - kPageHeaderSize;
inline constexpr std::array<std::uint8_t, 4> kPageMagic = {'H', 'P', 'G', '1'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint8_t kSlotFree = 0x00;
inline constexpr std::uint8_t kSlotOccupied = 0x5A;

struct PageId {
  std::uint32_t table_id = 0;
  std::uint32_t page_index = 0;

  friend bool operator==(const PageId&, const PageId&) = default;
};

struct PageHeader {
  std::uint16_t format_version = kFormatVersion;
  std::uint32_t table_id = 0;
  std::uint32_t page_index = 0;
  std::uint16_t slot_size = 0;
  std::uint16_t slot_count = 0;
  std::uint16_t record_count = 0;
};

// Non-owning view over one page worth of bytes (a cache frame or a
// PageImage). Field accessors go through the little-endian helpers so the
// format is identical on every host.
class PageView {
public:
  explicit PageView(std::uint8_t* bytes) : p_(bytes) {}

  std::uint8_t* data() { return p_; }
  const std::uint8_t* data() const { return p_; }

  bool magic_ok() const { return std::memcmp(p_, kPageMagic.data(), 4) == 0; }

  PageHeader header() const {
    PageHeader h;
    h.format_version = detail::load_u16(p_ + 4);
    h.table_id = detail::load_u32(p_ + 6);
    h.page_index = detail::load_u32(p_ + 10);
    h.slot_size = detail::load_u16(p_ + 14);
    h.slot_count = detail::load_u16(p_ + 16);
    h.record_count = detail::load_u16(p_ + 18);
    return h;
  }

  void format(const PageHeader& h) {
    std::memset(p_, 0, kPageSize);
    std::memcpy(p_, kPageMagic.data(), 4);
    detail::store_u16(p_ + 4, h.format_version);
    detail::store_u32(p_ + 6, h.table_id);
    detail::store_u32(p_ + 10, h.page_index);
    detail::store_u16(p_ + 14, h.slot_size);
    detail::store_u16(p_ + 16, h.slot_count);
    detail::store_u16(p_ + 18, h.record_count);
  }

  void set_record_count(std::uint16_t n) { detail::store_u16(p_ + 18, n); }

  static std::size_t slot_offset(std::uint16_t slot, std::uint16_t slot_size) {
    return kPageHeaderSize + static_cast<std::size_t>(slot) * slot_size;
  }

  std::span<std::uint8_t> slot(std::uint16_t index, std::uint16_t slot_size) {
    return {p_ + slot_offset(index, slot_size), slot_size};
  }
  std::span<const std::uint8_t> slot(std::uint16_t index, std::uint16_t slot_size) const {
    return {p_ + slot_offset(index, slot_size), slot_size};
  }

  std::uint8_t occupancy(std::uint16_t index, std::uint16_t slot_size) const {
    return p_[slot_offset(index, slot_size)];
  }
  void set_occupancy(std::uint16_t index, std::uint16_t slot_size, std::uint8_t v) {
    p_[slot_offset(index, slot_size)] = v;
  }

private:
  std::uint8_t* p_;
};

class PageImage {
public:
  PageImage() { bytes_.fill(0); }

  std::uint8_t* data() { return bytes_.data(); }
  const std::uint8_t* data() const { return bytes_.data(); }
  std::span<std::uint8_t, kPageSize> bytes() { return bytes_; }
  std::span<const std::uint8_t, kPageSize> bytes() const { return bytes_; }

  PageView view() { return PageView(bytes_.data()); }
  PageHeader header() const { return PageView(const_cast<std::uint8_t*>(bytes_.data())).header(); }

  friend bool operator==(const PageImage& a, const PageImage& b) { return a.bytes_ == b.bytes_; }

private:
  std::array<std::uint8_t, kPageSize> bytes_;
};

inline std::uint16_t slots_per_page(std::uint16_t slot_size) {
  return static_cast<std::uint16_t>(kSlotAreaSize / slot_size);
}

} // namespace hardpage
