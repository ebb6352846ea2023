#pragma once

// Extended-Hamming (72,64) SECDED codec.
//
// Each 64-bit data word is protected by 7 Hamming parity bits plus one
// overall parity bit, stored together as one check byte. Layout follows the
// classical positional scheme:
//
//   - codeword positions 1..71 form a shortened Hamming(71,64) code;
//   - parity bit j sits at position 2^j (1, 2, 4, 8, 16, 32, 64) and is
//     check-byte bit j;
//   - data bits fill the remaining positions in ascending order, starting
//     from the data word's least-significant bit;
//   - check-byte bit 7 is the overall parity bit, chosen so every valid
//     codeword has even parity across all 72 bits.
//
// With this layout the syndrome value directly names the flipped codeword
// position, so single-bit correction is a table lookup. A nonzero syndrome
// with even overall parity can only come from an even number of flips and is
// reported as uncorrectable rather than miscorrected.
//
// Corrected bit positions are reported in storage order: bits 0..63 are the
// data word (LSB first), bits 64..71 are check-byte bits 0..7.
//
// Pages are protected wordwise: a 4096-byte page encodes to 4608 bytes laid
// out as the 512 data words verbatim (little-endian, word i at offset 8*i)
// followed by the 512 check bytes (check byte for word i at offset 4096+i).
// Keeping the check bytes in a trailing region instead of interleaving them
// separates a word from its check bits physically on the medium.

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "hardpage/detail/bytes.hpp"
#include "hardpage/errors.hpp"

namespace hardpage::ecc {

using DataWord = std::uint64_t;

inline constexpr std::size_t kCodewordBits = 72;
inline constexpr std::size_t kBlockDataBytes = 4096;
inline constexpr std::size_t kBlockWordCount = kBlockDataBytes / 8;
inline constexpr std::size_t kBlockCheckBytes = kBlockWordCount;
inline constexpr std::size_t kBlockEncodedBytes = kBlockDataBytes + kBlockCheckBytes;

struct CodeWord {
  DataWord data = 0;
  std::uint8_t check = 0;

  friend bool operator==(const CodeWord&, const CodeWord&) = default;
};

enum class DecodeStatus : std::uint8_t {
  Clean,         // zero syndrome, even overall parity
  Corrected,     // exactly one bit repaired
  Uncorrectable, // double (or other even-weight) error detected
};

struct DecodeOutcome {
  DecodeStatus status = DecodeStatus::Clean;
  std::uint8_t bit_position = 0; // storage bit index, valid when Corrected

  friend bool operator==(const DecodeOutcome&, const DecodeOutcome&) = default;
};

struct DecodeResult {
  DataWord word = 0; // corrected payload; as-read when Uncorrectable
  DecodeOutcome outcome;
};

namespace detail {

// Codeword position (1-based) of each data bit; positions that are powers
// of two are skipped because they hold parity bits.
inline constexpr std::array<std::uint8_t, 64> kDataBitPosition = [] {
  std::array<std::uint8_t, 64> table{};
  int k = 0;
  for (int pos = 1; pos <= 71; ++pos) {
    if ((pos & (pos - 1)) != 0) table[k++] = static_cast<std::uint8_t>(pos);
  }
  return table;
}();

// Parity-group membership masks over the data word: group j covers the data
// bits whose codeword position has bit j set. Parity bit j completes its
// group to even parity.
inline constexpr std::array<std::uint64_t, 7> kGroupMask = [] {
  std::array<std::uint64_t, 7> masks{};
  for (int k = 0; k < 64; ++k) {
    for (int j = 0; j < 7; ++j) {
      if (kDataBitPosition[k] & (1u << j)) masks[j] |= 1ULL << k;
    }
  }
  return masks;
}();

// Syndrome value (= codeword position 1..71) back to storage bit index:
// 0..63 for data bits, 64..70 for parity bits. 0xFF marks positions that
// hold no bit (syndromes only reachable with three or more flips).
inline constexpr std::array<std::uint8_t, 128> kPositionToStorageBit = [] {
  std::array<std::uint8_t, 128> table{};
  for (auto& t : table) t = 0xFF;
  int k = 0;
  for (int pos = 1; pos <= 71; ++pos) {
    if ((pos & (pos - 1)) == 0) {
      int j = std::countr_zero(static_cast<unsigned>(pos));
      table[pos] = static_cast<std::uint8_t>(64 + j);
    } else {
      table[pos] = static_cast<std::uint8_t>(k++);
    }
  }
  return table;
}();

inline constexpr std::uint8_t kOverallParityBit = 71; // check-byte bit 7

inline int parity64(std::uint64_t v) { return std::popcount(v) & 1; }

} // namespace detail

inline CodeWord encode(DataWord word) {
  std::uint8_t check = 0;
  for (int j = 0; j < 7; ++j) {
    check |= static_cast<std::uint8_t>(detail::parity64(word & detail::kGroupMask[j]) << j);
  }
  // Overall parity over all 72 bits must come out even.
  int overall = detail::parity64(word) ^ (std::popcount(static_cast<unsigned>(check)) & 1);
  check |= static_cast<std::uint8_t>(overall << 7);
  return CodeWord{word, check};
}

inline DecodeResult decode(const CodeWord& cw) {
  // Syndrome bit j is the parity of group j over the received bits,
  // parity bit included; it equals recomputed-vs-stored disagreement.
  std::uint8_t syndrome = 0;
  for (int j = 0; j < 7; ++j) {
    int g = detail::parity64(cw.data & detail::kGroupMask[j]) ^ ((cw.check >> j) & 1);
    syndrome |= static_cast<std::uint8_t>(g << j);
  }
  int overall =
      detail::parity64(cw.data) ^ (std::popcount(static_cast<unsigned>(cw.check)) & 1);

  if (syndrome == 0 && overall == 0) {
    return {cw.data, {DecodeStatus::Clean, 0}};
  }
  if (syndrome == 0) {
    // Only the overall parity bit disagrees.
    return {cw.data, {DecodeStatus::Corrected, detail::kOverallParityBit}};
  }
  if (overall == 0) {
    // Nonzero syndrome with even parity: an even number of flips.
    return {cw.data, {DecodeStatus::Uncorrectable, 0}};
  }
  std::uint8_t storage_bit = detail::kPositionToStorageBit[syndrome];
  if (storage_bit == 0xFF) {
    // Syndrome names a position outside the codeword; not a single flip.
    return {cw.data, {DecodeStatus::Uncorrectable, 0}};
  }
  DataWord fixed = cw.data;
  if (storage_bit < 64) fixed ^= 1ULL << storage_bit;
  // Flips in the check byte leave the data intact.
  return {fixed, {DecodeStatus::Corrected, storage_bit}};
}

struct BlockReport {
  std::uint32_t corrected_count = 0;
  std::vector<std::uint16_t> uncorrectable_words; // ascending word indices

  bool clean() const { return corrected_count == 0 && uncorrectable_words.empty(); }
};

inline void encode_block(std::span<const std::uint8_t> plain, std::span<std::uint8_t> out) {
  if (plain.size() != kBlockDataBytes || out.size() != kBlockEncodedBytes) {
    throw Error(Errc::InvalidBlockSize,
                "encode_block needs 4096 in / 4608 out, got " + std::to_string(plain.size()) +
                    " / " + std::to_string(out.size()));
  }
  for (std::size_t i = 0; i < kBlockWordCount; ++i) {
    DataWord w = hardpage::detail::load_u64(plain.data() + 8 * i);
    CodeWord cw = encode(w);
    hardpage::detail::store_u64(out.data() + 8 * i, cw.data);
    out[kBlockDataBytes + i] = cw.check;
  }
}

// Decodes wordwise into out_plain. Uncorrectable words are passed through
// as-read and listed in the report; callers must not trust their bytes.
inline BlockReport decode_block(std::span<const std::uint8_t> enc,
                                std::span<std::uint8_t> out_plain) {
  if (enc.size() != kBlockEncodedBytes || out_plain.size() != kBlockDataBytes) {
    throw Error(Errc::InvalidBlockSize,
                "decode_block needs 4608 in / 4096 out, got " + std::to_string(enc.size()) +
                    " / " + std::to_string(out_plain.size()));
  }
  BlockReport report;
  for (std::size_t i = 0; i < kBlockWordCount; ++i) {
    CodeWord cw{hardpage::detail::load_u64(enc.data() + 8 * i), enc[kBlockDataBytes + i]};
    DecodeResult r = decode(cw);
    switch (r.outcome.status) {
      case DecodeStatus::Clean:
        break;
      case DecodeStatus::Corrected:
        ++report.corrected_count;
        break;
      case DecodeStatus::Uncorrectable:
        report.uncorrectable_words.push_back(static_cast<std::uint16_t>(i));
        break;
    }
    hardpage::detail::store_u64(out_plain.data() + 8 * i, r.word);
  }
  return report;
}

} // namespace hardpage::ecc
