#pragma once

// Column layout and fixed-width row encoding.
//
// Rows are fixed size so a slot address is pure arithmetic: INT columns are
// 8-byte two's-complement little-endian, STR(n) columns are n bytes
// zero-padded. A slot is one occupancy byte followed by the columns in
// declaration order; slot_size = 1 + sum of column widths.

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hardpage/detail/bytes.hpp"
#include "hardpage/errors.hpp"
#include "hardpage/page.hpp"

namespace hardpage {

inline constexpr std::size_t kMaxIdentifierBytes = 24;
inline constexpr std::size_t kMaxColumns = 16;
inline constexpr std::size_t kMaxStrWidth = 255;

enum class ColumnType : std::uint8_t { Int = 0, Str = 1 };

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Int;
  // STR only. Valid range 1..255; wider than u8 so that an oversize
  // declaration still reaches the slot-size check and reports RowTooLarge
  // before the width-range check rejects it.
  std::uint32_t str_width = 0;

  std::size_t byte_width() const { return type == ColumnType::Int ? 8 : str_width; }

  friend bool operator==(const ColumnDef&, const ColumnDef&) = default;
};

using Value = std::variant<std::int64_t, std::string>;

struct RowValue {
  std::vector<Value> values;

  friend bool operator==(const RowValue&, const RowValue&) = default;
};

struct TableSchema {
  std::string name;
  std::vector<ColumnDef> columns;

  std::uint16_t slot_size() const {
    std::size_t size = 1; // occupancy byte
    for (const auto& c : columns) size += c.byte_width();
    return static_cast<std::uint16_t>(size);
  }

  std::uint16_t slot_count() const { return slots_per_page(slot_size()); }

  const ColumnDef* find_column(const std::string& name) const {
    for (const auto& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  friend bool operator==(const TableSchema&, const TableSchema&) = default;
};

inline bool valid_identifier(const std::string& s) {
  if (s.empty() || s.size() > kMaxIdentifierBytes) return false;
  auto head = [](char c) { return c == '_' || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
  if (!head(s[0])) return false;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!tail(s[i])) return false;
  }
  return true;
}

// Structural checks only; name collisions with existing tables are the
// catalog's concern. The slot-size bound is checked before the per-column
// width range, so an oversize declaration reports RowTooLarge rather than
// the width violation it also contains.
inline void validate_schema(const TableSchema& schema) {
  if (!valid_identifier(schema.name)) {
    throw Error(Errc::SchemaViolation, "bad table name '" + schema.name + "'");
  }
  if (schema.columns.empty() || schema.columns.size() > kMaxColumns) {
    throw Error(Errc::SchemaViolation, "table needs 1.." + std::to_string(kMaxColumns) +
                                           " columns, got " +
                                           std::to_string(schema.columns.size()));
  }
  std::size_t slot_size = 1;
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    const ColumnDef& c = schema.columns[i];
    if (!valid_identifier(c.name)) {
      throw Error(Errc::SchemaViolation, "bad column name '" + c.name + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (schema.columns[j].name == c.name) {
        throw Error(Errc::SchemaViolation, "duplicate column '" + c.name + "'");
      }
    }
    slot_size += c.byte_width();
  }
  if (slot_size > kSlotAreaSize) {
    throw Error(Errc::RowTooLarge, "slot size " + std::to_string(slot_size) + " exceeds " +
                                       std::to_string(kSlotAreaSize));
  }
  for (const ColumnDef& c : schema.columns) {
    if (c.type == ColumnType::Str && (c.str_width == 0 || c.str_width > kMaxStrWidth)) {
      throw Error(Errc::SchemaViolation, "STR width must be 1..255 for '" + c.name + "'");
    }
  }
}

// Throws SchemaViolation when the row does not fit the schema.
inline void validate_row(const TableSchema& schema, const RowValue& row) {
  if (row.values.size() != schema.columns.size()) {
    throw Error(Errc::SchemaViolation, "row has " + std::to_string(row.values.size()) +
                                           " values, table '" + schema.name + "' has " +
                                           std::to_string(schema.columns.size()) + " columns");
  }
  for (std::size_t i = 0; i < row.values.size(); ++i) {
    const ColumnDef& c = schema.columns[i];
    if (c.type == ColumnType::Int) {
      if (!std::holds_alternative<std::int64_t>(row.values[i])) {
        throw Error(Errc::SchemaViolation, "column '" + c.name + "' wants INT");
      }
    } else {
      const auto* s = std::get_if<std::string>(&row.values[i]);
      if (s == nullptr) {
        throw Error(Errc::SchemaViolation, "column '" + c.name + "' wants STR");
      }
      if (s->size() > c.str_width) {
        throw Error(Errc::SchemaViolation, "string of " + std::to_string(s->size()) +
                                               " bytes exceeds STR(" +
                                               std::to_string(c.str_width) + ") for '" + c.name +
                                               "'");
      }
    }
  }
}

// Encodes the row into slot bytes after the occupancy byte. The slot span
// is slot_size bytes; byte 0 is owned by the caller.
inline void encode_row(const TableSchema& schema, const RowValue& row,
                       std::span<std::uint8_t> slot) {
  std::size_t offset = 1;
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    const ColumnDef& c = schema.columns[i];
    if (c.type == ColumnType::Int) {
      detail::store_u64(slot.data() + offset,
                        static_cast<std::uint64_t>(std::get<std::int64_t>(row.values[i])));
    } else {
      const auto& s = std::get<std::string>(row.values[i]);
      std::memcpy(slot.data() + offset, s.data(), s.size());
      std::memset(slot.data() + offset + s.size(), 0, c.str_width - s.size());
    }
    offset += c.byte_width();
  }
}

inline RowValue decode_row(const TableSchema& schema, std::span<const std::uint8_t> slot) {
  RowValue row;
  row.values.reserve(schema.columns.size());
  std::size_t offset = 1;
  for (const ColumnDef& c : schema.columns) {
    if (c.type == ColumnType::Int) {
      row.values.emplace_back(static_cast<std::int64_t>(detail::load_u64(slot.data() + offset)));
    } else {
      std::size_t len = c.str_width;
      while (len > 0 && slot[offset + len - 1] == 0) --len;
      row.values.emplace_back(std::string(reinterpret_cast<const char*>(slot.data() + offset), len));
    }
    offset += c.byte_width();
  }
  return row;
}

// Equality comparison used by WHERE: INT compares numerically, STR compares
// the literal zero-padded to the column's declared width.
inline bool value_matches(const ColumnDef& column, const Value& stored, const Value& literal) {
  if (column.type == ColumnType::Int) {
    const auto* l = std::get_if<std::int64_t>(&literal);
    const auto* s = std::get_if<std::int64_t>(&stored);
    return l != nullptr && s != nullptr && *l == *s;
  }
  const auto* l = std::get_if<std::string>(&literal);
  const auto* s = std::get_if<std::string>(&stored);
  if (l == nullptr || s == nullptr || l->size() > column.str_width) return false;
  // Compare as if both sides were zero-padded to the declared width. Stored
  // values come back from decode_row with trailing zeros already stripped,
  // so stripping the literal the same way gives the padded comparison.
  std::size_t len = l->size();
  while (len > 0 && (*l)[len - 1] == '\0') --len;
  return std::string_view(l->data(), len) == *s;
}

} // namespace hardpage
