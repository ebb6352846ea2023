#pragma once

// Table and catalog layer: schema management, fixed-slot row storage with
// last-insert-hint allocation, arithmetic row lookup, predicate scans, and
// the persisted catalog.
//
// Catalog page (root/catalog.pg, standard page encoding, header table_id
// 0xFFFFFFFF): table descriptor for table_id i at offset 64 + 64*i, 63
// descriptors max. Descriptor layout, fixed by golden test:
//   0..23   table name, zero-padded (byte 0 == 0 marks the slot free)
//   24..27  table_id       u32 LE (equals the descriptor index)
//   28..31  page_count     u32 LE
//   32..39  record_count   u64 LE
//   40..43  hint page      u32 LE
//   44..45  hint slot      u16 LE
//   46      column_count   u8
//   47..63  zero
// Column definitions do not fit in 64 bytes (16 columns with 24-byte
// names), so each table keeps them in its own page at t<id>/schema.pg:
// column j at offset 64 + 32*j as name[24], type u8 (0 INT, 1 STR),
// width u8, 6 zero bytes.
//
// Locking: catalog_lock_ shared for row operations (they only resolve the
// table name), exclusive for create/drop; each table then has its own
// shared_mutex, exclusive for insert/delete, shared for get/scan. Both
// orders acquire the catalog lock first, so the pair cannot deadlock.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "hardpage/cache.hpp"
#include "hardpage/errors.hpp"
#include "hardpage/page.hpp"
#include "hardpage/page_store.hpp"
#include "hardpage/schema.hpp"

namespace hardpage {

inline constexpr std::size_t kCatalogDescriptorSize = 64;
inline constexpr std::uint32_t kMaxTables = 63;
inline constexpr std::size_t kSchemaColumnDescSize = 32;

struct RowId {
  std::uint32_t page_index = 0;
  std::uint16_t slot = 0;

  friend bool operator==(RowId, RowId) = default;
};

// Page-major, slot-minor order.
inline bool row_id_less(RowId a, RowId b) {
  if (a.page_index != b.page_index) return a.page_index < b.page_index;
  return a.slot < b.slot;
}

inline RowId row_id_successor(RowId rid, std::uint16_t slot_count) {
  if (rid.slot + 1u >= slot_count) return RowId{rid.page_index + 1, 0};
  return RowId{rid.page_index, static_cast<std::uint16_t>(rid.slot + 1)};
}

struct TableMeta {
  std::uint32_t table_id = 0;
  TableSchema schema;
  std::uint32_t page_count = 0;
  std::uint64_t record_count = 0;
  RowId last_insert_hint{};
};

struct Predicate {
  std::string column;
  Value literal;
};

struct ScannedRow {
  RowId rid;
  RowValue row;
};

struct EngineConfig {
  std::filesystem::path root;
  CacheConfig cache{};
};

namespace detail_catalog {

inline std::size_t descriptor_offset(std::uint32_t table_id) {
  return kPageHeaderSize + kCatalogDescriptorSize * table_id;
}

inline void encode_descriptor(std::span<std::uint8_t> desc, const TableMeta& meta) {
  std::fill(desc.begin(), desc.end(), std::uint8_t{0});
  std::memcpy(desc.data(), meta.schema.name.data(), meta.schema.name.size());
  detail::store_u32(desc.data() + 24, meta.table_id);
  detail::store_u32(desc.data() + 28, meta.page_count);
  detail::store_u64(desc.data() + 32, meta.record_count);
  detail::store_u32(desc.data() + 40, meta.last_insert_hint.page_index);
  detail::store_u16(desc.data() + 44, meta.last_insert_hint.slot);
  desc[46] = static_cast<std::uint8_t>(meta.schema.columns.size());
}

// Decodes everything but the column list, which lives on the schema page.
// Returns the stored column_count through out-param.
inline TableMeta decode_descriptor(std::span<const std::uint8_t> desc, std::size_t& column_count) {
  TableMeta meta;
  std::size_t name_len = 0;
  while (name_len < kMaxIdentifierBytes && desc[name_len] != 0) ++name_len;
  meta.schema.name.assign(reinterpret_cast<const char*>(desc.data()), name_len);
  meta.table_id = detail::load_u32(desc.data() + 24);
  meta.page_count = detail::load_u32(desc.data() + 28);
  meta.record_count = detail::load_u64(desc.data() + 32);
  meta.last_insert_hint.page_index = detail::load_u32(desc.data() + 40);
  meta.last_insert_hint.slot = detail::load_u16(desc.data() + 44);
  column_count = desc[46];
  return meta;
}

inline PageImage encode_schema_page(std::uint32_t table_id, const TableSchema& schema) {
  PageImage img;
  PageHeader h;
  h.format_version = kFormatVersion;
  h.table_id = table_id;
  h.page_index = kSchemaPageIndex;
  h.slot_size = 0;
  h.slot_count = 0;
  h.record_count = 0;
  img.view().format(h);
  auto bytes = img.bytes();
  for (std::size_t j = 0; j < schema.columns.size(); ++j) {
    const ColumnDef& c = schema.columns[j];
    std::size_t off = kPageHeaderSize + kSchemaColumnDescSize * j;
    std::memcpy(bytes.data() + off, c.name.data(), c.name.size());
    bytes[off + 24] = static_cast<std::uint8_t>(c.type);
    bytes[off + 25] = static_cast<std::uint8_t>(c.str_width);
  }
  return img;
}

inline std::vector<ColumnDef> decode_schema_page(const PageImage& img, std::uint32_t table_id,
                                                 std::size_t column_count) {
  PageHeader h = img.header();
  if (h.table_id != table_id || h.page_index != kSchemaPageIndex) {
    throw Error(Errc::PageMismatch, "schema page names t" + std::to_string(h.table_id) +
                                        ", expected t" + std::to_string(table_id));
  }
  std::vector<ColumnDef> columns;
  columns.reserve(column_count);
  auto bytes = img.bytes();
  for (std::size_t j = 0; j < column_count; ++j) {
    std::size_t off = kPageHeaderSize + kSchemaColumnDescSize * j;
    ColumnDef c;
    std::size_t name_len = 0;
    while (name_len < kMaxIdentifierBytes && bytes[off + name_len] != 0) ++name_len;
    c.name.assign(reinterpret_cast<const char*>(bytes.data() + off), name_len);
    c.type = bytes[off + 24] == 0 ? ColumnType::Int : ColumnType::Str;
    c.str_width = bytes[off + 25];
    columns.push_back(std::move(c));
  }
  return columns;
}

// Slots whose byte range intersects an uncorrectable ECC word. Words over
// the unused tail of the slot area map to no slot.
inline std::vector<bool> damaged_slot_map(std::span<const std::uint16_t> words,
                                          std::uint16_t slot_size, std::uint16_t slot_count) {
  std::vector<bool> damaged(slot_count, false);
  std::size_t area_end = kPageHeaderSize + static_cast<std::size_t>(slot_count) * slot_size;
  for (std::uint16_t w : words) {
    std::size_t lo = static_cast<std::size_t>(w) * 8;
    std::size_t hi = lo + 7;
    if (hi < kPageHeaderSize || lo >= area_end) continue;
    std::size_t lo_slot = (std::max(lo, kPageHeaderSize) - kPageHeaderSize) / slot_size;
    std::size_t hi_slot = (std::min(hi, area_end - 1) - kPageHeaderSize) / slot_size;
    for (std::size_t s = lo_slot; s <= hi_slot; ++s) damaged[s] = true;
  }
  return damaged;
}

inline bool slot_damaged(std::span<const std::uint16_t> words, std::uint16_t slot_size,
                         std::uint16_t slot) {
  std::size_t lo = kPageHeaderSize + static_cast<std::size_t>(slot) * slot_size;
  std::size_t hi = lo + slot_size - 1;
  for (std::uint16_t w : words) {
    std::size_t wlo = static_cast<std::size_t>(w) * 8;
    if (wlo <= hi && wlo + 7 >= lo) return true;
  }
  return false;
}

} // namespace detail_catalog

class TableEngine {
 public:
  explicit TableEngine(EngineConfig config)
      : config_(std::move(config)),
        root_lock_(config_.root),
        io_(config_.root),
        cache_(io_, config_.cache) {
    open_catalog();
  }

  ~TableEngine() {
    try {
      cache_.flush_all();
    } catch (...) {
    }
  }

  TableEngine(const TableEngine&) = delete;
  TableEngine& operator=(const TableEngine&) = delete;

  TableMeta create_table(const TableSchema& schema) {
    validate_schema(schema);
    std::unique_lock<std::shared_mutex> cat(catalog_lock_);
    if (tables_.contains(schema.name)) {
      throw Error(Errc::TableExists, "table '" + schema.name + "' already exists");
    }
    std::uint32_t table_id = lowest_free_table_id();

    // Clear any debris a crashed drop left behind, then persist the schema
    // page before the catalog names the table.
    std::filesystem::remove_all(table_dir(config_.root, table_id));
    std::filesystem::create_directories(table_dir(config_.root, table_id));
    write_image_file(schema_path(config_.root, table_id),
                     detail_catalog::encode_schema_page(table_id, schema));

    auto state = std::make_unique<TableState>();
    state->meta.table_id = table_id;
    state->meta.schema = schema;
    write_descriptor(state->meta);
    cache_.flush_all();
    TableMeta meta = state->meta;
    tables_.emplace(schema.name, std::move(state));
    return meta;
  }

  void drop_table(const std::string& name) {
    std::unique_lock<std::shared_mutex> cat(catalog_lock_);
    auto it = tables_.find(name);
    if (it == tables_.end()) {
      throw Error(Errc::TableNotFound, "table '" + name + "' does not exist");
    }
    std::uint32_t table_id = it->second->meta.table_id;
    cache_.invalidate_table(table_id);
    clear_descriptor(table_id);
    cache_.flush_all();
    std::filesystem::remove_all(table_dir(config_.root, table_id));
    tables_.erase(it);
  }

  RowId insert_row(const std::string& name, const RowValue& row) {
    std::shared_lock<std::shared_mutex> cat(catalog_lock_);
    TableState& st = state(name);
    std::unique_lock<std::shared_mutex> tl(st.lock);
    validate_row(st.meta.schema, row);

    const std::uint16_t slot_size = st.meta.schema.slot_size();
    const std::uint16_t slot_count = st.meta.schema.slot_count();
    RowId rid = st.meta.last_insert_hint;
    for (;;) {
      if (rid.page_index >= st.meta.page_count) {
        rid = RowId{st.meta.page_count, 0};
        PinnedPage p = cache_.fetch_new(CacheKey::table_page(st.meta.table_id, rid.page_index));
        PageHeader h;
        h.format_version = kFormatVersion;
        h.table_id = st.meta.table_id;
        h.page_index = rid.page_index;
        h.slot_size = slot_size;
        h.slot_count = slot_count;
        h.record_count = 0;
        p.view().format(h);
        st.meta.page_count += 1;
        write_slot(p, rid.slot, st.meta.schema, row);
        break;
      }
      PinnedPage p = cache_.fetch(CacheKey::table_page(st.meta.table_id, rid.page_index));
      bool placed = false;
      for (std::uint16_t s = rid.slot; s < slot_count; ++s) {
        if (p.view().occupancy(s, slot_size) != kSlotFree) continue;
        // A slot overlapping uncorrectable words is neither free nor
        // occupied; skipping it weakens the everything-before-the-hint-is-
        // occupied invariant, which holds strictly only on undamaged
        // stores.
        if (detail_catalog::slot_damaged(p.damaged_words(), slot_size, s)) continue;
        rid.slot = s;
        write_slot(p, s, st.meta.schema, row);
        placed = true;
        break;
      }
      if (placed) break;
      rid = RowId{rid.page_index + 1, 0};
    }

    st.meta.record_count += 1;
    st.meta.last_insert_hint = row_id_successor(rid, slot_count);
    write_descriptor(st.meta);
    return rid;
  }

  RowValue get_row(const std::string& name, RowId rid) {
    std::shared_lock<std::shared_mutex> cat(catalog_lock_);
    TableState& st = state(name);
    std::shared_lock<std::shared_mutex> tl(st.lock);

    const std::uint16_t slot_size = st.meta.schema.slot_size();
    if (rid.page_index >= st.meta.page_count || rid.slot >= st.meta.schema.slot_count()) {
      throw Error(Errc::RowNotFound, row_name(name, rid) + " is out of bounds");
    }
    PinnedPage p = cache_.fetch(CacheKey::table_page(st.meta.table_id, rid.page_index));
    if (detail_catalog::slot_damaged(p.damaged_words(), slot_size, rid.slot)) {
      throw Error(Errc::RowCorrupt, row_name(name, rid) + " overlaps uncorrectable damage");
    }
    std::uint8_t occ = p.view().occupancy(rid.slot, slot_size);
    if (occ == kSlotFree) {
      throw Error(Errc::RowNotFound, row_name(name, rid) + " is empty");
    }
    if (occ != kSlotOccupied) {
      throw Error(Errc::RowCorrupt, row_name(name, rid) + " has occupancy byte " +
                                        std::to_string(occ));
    }
    return decode_row(st.meta.schema, p.view().slot(rid.slot, slot_size));
  }

  void delete_row(const std::string& name, RowId rid) {
    std::shared_lock<std::shared_mutex> cat(catalog_lock_);
    TableState& st = state(name);
    std::unique_lock<std::shared_mutex> tl(st.lock);

    const std::uint16_t slot_size = st.meta.schema.slot_size();
    if (rid.page_index >= st.meta.page_count || rid.slot >= st.meta.schema.slot_count()) {
      throw Error(Errc::RowNotFound, row_name(name, rid) + " is out of bounds");
    }
    {
      PinnedPage p = cache_.fetch(CacheKey::table_page(st.meta.table_id, rid.page_index));
      if (detail_catalog::slot_damaged(p.damaged_words(), slot_size, rid.slot)) {
        throw Error(Errc::RowCorrupt, row_name(name, rid) + " overlaps uncorrectable damage");
      }
      std::uint8_t occ = p.view().occupancy(rid.slot, slot_size);
      if (occ == kSlotFree) {
        throw Error(Errc::RowNotFound, row_name(name, rid) + " is empty");
      }
      if (occ != kSlotOccupied) {
        throw Error(Errc::RowCorrupt, row_name(name, rid) + " has occupancy byte " +
                                          std::to_string(occ));
      }
      auto slot = p.view().slot(rid.slot, slot_size);
      std::fill(slot.begin(), slot.end(), std::uint8_t{0});
      p.view().set_record_count(static_cast<std::uint16_t>(p.view().header().record_count - 1));
      p.mark_dirty();
    }
    st.meta.record_count -= 1;
    if (row_id_less(rid, st.meta.last_insert_hint)) st.meta.last_insert_hint = rid;
    write_descriptor(st.meta);
  }

  std::vector<ScannedRow> scan(const std::string& name,
                               const std::optional<Predicate>& predicate = std::nullopt) {
    std::shared_lock<std::shared_mutex> cat(catalog_lock_);
    TableState& st = state(name);
    std::shared_lock<std::shared_mutex> tl(st.lock);
    std::vector<ScannedRow> out;
    visit_rows(st, predicate, [&](RowId rid, RowValue row) {
      out.push_back(ScannedRow{rid, std::move(row)});
    });
    return out;
  }

  // Scan-and-delete under one exclusive table lock; returns rows removed.
  std::size_t delete_where(const std::string& name,
                           const std::optional<Predicate>& predicate = std::nullopt) {
    std::shared_lock<std::shared_mutex> cat(catalog_lock_);
    TableState& st = state(name);
    std::unique_lock<std::shared_mutex> tl(st.lock);

    std::vector<RowId> victims;
    visit_rows(st, predicate, [&](RowId rid, RowValue) { victims.push_back(rid); });
    if (victims.empty()) return 0;

    const std::uint16_t slot_size = st.meta.schema.slot_size();
    for (RowId rid : victims) {
      PinnedPage p = cache_.fetch(CacheKey::table_page(st.meta.table_id, rid.page_index));
      auto slot = p.view().slot(rid.slot, slot_size);
      std::fill(slot.begin(), slot.end(), std::uint8_t{0});
      p.view().set_record_count(static_cast<std::uint16_t>(p.view().header().record_count - 1));
      p.mark_dirty();
    }
    st.meta.record_count -= victims.size();
    if (row_id_less(victims.front(), st.meta.last_insert_hint)) {
      st.meta.last_insert_hint = victims.front();
    }
    write_descriptor(st.meta);
    return victims.size();
  }

  std::vector<std::string> tables() const {
    std::shared_lock<std::shared_mutex> cat(catalog_lock_);
    std::vector<std::string> names;
    names.reserve(tables_.size());
    for (const auto& [name, state] : tables_) names.push_back(name);
    return names;
  }

  TableMeta meta(const std::string& name) const {
    std::shared_lock<std::shared_mutex> cat(catalog_lock_);
    auto it = tables_.find(name);
    if (it == tables_.end()) {
      throw Error(Errc::TableNotFound, "table '" + name + "' does not exist");
    }
    std::shared_lock<std::shared_mutex> tl(it->second->lock);
    return it->second->meta;
  }

  CacheStats cache_stats() const { return cache_.stats(); }

  std::size_t flush() { return cache_.flush_all(); }

  const std::filesystem::path& root() const { return config_.root; }

 private:
  struct TableState {
    TableMeta meta;
    mutable std::shared_mutex lock;
  };

  static std::string row_name(const std::string& table, RowId rid) {
    return "row (" + std::to_string(rid.page_index) + "," + std::to_string(rid.slot) +
           ") of table '" + table + "'";
  }

  TableState& state(const std::string& name) {
    auto it = tables_.find(name);
    if (it == tables_.end()) {
      throw Error(Errc::TableNotFound, "table '" + name + "' does not exist");
    }
    return *it->second;
  }

  std::uint32_t lowest_free_table_id() const {
    std::vector<bool> used(kMaxTables, false);
    for (const auto& [name, state] : tables_) used[state->meta.table_id] = true;
    for (std::uint32_t id = 0; id < kMaxTables; ++id) {
      if (!used[id]) return id;
    }
    throw Error(Errc::CatalogFull, "catalog holds the maximum of " + std::to_string(kMaxTables) +
                                       " tables");
  }

  void write_slot(PinnedPage& p, std::uint16_t slot_index, const TableSchema& schema,
                  const RowValue& row) {
    auto slot = p.view().slot(slot_index, schema.slot_size());
    slot[0] = kSlotOccupied;
    encode_row(schema, row, slot);
    p.view().set_record_count(static_cast<std::uint16_t>(p.view().header().record_count + 1));
    p.mark_dirty();
  }

  template <typename Fn>
  void visit_rows(TableState& st, const std::optional<Predicate>& predicate, Fn&& fn) {
    const std::uint16_t slot_size = st.meta.schema.slot_size();
    const std::uint16_t slot_count = st.meta.schema.slot_count();
    std::size_t column = 0;
    if (predicate) {
      const ColumnDef* def = st.meta.schema.find_column(predicate->column);
      if (def == nullptr) {
        throw Error(Errc::SchemaViolation, "unknown column '" + predicate->column + "' in table '" +
                                               st.meta.schema.name + "'");
      }
      column = static_cast<std::size_t>(def - st.meta.schema.columns.data());
    }
    for (std::uint32_t page = 0; page < st.meta.page_count; ++page) {
      PinnedPage p = cache_.fetch(CacheKey::table_page(st.meta.table_id, page));
      std::vector<bool> damaged =
          detail_catalog::damaged_slot_map(p.damaged_words(), slot_size, slot_count);
      for (std::uint16_t s = 0; s < slot_count; ++s) {
        if (damaged[s]) continue;
        if (p.view().occupancy(s, slot_size) != kSlotOccupied) continue;
        RowValue row = decode_row(st.meta.schema, p.view().slot(s, slot_size));
        if (predicate && !value_matches(st.meta.schema.columns[column], row.values[column],
                                        predicate->literal)) {
          continue;
        }
        fn(RowId{page, s}, std::move(row));
      }
    }
  }

  void write_descriptor(const TableMeta& meta) {
    PinnedPage cat = cache_.fetch(CacheKey::catalog());
    detail_catalog::encode_descriptor(
        cat.bytes().subspan(detail_catalog::descriptor_offset(meta.table_id),
                            kCatalogDescriptorSize),
        meta);
    cat.mark_dirty();
  }

  void clear_descriptor(std::uint32_t table_id) {
    PinnedPage cat = cache_.fetch(CacheKey::catalog());
    auto desc = cat.bytes().subspan(detail_catalog::descriptor_offset(table_id),
                                    kCatalogDescriptorSize);
    std::fill(desc.begin(), desc.end(), std::uint8_t{0});
    cat.mark_dirty();
  }

  void open_catalog() {
    if (!std::filesystem::exists(catalog_path(config_.root))) {
      PageImage img;
      PageHeader h;
      h.format_version = kFormatVersion;
      h.table_id = kCatalogTableId;
      h.page_index = 0;
      h.slot_size = 0;
      h.slot_count = 0;
      h.record_count = 0;
      img.view().format(h);
      write_image_file(catalog_path(config_.root), img);
      return;
    }
    PinnedPage cat = cache_.fetch(CacheKey::catalog());
    for (std::uint32_t id = 0; id < kMaxTables; ++id) {
      auto desc = cat.bytes().subspan(detail_catalog::descriptor_offset(id),
                                      kCatalogDescriptorSize);
      if (desc[0] == 0) continue;
      std::size_t column_count = 0;
      TableMeta meta = detail_catalog::decode_descriptor(desc, column_count);
      if (meta.table_id != id || !valid_identifier(meta.schema.name) || column_count == 0 ||
          column_count > kMaxColumns) {
        throw Error(Errc::StorageError,
                    "catalog descriptor " + std::to_string(id) + " is malformed");
      }
      PageImage schema_img;
      read_image_file(schema_path(config_.root, id), schema_img);
      meta.schema.columns = detail_catalog::decode_schema_page(schema_img, id, column_count);
      auto state = std::make_unique<TableState>();
      state->meta = std::move(meta);
      std::string name = state->meta.schema.name;
      tables_.emplace(std::move(name), std::move(state));
    }
  }

  EngineConfig config_;
  LockFile root_lock_;
  StorePageIo io_;
  PageCache cache_;
  mutable std::shared_mutex catalog_lock_;
  std::map<std::string, std::unique_ptr<TableState>> tables_;
};

} // namespace hardpage
