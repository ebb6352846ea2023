// Acceptance gate. Ten numbered criteria, one PASS/FAIL line each, exit
// nonzero if any fail. Run with no arguments for the full gate or with a
// criterion number (1..10) to run one in isolation, which is how ctest
// registers them.
//
// Each criterion is self-contained: it builds its own store under a scratch
// directory, states its tolerance inline, and reports the measured numbers
// in the detail string so a red line carries enough context to debug.

#include <hardpage/hardpage.hpp>

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace hardpage;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Failure {
  std::string detail;
};

void require(bool cond, const std::string& detail) {
  if (!cond) throw Failure{detail};
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return std::string(buf);
}

// Unique scratch root per criterion, removed on destruction so a full run
// leaves no residue even when a criterion throws midway. Timing criteria ask
// for RAM-backed scratch: on a journaled disk the kernel's dirty-page
// throttling activates partway through the larger run and the measured
// ratio reflects writeback pressure instead of engine behavior.
struct Scratch {
  fs::path path;

  explicit Scratch(const std::string& tag, bool ram = false) {
    static int counter = 0;
    fs::path base = fs::temp_directory_path();
    if (ram) {
      std::error_code ec;
      if (fs::is_directory("/dev/shm", ec)) base = "/dev/shm";
    }
    path = base / ("hardpage_acc_" + tag + "_" + std::to_string(::getpid()) + "_" +
                   std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;
};

TableSchema users_schema() {
  TableSchema s;
  s.name = "users";
  s.columns = {{"id", ColumnType::Int, 0}, {"name", ColumnType::Str, 20}};
  return s;
}

RowValue user_row(std::int64_t id, const std::string& name) {
  RowValue row;
  row.values = {Value{id}, Value{name}};
  return row;
}

// ---------------------------------------------------------------------------
// 1. Every single-bit corruption of a codeword decodes back to the original
//    word; every double-bit corruption is flagged uncorrectable. Exhaustive
//    over all 72 positions and all 2556 position pairs for 100 random words,
//    under five seconds.

ecc::CodeWord corrupt(ecc::CodeWord cw, int pos) {
  if (pos < 64) {
    cw.data ^= std::uint64_t{1} << pos;
  } else {
    cw.check = static_cast<std::uint8_t>(cw.check ^ (1u << (pos - 64)));
  }
  return cw;
}

std::string ac1() {
  auto t0 = Clock::now();
  detail::SplitMix64 rng(0x5eed0001ULL);
  const int kWords = 100;
  std::uint64_t singles = 0;
  std::uint64_t doubles = 0;
  for (int i = 0; i < kWords; ++i) {
    std::uint64_t w = rng.next();
    ecc::CodeWord cw = ecc::encode(w);
    ecc::DecodeResult clean = ecc::decode(cw);
    require(clean.outcome.status == ecc::DecodeStatus::Clean && clean.word == w,
            fmt("clean decode disturbed word %d", i));
    for (int p = 0; p < 72; ++p) {
      ecc::DecodeResult r = ecc::decode(corrupt(cw, p));
      require(r.outcome.status == ecc::DecodeStatus::Corrected,
              fmt("single flip at bit %d of word %d not corrected", p, i));
      require(r.word == w, fmt("single flip at bit %d of word %d miscorrected", p, i));
      ++singles;
    }
    for (int p = 0; p < 72; ++p) {
      for (int q = p + 1; q < 72; ++q) {
        ecc::DecodeResult r = ecc::decode(corrupt(corrupt(cw, p), q));
        require(r.outcome.status == ecc::DecodeStatus::Uncorrectable,
                fmt("double flip %d+%d of word %d passed as %s", p, q, i,
                    r.outcome.status == ecc::DecodeStatus::Clean ? "clean" : "corrected"));
        ++doubles;
      }
    }
  }
  double elapsed = seconds_since(t0);
  require(elapsed < 5.0, fmt("exhaustive sweep took %.2f s, limit 5 s", elapsed));
  return fmt("%d words, %llu singles corrected, %llu doubles detected, %.2f s (limit 5 s)",
             kWords, static_cast<unsigned long long>(singles),
             static_cast<unsigned long long>(doubles), elapsed);
}

// ---------------------------------------------------------------------------
// 2. A store of 1000 rows survives one random bit flip in every page file:
//    all rows still read back, a scrub pass repairs every file in place, and
//    the scrubbed tree verifies clean. 200 independently seeded trials.

std::string ac2() {
  Scratch dir("seu");
  EngineConfig config{dir.path, {}};
  bench_insert(config, 1000, 0xacce55ULL);

  Snapshot snap;
  {
    TableEngine engine(config);
    snap = take_snapshot(engine);
  }
  std::size_t rows = 0;
  for (const auto& [name, captured] : snap.tables) rows += captured.size();
  require(rows == 1000, fmt("expected 1000 snapshotted rows, got %zu", rows));

  const int kTrials = 200;
  std::size_t files = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    InjectionPlan plan;
    plan.seed = 0x90000000ULL + static_cast<std::uint64_t>(trial);
    plan.flips_per_file = 1;
    std::vector<FlipRecord> records = inject(dir.path, plan);
    files = records.size();

    VerifyReport hit = verify(dir.path, snap);
    require(hit.clean(rows),
            fmt("trial %d: %zu matched, %zu mismatched, %zu unreadable after one flip per file",
                trial, hit.matched, hit.mismatched, hit.unreadable));

    for (const FlipRecord& rec : records) {
      ecc::BlockReport report = scrub_file(fs::path(rec.path));
      require(report.uncorrectable_words.empty(),
              fmt("trial %d: scrub found uncorrectable words in %s", trial, rec.path.c_str()));
      require(report.corrected_count >= 1,
              fmt("trial %d: scrub corrected nothing in %s", trial, rec.path.c_str()));
    }

    VerifyReport after = verify(dir.path, snap);
    require(after.clean(rows),
            fmt("trial %d: tree not clean after scrub (%zu/%zu/%zu)", trial, after.matched,
                after.mismatched, after.unreadable));
  }
  return fmt("%d trials, 1 flip in each of %zu files, 1000/1000 rows matched and "
             "scrub repaired every file every time",
             kTrials, files);
}

// ---------------------------------------------------------------------------
// 3. Two flips in one codeword are uncorrectable, and the damage stays
//    contained: exactly the rows whose slots overlap that word read back as
//    corrupt, every other row is untouched, and scrub refuses to rewrite the
//    damaged file.

std::string ac3() {
  Scratch dir("contain");
  EngineConfig config{dir.path, {}};
  const int kRows = 40;
  Snapshot snap;
  std::uint16_t slot_size = 0;
  {
    TableEngine engine(config);
    engine.create_table(users_schema());
    for (int i = 0; i < kRows; ++i) {
      engine.insert_row("users", user_row(i, "row-" + std::to_string(i)));
    }
    engine.flush();
    slot_size = engine.meta("users").schema.slot_size();
    snap = take_snapshot(engine);
  }

  // Aim at the word covering the interior of slot 5. The word spans file
  // bytes [8w, 8w+8), the plain-page bytes at the same offsets.
  std::size_t target_byte = kPageHeaderSize + 5u * slot_size + slot_size / 2;
  std::size_t word = target_byte / 8;
  std::set<std::uint16_t> expected;
  for (std::uint16_t s = 0; s < kRows; ++s) {
    std::size_t lo = kPageHeaderSize + static_cast<std::size_t>(s) * slot_size;
    std::size_t hi = lo + slot_size;
    if (lo < (word + 1) * 8 && word * 8 < hi) expected.insert(s);
  }
  require(!expected.empty(), "target word overlaps no occupied slot");

  fs::path page = dir.path / "t0" / "d0" / "p0.pg";
  flip_bit(page, word * 64 + 3);
  flip_bit(page, word * 64 + 11);
  std::vector<std::uint8_t> damaged = read_file_bytes(page);

  VerifyReport report = verify(dir.path, snap);
  require(report.unreadable == expected.size(),
          fmt("expected %zu unreadable rows, got %zu", expected.size(), report.unreadable));
  require(report.mismatched == 0, fmt("%zu rows silently mismatched", report.mismatched));
  require(report.matched == static_cast<std::size_t>(kRows) - expected.size(),
          fmt("expected %zu intact rows, got %zu", kRows - expected.size(), report.matched));

  ecc::BlockReport scrub = scrub_file(page);
  require(scrub.uncorrectable_words == std::vector<std::uint16_t>{static_cast<std::uint16_t>(word)},
          "scrub did not report exactly the damaged word");
  require(read_file_bytes(page) == damaged, "scrub rewrote an uncorrectable file");
  return fmt("2 flips in word %zu: %zu of %d rows unreadable (exactly the overlap), "
             "0 mismatched, scrub left the file for forensics",
             word, expected.size(), kRows);
}

// ---------------------------------------------------------------------------
// 4. Point lookups do not degrade with table size: mean cold-cache GET over
//    1000 random rows of a 100k-row table stays within 1.5x the same
//    measurement on a 10k-row table. Best of three runs on each side.
//
//    Cold cache means every lookup pays the storage path, so the measuring
//    engine runs with a single frame. A sizeable cache would keep most of
//    the small table resident and the comparison would measure hit rate,
//    not lookup cost.

double best_get_mean(const fs::path& root, std::uint64_t rows) {
  EngineConfig cold{root, CacheConfig{1, 8}};
  double best = 0.0;
  for (int run = 0; run < 3; ++run) {
    BenchReport r = bench_get(cold, rows, 1000, 0xbe57ULL + run);
    if (run == 0 || r.mean_seconds < best) best = r.mean_seconds;
  }
  return best;
}

std::string ac4() {
  Scratch small("get10k", true);
  Scratch large("get100k", true);
  bench_insert(EngineConfig{small.path, {}}, 10000, 0x10c0ULL);
  bench_insert(EngineConfig{large.path, {}}, 100000, 0x10c0ULL);

  double mean_small = best_get_mean(small.path, 10000);
  double mean_large = best_get_mean(large.path, 100000);
  require(mean_small > 0.0, "10k-row GET mean was zero");
  double ratio = mean_large / mean_small;
  require(ratio <= 1.5,
          fmt("GET mean grew %.2fx from 10k to 100k rows (%.2f us -> %.2f us), limit 1.5x",
              ratio, mean_small * 1e6, mean_large * 1e6));
  return fmt("mean GET %.2f us at 10k rows, %.2f us at 100k rows, ratio %.2fx (limit 1.5x)",
             mean_small * 1e6, mean_large * 1e6, ratio);
}

// ---------------------------------------------------------------------------
// 5. Insert cost is linear in row count: total time for 100k inserts lands
//    within 7x..13x the total for 10k. Best of five interleaved runs, with
//    pending writeback drained before each so one run's dirty pages cannot
//    throttle the next.

std::string ac5() {
  {
    // Discarded warmup: pulls one-time process costs (allocator arenas,
    // first-touch page faults) out of the measured runs.
    Scratch warm("inswarm", true);
    bench_insert(EngineConfig{warm.path, {}}, 10000, 0x1457ULL);
  }
  double best_small = 0.0;
  double best_large = 0.0;
  std::string samples_small;
  std::string samples_large;
  for (int run = 0; run < 5; ++run) {
    ::sync();
    Scratch small("ins10k", true);
    BenchReport rs = bench_insert(EngineConfig{small.path, {}}, 10000, 0x1457ULL + run);
    if (run == 0 || rs.total_seconds < best_small) best_small = rs.total_seconds;
    samples_small += fmt(" %.3f", rs.total_seconds);

    ::sync();
    Scratch large("ins100k", true);
    BenchReport rl = bench_insert(EngineConfig{large.path, {}}, 100000, 0x1457ULL + run);
    if (run == 0 || rl.total_seconds < best_large) best_large = rl.total_seconds;
    samples_large += fmt(" %.3f", rl.total_seconds);
  }
  require(best_small > 0.0, "10k-row insert total was zero");
  double ratio = best_large / best_small;
  require(7.0 <= ratio && ratio <= 13.0,
          fmt("100k/10k insert ratio %.2fx outside 7x..13x (10k:%s | 100k:%s)", ratio,
              samples_small.c_str(), samples_large.c_str()));
  return fmt("10k rows in %.3f s, 100k rows in %.3f s, ratio %.2fx (window 7x..13x)",
             best_small, best_large, ratio);
}

// ---------------------------------------------------------------------------
// 6. The insert hint is sound: every insert lands in the globally lowest
//    free slot, an insert straight after a delete reuses the freed slot, and
//    after 10,000 randomized operations the table matches a shadow map.

std::string ac6() {
  // Freed-slot reuse at three fill levels.
  for (auto [fill, victim] : {std::pair<int, int>{5, 2}, {12, 0}, {30, 17}}) {
    Scratch dir("reuse");
    TableEngine engine(EngineConfig{dir.path, {}});
    engine.create_table(users_schema());
    for (int i = 0; i < fill; ++i) {
      RowId rid = engine.insert_row("users", user_row(i, "r"));
      require(rid == RowId{0, static_cast<std::uint16_t>(i)},
              fmt("fill insert %d landed at (%u,%u)", i, rid.page_index, rid.slot));
    }
    RowId freed{0, static_cast<std::uint16_t>(victim)};
    engine.delete_row("users", freed);
    RowId rid = engine.insert_row("users", user_row(100 + victim, "again"));
    require(rid == freed, fmt("insert after deleting slot %d landed at (%u,%u)", victim,
                              rid.page_index, rid.slot));
  }

  // Randomized workload against a shadow map keyed by global slot ordinal.
  Scratch dir("hint");
  TableEngine engine(EngineConfig{dir.path, {}});
  engine.create_table(users_schema());
  const std::uint16_t slot_count = engine.meta("users").schema.slot_count();
  std::map<std::uint64_t, RowValue> shadow;
  auto ordinal_of = [&](RowId rid) {
    return static_cast<std::uint64_t>(rid.page_index) * slot_count + rid.slot;
  };
  auto lowest_free = [&] {
    std::uint64_t expect = 0;
    for (const auto& [ord, row] : shadow) {
      if (ord != expect) break;
      ++expect;
    }
    return expect;
  };

  detail::SplitMix64 rng(0x4177ULL);
  const int kOps = 10000;
  std::uint64_t inserts = 0;
  std::uint64_t deletes = 0;
  for (int op = 0; op < kOps; ++op) {
    bool do_insert = shadow.empty() || rng.below(100) < 60;
    if (do_insert) {
      std::uint64_t want = lowest_free();
      RowValue row = user_row(static_cast<std::int64_t>(op), "op-" + std::to_string(op));
      RowId rid = engine.insert_row("users", row);
      require(ordinal_of(rid) == want,
              fmt("op %d: insert landed at ordinal %llu, lowest free was %llu", op,
                  static_cast<unsigned long long>(ordinal_of(rid)),
                  static_cast<unsigned long long>(want)));
      shadow.emplace(want, std::move(row));
      ++inserts;
    } else {
      auto it = shadow.begin();
      std::advance(it, static_cast<long>(rng.below(shadow.size())));
      RowId rid{static_cast<std::uint32_t>(it->first / slot_count),
                static_cast<std::uint16_t>(it->first % slot_count)};
      engine.delete_row("users", rid);
      shadow.erase(it);
      ++deletes;
    }

    if (op % 250 == 0) {
      // Hint invariant: every ordinal before the hint is occupied.
      TableMeta meta = engine.meta("users");
      std::uint64_t hint = ordinal_of(RowId{meta.last_insert_hint.page_index,
                                            meta.last_insert_hint.slot});
      require(lowest_free() >= hint,
              fmt("op %d: free ordinal %llu sits before hint %llu", op,
                  static_cast<unsigned long long>(lowest_free()),
                  static_cast<unsigned long long>(hint)));
    }
  }

  std::vector<ScannedRow> rows = engine.scan("users");
  require(rows.size() == shadow.size(),
          fmt("scan found %zu rows, shadow holds %zu", rows.size(), shadow.size()));
  auto it = shadow.begin();
  for (const ScannedRow& got : rows) {
    require(ordinal_of(got.rid) == it->first && got.row == it->second,
            fmt("row at ordinal %llu diverged from shadow",
                static_cast<unsigned long long>(ordinal_of(got.rid))));
    ++it;
  }
  require(engine.meta("users").record_count == shadow.size(), "record_count drifted");
  return fmt("%llu inserts all hit the lowest free slot, %llu deletes, final %zu rows "
             "match the shadow map",
             static_cast<unsigned long long>(inserts),
             static_cast<unsigned long long>(deletes), shadow.size());
}

// ---------------------------------------------------------------------------
// 7. Cache discipline: deterministic second-chance eviction, a multi-thread
//    stress over real page files with zero lost updates and zero leaked
//    pins, and a capacity-1 engine producing byte-identical results to a
//    capacity-64 engine.

void write_stamp_pages(const fs::path& root, std::uint32_t table_id, std::uint32_t count) {
  for (std::uint32_t i = 0; i < count; ++i) {
    PageImage img;
    PageHeader h;
    h.table_id = table_id;
    h.page_index = i;
    h.slot_size = 64;
    h.slot_count = 63;
    img.view().format(h);
    detail::store_u64(img.data() + kPageHeaderSize, i);
    write_page(root, PageId{table_id, i}, img);
  }
}

std::string ac7() {
  // Part 1: fetch A, B, then C through a capacity-2 cache evicts A (both
  // frames lose their reference bit on the first sweep, the hand lands back
  // on A) and refetching B afterwards is a hit.
  {
    Scratch dir("clock");
    write_stamp_pages(dir.path, 7, 3);
    StorePageIo io(dir.path);
    PageCache cache(io, CacheConfig{2, 1});
    auto key = [](std::uint32_t i) { return CacheKey::table_page(7, i); };
    { PinnedPage p = cache.fetch(key(0)); }
    { PinnedPage p = cache.fetch(key(1)); }
    { PinnedPage p = cache.fetch(key(2)); }
    CacheStats s = cache.stats();
    require(s.evictions == 1, fmt("expected 1 eviction after A,B,C, got %llu",
                                  static_cast<unsigned long long>(s.evictions)));
    { PinnedPage p = cache.fetch(key(1)); }
    require(cache.stats().hits == 1, "refetching the survivor missed");
    { PinnedPage p = cache.fetch(key(0)); }
    require(cache.stats().misses == 4, "the evicted page was still resident");
  }

  // Part 2: four threads, 100,000 fetches over 32 pages through a 16-frame
  // cache. Every page carries its index as a stamp; a lost or torn
  // write-back would surface as a stamp mismatch on some later fetch.
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  {
    Scratch dir("stress");
    const std::uint32_t kPages = 32;
    write_stamp_pages(dir.path, 7, kPages);
    StorePageIo io(dir.path);
    PageCache cache(io, CacheConfig{16, 8});
    const int kThreads = 4;
    const int kOpsPerThread = 25000;
    std::atomic<std::uint64_t> bad{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < kThreads; ++t) {
      workers.emplace_back([&, t] {
        detail::SplitMix64 rng(0x7000ULL + t);
        for (int op = 0; op < kOpsPerThread; ++op) {
          std::uint32_t page = static_cast<std::uint32_t>(rng.below(kPages));
          PinnedPage p = cache.fetch(CacheKey::table_page(7, page));
          if (detail::load_u64(p.bytes().data() + kPageHeaderSize) != page) {
            bad.fetch_add(1, std::memory_order_relaxed);
          }
          if (rng.below(16) == 0) {
            detail::store_u64(p.bytes().data() + kPageHeaderSize, page);
            p.mark_dirty();
          }
        }
      });
    }
    for (std::thread& w : workers) w.join();
    require(bad.load() == 0, fmt("%llu stamp mismatches under concurrency",
                                 static_cast<unsigned long long>(bad.load())));
    CacheStats s = cache.stats();
    require(s.pinned == 0, fmt("%zu pages still pinned after the stress", s.pinned));
    require(s.hits + s.misses == static_cast<std::uint64_t>(kThreads) * kOpsPerThread,
            "fetch accounting does not add up");
    require(s.overflow_peak <= 8, fmt("overflow peak %zu exceeded its pool", s.overflow_peak));
    cache.flush_all();
    hits = s.hits;
    misses = s.misses;
    evictions = s.evictions;
    for (std::uint32_t i = 0; i < kPages; ++i) {
      ReadPageResult r = read_page(dir.path, PageId{7, i});
      require(detail::load_u64(r.image.data() + kPageHeaderSize) == i,
              fmt("page %u stamp lost after flush", i));
    }
  }

  // Part 3: the same seeded workload through a capacity-1 engine and a
  // capacity-64 engine must leave byte-identical trees and identical scans.
  {
    Scratch tiny("cap1");
    Scratch roomy("cap64");
    TableEngine a(EngineConfig{tiny.path, CacheConfig{1, 8}});
    TableEngine b(EngineConfig{roomy.path, CacheConfig{64, 8}});
    for (TableEngine* e : {&a, &b}) e->create_table(users_schema());

    detail::SplitMix64 rng(0xd1ffULL);
    std::vector<RowId> live;
    for (int op = 0; op < 1500; ++op) {
      if (live.empty() || rng.below(100) < 65) {
        RowValue row = user_row(op, "d-" + std::to_string(op));
        RowId ra = a.insert_row("users", row);
        RowId rb = b.insert_row("users", row);
        require(ra == rb, fmt("op %d: capacity-1 and capacity-64 inserts diverged", op));
        live.push_back(ra);
      } else {
        std::size_t pick = rng.below(live.size());
        RowId rid = live[pick];
        a.delete_row("users", rid);
        b.delete_row("users", rid);
        live.erase(live.begin() + static_cast<long>(pick));
      }
    }
    std::vector<ScannedRow> sa = a.scan("users");
    std::vector<ScannedRow> sb = b.scan("users");
    require(sa.size() == sb.size(), "scan row counts diverged");
    for (std::size_t i = 0; i < sa.size(); ++i) {
      require(sa[i].rid == sb[i].rid && sa[i].row == sb[i].row,
              fmt("scan row %zu diverged between cache sizes", i));
    }
    a.flush();
    b.flush();
    for (const fs::path& pa : list_page_files(tiny.path)) {
      fs::path pb = roomy.path / fs::relative(pa, tiny.path);
      require(read_file_bytes(pa) == read_file_bytes(pb),
              "trees diverged at " + fs::relative(pa, tiny.path).string());
    }
  }

  return fmt("clock eviction exact, %llu hits / %llu misses / %llu evictions across 4 "
             "threads with zero lost stamps and zero leaked pins, capacity-1 tree "
             "byte-identical to capacity-64",
             static_cast<unsigned long long>(hits), static_cast<unsigned long long>(misses),
             static_cast<unsigned long long>(evictions));
}

// ---------------------------------------------------------------------------
// 8. The block allocator conserves blocks across 100,000 operations: no
//    handle is issued twice while live, blocks never alias, exhaustion is an
//    error that changes nothing, and free + used always equals the pool size.

std::string ac8() {
  const std::uint32_t kBlocks = 1024;
  const std::size_t kBlockSize = 64;
  BlockPool pool(kBlocks, kBlockSize);
  detail::SplitMix64 rng(0xb10cULL);
  // live handle index -> pattern stamped at both ends of the block
  std::map<std::uint32_t, std::uint64_t> live;

  auto stamp = [&](BlockHandle h, std::uint64_t pattern) {
    auto bytes = pool.block(h);
    detail::store_u64(bytes.data(), pattern);
    detail::store_u64(bytes.data() + kBlockSize - 8, pattern);
  };
  auto check_stamp = [&](std::uint32_t index, std::uint64_t pattern, int op) {
    auto bytes = pool.block(BlockHandle{index});
    require(detail::load_u64(bytes.data()) == pattern &&
                detail::load_u64(bytes.data() + kBlockSize - 8) == pattern,
            fmt("op %d: block %u lost its stamp (aliased by another block)", op, index));
  };

  const int kOps = 100000;
  std::uint64_t allocs = 0;
  std::uint64_t releases = 0;
  for (int op = 0; op < kOps; ++op) {
    bool do_alloc = live.empty() || (live.size() < kBlocks && rng.below(100) < 55);
    if (do_alloc) {
      BlockHandle h = pool.alloc();
      require(live.find(h.index) == live.end(),
              fmt("op %d: handle %u issued while live", op, h.index));
      require(h.index < kBlocks, fmt("op %d: handle %u out of range", op, h.index));
      std::uint64_t pattern = rng.next() | 1;
      stamp(h, pattern);
      live.emplace(h.index, pattern);
      ++allocs;
    } else {
      auto it = live.begin();
      std::advance(it, static_cast<long>(rng.below(live.size())));
      check_stamp(it->first, it->second, op);
      pool.release(BlockHandle{it->first});
      live.erase(it);
      ++releases;
    }
    PoolStats s = pool.stats();
    require(s.free + s.used == kBlocks,
            fmt("op %d: free %zu + used %zu != %u", op, s.free, s.used, kBlocks));
    require(s.used == live.size(),
            fmt("op %d: pool reports %zu used, oracle holds %zu", op, s.used, live.size()));
  }

  // Drain to exhaustion: the failing alloc must change nothing.
  while (live.size() < kBlocks) {
    BlockHandle h = pool.alloc();
    require(live.find(h.index) == live.end(), "drain issued a live handle");
    std::uint64_t pattern = rng.next() | 1;
    stamp(h, pattern);
    live.emplace(h.index, pattern);
  }
  require(!pool.try_alloc().has_value(), "try_alloc produced a block from a full pool");
  bool threw = false;
  try {
    pool.alloc();
  } catch (const Error& e) {
    threw = e.code() == Errc::PoolExhausted;
  }
  require(threw, "alloc on a full pool did not raise PoolExhausted");
  PoolStats s = pool.stats();
  require(s.free == 0 && s.used == kBlocks, "failed alloc disturbed the counters");

  for (const auto& [index, pattern] : live) check_stamp(index, pattern, -1);
  for (const auto& [index, pattern] : live) pool.release(BlockHandle{index});
  s = pool.stats();
  require(s.free == kBlocks && s.used == 0, "full drain and release did not conserve blocks");
  return fmt("%llu allocs / %llu releases with stamps intact, exhaustion raised "
             "PoolExhausted untouched, final pool %u free / 0 used",
             static_cast<unsigned long long>(allocs),
             static_cast<unsigned long long>(releases), kBlocks);
}

// ---------------------------------------------------------------------------
// 9. A write interrupted at any point leaves the old image or the new image
//    on disk, never a torn mix, and once the rename has happened the new
//    image is the one that survives.

std::string ac9() {
  Scratch dir("crash");
  CrashReport report = crash_write_test(dir.path);
  require(report.outcomes.size() == 5,
          fmt("expected 5 interruption points, saw %zu", report.outcomes.size()));
  for (const CrashOutcome& o : report.outcomes) {
    require(o.verdict != CrashVerdict::Torn,
            fmt("torn page after interrupting at point %d", static_cast<int>(o.point)));
    if (o.point == WritePoint::Renamed) {
      require(o.verdict == CrashVerdict::NewImage,
              "rename completed but the old image survived");
    } else {
      require(o.verdict == CrashVerdict::OldImage,
              fmt("pre-rename interruption at point %d leaked a partial new image",
                  static_cast<int>(o.point)));
    }
  }
  require(report.passed, "crash harness reported failure");
  return "all 5 interruption points left old-or-new, rename boundary exact, no torn pages";
}

// ---------------------------------------------------------------------------
// 10. The command line binary, stripped, stays under 5 MB.

std::string ac10() {
  fs::path self = fs::read_symlink("/proc/self/exe");
  fs::path cli = self.parent_path().parent_path() / "tools" / "hardpage";
  require(fs::exists(cli), "tools/hardpage not built next to this binary");

  Scratch dir("size");
  fs::path copy = dir.path / "hardpage";
  fs::copy_file(cli, copy);
  std::string cmd = "strip '" + copy.string() + "' 2>/dev/null";
  bool stripped = std::system(cmd.c_str()) == 0;
  std::uintmax_t size = fs::file_size(copy);
  const std::uintmax_t kLimit = 5u * 1024 * 1024;
  require(size <= kLimit, fmt("%s binary is %ju bytes, limit %ju",
                              stripped ? "stripped" : "unstripped", size, kLimit));
  return fmt("%s CLI binary is %ju bytes (%.2f MB, limit 5 MB)",
             stripped ? "stripped" : "unstripped", size, size / (1024.0 * 1024.0));
}

struct Criterion {
  int id;
  const char* title;
  std::string (*run)();
};

const Criterion kCriteria[] = {
    {1, "single-bit corruption corrected, double-bit detected", ac1},
    {2, "rows survive one upset per file and scrub repairs in place", ac2},
    {3, "uncorrectable damage stays contained to overlapping slots", ac3},
    {4, "point lookup cost stays flat as the table grows", ac4},
    {5, "insert cost scales linearly with row count", ac5},
    {6, "every insert lands in the lowest free slot", ac6},
    {7, "cache evicts exactly, loses nothing, and leaks no pins", ac7},
    {8, "allocator conserves blocks and never aliases", ac8},
    {9, "interrupted writes leave old or new, never torn", ac9},
    {10, "stripped command line binary stays under 5 MB", ac10},
};

int run_criterion(const Criterion& c) {
  try {
    std::string detail = c.run();
    std::printf("[AC%02d] PASS %s: %s\n", c.id, c.title, detail.c_str());
    std::fflush(stdout);
    return 0;
  } catch (const Failure& f) {
    std::printf("[AC%02d] FAIL %s: %s\n", c.id, c.title, f.detail.c_str());
  } catch (const Error& e) {
    std::printf("[AC%02d] FAIL %s: unexpected error: %s\n", c.id, c.title, e.what());
  } catch (const std::exception& e) {
    std::printf("[AC%02d] FAIL %s: unexpected exception: %s\n", c.id, c.title, e.what());
  }
  std::fflush(stdout);
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    int id = std::atoi(argv[1]);
    for (const Criterion& c : kCriteria) {
      if (c.id == id) return run_criterion(c);
    }
    std::fprintf(stderr, "no criterion %s (valid: 1..10)\n", argv[1]);
    return 2;
  }
  int failed = 0;
  for (const Criterion& c : kCriteria) failed += run_criterion(c);
  if (failed != 0) std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
