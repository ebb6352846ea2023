#pragma once

// Benchmark workload: a fixed bench table filled with seeded pseudo-random
// records, driven end to end through the statement front end so the timing
// covers lexing, parsing, and execution. Identical (seed, rows) produce a
// byte-identical storage tree; only the timing varies between runs.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "hardpage/detail/rng.hpp"
#include "hardpage/errors.hpp"
#include "hardpage/query.hpp"
#include "hardpage/table_engine.hpp"

namespace hardpage {

struct BenchReport {
  std::string name;
  std::uint64_t count = 0;
  double total_seconds = 0.0;
  double mean_seconds = 0.0;
  double ops_per_second = 0.0;
};

// One parseable line: name count total_s mean_s ops_s. Seconds carry
// microsecond precision.
inline std::string format_report(const BenchReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %llu %.6f %.6f %.2f", r.name.c_str(),
                static_cast<unsigned long long>(r.count), r.total_seconds, r.mean_seconds,
                r.ops_per_second);
  return buf;
}

namespace detail_bench {

inline constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

inline std::string random_payload(detail::SplitMix64& rng) {
  std::string s(20, '\0');
  for (char& c : s) c = kAlphabet[rng.below(62)];
  return s;
}

inline BenchReport finish(std::string name, std::uint64_t count, double total_seconds) {
  BenchReport r;
  r.name = std::move(name);
  r.count = count;
  r.total_seconds = total_seconds;
  r.mean_seconds = count > 0 ? total_seconds / static_cast<double>(count) : 0.0;
  r.ops_per_second = total_seconds > 0 ? static_cast<double>(count) / total_seconds : 0.0;
  return r;
}

} // namespace detail_bench

// Creates bench(id INT, payload STR(20), val INT) and fills it with rows
// seeded records via INSERT statements; the report times the fill and the
// closing flush, not the table creation.
inline BenchReport bench_insert(const EngineConfig& config, std::uint64_t rows,
                                std::uint64_t seed) {
  TableEngine engine(config);
  for (const std::string& name : engine.tables()) {
    if (name == "bench") {
      throw Error(Errc::BenchTableExists, "bench table already populated; point --root at a "
                                          "fresh directory or drop it first");
    }
  }
  execute(parse_statement("CREATE TABLE bench (id INT, payload STR(20), val INT)"), engine);

  detail::SplitMix64 rng(seed);
  auto start = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < rows; ++i) {
    std::string stmt = "INSERT INTO bench VALUES (" + std::to_string(i) + ", '" +
                       detail_bench::random_payload(rng) + "', " +
                       std::to_string(static_cast<std::int64_t>(rng.next())) + ")";
    execute(parse_statement(stmt), engine);
  }
  engine.flush();
  std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return detail_bench::finish("insert", rows, elapsed.count());
}

// Looks up `lookups` seeded-uniform ordinals in [0, rows) via GET
// statements against a freshly opened engine (cold cache). `readers` > 1
// splits the lookups across that many concurrent workers.
inline BenchReport bench_get(const EngineConfig& config, std::uint64_t rows,
                             std::uint64_t lookups, std::uint64_t seed,
                             unsigned readers = 1) {
  if (rows == 0) throw Error(Errc::RowNotFound, "bench_get needs rows > 0");
  TableEngine engine(config);
  TableMeta meta = engine.meta("bench"); // TableNotFound if absent
  if (meta.record_count < rows) {
    throw Error(Errc::StorageError, "bench table holds " + std::to_string(meta.record_count) +
                                        " rows, need " + std::to_string(rows));
  }

  // Ordinal sequence is drawn once, deterministically, then partitioned.
  detail::SplitMix64 rng(seed);
  std::vector<std::uint64_t> ordinals(lookups);
  for (std::uint64_t& o : ordinals) o = rng.below(rows);

  if (readers == 0) readers = 1;
  auto worker = [&engine](const std::uint64_t* begin, const std::uint64_t* end) {
    for (const std::uint64_t* o = begin; o != end; ++o) {
      execute(parse_statement("GET bench " + std::to_string(*o)), engine);
    }
  };

  auto start = std::chrono::steady_clock::now();
  if (readers == 1) {
    worker(ordinals.data(), ordinals.data() + ordinals.size());
  } else {
    std::vector<std::thread> threads;
    std::uint64_t per = lookups / readers;
    for (unsigned t = 0; t < readers; ++t) {
      const std::uint64_t* begin = ordinals.data() + t * per;
      const std::uint64_t* end =
          t + 1 == readers ? ordinals.data() + ordinals.size() : begin + per;
      threads.emplace_back(worker, begin, end);
    }
    for (std::thread& th : threads) th.join();
  }
  std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return detail_bench::finish("get", lookups, elapsed.count());
}

} // namespace hardpage
