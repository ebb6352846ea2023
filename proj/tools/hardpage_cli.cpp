// hardpage command-line shell: REPL, one-shot execution, benchmarks, and
// offline maintenance (inject/scrub/stats).
//
// Exit codes: 0 success, 1 lex/parse error, 2 execution error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hardpage/hardpage.hpp"

namespace {

using namespace hardpage;

std::string render(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

void print_rows(const ResultSet& rs, std::ostream& out) {
  for (const RowValue& row : rs.rows) {
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      if (i) out << '\t';
      out << render(row.values[i]);
    }
    out << '\n';
  }
}

// Runs every statement in `text`; stops at the first failure and maps it
// to the exit-code contract.
int run_statements(const std::string& text, TableEngine& engine, std::ostream& out) {
  try {
    for (const std::string& stmt : split_statements(text)) {
      print_rows(execute(parse_statement(stmt), engine), out);
    }
    return 0;
  } catch (const LexError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

int repl(TableEngine& engine) {
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line == ".quit") break;
    run_statements(line, engine, std::cout); // errors already printed; loop on
  }
  return 0;
}

int cmd_scrub(const std::filesystem::path& root) {
  LockFile lock(root);
  std::size_t pages = 0;
  std::uint64_t corrected = 0;
  std::size_t uncorrectable = 0;
  for (const auto& path : list_page_files(root)) {
    pages += 1;
    try {
      ecc::BlockReport report = scrub_file(path);
      corrected += report.corrected_count;
      if (!report.uncorrectable_words.empty()) {
        uncorrectable += 1;
        std::cerr << path.generic_string() << ": " << report.uncorrectable_words.size()
                  << " uncorrectable words\n";
      }
    } catch (const Error& e) {
      uncorrectable += 1;
      std::cerr << path.generic_string() << ": " << e.what() << '\n';
    }
  }
  std::cout << "pages " << pages << " corrected " << corrected << " uncorrectable "
            << uncorrectable << '\n';
  return 0;
}

int cmd_stats(const EngineConfig& config) {
  TableEngine engine(config);
  std::vector<std::string> tables = engine.tables();
  std::cout << "tables " << tables.size() << '\n';
  for (const std::string& name : tables) {
    TableMeta meta = engine.meta(name);
    std::cout << name << '\t' << meta.record_count << '\n';
  }
  CacheStats cs = engine.cache_stats();
  std::cout << "cache capacity " << cs.capacity << " resident " << cs.resident << " pinned "
            << cs.pinned << " hits " << cs.hits << " misses " << cs.misses << " evictions "
            << cs.evictions << " overflow_peak " << cs.overflow_peak << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"hardpage: fault-tolerant embedded storage engine"};
  app.require_subcommand(1);

  std::string root;
  app.add_option("--root", root, "storage root directory")
      ->envname("HARDPAGE_ROOT")
      ->required();
  std::size_t cache_capacity = 64;
  app.add_option("--cache", cache_capacity, "page cache capacity")->envname("HARDPAGE_CACHE");
  std::size_t overflow_capacity = 8;
  app.add_option("--overflow", overflow_capacity, "pinned-overflow capacity");

  CLI::App* sub_repl = app.add_subcommand("repl", "interactive statement loop");

  CLI::App* sub_exec = app.add_subcommand("exec", "run statements and exit");
  std::string command;
  sub_exec->add_option("-c,--command", command, "statement text")->required();

  CLI::App* sub_bi = app.add_subcommand("bench-insert", "fill the bench table");
  std::uint64_t rows = 10000;
  std::uint64_t seed = 1;
  sub_bi->add_option("--rows", rows, "records to insert");
  sub_bi->add_option("--seed", seed, "generator seed");

  CLI::App* sub_bg = app.add_subcommand("bench-get", "time seeded GET lookups");
  std::uint64_t lookups = 1000;
  unsigned readers = 1;
  sub_bg->add_option("--rows", rows, "records in the bench table");
  sub_bg->add_option("--lookups", lookups, "GET statements to run");
  sub_bg->add_option("--seed", seed, "generator seed");
  sub_bg->add_option("--readers", readers, "concurrent GET workers");

  CLI::App* sub_inject = app.add_subcommand("inject", "flip random bits in page files");
  std::size_t flips = 1;
  sub_inject->add_option("--flips", flips, "total bit flips");
  sub_inject->add_option("--seed", seed, "generator seed");

  CLI::App* sub_scrub = app.add_subcommand("scrub", "correct every page file in place");
  CLI::App* sub_stats = app.add_subcommand("stats", "table and cache statistics");

  CLI11_PARSE(app, argc, argv);

  EngineConfig config{root, CacheConfig{cache_capacity, overflow_capacity}};
  try {
    if (sub_repl->parsed()) {
      TableEngine engine(config);
      return repl(engine);
    }
    if (sub_exec->parsed()) {
      TableEngine engine(config);
      return run_statements(command, engine, std::cout);
    }
    if (sub_bi->parsed()) {
      std::cout << format_report(bench_insert(config, rows, seed)) << '\n';
      return 0;
    }
    if (sub_bg->parsed()) {
      std::cout << format_report(bench_get(config, rows, lookups, seed, readers)) << '\n';
      return 0;
    }
    if (sub_inject->parsed()) {
      std::vector<FlipRecord> records =
          inject(root, InjectionPlan{.seed = seed, .total_flips = flips});
      std::cout << format_audit_log(records);
      return 0;
    }
    if (sub_scrub->parsed()) return cmd_scrub(root);
    if (sub_stats->parsed()) return cmd_stats(config);
    return 0;
  } catch (const LexError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
