// Fault drill: populate a store, flip one bit in every page file, then
// show that every row still reads back and scrubbing repairs the files.
// Usage: seu_drill <root-dir>

#include <iostream>

#include "hardpage/hardpage.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: seu_drill <root-dir>\n";
    return 2;
  }

  using namespace hardpage;
  const std::filesystem::path root = argv[1];

  Snapshot snap;
  {
    TableEngine engine({root});
    execute(parse_statement("CREATE TABLE telemetry (seq INT, reading STR(24))"), engine);
    for (int i = 0; i < 500; ++i) {
      engine.insert_row("telemetry",
                        RowValue{{Value{std::int64_t{i}}, Value{"sample_" + std::to_string(i)}}});
    }
    engine.flush();
    snap = take_snapshot(engine);
  } // the engine must be closed before the harness touches the files

  std::vector<FlipRecord> flips = inject(root, InjectionPlan{.seed = 2024, .flips_per_file = 1});
  std::cout << "flipped " << flips.size() << " bits across " << list_page_files(root).size()
            << " files\n";

  VerifyReport damaged = verify(root, snap);
  std::cout << "after injection: matched " << damaged.matched << ", mismatched "
            << damaged.mismatched << ", unreadable " << damaged.unreadable << '\n';

  std::uint64_t corrected = 0;
  for (const auto& path : list_page_files(root)) corrected += scrub_file(path).corrected_count;
  std::cout << "scrub corrected " << corrected << " words\n";

  VerifyReport repaired = verify(root, snap);
  std::cout << "after scrub: matched " << repaired.matched << ", mismatched "
            << repaired.mismatched << ", unreadable " << repaired.unreadable << '\n';

  return damaged.mismatched == 0 && damaged.unreadable == 0 && repaired.mismatched == 0 ? 0 : 1;
}
