// Minimal tour: open a store, run statements, read the results back.
// Usage: quickstart <root-dir>

#include <iostream>

#include "hardpage/hardpage.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: quickstart <root-dir>\n";
    return 2;
  }

  using namespace hardpage;
  TableEngine engine({argv[1]});

  execute_all("CREATE TABLE crew (id INT, name STR(20));"
              "INSERT INTO crew VALUES (1, 'ripley');"
              "INSERT INTO crew VALUES (2, 'dallas');"
              "INSERT INTO crew VALUES (3, 'lambert')",
              engine);

  ResultSet rs = execute(parse_statement("SELECT * FROM crew WHERE id = 2"), engine);
  for (const RowValue& row : rs.rows) {
    std::cout << std::get<std::int64_t>(row.values[0]) << '\t'
              << std::get<std::string>(row.values[1]) << '\n';
  }

  // Direct addressing: ordinal 0 is page 0, slot 0.
  ResultSet first = execute(parse_statement("GET crew 0"), engine);
  std::cout << "first crew member: " << std::get<std::string>(first.rows[0].values[1]) << '\n';

  engine.flush();
  std::cout << "rows on disk: " << engine.meta("crew").record_count << '\n';
  return 0;
}
