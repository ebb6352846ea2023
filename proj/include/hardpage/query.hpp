#pragma once

// Query front end: statement splitter, tokenizer, recursive-descent parser,
// and executor for the command subset.
//
//   stmt    := create | drop | insert | select | delete | get
//   create  := CREATE TABLE ident "(" coldef ("," coldef)* ")"
//   coldef  := ident (INT | STR "(" int ")")
//   drop    := DROP TABLE ident
//   insert  := INSERT INTO ident VALUES "(" literal ("," literal)* ")"
//   select  := SELECT "*" FROM ident [where]
//   delete  := DELETE FROM ident [where]
//   get     := GET ident int
//   where   := WHERE ident "=" literal
//   literal := int | string
//
// Keywords are case-insensitive, identifiers case-sensitive. String
// literals use single quotes with '' as the escaped quote. Tokens keep
// their raw source slice and byte offset, so a token stream re-concatenated
// with the original whitespace reproduces the statement exactly.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hardpage/errors.hpp"
#include "hardpage/table_engine.hpp"

namespace hardpage {

enum class TokenKind : std::uint8_t { Keyword, Identifier, IntLiteral, StringLiteral, Symbol };

struct Token {
  TokenKind kind;
  std::string text;     // raw source slice, quotes and escapes included
  std::size_t position; // byte offset of the slice within the statement
};

namespace detail_lex {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_word_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_word_char(char c) { return is_word_start(c) || is_digit(c); }

inline char upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c; }

inline bool iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (upper(a[i]) != upper(b[i])) return false;
  }
  return true;
}

inline constexpr std::string_view kKeywords[] = {
    "CREATE", "TABLE", "DROP", "INSERT", "INTO", "VALUES", "SELECT",
    "FROM",   "WHERE", "DELETE", "GET",  "INT",  "STR",
};

inline bool is_keyword(std::string_view word) {
  for (std::string_view kw : kKeywords) {
    if (iequal(word, kw)) return true;
  }
  return false;
}

// Advances past a string literal whose opening quote sits at `i`; returns
// the index one past the closing quote. '' inside the literal is an
// escaped quote, not a terminator.
inline std::size_t scan_string(std::string_view text, std::size_t i) {
  std::size_t start = i;
  i += 1;
  while (i < text.size()) {
    if (text[i] == '\'') {
      if (i + 1 < text.size() && text[i + 1] == '\'') {
        i += 2;
        continue;
      }
      return i + 1;
    }
    i += 1;
  }
  throw LexError(start, "unterminated string literal");
}

} // namespace detail_lex

inline bool token_is_keyword(const Token& t, std::string_view kw) {
  return t.kind == TokenKind::Keyword && detail_lex::iequal(t.text, kw);
}

inline bool token_is_symbol(const Token& t, char c) {
  return t.kind == TokenKind::Symbol && t.text.size() == 1 && t.text[0] == c;
}

// Decodes a StringLiteral token's raw slice: strips the quotes and folds
// each '' back into a single quote.
inline std::string decode_string_literal(std::string_view raw) {
  std::string out;
  out.reserve(raw.size() - 2);
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    out.push_back(raw[i]);
    if (raw[i] == '\'') i += 1; // the second half of an escaped quote
  }
  return out;
}

// Splits input on ';' outside string literals, trims whitespace, and drops
// empty segments. A quote toggles string state; the '' escape is a close
// immediately followed by a reopen, so a plain toggle splits correctly.
inline std::vector<std::string> split_statements(std::string_view input) {
  std::vector<std::string> out;
  std::size_t seg_start = 0;
  std::size_t quote_pos = 0;
  bool in_string = false;

  auto emit = [&](std::size_t end) {
    std::size_t b = seg_start;
    while (b < end && detail_lex::is_space(input[b])) b += 1;
    std::size_t e = end;
    while (e > b && detail_lex::is_space(input[e - 1])) e -= 1;
    if (e > b) out.emplace_back(input.substr(b, e - b));
  };

  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] == '\'') {
      if (!in_string) quote_pos = i;
      in_string = !in_string;
    } else if (input[i] == ';' && !in_string) {
      emit(i);
      seg_start = i + 1;
    }
  }
  if (in_string) throw LexError(quote_pos, "unterminated string literal");
  emit(input.size());
  return out;
}

inline std::vector<Token> tokenize(std::string_view stmt) {
  using namespace detail_lex;
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < stmt.size()) {
    char c = stmt[i];
    if (is_space(c)) {
      i += 1;
    } else if (c == '\'') {
      std::size_t end = scan_string(stmt, i);
      out.push_back({TokenKind::StringLiteral, std::string(stmt.substr(i, end - i)), i});
      i = end;
    } else if (is_digit(c) || (c == '-' && i + 1 < stmt.size() && is_digit(stmt[i + 1]))) {
      std::size_t end = i + 1;
      while (end < stmt.size() && is_digit(stmt[end])) end += 1;
      out.push_back({TokenKind::IntLiteral, std::string(stmt.substr(i, end - i)), i});
      i = end;
    } else if (is_word_start(c)) {
      std::size_t end = i + 1;
      while (end < stmt.size() && is_word_char(stmt[end])) end += 1;
      std::string_view word = stmt.substr(i, end - i);
      out.push_back({is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier,
                     std::string(word), i});
      i = end;
    } else if (c == '(' || c == ')' || c == ',' || c == '=' || c == '*') {
      out.push_back({TokenKind::Symbol, std::string(1, c), i});
      i += 1;
    } else {
      throw LexError(i, "illegal character '" + std::string(1, c) + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statements

struct CreateTableStmt {
  std::string table;
  std::vector<ColumnDef> columns;
};
struct DropTableStmt {
  std::string table;
};
struct InsertStmt {
  std::string table;
  RowValue values;
};
struct SelectStmt {
  std::string table;
  std::optional<Predicate> predicate;
};
struct DeleteStmt {
  std::string table;
  std::optional<Predicate> predicate;
};
// GET addresses a row by ordinal: page = ordinal / slot_count,
// slot = ordinal mod slot_count. The direct-addressing fast path.
struct GetByRowIdStmt {
  std::string table;
  std::int64_t row_ordinal = 0;
};

using Statement = std::variant<CreateTableStmt, DropTableStmt, InsertStmt, SelectStmt, DeleteStmt,
                               GetByRowIdStmt>;

namespace detail_parse {

class Parser {
public:
  explicit Parser(const std::vector<Token>& tokens) : tokens_(tokens) {}

  Statement parse() {
    Statement stmt = parse_statement();
    if (pos_ < tokens_.size()) fail("end of statement");
    return stmt;
  }

private:
  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& expected) {
    if (pos_ < tokens_.size()) {
      const Token& t = tokens_[pos_];
      throw ParseError(t.position, expected, "'" + t.text + "'");
    }
    std::size_t end = tokens_.empty() ? 0 : tokens_.back().position + tokens_.back().text.size();
    throw ParseError(end, expected, "end of input");
  }

  bool peek_keyword(std::string_view kw) const {
    return pos_ < tokens_.size() && token_is_keyword(tokens_[pos_], kw);
  }

  void expect_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) fail("'" + std::string(kw) + "'");
    pos_ += 1;
  }

  bool accept_symbol(char c) {
    if (pos_ < tokens_.size() && token_is_symbol(tokens_[pos_], c)) {
      pos_ += 1;
      return true;
    }
    return false;
  }

  void expect_symbol(char c) {
    if (!accept_symbol(c)) fail("'" + std::string(1, c) + "'");
  }

  std::string expect_ident() {
    if (pos_ >= tokens_.size() || tokens_[pos_].kind != TokenKind::Identifier) {
      fail("identifier");
    }
    return tokens_[pos_++].text;
  }

  std::int64_t expect_int() {
    if (pos_ >= tokens_.size() || tokens_[pos_].kind != TokenKind::IntLiteral) {
      fail("integer literal");
    }
    const Token& t = tokens_[pos_];
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw ParseError(t.position, "integer in 64-bit range", "'" + t.text + "'");
    }
    pos_ += 1;
    return v;
  }

  Value expect_literal() {
    if (pos_ < tokens_.size() && tokens_[pos_].kind == TokenKind::StringLiteral) {
      return Value{decode_string_literal(tokens_[pos_++].text)};
    }
    if (pos_ < tokens_.size() && tokens_[pos_].kind == TokenKind::IntLiteral) {
      return Value{expect_int()};
    }
    fail("literal");
  }

  ColumnDef parse_coldef() {
    ColumnDef col;
    col.name = expect_ident();
    if (peek_keyword("INT")) {
      pos_ += 1;
      col.type = ColumnType::Int;
      return col;
    }
    if (peek_keyword("STR")) {
      pos_ += 1;
      expect_symbol('(');
      const Token& t = pos_ < tokens_.size() ? tokens_[pos_] : tokens_.back();
      std::int64_t width = expect_int();
      if (width < 0 || width > 0xFFFFFFFFll) {
        throw ParseError(t.position, "non-negative column width", "'" + t.text + "'");
      }
      col.type = ColumnType::Str;
      col.str_width = static_cast<std::uint32_t>(width);
      expect_symbol(')');
      return col;
    }
    fail("'INT' or 'STR'");
  }

  std::optional<Predicate> parse_where() {
    if (!peek_keyword("WHERE")) return std::nullopt;
    pos_ += 1;
    Predicate p;
    p.column = expect_ident();
    expect_symbol('=');
    p.literal = expect_literal();
    return p;
  }

  Statement parse_statement() {
    if (peek_keyword("CREATE")) {
      pos_ += 1;
      expect_keyword("TABLE");
      CreateTableStmt s;
      s.table = expect_ident();
      expect_symbol('(');
      s.columns.push_back(parse_coldef());
      while (!accept_symbol(')')) {
        if (!accept_symbol(',')) fail("',' or ')'");
        s.columns.push_back(parse_coldef());
      }
      return s;
    }
    if (peek_keyword("DROP")) {
      pos_ += 1;
      expect_keyword("TABLE");
      return DropTableStmt{expect_ident()};
    }
    if (peek_keyword("INSERT")) {
      pos_ += 1;
      expect_keyword("INTO");
      InsertStmt s;
      s.table = expect_ident();
      expect_keyword("VALUES");
      expect_symbol('(');
      s.values.values.push_back(expect_literal());
      while (!accept_symbol(')')) {
        if (!accept_symbol(',')) fail("',' or ')'");
        s.values.values.push_back(expect_literal());
      }
      return s;
    }
    if (peek_keyword("SELECT")) {
      pos_ += 1;
      expect_symbol('*');
      expect_keyword("FROM");
      SelectStmt s;
      s.table = expect_ident();
      s.predicate = parse_where();
      return s;
    }
    if (peek_keyword("DELETE")) {
      pos_ += 1;
      expect_keyword("FROM");
      DeleteStmt s;
      s.table = expect_ident();
      s.predicate = parse_where();
      return s;
    }
    if (peek_keyword("GET")) {
      pos_ += 1;
      GetByRowIdStmt s;
      s.table = expect_ident();
      s.row_ordinal = expect_int();
      return s;
    }
    fail("'CREATE', 'DROP', 'INSERT', 'SELECT', 'DELETE' or 'GET'");
  }
};

} // namespace detail_parse

inline Statement parse(const std::vector<Token>& tokens) {
  return detail_parse::Parser(tokens).parse();
}

inline Statement parse_statement(std::string_view text) { return parse(tokenize(text)); }

// ---------------------------------------------------------------------------
// Execution

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<RowValue> rows;
  std::uint64_t affected_count = 0;
};

namespace detail_exec {

inline std::vector<std::string> column_names(const TableSchema& schema) {
  std::vector<std::string> names;
  names.reserve(schema.columns.size());
  for (const ColumnDef& c : schema.columns) names.push_back(c.name);
  return names;
}

} // namespace detail_exec

inline ResultSet execute(const Statement& stmt, TableEngine& engine) {
  ResultSet rs;
  if (const auto* s = std::get_if<CreateTableStmt>(&stmt)) {
    engine.create_table(TableSchema{s->table, s->columns});
  } else if (const auto* s = std::get_if<DropTableStmt>(&stmt)) {
    engine.drop_table(s->table);
  } else if (const auto* s = std::get_if<InsertStmt>(&stmt)) {
    engine.insert_row(s->table, s->values);
    rs.affected_count = 1;
  } else if (const auto* s = std::get_if<SelectStmt>(&stmt)) {
    rs.columns = detail_exec::column_names(engine.meta(s->table).schema);
    for (ScannedRow& r : engine.scan(s->table, s->predicate)) {
      rs.rows.push_back(std::move(r.row));
    }
  } else if (const auto* s = std::get_if<DeleteStmt>(&stmt)) {
    rs.affected_count = engine.delete_where(s->table, s->predicate);
  } else if (const auto* s = std::get_if<GetByRowIdStmt>(&stmt)) {
    TableMeta meta = engine.meta(s->table);
    rs.columns = detail_exec::column_names(meta.schema);
    if (s->row_ordinal < 0) {
      throw Error(Errc::RowNotFound, "row ordinal " + std::to_string(s->row_ordinal) +
                                         " is negative");
    }
    std::uint64_t ordinal = static_cast<std::uint64_t>(s->row_ordinal);
    std::uint16_t slot_count = meta.schema.slot_count();
    if (ordinal / slot_count > 0xFFFFFFFFull) {
      throw Error(Errc::RowNotFound, "row ordinal " + std::to_string(ordinal) + " out of range");
    }
    RowId rid{static_cast<std::uint32_t>(ordinal / slot_count),
              static_cast<std::uint16_t>(ordinal % slot_count)};
    rs.rows.push_back(engine.get_row(s->table, rid));
  }
  return rs;
}

// Convenience for the shell: split, parse, and execute a whole input
// buffer, collecting one ResultSet per statement.
inline std::vector<ResultSet> execute_all(std::string_view input, TableEngine& engine) {
  std::vector<ResultSet> out;
  for (const std::string& text : split_statements(input)) {
    out.push_back(execute(parse_statement(text), engine));
  }
  return out;
}

} // namespace hardpage
