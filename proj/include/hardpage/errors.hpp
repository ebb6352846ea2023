#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hardpage {

enum class Errc : std::uint8_t {
  // codec
  InvalidBlockSize,
  // block pool
  InvalidPoolConfig,
  PoolExhausted,
  InvalidHandle,
  DoubleFree,
  // page store
  PageNotFound,
  PageCorrupt,
  PageMismatch,
  StorageError,
  RootLocked,
  // tables
  TableExists,
  TableNotFound,
  CatalogFull,
  RowTooLarge,
  SchemaViolation,
  RowNotFound,
  RowCorrupt,
  // cache
  CacheSaturated,
  PinUnderflow,
  // query frontend
  LexError,
  ParseError,
  // fault harness
  InvalidOffset,
  NothingToInject,
  // bench
  BenchTableExists,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidBlockSize: return "InvalidBlockSize";
    case Errc::InvalidPoolConfig: return "InvalidPoolConfig";
    case Errc::PoolExhausted: return "PoolExhausted";
    case Errc::InvalidHandle: return "InvalidHandle";
    case Errc::DoubleFree: return "DoubleFree";
    case Errc::PageNotFound: return "PageNotFound";
    case Errc::PageCorrupt: return "PageCorrupt";
    case Errc::PageMismatch: return "PageMismatch";
    case Errc::StorageError: return "StorageError";
    case Errc::RootLocked: return "RootLocked";
    case Errc::TableExists: return "TableExists";
    case Errc::TableNotFound: return "TableNotFound";
    case Errc::CatalogFull: return "CatalogFull";
    case Errc::RowTooLarge: return "RowTooLarge";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::RowNotFound: return "RowNotFound";
    case Errc::RowCorrupt: return "RowCorrupt";
    case Errc::CacheSaturated: return "CacheSaturated";
    case Errc::PinUnderflow: return "PinUnderflow";
    case Errc::LexError: return "LexError";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidOffset: return "InvalidOffset";
    case Errc::NothingToInject: return "NothingToInject";
    case Errc::BenchTableExists: return "BenchTableExists";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

private:
  Errc code_;
};

// Lexer failure; offset is a byte position within the offending statement text.
class LexError : public Error {
public:
  LexError(std::size_t offset, const std::string& what)
      : Error(Errc::LexError, what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

// Parser failure; carries what was expected and what was found.
class ParseError : public Error {
public:
  ParseError(std::size_t offset, const std::string& expected, const std::string& found)
      : Error(Errc::ParseError,
              "expected " + expected + ", found " + found + " at offset " + std::to_string(offset)),
        offset_(offset), expected_(expected), found_(found) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

} // namespace hardpage
