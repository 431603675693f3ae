#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace myotext {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kData = 3,
  kScorer = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ExitCode::kUsage, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::kIo, what) {}
};

/// Input that is readable but invalid.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ExitCode::kData, what) {}
};

class DomainError : public DataError {
 public:
  explicit DomainError(const std::string& what) : DataError("domain error: " + what) {}
};

class ConfigError : public DataError {
 public:
  explicit ConfigError(const std::string& what) : DataError("configuration error: " + what) {}
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Character outside a-z and single spaces.
class InvalidCharacter : public DataError {
 public:
  InvalidCharacter(std::size_t index, const std::string& what)
      : DataError("unsupported input at index " + std::to_string(index) + ": " + what),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Scorer failure during decoding; position is the word slot being expanded.
class DecodeError : public Error {
 public:
  DecodeError(std::size_t position, const std::string& what)
      : Error(ExitCode::kScorer,
              "decode error at position " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace myotext
