#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roughbattery {

/// Base of every error the library throws. The CLI maps all of these to exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// Schema or configuration does not match the data, or is itself invalid.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Malformed input record. Carries the 1-based physical line number.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Data violates an operation's precondition (all-missing column, unknown label, shape mismatch).
class DataError : public Error {
public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
public:
  using Error::Error;
};

/// Pipeline failure tagged with the stage that raised it.
class StageError : public Error {
public:
  StageError(std::string stage, const std::string& msg)
      : Error(stage + ": " + msg), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

}  // namespace roughbattery
