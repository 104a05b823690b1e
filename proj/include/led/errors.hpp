#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace led {

/// Base for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (empty corpus, duplicate id, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A resource file could not be opened or read.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Malformed record in a line-oriented file. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& message)
      : Error(file + ":" + std::to_string(line) + ": " + message), file_(std::move(file)), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// An external model backend failed, timed out or returned garbage.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// A scored sequence contains a token the model assigns probability zero.
class ZeroProbabilityError : public Error {
 public:
  explicit ZeroProbabilityError(std::size_t position)
      : Error("zero-probability token at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace led
