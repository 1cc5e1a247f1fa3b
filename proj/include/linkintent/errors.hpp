#pragma once

#include <stdexcept>
#include <string>

namespace linkintent {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/// Input text does not conform to the expected file format.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
  ParseError(const std::string& file, size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what) {}
};

/// A structural invariant is violated: wrong counts, duplicate ids,
/// dangling references, ragged matrices, mismatched id sets.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A name, label, or id failed to resolve against loaded data.
class LookupError : public Error {
 public:
  explicit LookupError(const std::string& what) : Error(what) {}
};

}  // namespace linkintent
