#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace expertrank {

// Base class for all library failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension mismatch between matrices or dataset fields.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Malformed input stream; carries the byte offset of the offending spot.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error("byte " + std::to_string(byte_offset) + ": " + message),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Failure while loading an on-disk artifact; names the file and line.
class LoadError : public Error {
 public:
  LoadError(const std::string& file, std::size_t line, const std::string& message)
      : Error(line > 0 ? file + ":" + std::to_string(line) + ": " + message
                       : file + ": " + message) {}
};

}  // namespace expertrank
