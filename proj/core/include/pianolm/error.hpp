#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pianolm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed binary input. Carries the byte offset where decoding failed.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class FormatError : public Error {
public:
  using Error::Error;
};

/// A token or codec structure is malformed (missing framing, misplaced specials).
class StructureError : public Error {
public:
  using Error::Error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

}  // namespace pianolm
