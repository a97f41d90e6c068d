#pragma once

#include <stdexcept>
#include <string>

namespace pocketdex {

// Thrown by the text-format readers; message carries a 1-based line number.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Binary container problems, one subclass per failure so callers can
// distinguish them without string matching.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadMagicError : FormatError {
  explicit BadMagicError(const std::string& msg) : FormatError(msg) {}
};

struct VersionMismatchError : FormatError {
  explicit VersionMismatchError(const std::string& msg) : FormatError(msg) {}
};

struct TruncatedFileError : FormatError {
  explicit TruncatedFileError(const std::string& msg) : FormatError(msg) {}
};

struct DuplicateIdError : FormatError {
  explicit DuplicateIdError(const std::string& msg) : FormatError(msg) {}
};

// Violated function contract (bad argument, mismatched dimensions, ...).
struct InvalidArgument : std::invalid_argument {
  explicit InvalidArgument(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace pocketdex
