#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kcw {

/// A sweep would enumerate more programs than the configured ceiling allows.
/// Raised up front, before any work, so a partial minimum is never reported.
class ResourceLimitError : public std::runtime_error {
 public:
  ResourceLimitError(const std::string& what, long double requested, long double ceiling)
      : std::runtime_error(what), requested_(requested), ceiling_(ceiling) {}

  long double requested() const noexcept { return requested_; }
  long double ceiling() const noexcept { return ceiling_; }

 private:
  long double requested_;
  long double ceiling_;
};

/// An internal consistency check failed (e.g. a profile that increased with budget).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A verdict-cache file could not be parsed.
class CacheFormatError : public std::runtime_error {
 public:
  CacheFormatError(const std::string& what, std::size_t line)
      : std::runtime_error("cache line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace kcw
