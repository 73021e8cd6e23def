#pragma once

#include <stdexcept>
#include <string>

namespace malleate {

// Raised when an input violates a documented precondition (bad probabilities,
// mismatched dimensions, undefined conditional rows, unparseable files).
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a request is well-formed but exceeds a configured resource
// ceiling (partition enumeration limit, sequence enumeration limit, counts
// that would overflow 64-bit arithmetic).  The CLI maps this to exit code 3.
class LimitError : public std::runtime_error {
 public:
  explicit LimitError(const std::string& what) : std::runtime_error(what) {}
};

// A record that cannot be decoded (e.g. its prefix is not a valid typical
// sequence index).  Simulations catch this and count it; it is not fatal.
class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace malleate
