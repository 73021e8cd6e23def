#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "malleate/errors.hpp"

namespace malleate {

// An ordered list of distinct symbol labels.  Order is significant: it fixes
// row/column indices, canonical partition forms, and sequence lexicographic
// order everywhere downstream.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) {
      throw ValidationError("alphabet must contain at least one symbol");
    }
    std::unordered_set<std::string> seen;
    for (const auto& s : symbols_) {
      if (!seen.insert(s).second) {
        throw ValidationError("alphabet symbols must be distinct: duplicate \"" + s + "\"");
      }
    }
  }

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbol(int i) const { return symbols_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<std::string> symbols_;
};

// Convenience: "0", "1", ..., "k-1".
inline Alphabet numeric_alphabet(int k) {
  std::vector<std::string> syms;
  syms.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) syms.push_back(std::to_string(i));
  return Alphabet(std::move(syms));
}

}  // namespace malleate
