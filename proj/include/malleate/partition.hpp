#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "malleate/constants.hpp"
#include "malleate/errors.hpp"

namespace malleate {

// A set partition of {0, ..., size-1}, held in canonical restricted-growth
// form: label[0] = 0 and label[i] <= max(label[0..i-1]) + 1.  Cells are
// numbered by first appearance, which makes the label vector (and the
// canonical form string) a unique key for the partition.
class Partition {
 public:
  // Normalizes arbitrary nonnegative labels to restricted-growth form.
  static Partition from_labels(std::span<const int> labels);

  // Parses a canonical form string such as "0.1.0.2".
  static Partition parse(const std::string& text);

  static Partition whole(int size);     // a single cell
  static Partition discrete(int size);  // every element alone

  int size() const { return static_cast<int>(labels_.size()); }
  int num_cells() const { return num_cells_; }
  const std::vector<int>& labels() const { return labels_; }

  std::vector<std::vector<int>> cells() const;

  // Dot-separated cell indices, e.g. {{0,2},{1,3}} -> "0.1.0.1".
  std::string canonical_form() const;

  bool operator==(const Partition& other) const { return labels_ == other.labels_; }

 private:
  Partition(std::vector<int> labels, int num_cells)
      : labels_(std::move(labels)), num_cells_(num_cells) {}

  std::vector<int> labels_;
  int num_cells_ = 0;
};

// Streams every partition of {0..size-1} in lexicographic restricted-growth
// order, starting from the single-cell partition.  max_cells = 0 means
// unlimited.  Refuses sizes above exact_limit, pointing at heuristic mode.
class PartitionEnumerator {
 public:
  PartitionEnumerator(int size, int max_cells = 0, int exact_limit = kDefaultExactSearchLimit);

  // Writes the next label vector into out (length = size).  Returns false
  // once the stream is exhausted.
  bool next(std::vector<int>& out);

  // Number of partitions this enumerator will yield (Bell number, or a
  // Stirling prefix sum when max_cells is set).
  static std::uint64_t count(int size, int max_cells = 0);

 private:
  int size_;
  int max_cells_;
  bool started_ = false;
  bool done_ = false;
  std::vector<int> labels_;
  std::vector<int> prefix_max_;  // prefix_max_[i] = max(labels_[0..i-1]), prefix_max_[0] = -1
};

}  // namespace malleate
