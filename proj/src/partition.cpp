#include "malleate/partition.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace malleate {

namespace {

void require_positive_size(int size) {
  if (size < 1) {
    throw ValidationError("partition size must be at least 1, got " + std::to_string(size));
  }
}

// Checks the restricted-growth property and returns the number of cells.
int verify_growth(const std::vector<int>& labels) {
  int prefix_max = -1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] > prefix_max + 1) {
      throw ValidationError("labels are not in restricted-growth form at position " +
                            std::to_string(i) + " (value " + std::to_string(labels[i]) + ")");
    }
    prefix_max = std::max(prefix_max, labels[i]);
  }
  return prefix_max + 1;
}

}  // namespace

Partition Partition::from_labels(std::span<const int> labels) {
  require_positive_size(static_cast<int>(labels.size()));
  std::map<int, int> renumber;  // original label -> first-appearance index
  std::vector<int> canonical(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw ValidationError("partition labels must be nonnegative, got " +
                            std::to_string(labels[i]) + " at position " + std::to_string(i));
    }
    auto [it, fresh] = renumber.emplace(labels[i], static_cast<int>(renumber.size()));
    canonical[i] = it->second;
    (void)fresh;
  }
  return Partition(std::move(canonical), static_cast<int>(renumber.size()));
}

Partition Partition::parse(const std::string& text) {
  std::vector<int> labels;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, '.')) {
    std::size_t pos = 0;
    int value = 0;
    try {
      value = std::stoi(token, &pos);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse partition token '" + token + "' in '" + text + "'");
    }
    if (pos != token.size() || value < 0) {
      throw ValidationError("cannot parse partition token '" + token + "' in '" + text + "'");
    }
    labels.push_back(value);
  }
  require_positive_size(static_cast<int>(labels.size()));
  int cells = verify_growth(labels);
  return Partition(std::move(labels), cells);
}

Partition Partition::whole(int size) {
  require_positive_size(size);
  return Partition(std::vector<int>(static_cast<std::size_t>(size), 0), 1);
}

Partition Partition::discrete(int size) {
  require_positive_size(size);
  std::vector<int> labels(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) labels[static_cast<std::size_t>(i)] = i;
  return Partition(std::move(labels), size);
}

std::vector<std::vector<int>> Partition::cells() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_cells_));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    out[static_cast<std::size_t>(labels_[i])].push_back(static_cast<int>(i));
  }
  return out;
}

std::string Partition::canonical_form() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i > 0) out += '.';
    out += std::to_string(labels_[i]);
  }
  return out;
}

PartitionEnumerator::PartitionEnumerator(int size, int max_cells, int exact_limit)
    : size_(size), max_cells_(max_cells == 0 ? size : max_cells) {
  require_positive_size(size);
  if (max_cells < 0) {
    throw ValidationError("max_cells must be nonnegative, got " + std::to_string(max_cells));
  }
  if (size > exact_limit) {
    throw LimitError("support of size " + std::to_string(size) +
                     " exceeds the exhaustive-search limit of " + std::to_string(exact_limit) +
                     "; use the heuristic solver or raise the limit explicitly");
  }
  labels_.assign(static_cast<std::size_t>(size), 0);
  prefix_max_.assign(static_cast<std::size_t>(size), 0);
  prefix_max_[0] = -1;
}

bool PartitionEnumerator::next(std::vector<int>& out) {
  if (done_) return false;
  if (!started_) {
    started_ = true;  // the all-zeros single cell is the lexicographic minimum
    out = labels_;
    return true;
  }
  // Find the rightmost position that can still grow: a label may rise to one
  // past the prefix maximum, but never to or beyond max_cells_.
  for (int i = size_ - 1; i >= 1; --i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    const int cap = std::min(prefix_max_[ui] + 1, max_cells_ - 1);
    if (labels_[ui] < cap) {
      ++labels_[ui];
      for (std::size_t k = ui + 1; k < labels_.size(); ++k) {
        labels_[k] = 0;
        prefix_max_[k] = std::max(prefix_max_[k - 1], labels_[k - 1]);
      }
      out = labels_;
      return true;
    }
  }
  done_ = true;
  return false;
}

std::uint64_t PartitionEnumerator::count(int size, int max_cells) {
  require_positive_size(size);
  if (size > 25) {
    throw LimitError("partition counts overflow 64 bits beyond size 25, got " +
                     std::to_string(size));
  }
  const int cells = max_cells == 0 ? size : std::min(max_cells, size);
  // Stirling numbers of the second kind: S(n, k) = k S(n-1, k) + S(n-1, k-1).
  std::vector<std::uint64_t> row(static_cast<std::size_t>(size) + 1, 0);
  row[0] = 1;
  for (int n = 1; n <= size; ++n) {
    for (int k = n; k >= 1; --k) {
      row[static_cast<std::size_t>(k)] = static_cast<std::uint64_t>(k) *
                                             row[static_cast<std::size_t>(k)] +
                                         row[static_cast<std::size_t>(k) - 1];
    }
    row[0] = 0;
  }
  std::uint64_t total = 0;
  for (int k = 1; k <= cells; ++k) total += row[static_cast<std::size_t>(k)];
  return total;
}

}  // namespace malleate
