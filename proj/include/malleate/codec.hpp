#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "malleate/joint_distribution.hpp"
#include "malleate/partition.hpp"

namespace malleate {

// Fixed-blocklength enumerative codec that stores a source block X^n as a bin
// label (the prefix, indexing the typical sequence of U = f(X)) followed by an
// intra-bin index (the suffix), and stores a correlated block Y^n by reusing
// the prefix verbatim and appending an index into the set of Y-sequences
// conditionally typical with the prefixed U-sequence.  All indices are written
// as fixed-length strings of storage symbols in base `storage_base`.

enum class RecordRole { kX, kY };

struct EncodedRecord {
  // Bin label digits; empty when the encoder fell back to raw coding (and for
  // every record when the design prefix length is zero).
  std::vector<int> prefix;
  // Intra-bin index digits, or the raw base-`storage_base` payload on escape.
  std::vector<int> suffix;
  // True when the block was stored verbatim because it fell outside the
  // typical sets or its index overflowed the design-rate field.  The one
  // escape-flag symbol is accounted separately (see SimReport::flag_overhead).
  bool escape = false;
  // Which decoder applies.  X-records index within a bin; Y-records index the
  // conditional set of the prefixed U-sequence.
  RecordRole role = RecordRole::kX;
};

struct CodecConfig {
  JointDistribution d;
  // Partition of the X support; U = f(X) labels its cells.
  Partition partition;
  int n = 8;
  double delta = 0.25;
  // Size of the storage alphabet; every stored field is a string of symbols
  // in {0, ..., storage_base - 1}.
  int storage_base = 2;
  std::uint64_t seed = 1;
};

class Codec {
 public:
  // Validates the configuration and enumerates the admissible count tables
  // for the typical U-sequences, the X-bins, and the conditional Y-sets.
  // Throws ValidationError on malformed input and LimitError when the
  // candidate space |alphabet|^n exceeds the enumeration limit.
  explicit Codec(CodecConfig cfg);

  const CodecConfig& config() const { return cfg_; }

  // Design-rate field widths in storage symbols.  The prefix width is
  // ceil(n H(U) / log storage_base) and both encoders share it; the suffix
  // widths are the analogous ceilings for H(X) - H(U) and H(Y|U).
  int prefix_length() const { return prefix_len_; }
  int x_suffix_length() const { return x_suffix_len_; }
  int y_suffix_length() const { return y_suffix_len_; }
  // Widths of the raw fallback payloads (enough symbols for any block).
  int x_raw_length() const { return x_raw_len_; }
  int y_raw_length() const { return y_raw_len_; }

  // Single-letter reference rates in storage symbols per source letter.
  double theory_h_x() const;
  double theory_j() const;
  double theory_h_y_given_u() const;

  // Size of the typical U-set the prefix indexes, and the lexicographic
  // rank/unrank pair on it.
  std::uint64_t num_typical_u() const { return u_tables_.total; }
  std::vector<int> typical_u(std::uint64_t rank) const;
  std::uint64_t u_rank(std::span<const int> u_seq) const;

  // Cell labels of a source block, or nullopt if a symbol lies outside the
  // distribution's X support.
  std::optional<std::vector<int>> bin_label_sequence(
      std::span<const int> xs) const;

  // Number of typical X-sequences mapped to this U-sequence, and number of
  // Y-sequences conditionally typical with it.  The U-sequence must be
  // typical (these sets are empty otherwise).
  std::uint64_t bin_size(std::span<const int> u_seq) const;
  std::uint64_t conditional_size(std::span<const int> u_seq) const;

  // Suffix widths actually written for blocks in this bin: the fewest storage
  // symbols that index the bin (for X) or its conditional set (for Y).  The
  // decoder recovers them from the prefix, so they may vary across bins;
  // x_suffix_length()/y_suffix_length() are the single-letter design widths
  // they track.
  int x_suffix_width(std::span<const int> u_seq) const;
  int y_suffix_width(std::span<const int> u_seq) const;

  // Encoders.  encode_x never fails: blocks outside the bins (or whose index
  // overflows a design field) escape to raw coding.  encode_y reuses the
  // prefix produced by encode_x for the paired block; a malformed or absent
  // prefix forces the Y-block to escape as well.
  EncodedRecord encode_x(std::span<const int> xs) const;
  EncodedRecord encode_y(std::span<const int> ys,
                         const std::vector<int>& prefix) const;

  // Inverts either encoder.  Non-escape records round-trip exactly; records
  // that do not index anything (bad digits, rank past the set size, wrong
  // field width) raise DecodeError.
  std::vector<int> decode(const EncodedRecord& record) const;

 private:
  friend struct CodecTestPeer;

  // Admissible per-context count tables for one index space, flattened one
  // after another, plus the number of sequences they collectively describe.
  struct TableSet {
    std::vector<int> flat;
    std::vector<int> slot_ctx;  // context owning each slot, nondecreasing
    int width = 0;
    std::uint64_t total = 0;
  };

  std::uint64_t rank_in_tables(const TableSet& ts,
                               const std::vector<std::vector<int>>& symbols,
                               const std::vector<int>& slot_lookup, int stride,
                               std::span<const int> ctx,
                               std::span<const int> seq) const;
  void unrank_in_tables(const TableSet& ts,
                        const std::vector<std::vector<int>>& symbols,
                        const std::vector<int>& slot_lookup, int stride,
                        std::span<const int> ctx, std::uint64_t rank,
                        std::vector<int>& out) const;
  std::uint64_t completions(const TableSet& ts, std::span<const int> consumed,
                            std::span<const int> remaining) const;

  const TableSet* find_bin(std::span<const int> u_type) const;
  const TableSet* find_cond(std::span<const int> u_type) const;
  std::vector<int> u_type_of(std::span<const int> u_seq) const;

  EncodedRecord escape_x(std::span<const int> xs) const;
  EncodedRecord escape_y(std::span<const int> ys) const;

  CodecConfig cfg_;
  int kx_ = 0;
  int ky_ = 0;
  int num_cells_ = 0;
  double budget_ = 0.0;
  double hx_nats_ = 0.0;
  double hu_nats_ = 0.0;
  double huy_nats_ = 0.0;

  // Support bookkeeping: support index per X symbol (-1 off support), the
  // cell of each support index, and the support members of each cell.
  std::vector<int> support_index_;
  std::vector<int> cell_of_support_;
  std::vector<std::vector<int>> cell_members_;

  // Typicality targets (counts scale, i.e. n * probability).
  std::vector<double> u_target_;
  std::vector<double> x_target_;      // per support symbol, by cell-major slot
  double x_target_off_support_ = 0.0; // L1 mass of off-support symbols
  std::vector<double> y_target_;      // per Y symbol
  std::vector<double> uy_target_;     // cell-major (cell, y) slots

  // Field widths; only the prefix has a fixed capacity, suffixes are sized
  // per bin.
  int prefix_len_ = 0;
  int x_suffix_len_ = 0;
  int y_suffix_len_ = 0;
  int x_raw_len_ = 0;
  int y_raw_len_ = 0;
  std::uint64_t prefix_capacity_ = 0;

  // Index spaces.  U-tables use a single context; bin and conditional tables
  // are keyed by the U-type they belong to.
  TableSet u_tables_;
  std::map<std::vector<int>, TableSet> bin_tables_;
  std::map<std::vector<int>, TableSet> cond_tables_;

  // Slot layouts: symbols allowed per context, and (context * stride +
  // symbol) -> slot lookups.
  std::vector<std::vector<int>> u_symbols_;
  std::vector<int> u_slot_lookup_;
  std::vector<std::vector<int>> bin_symbols_;
  std::vector<int> bin_slot_lookup_;
  std::vector<std::vector<int>> cond_symbols_;
  std::vector<int> cond_slot_lookup_;
  std::vector<int> zero_ctx_;

  std::vector<std::vector<std::uint64_t>> binom_;
};

Codec build_codec(const CodecConfig& cfg);

// One row per trial when traces are requested: which blocks escaped, whether
// the stored prefixes agree, and the suffix widths actually written.
struct TrialTrace {
  std::uint64_t trial = 0;
  bool x_escape = false;
  bool y_escape = false;
  bool prefix_match = true;
  int x_suffix_symbols = 0;
  int y_suffix_symbols = 0;
};

struct SimReport {
  std::uint64_t trials = 0;

  // Failure fractions: delta_x / delta_y count blocks stored by escape (or,
  // defensively, failing their decode check); delta_u counts trials whose two
  // stored prefixes differ; delta = max(delta_x, delta_y).
  double delta_x = 0.0;
  double delta_y = 0.0;
  double delta_u = 0.0;
  double delta = 0.0;

  // Empirical storage rates in storage symbols per source letter, averaged
  // over all trials: j_emp counts prefix symbols, k_emp prefix plus X-suffix,
  // l_emp prefix plus Y-suffix, so k_emp - j_emp and l_emp - j_emp are the
  // exact average suffix costs.
  double j_emp = 0.0;
  double k_emp = 0.0;
  double l_emp = 0.0;

  // Average Y-suffix width (symbols per letter) that would index the decoder's
  // candidate set for the trial's bin, taken over trials whose X-block was
  // binned.  This is the rate a reliable Y-suffix needs, independent of the
  // design width actually configured.
  double y_suffix_required = 0.0;

  // Single-letter reference rates in storage symbols per letter: H(X), the
  // prefix rate J = H(U), and H(Y|U).
  double theory_h_x = 0.0;
  double theory_j = 0.0;
  double theory_h_y_given_u = 0.0;

  // Design rates implied by the integer field widths, the per-letter cost of
  // the escape flag symbol, and the ceiling loss design_j - theory_j.
  double design_j = 0.0;
  double design_k = 0.0;
  double design_l = 0.0;
  double flag_overhead = 0.0;
  double prefix_rounding = 0.0;

  std::uint64_t decode_failures = 0;
  std::vector<TrialTrace> trace;
};

struct SimOptions {
  int threads = 1;
  bool keep_trace = false;
};

// Draws `trials` iid blocks from the source, stores each pair through the
// codec (the Y-encoder reusing the X-record's prefix), verifies every record
// against its decoder, and aggregates the report.  Deterministic given the
// seed: trial t draws from an independent stream keyed by (seed, t), and the
// aggregation is order-independent, so any thread count gives identical
// results.
SimReport simulate(const CodecConfig& cfg, std::uint64_t trials,
                   const SimOptions& options = {});

// Baseline with the same design rates but unstructured bins: typical
// X-sequences are hashed to uniformly random bin labels (collision-free when
// the prefix capacity allows, so singleton bins realize the J = H(X) corner),
// and the Y-decoder's candidate set for a bin is the union of the
// conditionally typical sets of its members.  Reports the Y-suffix rate that
// union forces; its l_emp approaches H(X) - J + H(Y|X) instead of H(Y|U).
SimReport simulate_uniform_binning(const CodecConfig& cfg,
                                   std::uint64_t trials,
                                   const SimOptions& options = {});

}  // namespace malleate
