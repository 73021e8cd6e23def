#include "malleate/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "malleate/constants.hpp"
#include "malleate/errors.hpp"
#include "malleate/rng.hpp"
#include "malleate/typicality.hpp"

namespace malleate {
namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 pow_clamped(u64 base, int exp) {
  u128 v = 1;
  for (int i = 0; i < exp; ++i) {
    v *= base;
    if (v > std::numeric_limits<u64>::max()) {
      return std::numeric_limits<u64>::max();
    }
  }
  return static_cast<u64>(v);
}

void check_candidate_space(int alphabet, int n, const char* which) {
  u128 v = 1;
  for (int i = 0; i < n; ++i) {
    v *= static_cast<unsigned>(alphabet);
    if (v > kDefaultEnumerationLimit) {
      throw LimitError(std::string("candidate space |") + which +
                       "|^n exceeds the enumeration limit; reduce the "
                       "blocklength or the alphabet");
    }
  }
}

// Fewest storage symbols whose combinations cover `count` distinct values.
int symbols_for(u64 count, int base) {
  int len = 0;
  u128 cap = 1;
  while (cap < count) {
    cap *= static_cast<unsigned>(base);
    ++len;
  }
  return len;
}

int ceil_symbols(double total_nats, double ln_base) {
  const double v = total_nats / ln_base;
  return std::max(0, static_cast<int>(std::ceil(v - 1e-9)));
}

std::vector<int> to_digits(u64 value, int len, int base) {
  std::vector<int> out(static_cast<std::size_t>(len), 0);
  for (int i = len - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] =
        static_cast<int>(value % static_cast<u64>(base));
    value /= static_cast<u64>(base);
  }
  return out;
}

std::optional<u64> from_digits(std::span<const int> digits, int base) {
  u64 v = 0;
  for (int d : digits) {
    if (d < 0 || d >= base) return std::nullopt;
    v = v * static_cast<u64>(base) + static_cast<u64>(d);
  }
  return v;
}

double entropy_nats(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

constexpr u64 kTableEntryLimit = u64{1} << 22;

}  // namespace

Codec::Codec(CodecConfig cfg) : cfg_(std::move(cfg)) {
  const JointDistribution& d = cfg_.d;
  kx_ = d.size_x();
  ky_ = d.size_y();
  if (cfg_.n < 1) {
    throw ValidationError("codec blocklength must be at least 1");
  }
  if (!std::isfinite(cfg_.delta) || cfg_.delta < 0.0) {
    throw ValidationError("codec delta must be finite and nonnegative");
  }
  if (cfg_.storage_base < 2) {
    throw ValidationError("storage base must be at least 2");
  }
  const std::vector<int> support = d.support_x();
  if (cfg_.partition.size() != static_cast<int>(support.size())) {
    throw ValidationError(
        "partition size " + std::to_string(cfg_.partition.size()) +
        " does not match the X support size " +
        std::to_string(support.size()));
  }
  check_candidate_space(kx_, cfg_.n, "X");
  check_candidate_space(ky_, cfg_.n, "Y");

  num_cells_ = cfg_.partition.num_cells();
  budget_ = cfg_.n * cfg_.delta;

  support_index_.assign(static_cast<std::size_t>(kx_), -1);
  for (std::size_t i = 0; i < support.size(); ++i) {
    support_index_[static_cast<std::size_t>(support[i])] =
        static_cast<int>(i);
  }
  cell_of_support_ = cfg_.partition.labels();
  cell_members_.assign(static_cast<std::size_t>(num_cells_), {});
  for (std::size_t i = 0; i < support.size(); ++i) {
    cell_members_[static_cast<std::size_t>(cell_of_support_[i])].push_back(
        support[i]);
  }

  const Eigen::VectorXd px = d.marginal_x();
  const Eigen::VectorXd py = d.marginal_y();
  const Eigen::MatrixXd& pxy = d.pxy();

  Eigen::VectorXd pu = Eigen::VectorXd::Zero(num_cells_);
  for (std::size_t i = 0; i < support.size(); ++i) {
    pu[cell_of_support_[i]] += px[support[i]];
  }
  std::vector<double> puy(static_cast<std::size_t>(num_cells_ * ky_), 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) {
    const int g = cell_of_support_[i];
    for (int y = 0; y < ky_; ++y) {
      puy[static_cast<std::size_t>(g * ky_ + y)] += pxy(support[i], y);
    }
  }

  u_target_.assign(static_cast<std::size_t>(num_cells_), 0.0);
  for (int g = 0; g < num_cells_; ++g) u_target_[g] = cfg_.n * pu[g];
  x_target_.clear();
  for (int g = 0; g < num_cells_; ++g) {
    for (int sym : cell_members_[g]) x_target_.push_back(cfg_.n * px[sym]);
  }
  x_target_off_support_ = 0.0;
  for (int s = 0; s < kx_; ++s) {
    if (support_index_[s] < 0) x_target_off_support_ += cfg_.n * px[s];
  }
  y_target_.assign(static_cast<std::size_t>(ky_), 0.0);
  for (int y = 0; y < ky_; ++y) y_target_[y] = cfg_.n * py[y];
  uy_target_.assign(puy.size(), 0.0);
  for (std::size_t j = 0; j < puy.size(); ++j) uy_target_[j] = cfg_.n * puy[j];

  hu_nats_ = entropy_nats(pu);
  hx_nats_ = entropy_nats(px);
  huy_nats_ = 0.0;
  for (double p : puy) {
    if (p > 0.0) huy_nats_ -= p * std::log(p);
  }

  const double ln_v = std::log(static_cast<double>(cfg_.storage_base));
  prefix_len_ = ceil_symbols(cfg_.n * hu_nats_, ln_v);
  x_suffix_len_ = ceil_symbols(cfg_.n * std::max(0.0, hx_nats_ - hu_nats_), ln_v);
  y_suffix_len_ = ceil_symbols(cfg_.n * std::max(0.0, huy_nats_ - hu_nats_), ln_v);
  prefix_capacity_ = pow_clamped(cfg_.storage_base, prefix_len_);
  x_raw_len_ = symbols_for(pow_clamped(kx_, cfg_.n), cfg_.storage_base);
  y_raw_len_ = symbols_for(pow_clamped(ky_, cfg_.n), cfg_.storage_base);

  binom_.assign(static_cast<std::size_t>(cfg_.n + 1),
                std::vector<u64>(static_cast<std::size_t>(cfg_.n + 1), 0));
  for (int a = 0; a <= cfg_.n; ++a) {
    binom_[a][0] = 1;
    for (int b = 1; b <= a; ++b) {
      binom_[a][b] = binom_[a - 1][b - 1] + binom_[a - 1][b];
    }
  }

  // Slot layouts.
  u_symbols_.assign(1, {});
  u_slot_lookup_.assign(static_cast<std::size_t>(num_cells_), 0);
  for (int g = 0; g < num_cells_; ++g) {
    u_symbols_[0].push_back(g);
    u_slot_lookup_[g] = g;
  }
  bin_symbols_ = cell_members_;
  bin_slot_lookup_.assign(static_cast<std::size_t>(kx_), -1);
  {
    int slot = 0;
    for (int g = 0; g < num_cells_; ++g) {
      for (int sym : cell_members_[g]) bin_slot_lookup_[sym] = slot++;
    }
  }
  cond_symbols_.assign(static_cast<std::size_t>(num_cells_), {});
  cond_slot_lookup_.assign(static_cast<std::size_t>(num_cells_ * ky_), 0);
  for (int g = 0; g < num_cells_; ++g) {
    for (int y = 0; y < ky_; ++y) {
      cond_symbols_[g].push_back(y);
      cond_slot_lookup_[g * ky_ + y] = g * ky_ + y;
    }
  }
  zero_ctx_.assign(static_cast<std::size_t>(cfg_.n), 0);

  // Count of sequences realizing one table: product over contexts of the
  // multinomial coefficient of its row.
  const auto table_count = [&](std::span<const int> table,
                               std::span<const int> slot_ctx,
                               std::span<const int> row_totals) -> u64 {
    u64 prod = 1;
    int cur = -1;
    int left = 0;
    for (std::size_t s = 0; s < table.size(); ++s) {
      const int g = slot_ctx[s];
      if (g != cur) {
        cur = g;
        left = row_totals[g];
      }
      prod *= binom_[left][table[s]];
      left -= table[s];
    }
    return prod;
  };

  // Typical bin-label types: compositions of n over the cells within the L1
  // budget.  The partial sums accumulate left to right, matching the
  // admissibility checks the encoders run on realized counts.
  std::vector<std::vector<int>> u_types;
  {
    std::vector<int> type(static_cast<std::size_t>(num_cells_), 0);
    const std::function<void(int, int, double)> assign = [&](int g, int rem,
                                                             double l1) {
      if (g == num_cells_ - 1) {
        type[g] = rem;
        if (l1 + std::abs(rem - u_target_[g]) <= budget_) {
          u_types.push_back(type);
        }
        return;
      }
      for (int c = 0; c <= rem; ++c) {
        type[g] = c;
        const double next = l1 + std::abs(c - u_target_[g]);
        if (next > budget_) continue;
        assign(g + 1, rem - c, next);
      }
    };
    assign(0, cfg_.n, 0.0);
  }

  u_tables_.width = num_cells_;
  u_tables_.slot_ctx.assign(static_cast<std::size_t>(num_cells_), 0);
  std::vector<int> one_row{cfg_.n};
  for (const std::vector<int>& type : u_types) {
    u_tables_.flat.insert(u_tables_.flat.end(), type.begin(), type.end());
    u_tables_.total += table_count(type, u_tables_.slot_ctx, one_row);
  }

  // Admissible count tables for each typical label type: X-bins constrain the
  // per-cell symbol counts to an overall typical X-type, conditional Y-sets
  // constrain the (cell, y) pair counts and the y column sums.
  u64 table_entries = u_tables_.flat.size();
  const int bin_width = static_cast<int>(support.size());
  std::vector<int> bin_ctx(static_cast<std::size_t>(bin_width), 0);
  {
    int slot = 0;
    for (int g = 0; g < num_cells_; ++g) {
      for (std::size_t k = 0; k < cell_members_[g].size(); ++k) {
        bin_ctx[slot++] = g;
      }
    }
  }
  const int cond_width = num_cells_ * ky_;
  std::vector<int> cond_ctx(static_cast<std::size_t>(cond_width), 0);
  for (int s = 0; s < cond_width; ++s) cond_ctx[s] = s / ky_;

  for (const std::vector<int>& type : u_types) {
    TableSet bins;
    bins.width = bin_width;
    bins.slot_ctx = bin_ctx;
    std::vector<int> table(static_cast<std::size_t>(bin_width), 0);
    const std::function<void(int, int, double)> fill_bin =
        [&](int slot, int row_rem, double l1) {
          const int g = bin_ctx[slot];
          const bool last_in_row =
              slot + 1 == bin_width || bin_ctx[slot + 1] != g;
          if (last_in_row) {
            table[slot] = row_rem;
            const double next = l1 + std::abs(row_rem - x_target_[slot]);
            if (next > budget_) return;
            if (slot + 1 == bin_width) {
              if (next + x_target_off_support_ <= budget_) {
                bins.flat.insert(bins.flat.end(), table.begin(), table.end());
                bins.total += table_count(table, bin_ctx, type);
              }
            } else {
              fill_bin(slot + 1, type[bin_ctx[slot + 1]], next);
            }
            return;
          }
          for (int c = 0; c <= row_rem; ++c) {
            table[slot] = c;
            const double next = l1 + std::abs(c - x_target_[slot]);
            if (next > budget_) continue;
            fill_bin(slot + 1, row_rem - c, next);
          }
        };
    fill_bin(0, type[bin_ctx[0]], 0.0);

    TableSet cond;
    cond.width = cond_width;
    cond.slot_ctx = cond_ctx;
    std::vector<int> ctable(static_cast<std::size_t>(cond_width), 0);
    const std::function<void(int, int, double)> fill_cond =
        [&](int slot, int row_rem, double l1) {
          const int g = cond_ctx[slot];
          const bool last_in_row =
              slot + 1 == cond_width || cond_ctx[slot + 1] != g;
          if (last_in_row) {
            ctable[slot] = row_rem;
            const double next = l1 + std::abs(row_rem - uy_target_[slot]);
            if (next > budget_) return;
            if (slot + 1 == cond_width) {
              // The update block must be typical on its own as well.
              double ymarg = 0.0;
              for (int y = 0; y < ky_; ++y) {
                int cnt = 0;
                for (int gg = 0; gg < num_cells_; ++gg) {
                  cnt += ctable[gg * ky_ + y];
                }
                ymarg += std::abs(cnt - y_target_[y]);
              }
              if (ymarg <= budget_) {
                cond.flat.insert(cond.flat.end(), ctable.begin(),
                                 ctable.end());
                cond.total += table_count(ctable, cond_ctx, type);
              }
            } else {
              fill_cond(slot + 1, type[cond_ctx[slot + 1]], next);
            }
            return;
          }
          for (int c = 0; c <= row_rem; ++c) {
            ctable[slot] = c;
            const double next = l1 + std::abs(c - uy_target_[slot]);
            if (next > budget_) continue;
            fill_cond(slot + 1, row_rem - c, next);
          }
        };
    fill_cond(0, type[cond_ctx[0]], 0.0);

    table_entries += bins.flat.size() + cond.flat.size();
    if (table_entries > kTableEntryLimit) {
      throw LimitError(
          "the codec's admissible count tables exceed the enumeration "
          "limit; reduce the blocklength or tighten delta");
    }
    bin_tables_.emplace(type, std::move(bins));
    cond_tables_.emplace(type, std::move(cond));
  }
}

double Codec::theory_h_x() const {
  return hx_nats_ / std::log(static_cast<double>(cfg_.storage_base));
}

double Codec::theory_j() const {
  return hu_nats_ / std::log(static_cast<double>(cfg_.storage_base));
}

double Codec::theory_h_y_given_u() const {
  return (huy_nats_ - hu_nats_) /
         std::log(static_cast<double>(cfg_.storage_base));
}

std::uint64_t Codec::completions(const TableSet& ts,
                                 std::span<const int> consumed,
                                 std::span<const int> remaining) const {
  const int width = ts.width;
  const std::size_t num_tables = width == 0 ? 0 : ts.flat.size() / width;
  u64 acc = 0;
  for (std::size_t t = 0; t < num_tables; ++t) {
    const int* tbl = ts.flat.data() + t * static_cast<std::size_t>(width);
    u64 prod = 1;
    int cur = -1;
    int left = 0;
    bool ok = true;
    for (int s = 0; s < width; ++s) {
      const int need = tbl[s] - consumed[s];
      if (need < 0) {
        ok = false;
        break;
      }
      const int g = ts.slot_ctx[s];
      if (g != cur) {
        cur = g;
        left = remaining[g];
      }
      if (need > left) {
        ok = false;
        break;
      }
      prod *= binom_[left][need];
      left -= need;
      if (prod == 0) {
        ok = false;
        break;
      }
    }
    if (ok) acc += prod;
  }
  return acc;
}

std::uint64_t Codec::rank_in_tables(const TableSet& ts,
                                    const std::vector<std::vector<int>>& symbols,
                                    const std::vector<int>& slot_lookup,
                                    int stride, std::span<const int> ctx,
                                    std::span<const int> seq) const {
  std::vector<int> consumed(static_cast<std::size_t>(ts.width), 0);
  std::vector<int> remaining(symbols.size(), 0);
  for (int i = 0; i < cfg_.n; ++i) remaining[ctx[i]] += 1;
  u64 r = 0;
  for (int i = 0; i < cfg_.n; ++i) {
    const int g = ctx[i];
    remaining[g] -= 1;
    for (int cand : symbols[g]) {
      if (cand >= seq[i]) break;
      const int slot = slot_lookup[g * stride + cand];
      consumed[slot] += 1;
      r += completions(ts, consumed, remaining);
      consumed[slot] -= 1;
    }
    consumed[slot_lookup[g * stride + seq[i]]] += 1;
  }
  return r;
}

void Codec::unrank_in_tables(const TableSet& ts,
                             const std::vector<std::vector<int>>& symbols,
                             const std::vector<int>& slot_lookup, int stride,
                             std::span<const int> ctx, std::uint64_t rank,
                             std::vector<int>& out) const {
  std::vector<int> consumed(static_cast<std::size_t>(ts.width), 0);
  std::vector<int> remaining(symbols.size(), 0);
  for (int i = 0; i < cfg_.n; ++i) remaining[ctx[i]] += 1;
  out.assign(static_cast<std::size_t>(cfg_.n), 0);
  for (int i = 0; i < cfg_.n; ++i) {
    const int g = ctx[i];
    remaining[g] -= 1;
    bool placed = false;
    for (int cand : symbols[g]) {
      const int slot = slot_lookup[g * stride + cand];
      consumed[slot] += 1;
      const u64 c = completions(ts, consumed, remaining);
      if (rank < c) {
        out[i] = cand;
        placed = true;
        break;
      }
      rank -= c;
      consumed[slot] -= 1;
    }
    if (!placed) {
      throw DecodeError("index does not address a sequence in this set");
    }
  }
}

const Codec::TableSet* Codec::find_bin(std::span<const int> u_type) const {
  const auto it = bin_tables_.find(std::vector<int>(u_type.begin(), u_type.end()));
  return it == bin_tables_.end() ? nullptr : &it->second;
}

const Codec::TableSet* Codec::find_cond(std::span<const int> u_type) const {
  const auto it = cond_tables_.find(std::vector<int>(u_type.begin(), u_type.end()));
  return it == cond_tables_.end() ? nullptr : &it->second;
}

std::vector<int> Codec::u_type_of(std::span<const int> u_seq) const {
  std::vector<int> type(static_cast<std::size_t>(num_cells_), 0);
  for (int g : u_seq) {
    if (g < 0 || g >= num_cells_) {
      throw ValidationError("bin label out of range");
    }
    type[g] += 1;
  }
  return type;
}

std::vector<int> Codec::typical_u(std::uint64_t rank) const {
  if (rank >= u_tables_.total) {
    throw ValidationError("typical bin-label index out of range");
  }
  std::vector<int> out;
  unrank_in_tables(u_tables_, u_symbols_, u_slot_lookup_, num_cells_,
                   zero_ctx_, rank, out);
  return out;
}

std::uint64_t Codec::u_rank(std::span<const int> u_seq) const {
  if (static_cast<int>(u_seq.size()) != cfg_.n) {
    throw ValidationError("bin-label sequence has the wrong length");
  }
  const std::vector<int> type = u_type_of(u_seq);
  double l1 = 0.0;
  for (int g = 0; g < num_cells_; ++g) l1 += std::abs(type[g] - u_target_[g]);
  if (l1 > budget_) {
    throw ValidationError("bin-label sequence is not typical");
  }
  return rank_in_tables(u_tables_, u_symbols_, u_slot_lookup_, num_cells_,
                        zero_ctx_, u_seq);
}

std::optional<std::vector<int>> Codec::bin_label_sequence(
    std::span<const int> xs) const {
  if (static_cast<int>(xs.size()) != cfg_.n) {
    throw ValidationError("source block has the wrong length");
  }
  std::vector<int> u(static_cast<std::size_t>(cfg_.n), 0);
  for (int i = 0; i < cfg_.n; ++i) {
    const int x = xs[i];
    if (x < 0 || x >= kx_) {
      throw ValidationError("source symbol out of range");
    }
    const int sup = support_index_[x];
    if (sup < 0) return std::nullopt;
    u[i] = cell_of_support_[sup];
  }
  return u;
}

std::uint64_t Codec::bin_size(std::span<const int> u_seq) const {
  if (static_cast<int>(u_seq.size()) != cfg_.n) {
    throw ValidationError("bin-label sequence has the wrong length");
  }
  const TableSet* ts = find_bin(u_type_of(u_seq));
  return ts == nullptr ? 0 : ts->total;
}

std::uint64_t Codec::conditional_size(std::span<const int> u_seq) const {
  if (static_cast<int>(u_seq.size()) != cfg_.n) {
    throw ValidationError("bin-label sequence has the wrong length");
  }
  const TableSet* ts = find_cond(u_type_of(u_seq));
  return ts == nullptr ? 0 : ts->total;
}

int Codec::x_suffix_width(std::span<const int> u_seq) const {
  return symbols_for(bin_size(u_seq), cfg_.storage_base);
}

int Codec::y_suffix_width(std::span<const int> u_seq) const {
  return symbols_for(conditional_size(u_seq), cfg_.storage_base);
}

EncodedRecord Codec::escape_x(std::span<const int> xs) const {
  u64 value = 0;
  for (int x : xs) value = value * static_cast<u64>(kx_) + static_cast<u64>(x);
  EncodedRecord record;
  record.escape = true;
  record.role = RecordRole::kX;
  record.suffix = to_digits(value, x_raw_len_, cfg_.storage_base);
  return record;
}

EncodedRecord Codec::escape_y(std::span<const int> ys) const {
  u64 value = 0;
  for (int y : ys) value = value * static_cast<u64>(ky_) + static_cast<u64>(y);
  EncodedRecord record;
  record.escape = true;
  record.role = RecordRole::kY;
  record.suffix = to_digits(value, y_raw_len_, cfg_.storage_base);
  return record;
}

EncodedRecord Codec::encode_x(std::span<const int> xs) const {
  const std::optional<std::vector<int>> u = bin_label_sequence(xs);
  if (!u.has_value()) return escape_x(xs);
  const std::vector<int> type = u_type_of(*u);
  const TableSet* bins = find_bin(type);
  if (bins == nullptr) return escape_x(xs);

  std::vector<int> table(static_cast<std::size_t>(bins->width), 0);
  for (int x : xs) table[bin_slot_lookup_[x]] += 1;
  double l1 = 0.0;
  for (int s = 0; s < bins->width; ++s) {
    l1 += std::abs(table[s] - x_target_[s]);
  }
  if (l1 + x_target_off_support_ > budget_) return escape_x(xs);

  const u64 urank = rank_in_tables(u_tables_, u_symbols_, u_slot_lookup_,
                                   num_cells_, zero_ctx_, *u);
  if (urank >= prefix_capacity_) return escape_x(xs);
  const u64 xrank = rank_in_tables(*bins, bin_symbols_, bin_slot_lookup_, 0,
                                   *u, xs);
  EncodedRecord record;
  record.escape = false;
  record.role = RecordRole::kX;
  record.prefix = to_digits(urank, prefix_len_, cfg_.storage_base);
  record.suffix = to_digits(
      xrank, symbols_for(bins->total, cfg_.storage_base), cfg_.storage_base);
  return record;
}

EncodedRecord Codec::encode_y(std::span<const int> ys,
                              const std::vector<int>& prefix) const {
  if (static_cast<int>(ys.size()) != cfg_.n) {
    throw ValidationError("update block has the wrong length");
  }
  for (int y : ys) {
    if (y < 0 || y >= ky_) {
      throw ValidationError("update symbol out of range");
    }
  }
  // A prefix the encoder cannot interpret (wrong width, bad digits, rank past
  // the typical set) means the paired X-block escaped; the update block then
  // has no bin to index and falls back to raw storage as well.
  if (static_cast<int>(prefix.size()) != prefix_len_) return escape_y(ys);
  const std::optional<u64> urank = from_digits(prefix, cfg_.storage_base);
  if (!urank.has_value() || *urank >= u_tables_.total) return escape_y(ys);
  std::vector<int> u;
  unrank_in_tables(u_tables_, u_symbols_, u_slot_lookup_, num_cells_,
                   zero_ctx_, *urank, u);
  const std::vector<int> type = u_type_of(u);
  const TableSet* cond = find_cond(type);
  if (cond == nullptr) return escape_y(ys);

  std::vector<int> table(static_cast<std::size_t>(cond->width), 0);
  for (int i = 0; i < cfg_.n; ++i) table[u[i] * ky_ + ys[i]] += 1;
  double l1 = 0.0;
  for (int s = 0; s < cond->width; ++s) {
    l1 += std::abs(table[s] - uy_target_[s]);
  }
  if (l1 > budget_) return escape_y(ys);
  double ymarg = 0.0;
  for (int y = 0; y < ky_; ++y) {
    int cnt = 0;
    for (int g = 0; g < num_cells_; ++g) cnt += table[g * ky_ + y];
    ymarg += std::abs(cnt - y_target_[y]);
  }
  if (ymarg > budget_) return escape_y(ys);

  const u64 yrank = rank_in_tables(*cond, cond_symbols_, cond_slot_lookup_,
                                   ky_, u, ys);
  EncodedRecord record;
  record.escape = false;
  record.role = RecordRole::kY;
  record.prefix = prefix;
  record.suffix = to_digits(
      yrank, symbols_for(cond->total, cfg_.storage_base), cfg_.storage_base);
  return record;
}

std::vector<int> Codec::decode(const EncodedRecord& record) const {
  const bool is_x = record.role == RecordRole::kX;
  const int alphabet = is_x ? kx_ : ky_;
  if (record.escape) {
    const int raw_len = is_x ? x_raw_len_ : y_raw_len_;
    if (static_cast<int>(record.suffix.size()) != raw_len) {
      throw DecodeError("raw payload has the wrong width");
    }
    const std::optional<u64> value = from_digits(record.suffix, cfg_.storage_base);
    if (!value.has_value()) {
      throw DecodeError("raw payload digit outside the storage alphabet");
    }
    if (*value >= pow_clamped(alphabet, cfg_.n)) {
      throw DecodeError("raw payload does not name a sequence");
    }
    u64 v = *value;
    std::vector<int> out(static_cast<std::size_t>(cfg_.n), 0);
    for (int i = cfg_.n - 1; i >= 0; --i) {
      out[i] = static_cast<int>(v % static_cast<u64>(alphabet));
      v /= static_cast<u64>(alphabet);
    }
    return out;
  }

  if (static_cast<int>(record.prefix.size()) != prefix_len_) {
    throw DecodeError("prefix has the wrong width");
  }
  const std::optional<u64> urank = from_digits(record.prefix, cfg_.storage_base);
  if (!urank.has_value()) {
    throw DecodeError("prefix digit outside the storage alphabet");
  }
  if (*urank >= u_tables_.total) {
    throw DecodeError("prefix does not index a typical bin-label sequence");
  }
  std::vector<int> u;
  unrank_in_tables(u_tables_, u_symbols_, u_slot_lookup_, num_cells_,
                   zero_ctx_, *urank, u);
  const std::vector<int> type = u_type_of(u);
  const TableSet* ts = is_x ? find_bin(type) : find_cond(type);
  if (ts == nullptr || ts->total == 0) {
    throw DecodeError("prefix indexes an empty bin");
  }
  const int width = symbols_for(ts->total, cfg_.storage_base);
  if (static_cast<int>(record.suffix.size()) != width) {
    throw DecodeError("suffix has the wrong width");
  }
  const std::optional<u64> rank = from_digits(record.suffix, cfg_.storage_base);
  if (!rank.has_value()) {
    throw DecodeError("suffix digit outside the storage alphabet");
  }
  if (*rank >= ts->total) {
    throw DecodeError("suffix rank is past the end of the set");
  }
  std::vector<int> out;
  if (is_x) {
    unrank_in_tables(*ts, bin_symbols_, bin_slot_lookup_, 0, u, *rank, out);
  } else {
    unrank_in_tables(*ts, cond_symbols_, cond_slot_lookup_, ky_, u, *rank, out);
  }
  return out;
}

Codec build_codec(const CodecConfig& cfg) { return Codec(cfg); }

namespace {

struct SimAccumulator {
  u64 prefix_syms = 0;
  u64 x_suffix_syms = 0;
  u64 y_suffix_syms = 0;
  u64 fail_x = 0;
  u64 fail_y = 0;
  u64 mismatch = 0;
  u64 decode_failures = 0;
  u64 required_syms = 0;
  u64 binned = 0;

  void merge(const SimAccumulator& o) {
    prefix_syms += o.prefix_syms;
    x_suffix_syms += o.x_suffix_syms;
    y_suffix_syms += o.y_suffix_syms;
    fail_x += o.fail_x;
    fail_y += o.fail_y;
    mismatch += o.mismatch;
    decode_failures += o.decode_failures;
    required_syms += o.required_syms;
    binned += o.binned;
  }
};

SimReport finalize_report(const Codec& codec, u64 trials,
                          const SimAccumulator& total,
                          std::vector<TrialTrace> trace) {
  const int n = codec.config().n;
  const double letters = static_cast<double>(n) * static_cast<double>(trials);
  SimReport report;
  report.trials = trials;
  report.delta_x = static_cast<double>(total.fail_x) / static_cast<double>(trials);
  report.delta_y = static_cast<double>(total.fail_y) / static_cast<double>(trials);
  report.delta_u = static_cast<double>(total.mismatch) / static_cast<double>(trials);
  report.delta = std::max(report.delta_x, report.delta_y);
  report.j_emp = static_cast<double>(total.prefix_syms) / letters;
  report.k_emp = report.j_emp + static_cast<double>(total.x_suffix_syms) / letters;
  report.l_emp = report.j_emp + static_cast<double>(total.y_suffix_syms) / letters;
  report.y_suffix_required =
      total.binned == 0
          ? 0.0
          : static_cast<double>(total.required_syms) /
                (static_cast<double>(total.binned) * static_cast<double>(n));
  report.theory_h_x = codec.theory_h_x();
  report.theory_j = codec.theory_j();
  report.theory_h_y_given_u = codec.theory_h_y_given_u();
  report.design_j = static_cast<double>(codec.prefix_length()) / n;
  report.design_k =
      static_cast<double>(codec.prefix_length() + codec.x_suffix_length()) / n;
  report.design_l =
      static_cast<double>(codec.prefix_length() + codec.y_suffix_length()) / n;
  report.flag_overhead = 1.0 / n;
  report.prefix_rounding = report.design_j - report.theory_j;
  report.decode_failures = total.decode_failures;
  report.trace = std::move(trace);
  return report;
}

}  // namespace

SimReport simulate(const CodecConfig& cfg, std::uint64_t trials,
                   const SimOptions& options) {
  if (trials == 0) {
    throw ValidationError("simulate needs at least one trial");
  }
  if (options.threads < 1) {
    throw ValidationError("worker count must be at least 1");
  }
  const Codec codec(cfg);

  std::vector<TrialTrace> trace;
  if (options.keep_trace) trace.assign(trials, {});

  const int workers =
      static_cast<int>(std::min<u64>(static_cast<u64>(options.threads), trials));
  std::vector<SimAccumulator> parts(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

  const auto run_range = [&](int w, u64 lo, u64 hi) {
    try {
      SimAccumulator& acc = parts[w];
      std::vector<int> xs;
      std::vector<int> ys;
      for (u64 t = lo; t < hi; ++t) {
        std::mt19937_64 rng = stream_rng(cfg.seed, t);
        sample_block(cfg.d, cfg.n, rng, xs, ys);
        const EncodedRecord a = codec.encode_x(xs);
        const EncodedRecord b = codec.encode_y(ys, a.prefix);
        bool fail_x = a.escape;
        bool fail_y = b.escape;
        try {
          if (codec.decode(a) != xs) {
            fail_x = true;
            ++acc.decode_failures;
          }
        } catch (const DecodeError&) {
          fail_x = true;
          ++acc.decode_failures;
        }
        try {
          if (codec.decode(b) != ys) {
            fail_y = true;
            ++acc.decode_failures;
          }
        } catch (const DecodeError&) {
          fail_y = true;
          ++acc.decode_failures;
        }
        acc.prefix_syms += a.prefix.size();
        acc.x_suffix_syms += a.suffix.size();
        acc.y_suffix_syms += b.suffix.size();
        if (fail_x) ++acc.fail_x;
        if (fail_y) ++acc.fail_y;
        const bool match = a.prefix == b.prefix;
        if (!match) ++acc.mismatch;
        if (!a.escape) {
          ++acc.binned;
          const std::optional<std::vector<int>> u = codec.bin_label_sequence(xs);
          acc.required_syms += static_cast<u64>(codec.y_suffix_width(*u));
        }
        if (options.keep_trace) {
          trace[t] = TrialTrace{.trial = t,
                                .x_escape = a.escape,
                                .y_escape = b.escape,
                                .prefix_match = match,
                                .x_suffix_symbols =
                                    static_cast<int>(a.suffix.size()),
                                .y_suffix_symbols =
                                    static_cast<int>(b.suffix.size())};
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    run_range(0, 0, trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    u64 lo = 0;
    for (int w = 0; w < workers; ++w) {
      const u64 size = trials / static_cast<u64>(workers) +
                       (static_cast<u64>(w) < trials % static_cast<u64>(workers)
                            ? 1
                            : 0);
      pool.emplace_back(run_range, w, lo, lo + size);
      lo += size;
    }
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SimAccumulator total;
  for (const SimAccumulator& p : parts) total.merge(p);
  return finalize_report(codec, trials, total, std::move(trace));
}

SimReport simulate_uniform_binning(const CodecConfig& cfg,
                                   std::uint64_t trials,
                                   const SimOptions& options) {
  if (trials == 0) {
    throw ValidationError("simulate needs at least one trial");
  }
  if (options.threads < 1) {
    throw ValidationError("worker count must be at least 1");
  }
  const Codec codec(cfg);
  const int kx = cfg.d.size_x();
  const int ky = cfg.d.size_y();
  const TypicalSpec spec{.n = cfg.n, .delta = cfg.delta};

  // The typical X-sequences in lexicographic (= numeric) order, packed as
  // base-|X| integers.
  const TypicalSet tx = enumerate_typical(cfg.d.marginal_x(), spec);
  const u64 m = tx.count;
  std::vector<u64> codes(static_cast<std::size_t>(m));
  for (u64 r = 0; r < m; ++r) {
    u64 v = 0;
    for (int s : tx.sequences[r]) v = v * static_cast<u64>(kx) + static_cast<u64>(s);
    codes[r] = v;
  }

  // Structure-blind binning: each typical sequence hashes to a uniformly
  // random label.  When the prefix field can hold every sequence the probing
  // makes the assignment collision-free, realizing singleton bins.
  const u64 nb = pow_clamped(cfg.storage_base, codec.prefix_length());
  std::vector<u64> label_of(static_cast<std::size_t>(m), 0);
  std::unordered_map<u64, std::vector<std::uint32_t>> members;
  if (m > 0) {
    if (nb >= m) {
      std::unordered_set<u64> used;
      used.reserve(static_cast<std::size_t>(m) * 2);
      for (u64 r = 0; r < m; ++r) {
        u64 slot = splitmix64(cfg.seed ^ splitmix64(r)) % nb;
        while (used.count(slot) > 0) slot = (slot + 1) % nb;
        used.insert(slot);
        label_of[r] = slot;
        members[slot].push_back(static_cast<std::uint32_t>(r));
      }
    } else {
      for (u64 r = 0; r < m; ++r) {
        const u64 slot = splitmix64(cfg.seed ^ splitmix64(r)) % nb;
        label_of[r] = slot;
        members[slot].push_back(static_cast<std::uint32_t>(r));
      }
    }
  }

  // The Y-candidate set of a bin is the union of the conditionally typical
  // sets of its members, built lazily per label.
  std::unordered_map<u64, std::vector<u64>> ysets;
  const auto bin_yset = [&](u64 label) -> const std::vector<u64>& {
    const auto it = ysets.find(label);
    if (it != ysets.end()) return it->second;
    std::vector<u64> out;
    for (std::uint32_t r : members[label]) {
      const TypicalSet cond =
          conditional_typical_set(tx.sequences[r], cfg.d, spec);
      for (const std::vector<int>& y : cond.sequences) {
        u64 v = 0;
        for (int s : y) v = v * static_cast<u64>(ky) + static_cast<u64>(s);
        out.push_back(v);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return ysets.emplace(label, std::move(out)).first->second;
  };

  SimAccumulator acc;
  std::vector<TrialTrace> trace;
  if (options.keep_trace) trace.assign(trials, {});
  std::vector<int> xs;
  std::vector<int> ys;
  for (u64 t = 0; t < trials; ++t) {
    std::mt19937_64 rng = stream_rng(cfg.seed, t);
    sample_block(cfg.d, cfg.n, rng, xs, ys);
    u64 xcode = 0;
    for (int s : xs) xcode = xcode * static_cast<u64>(kx) + static_cast<u64>(s);
    const auto it = std::lower_bound(codes.begin(), codes.end(), xcode);

    bool x_escape = true;
    bool y_escape = true;
    bool match = true;
    int x_suffix = codec.x_raw_length();
    int y_suffix = codec.y_raw_length();
    bool have_bin = false;
    u64 label = 0;
    if (it != codes.end() && *it == xcode) {
      x_escape = false;
      const u64 rank = static_cast<u64>(it - codes.begin());
      label = label_of[rank];
      have_bin = true;
      const std::vector<std::uint32_t>& bin = members[label];
      x_suffix = symbols_for(bin.size(), cfg.storage_base);
      acc.prefix_syms += static_cast<u64>(codec.prefix_length());
      ++acc.binned;
      acc.required_syms += static_cast<u64>(
          symbols_for(bin_yset(label).size(), cfg.storage_base));
    } else if (codec.prefix_length() == 0 && m > 0) {
      // A zero-width prefix addresses the single bin whether or not the
      // X-block itself escaped, mirroring the structured encoder.
      have_bin = true;
    }
    if (have_bin) {
      const std::vector<u64>& yset = bin_yset(label);
      u64 ycode = 0;
      for (int s : ys) ycode = ycode * static_cast<u64>(ky) + static_cast<u64>(s);
      if (std::binary_search(yset.begin(), yset.end(), ycode)) {
        y_escape = false;
        y_suffix = symbols_for(yset.size(), cfg.storage_base);
      } else {
        // The update record falls back to raw storage, abandoning the
        // stored prefix segment.
        match = codec.prefix_length() == 0;
      }
    }
    acc.x_suffix_syms += static_cast<u64>(x_suffix);
    acc.y_suffix_syms += static_cast<u64>(y_suffix);
    if (x_escape) ++acc.fail_x;
    if (y_escape) ++acc.fail_y;
    if (!match) ++acc.mismatch;
    if (options.keep_trace) {
      trace[t] = TrialTrace{.trial = t,
                            .x_escape = x_escape,
                            .y_escape = y_escape,
                            .prefix_match = match,
                            .x_suffix_symbols = x_suffix,
                            .y_suffix_symbols = y_suffix};
    }
  }
  return finalize_report(codec, trials, acc, std::move(trace));
}

}  // namespace malleate
