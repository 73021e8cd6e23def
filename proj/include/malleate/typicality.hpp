#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "malleate/joint_distribution.hpp"
#include "malleate/partition.hpp"

namespace malleate {

// Blocklength and L1 slack defining the strongly typical sets T^n_delta.
// Membership is the exact integer-count criterion
//   sum_s |N(s) - n p(s)| <= n delta,
// evaluated without tolerance fudge (exact for dyadic inputs).
struct TypicalSpec {
  int n = 1;
  double delta = 0.0;  // >= 0; 0 demands the empirical law match p exactly
};

struct EnumerationOptions {
  std::uint64_t limit = kDefaultEnumerationLimit;  // cap on |alphabet|^n
  bool materialize = true;    // keep the sequences, not just the counts
  bool support_restricted = false;  // walk only positive-probability symbols
};

// The slack function eta(delta) = delta * log(cardinality / delta) used to
// make the size bounds concrete; 0 at delta = 0.
double lambda_slack(double delta, int cardinality, double base = 2.0);

bool is_strongly_typical(std::span<const int> seq, const Eigen::VectorXd& p,
                         const TypicalSpec& spec);

// Joint typicality of a pair of sequences = plain typicality of the zipped
// pair sequence over the product alphabet.
bool is_jointly_typical(std::span<const int> xs, std::span<const int> ys,
                        const JointDistribution& d, const TypicalSpec& spec);

struct TypicalSet {
  std::vector<std::vector<int>> sequences;  // lexicographic; empty if not materialized
  std::uint64_t count = 0;
  double probability = 0.0;
  double log_size = 0.0;  // log_base(count); -inf for an empty set
};

// Exhaustive walk of the candidate space with exact membership tests.
// Probability totals are unaffected by support restriction (excluded
// sequences carry zero mass); the count is restricted accordingly.
TypicalSet enumerate_typical(const Eigen::VectorXd& p, const TypicalSpec& spec,
                             double base = 2.0, const EnumerationOptions& options = {});

// Pair version; sequences hold product symbols w = x * |Y| + y.
TypicalSet enumerate_jointly_typical(const JointDistribution& d, const TypicalSpec& spec,
                                     const EnumerationOptions& options = {});

// {y : y in T_[Y]delta and (xs, y) in T_[XY]delta}, the set a bin decoder
// searches.  probability is the conditional mass Pr[Y = y | X = xs].
TypicalSet conditional_typical_set(std::span<const int> xs, const JointDistribution& d,
                                   const TypicalSpec& spec,
                                   const EnumerationOptions& options = {});

// Exact count/probability of T^n_delta(p) by summing over admissible count
// vectors instead of sequences; reaches blocklengths far beyond enumeration.
// count is exact below 2^53 and correctly rounded above.
struct TypeCensus {
  double count = 0.0;
  double probability = 0.0;
  double log_size = 0.0;  // log_base(count); -inf when empty
};

TypeCensus type_census(const Eigen::VectorXd& p, const TypicalSpec& spec, double base = 2.0);

// One i.i.d. block of n source pairs.
void sample_block(const JointDistribution& d, int n, std::mt19937_64& rng,
                  std::vector<int>& xs, std::vector<int>& ys);

// Monte-Carlo check of the Markov-chain typicality transfer: U = f(X) by the
// partition (over the X support), condition on (x,u) in T_[XU]delta, count
// how often (y,u) lands in T_[YU] at the |Y|-scaled slack.  Per-trial rngs
// derive from (seed, trial), so the estimate is order-independent.
struct MarkovEstimate {
  std::uint64_t trials = 0;
  std::uint64_t conditioning_events = 0;
  std::uint64_t successes = 0;
  double estimate = 0.0;
  double success_slack = 0.0;  // the scaled delta used for the success event
};

MarkovEstimate verify_markov_lemma(const JointDistribution& d, const Partition& partition,
                                   const TypicalSpec& spec, std::uint64_t trials,
                                   std::uint64_t seed);

// One bound check: measured value against its lower/upper limits (either may
// be absent).  Used to assemble the per-lemma pass/fail report.
struct LemmaCheck {
  std::string name;
  double measured = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  bool pass = false;
};

struct LemmaOptions {
  std::uint64_t limit = kDefaultEnumerationLimit;
  std::uint64_t markov_trials = 0;  // 0 skips the Monte-Carlo check
  std::uint64_t seed = 1;
  std::optional<Partition> markov_partition;  // default: identity on the X support
};

// Size/probability bound checks for the typical-set machinery on one source:
// marginal size vs H(X) + slack, joint size and mass, conditional set sizes
// (grouped by x-type, which determines the size exactly), and optionally the
// Markov transfer estimate.  Conditional rows appear only when ky^n fits the
// enumeration limit; every other row works at any blocklength.
std::vector<LemmaCheck> lemma_report(const JointDistribution& d, const TypicalSpec& spec,
                                     const LemmaOptions& options = {});

}  // namespace malleate
