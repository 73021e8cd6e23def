#include "malleate/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "malleate/errors.hpp"
#include "malleate/info.hpp"
#include "malleate/rng.hpp"

namespace malleate {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void validate_spec(const TypicalSpec& spec) {
  if (spec.n < 1) {
    throw ValidationError("blocklength must be at least 1");
  }
  if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta)) {
    throw ValidationError("slack delta must be finite and nonnegative");
  }
}

void validate_pmf(const Eigen::VectorXd& p) {
  if (p.size() < 1) {
    throw ValidationError("probability vector must be nonempty");
  }
  for (int s = 0; s < p.size(); ++s) {
    if (!(p[s] >= 0.0)) {
      throw ValidationError("probability vector has a negative entry");
    }
  }
  if (std::abs(p.sum() - 1.0) > kSumTolerance) {
    throw ValidationError("probability vector does not sum to 1");
  }
}

void validate_sequence(std::span<const int> seq, int alphabet, int n) {
  if (static_cast<int>(seq.size()) != n) {
    throw ValidationError("sequence length does not match the blocklength");
  }
  for (int s : seq) {
    if (s < 0 || s >= alphabet) {
      throw ValidationError("sequence symbol outside the alphabet");
    }
  }
}

// Running L1 state for a growing prefix: counts, the total excess
// sum_s max(0, c_s - n p_s) and deficit sum_s max(0, n p_s - c_s).  Excess
// never decreases as counts grow, and one added position lowers the deficit
// by at most 1, which gives two cheap admissible-future bounds.
struct L1Tracker {
  Eigen::VectorXd target;  // n * p
  std::vector<int> counts;
  double excess = 0.0;
  double deficit = 0.0;

  void reset(const Eigen::VectorXd& p, int n) {
    target = static_cast<double>(n) * p;
    counts.assign(static_cast<std::size_t>(p.size()), 0);
    excess = 0.0;
    deficit = target.sum();
  }

  void add(int s) {
    const double t = target[s];
    const double before = counts[static_cast<std::size_t>(s)];
    const double after = before + 1.0;
    excess += std::max(0.0, after - t) - std::max(0.0, before - t);
    deficit += std::max(0.0, t - after) - std::max(0.0, t - before);
    counts[static_cast<std::size_t>(s)] += 1;
  }

  void remove(int s) {
    const double t = target[s];
    const double before = counts[static_cast<std::size_t>(s)];
    const double after = before - 1.0;
    excess += std::max(0.0, after - t) - std::max(0.0, before - t);
    deficit += std::max(0.0, t - after) - std::max(0.0, t - before);
    counts[static_cast<std::size_t>(s)] -= 1;
  }

  // True when no completion with `remaining` more positions can satisfy the
  // budget any more.
  bool hopeless(double budget, int remaining) const {
    return excess > budget || deficit - remaining > budget;
  }

  double l1() const { return excess + deficit; }
};

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > cap / base) return cap + 1;
    v *= base;
  }
  return v;
}

void check_candidate_space(int alphabet, int n, std::uint64_t limit) {
  if (checked_pow(static_cast<std::uint64_t>(alphabet), n, limit) > limit) {
    std::ostringstream msg;
    msg << "candidate space " << alphabet << "^" << n << " exceeds the enumeration limit "
        << limit << "; use the count-vector census or a Monte-Carlo estimate instead";
    throw LimitError(msg.str());
  }
}

double finish_log_size(std::uint64_t count, double base) {
  return count == 0 ? kNegInf : std::log(static_cast<double>(count)) / std::log(base);
}

// Depth-first walk over candidate sequences in lexicographic order, with the
// tracker bounds pruning subtrees that cannot reach the budget.  `admit` is
// called once per member with its probability.
template <typename Admit>
void walk_sequences(const std::vector<int>& symbols, const Eigen::VectorXd& p, int n,
                    double budget, L1Tracker& tracker, std::vector<int>& seq,
                    double prob, Admit&& admit) {
  const int depth = static_cast<int>(seq.size());
  if (depth == n) {
    if (tracker.l1() <= budget) admit(seq, prob);
    return;
  }
  if (tracker.hopeless(budget, n - depth)) return;
  for (int s : symbols) {
    tracker.add(s);
    seq.push_back(s);
    walk_sequences(symbols, p, n, budget, tracker, seq, prob * p[s], admit);
    seq.pop_back();
    tracker.remove(s);
  }
}

TypicalSet enumerate_core(const Eigen::VectorXd& p, const TypicalSpec& spec, double base,
                          const EnumerationOptions& options) {
  validate_spec(spec);
  validate_pmf(p);
  const int k = static_cast<int>(p.size());

  std::vector<int> symbols;
  for (int s = 0; s < k; ++s) {
    if (!options.support_restricted || p[s] > kStructuralZero) symbols.push_back(s);
  }
  check_candidate_space(std::max<int>(1, static_cast<int>(symbols.size())), spec.n,
                        options.limit);

  TypicalSet set;
  L1Tracker tracker;
  tracker.reset(p, spec.n);
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(spec.n));
  const double budget = spec.n * spec.delta;
  walk_sequences(symbols, p, spec.n, budget, tracker, seq, 1.0,
                 [&](const std::vector<int>& member, double prob) {
                   set.count += 1;
                   set.probability += prob;
                   if (options.materialize) set.sequences.push_back(member);
                 });
  set.log_size = finish_log_size(set.count, base);
  return set;
}

Eigen::VectorXd flatten_joint(const JointDistribution& d) {
  const int kx = d.size_x(), ky = d.size_y();
  Eigen::VectorXd p(kx * ky);
  for (int x = 0; x < kx; ++x)
    for (int y = 0; y < ky; ++y) p[x * ky + y] = d.pxy()(x, y);
  return p;
}

double u128_to_double(unsigned __int128 v) {
  const double hi = static_cast<double>(static_cast<std::uint64_t>(v >> 64));
  const double lo = static_cast<double>(static_cast<std::uint64_t>(v));
  return std::ldexp(hi, 64) + lo;
}

// Exact binomial coefficient; arguments stay small enough that the running
// product fits 128 bits.
unsigned __int128 binomial_u128(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  }
  return r;
}

}  // namespace

double lambda_slack(double delta, int cardinality, double base) {
  if (delta < 0.0 || !std::isfinite(delta)) {
    throw ValidationError("slack delta must be finite and nonnegative");
  }
  if (cardinality < 1) {
    throw ValidationError("alphabet cardinality must be positive");
  }
  if (delta == 0.0) return 0.0;
  return delta * std::log(cardinality / delta) / std::log(base);
}

bool is_strongly_typical(std::span<const int> seq, const Eigen::VectorXd& p,
                         const TypicalSpec& spec) {
  validate_spec(spec);
  validate_pmf(p);
  validate_sequence(seq, static_cast<int>(p.size()), spec.n);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(p.size());
  for (int s : seq) counts[s] += 1.0;
  const double l1 = (counts - spec.n * p).cwiseAbs().sum();
  return l1 <= spec.n * spec.delta;
}

bool is_jointly_typical(std::span<const int> xs, std::span<const int> ys,
                        const JointDistribution& d, const TypicalSpec& spec) {
  validate_spec(spec);
  validate_sequence(xs, d.size_x(), spec.n);
  validate_sequence(ys, d.size_y(), spec.n);
  const int ky = d.size_y();
  std::vector<int> zipped(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    zipped[static_cast<std::size_t>(i)] = xs[static_cast<std::size_t>(i)] * ky +
                                          ys[static_cast<std::size_t>(i)];
  }
  return is_strongly_typical(zipped, flatten_joint(d), spec);
}

TypicalSet enumerate_typical(const Eigen::VectorXd& p, const TypicalSpec& spec,
                             double base, const EnumerationOptions& options) {
  return enumerate_core(p, spec, base, options);
}

TypicalSet enumerate_jointly_typical(const JointDistribution& d, const TypicalSpec& spec,
                                     const EnumerationOptions& options) {
  return enumerate_core(flatten_joint(d), spec, d.log_base(), options);
}

TypicalSet conditional_typical_set(std::span<const int> xs, const JointDistribution& d,
                                   const TypicalSpec& spec,
                                   const EnumerationOptions& options) {
  validate_spec(spec);
  validate_sequence(xs, d.size_x(), spec.n);
  const Eigen::VectorXd px = d.marginal_x();
  for (int s : xs) {
    if (px[s] <= kStructuralZero) {
      throw ValidationError("conditioning sequence uses a zero-probability symbol");
    }
  }
  const int ky = d.size_y();
  std::vector<int> symbols;
  for (int y = 0; y < ky; ++y) {
    if (!options.support_restricted || d.marginal_y()[y] > kStructuralZero) {
      symbols.push_back(y);
    }
  }
  check_candidate_space(std::max<int>(1, static_cast<int>(symbols.size())), spec.n,
                        options.limit);

  const Eigen::VectorXd py = d.marginal_y();
  const Eigen::VectorXd pw = flatten_joint(d);
  const double budget = spec.n * spec.delta;

  TypicalSet set;
  L1Tracker y_tracker, pair_tracker;
  y_tracker.reset(py, spec.n);
  pair_tracker.reset(pw, spec.n);
  std::vector<int> ys;
  ys.reserve(static_cast<std::size_t>(spec.n));

  // Hand-rolled walk: the pair symbol at each depth depends on the fixed
  // conditioning symbol there, so the generic single-tracker walk does not
  // apply.  The running product of kernel rows is passed down by value.
  const auto kernel = [&](int depth, int y) {
    return d.pxy()(xs[static_cast<std::size_t>(depth)], y) /
           px[xs[static_cast<std::size_t>(depth)]];
  };
  const std::function<void(double)> descend = [&](double prob) {
    const int depth = static_cast<int>(ys.size());
    if (depth == spec.n) {
      if (y_tracker.l1() <= budget && pair_tracker.l1() <= budget) {
        set.count += 1;
        set.probability += prob;
        if (options.materialize) set.sequences.push_back(ys);
      }
      return;
    }
    const int remaining = spec.n - depth;
    if (y_tracker.hopeless(budget, remaining) || pair_tracker.hopeless(budget, remaining)) {
      return;
    }
    const int pair_base = xs[static_cast<std::size_t>(depth)] * ky;
    for (int y : symbols) {
      y_tracker.add(y);
      pair_tracker.add(pair_base + y);
      ys.push_back(y);
      descend(prob * kernel(depth, y));
      ys.pop_back();
      pair_tracker.remove(pair_base + y);
      y_tracker.remove(y);
    }
  };
  descend(1.0);
  set.log_size = finish_log_size(set.count, d.log_base());
  return set;
}

TypeCensus type_census(const Eigen::VectorXd& p, const TypicalSpec& spec, double base) {
  validate_spec(spec);
  validate_pmf(p);
  const int k = static_cast<int>(p.size());
  const int n = spec.n;
  const double budget = n * spec.delta;
  const bool exact = n * std::log2(std::max(2, k)) <= 120.0;

  std::vector<double> log_gamma(static_cast<std::size_t>(n) + 2);
  for (int i = 0; i <= n + 1; ++i) log_gamma[static_cast<std::size_t>(i)] = std::lgamma(i + 0.0);

  TypeCensus census;
  std::vector<int> counts(static_cast<std::size_t>(k), 0);

  // Assign counts symbol by symbol; the partial L1 plus the unavoidable
  // future deviation |remaining - future mass| bounds the final distance.
  double future_target = n;  // n * sum of p over unassigned symbols
  const std::function<void(int, int, double)> assign = [&](int s, int rem, double partial) {
    const double target = n * p[s];
    if (s == k - 1) {
      const double l1 = partial + std::abs(rem - target);
      if (l1 <= budget) {
        counts[static_cast<std::size_t>(s)] = rem;
        // Multinomial coefficient for this count vector.
        double log_m = log_gamma[static_cast<std::size_t>(n) + 1];
        double log_prob = 0.0;
        bool possible = true;
        unsigned __int128 exact_m = 1;
        int left = n;
        for (int i = 0; i < k; ++i) {
          const int c = counts[static_cast<std::size_t>(i)];
          log_m -= log_gamma[static_cast<std::size_t>(c) + 1];
          if (c > 0 && p[i] == 0.0) {
            possible = false;
          } else if (c > 0) {
            log_prob += c * std::log(p[i]);
          }
          if (exact) {
            exact_m *= binomial_u128(left, c);
            left -= c;
          }
        }
        const double ways = exact ? u128_to_double(exact_m) : std::exp(log_m);
        census.count += ways;
        if (possible) census.probability += std::exp(log_m + log_prob);
        counts[static_cast<std::size_t>(s)] = 0;
      }
      return;
    }
    future_target -= target;
    const double tail = future_target;
    for (int c = 0; c <= rem; ++c) {
      const double here = partial + std::abs(c - target);
      // Remaining symbols must absorb rem - c positions against mass tail.
      if (here + std::abs((rem - c) - tail) > budget) continue;
      counts[static_cast<std::size_t>(s)] = c;
      assign(s + 1, rem - c, here);
    }
    counts[static_cast<std::size_t>(s)] = 0;
    future_target += target;
  };
  assign(0, n, 0.0);

  census.log_size =
      census.count <= 0.0 ? kNegInf : std::log(census.count) / std::log(base);
  return census;
}

void sample_block(const JointDistribution& d, int n, std::mt19937_64& rng,
                  std::vector<int>& xs, std::vector<int>& ys) {
  if (n < 1) throw ValidationError("blocklength must be at least 1");
  const int ky = d.size_y();
  const Eigen::VectorXd pw = flatten_joint(d);
  Eigen::VectorXd cdf(pw.size());
  double acc = 0.0;
  for (int w = 0; w < pw.size(); ++w) {
    acc += pw[w];
    cdf[w] = acc;
  }
  cdf[pw.size() - 1] = 1.0;
  xs.resize(static_cast<std::size_t>(n));
  ys.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int w = sample_cdf(rng, cdf);
    xs[static_cast<std::size_t>(i)] = w / ky;
    ys[static_cast<std::size_t>(i)] = w % ky;
  }
}

MarkovEstimate verify_markov_lemma(const JointDistribution& d, const Partition& partition,
                                   const TypicalSpec& spec, std::uint64_t trials,
                                   std::uint64_t seed) {
  validate_spec(spec);
  if (trials < 1) throw ValidationError("at least one trial is required");
  const std::vector<int> support = d.support_x();
  if (partition.size() != static_cast<int>(support.size())) {
    throw ValidationError("partition size does not match the X support");
  }

  // U = f(X): conditioning on the (x, u) pair reduces to typicality of x
  // over the support alphabet, because the pair counts live on the graph of f.
  const Eigen::VectorXd px_full = d.marginal_x();
  Eigen::VectorXd px(static_cast<int>(support.size()));
  std::vector<int> to_support(static_cast<std::size_t>(d.size_x()), -1);
  for (std::size_t i = 0; i < support.size(); ++i) {
    px[static_cast<int>(i)] = px_full[support[i]];
    to_support[static_cast<std::size_t>(support[i])] = static_cast<int>(i);
  }

  // Joint law of (y, u) on the product alphabet, for the success event.
  const int ky = d.size_y();
  const int cells = partition.num_cells();
  Eigen::VectorXd pyu = Eigen::VectorXd::Zero(ky * cells);
  for (std::size_t i = 0; i < support.size(); ++i) {
    const int u = partition.labels()[i];
    for (int y = 0; y < ky; ++y) {
      pyu[y * cells + u] += d.pxy()(support[i], y);
    }
  }

  MarkovEstimate est;
  est.trials = trials;
  est.success_slack = ky * spec.delta;
  const TypicalSpec scaled{spec.n, est.success_slack};

  std::vector<int> xs, ys, xs_support(static_cast<std::size_t>(spec.n)),
      yu(static_cast<std::size_t>(spec.n));
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto rng = stream_rng(seed, t);
    sample_block(d, spec.n, rng, xs, ys);
    for (int i = 0; i < spec.n; ++i) {
      xs_support[static_cast<std::size_t>(i)] =
          to_support[static_cast<std::size_t>(xs[static_cast<std::size_t>(i)])];
    }
    if (!is_strongly_typical(xs_support, px, spec)) continue;
    est.conditioning_events += 1;
    for (int i = 0; i < spec.n; ++i) {
      const int u = partition.labels()[static_cast<std::size_t>(
          xs_support[static_cast<std::size_t>(i)])];
      yu[static_cast<std::size_t>(i)] = ys[static_cast<std::size_t>(i)] * cells + u;
    }
    if (is_strongly_typical(yu, pyu, scaled)) est.successes += 1;
  }
  if (est.conditioning_events == 0) {
    throw ValidationError(
        "no trial produced a typical conditioning block; increase the blocklength, "
        "the slack, or the trial count");
  }
  est.estimate = static_cast<double>(est.successes) /
                 static_cast<double>(est.conditioning_events);
  return est;
}

std::vector<LemmaCheck> lemma_report(const JointDistribution& d, const TypicalSpec& spec,
                                     const LemmaOptions& options) {
  validate_spec(spec);
  const int n = spec.n;
  const double base = d.log_base();
  const int kx = d.size_x(), ky = d.size_y();

  std::vector<LemmaCheck> rows;
  const auto push = [&rows](std::string name, double measured, std::optional<double> lo,
                            std::optional<double> hi) {
    LemmaCheck row;
    row.name = std::move(name);
    row.measured = measured;
    row.lower = lo;
    row.upper = hi;
    const bool above = !lo || measured >= *lo;
    const bool below = !hi || measured <= *hi;
    row.pass = above && below;
    rows.push_back(std::move(row));
  };

  // Marginal set size against the entropy-plus-slack exponent.
  const auto x_census = type_census(d.marginal_x(), spec, base);
  push("marginal-size-upper", x_census.log_size / n, std::nullopt,
       entropy_x(d) + lambda_slack(spec.delta, kx, base));

  // Joint set size and mass.
  const auto joint_census = type_census(flatten_joint(d), spec, base);
  const double joint_slack = lambda_slack(spec.delta, kx * ky, base);
  const double mass_floor =
      spec.delta < 1.0 ? std::log1p(-spec.delta) / (n * std::log(base)) : 0.0;
  push("joint-size-lower", joint_census.log_size / n,
       joint_entropy(d) - joint_slack + mass_floor, std::nullopt);
  push("joint-size-upper", joint_census.log_size / n, std::nullopt,
       joint_entropy(d) + joint_slack);
  push("joint-probability", joint_census.probability, 1.0 - spec.delta, std::nullopt);

  // Conditional set sizes.  The size depends on the conditioning sequence
  // only through its count vector, so one representative per admissible
  // count vector covers every typical conditioning block exactly.  The
  // candidate space is ky^n per representative, so these rows are reported
  // only when that fits inside the enumeration limit; the other rows never
  // enumerate sequences and stay available at any blocklength.
  double cond_min = std::numeric_limits<double>::infinity();
  double cond_max = kNegInf;
  bool cond_enumerable = true;
  {
    unsigned __int128 space = 1;
    for (int i = 0; i < n && cond_enumerable; ++i) {
      space *= static_cast<unsigned __int128>(ky);
      if (space > static_cast<unsigned __int128>(options.limit)) {
        cond_enumerable = false;
      }
    }
  }
  if (cond_enumerable) {
    const Eigen::VectorXd px = d.marginal_x();
    std::vector<int> counts(static_cast<std::size_t>(kx), 0);
    const double budget = n * spec.delta;
    EnumerationOptions cond_options;
    cond_options.limit = options.limit;
    cond_options.materialize = false;
    const std::function<void(int, int, double)> assign = [&](int s, int rem,
                                                             double partial) {
      if (s == kx - 1) {
        const double l1 = partial + std::abs(rem - n * px[s]);
        if (l1 > budget) return;
        counts[static_cast<std::size_t>(s)] = rem;
        // Zero-probability symbols cannot appear in a conditioning block.
        bool feasible = true;
        for (int i = 0; i < kx; ++i) {
          if (counts[static_cast<std::size_t>(i)] > 0 && px[i] <= kStructuralZero) {
            feasible = false;
          }
        }
        if (feasible) {
          std::vector<int> representative;
          representative.reserve(static_cast<std::size_t>(n));
          for (int i = 0; i < kx; ++i) {
            representative.insert(representative.end(),
                                  static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]),
                                  i);
          }
          const auto set = conditional_typical_set(representative, d, spec, cond_options);
          if (set.count > 0) {
            cond_min = std::min(cond_min, set.log_size / n);
            cond_max = std::max(cond_max, set.log_size / n);
          }
        }
        counts[static_cast<std::size_t>(s)] = 0;
        return;
      }
      for (int c = 0; c <= rem; ++c) {
        const double here = partial + std::abs(c - n * px[s]);
        if (here > budget) continue;
        counts[static_cast<std::size_t>(s)] = c;
        assign(s + 1, rem - c, here);
      }
      counts[static_cast<std::size_t>(s)] = 0;
    };
    assign(0, n, 0.0);
  }
  if (cond_max > kNegInf) {
    const double cond_slack = lambda_slack(spec.delta, kx * ky, base);
    push("conditional-size-lower", cond_min,
         conditional_entropy_y_given_x(d) - cond_slack, std::nullopt);
    push("conditional-size-upper", cond_max, std::nullopt,
         conditional_entropy_y_given_x(d) + cond_slack);
  }

  if (options.markov_trials > 0) {
    const Partition partition =
        options.markov_partition
            ? *options.markov_partition
            : Partition::discrete(static_cast<int>(d.support_x().size()));
    const auto est =
        verify_markov_lemma(d, partition, spec, options.markov_trials, options.seed);
    push("markov-transfer", est.estimate, 1.0 - spec.delta, std::nullopt);
  }
  return rows;
}

}  // namespace malleate
