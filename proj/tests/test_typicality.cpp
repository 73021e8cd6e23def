#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <vector>

#include "malleate/errors.hpp"
#include "malleate/info.hpp"
#include "malleate/typicality.hpp"
#include "test_helpers.hpp"

using malleate::EnumerationOptions;
using malleate::JointDistribution;
using malleate::TypicalSpec;

namespace {

// Direct statement of the membership criterion, written without the library's
// incremental counters: sum of |N(s) - n p(s)| against n delta.
bool ref_typical(const std::vector<int>& seq, const Eigen::VectorXd& p, double delta) {
  const int n = static_cast<int>(seq.size());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(p.size());
  for (int s : seq) counts[s] += 1.0;
  double l1 = 0.0;
  for (int s = 0; s < p.size(); ++s) l1 += std::abs(counts[s] - n * p[s]);
  return l1 <= n * delta;
}

bool ref_jointly_typical(const std::vector<int>& xs, const std::vector<int>& ys,
                         const JointDistribution& d, double delta) {
  const int n = static_cast<int>(xs.size());
  std::map<std::pair<int, int>, double> counts;
  for (int i = 0; i < n; ++i) counts[{xs[i], ys[i]}] += 1.0;
  double l1 = 0.0;
  for (int x = 0; x < d.size_x(); ++x) {
    for (int y = 0; y < d.size_y(); ++y) {
      const auto it = counts.find({x, y});
      const double c = it == counts.end() ? 0.0 : it->second;
      l1 += std::abs(c - n * d.pxy()(x, y));
    }
  }
  return l1 <= n * delta;
}

// All binary length-n sequences via bit patterns, counted with plain integer
// arithmetic.  Independent of the library's pruned search.
std::pair<std::uint64_t, double> ref_binary_count(const Eigen::VectorXd& p, int n,
                                                  double delta) {
  std::uint64_t count = 0;
  double mass = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    const int ones = __builtin_popcountll(bits);
    const double l1 = std::abs((n - ones) - n * p[0]) + std::abs(ones - n * p[1]);
    if (l1 <= n * delta) {
      ++count;
      mass += std::pow(p[0], n - ones) * std::pow(p[1], ones);
    }
  }
  return {count, mass};
}

std::vector<int> repeat_pattern(std::initializer_list<int> pattern, int copies) {
  std::vector<int> seq;
  for (int c = 0; c < copies; ++c)
    for (int s : pattern) seq.push_back(s);
  return seq;
}

}  // namespace

TEST_CASE("membership follows the exact empirical-law criterion") {
  Eigen::VectorXd uniform(2);
  uniform << 0.5, 0.5;

  const std::vector<int> balanced{0, 1, 0, 1};
  const std::vector<int> skewed{0, 0, 0, 1};
  CHECK(malleate::is_strongly_typical(balanced, uniform, {4, 0.0}));
  CHECK_FALSE(malleate::is_strongly_typical(skewed, uniform, {4, 0.0}));
  // One excess zero costs 2/n in L1 distance.
  CHECK(malleate::is_strongly_typical(skewed, uniform, {4, 0.5}));
  CHECK_FALSE(malleate::is_strongly_typical(skewed, uniform, {4, 0.49}));

  Eigen::VectorXd point(2);
  point << 1.0, 0.0;
  const std::vector<int> zeros{0, 0, 0, 0};
  const std::vector<int> one_hit{0, 0, 1, 0};
  CHECK(malleate::is_strongly_typical(zeros, point, {4, 0.0}));
  CHECK_FALSE(malleate::is_strongly_typical(one_hit, point, {4, 0.1}));
}

TEST_CASE("membership validates its inputs") {
  Eigen::VectorXd uniform(2);
  uniform << 0.5, 0.5;
  const std::vector<int> seq{0, 1, 0, 1};
  CHECK_THROWS_AS(malleate::is_strongly_typical(seq, uniform, {3, 0.1}),
                  malleate::ValidationError);  // length mismatch
  CHECK_THROWS_AS(malleate::is_strongly_typical(seq, uniform, {4, -0.1}),
                  malleate::ValidationError);
  CHECK_THROWS_AS(malleate::is_strongly_typical(seq, uniform, {0, 0.1}),
                  malleate::ValidationError);
  const std::vector<int> out_of_range{0, 1, 2, 1};
  CHECK_THROWS_AS(malleate::is_strongly_typical(out_of_range, uniform, {4, 0.1}),
                  malleate::ValidationError);
  Eigen::VectorXd not_pmf(2);
  not_pmf << 0.5, 0.6;
  CHECK_THROWS_AS(malleate::is_strongly_typical(seq, not_pmf, {4, 0.1}),
                  malleate::ValidationError);
}

TEST_CASE("membership matches a direct count on random sequences") {
  std::mt19937_64 rng = malleate::stream_rng(10, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 3);
    Eigen::VectorXd p(k);
    for (int s = 0; s < k; ++s) p[s] = 0.05 + malleate::uniform01(rng);
    p /= p.sum();
    const int n = 2 + static_cast<int>(rng() % 10);
    std::vector<int> seq(n);
    for (int& s : seq) s = static_cast<int>(rng() % k);
    const double delta = 1.5 * malleate::uniform01(rng);
    CHECK(malleate::is_strongly_typical(seq, p, {n, delta}) ==
          ref_typical(seq, p, delta));
  }
}

TEST_CASE("joint membership matches a direct pair count") {
  const auto d = testsrc::dsbs(0.25);
  std::mt19937_64 rng = malleate::stream_rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    std::vector<int> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = static_cast<int>(rng() % 2);
      ys[i] = static_cast<int>(rng() % 2);
    }
    const double delta = malleate::uniform01(rng);
    CHECK(malleate::is_jointly_typical(xs, ys, d, {n, delta}) ==
          ref_jointly_typical(xs, ys, d, delta));
  }
}

TEST_CASE("a loose slack at tiny blocklength admits every pair") {
  const auto d = testsrc::independent_uniform(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e) {
          const std::vector<int> xs{a, b}, ys{c, e};
          CHECK(malleate::is_jointly_typical(xs, ys, d, {2, 2.0}));
        }
}

TEST_CASE("copy source pairs are typical exactly when aligned and balanced") {
  const auto d = testsrc::copy_uniform(2);
  const std::vector<int> x{0, 1, 0, 1, 0, 1, 0, 1};
  std::vector<int> flipped = x;
  for (int& s : flipped) s ^= 1;
  CHECK(malleate::is_jointly_typical(x, x, d, {8, 0.1}));
  CHECK_FALSE(malleate::is_jointly_typical(x, flipped, d, {8, 0.1}));
}

TEST_CASE("exhaustive enumeration of the balanced binary set") {
  Eigen::VectorXd uniform(2);
  uniform << 0.5, 0.5;

  const auto set = malleate::enumerate_typical(uniform, {4, 0.0});
  REQUIRE(set.count == 6);  // the 4-choose-2 balanced sequences
  REQUIRE(set.sequences.size() == 6);
  CHECK(set.sequences.front() == std::vector<int>{0, 0, 1, 1});
  CHECK(set.sequences.back() == std::vector<int>{1, 1, 0, 0});
  CHECK(std::is_sorted(set.sequences.begin(), set.sequences.end()));
  CHECK(set.probability == doctest::Approx(6.0 / 16.0).epsilon(1e-12));
  CHECK(set.log_size == doctest::Approx(std::log2(6.0)).epsilon(1e-12));
  for (const auto& seq : set.sequences) {
    CHECK(malleate::is_strongly_typical(seq, uniform, {4, 0.0}));
  }
}

TEST_CASE("a point mass admits exactly one sequence") {
  Eigen::VectorXd point(2);
  point << 1.0, 0.0;
  const auto set = malleate::enumerate_typical(point, {6, 0.1});
  REQUIRE(set.count == 1);
  CHECK(set.sequences.front() == std::vector<int>(6, 0));
  CHECK(set.probability == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("enumeration counts match an integer bit-pattern sweep") {
  std::mt19937_64 rng = malleate::stream_rng(12, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd p(2);
    const double a = 0.05 + 0.9 * malleate::uniform01(rng);
    p << a, 1.0 - a;
    const int n = 4 + static_cast<int>(rng() % 9);
    const double delta = 0.6 * malleate::uniform01(rng);
    const auto set =
        malleate::enumerate_typical(p, {n, delta}, 2.0, {.materialize = false});
    const auto [ref_count, ref_mass] = ref_binary_count(p, n, delta);
    CHECK(set.count == ref_count);
    CHECK(set.probability == doctest::Approx(ref_mass).epsilon(1e-10));
    CHECK(set.sequences.empty());
  }
}

TEST_CASE("the balanced binary counts at growing blocklength") {
  Eigen::VectorXd uniform(2);
  uniform << 0.5, 0.5;

  const auto at4 = malleate::enumerate_typical(uniform, {4, 0.25});
  const auto at8 = malleate::enumerate_typical(uniform, {8, 0.25});
  const auto at16 = malleate::enumerate_typical(uniform, {16, 0.25});
  CHECK(at4.count == 6);
  CHECK(at8.count == 182);
  CHECK(at16.count == 51766);
  CHECK(at4.probability == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(at8.probability == doctest::Approx(0.7109375).epsilon(1e-15));
  CHECK(at16.probability == doctest::Approx(0.789886474609375).epsilon(1e-15));

  // The mass captured grows with the blocklength and clears 1 - delta at the
  // largest length we enumerate.
  CHECK(at4.probability < at8.probability);
  CHECK(at8.probability < at16.probability);
  CHECK(at16.probability > 0.75);

  // The measured exponent sits inside the slack band around the entropy.
  const double slack = malleate::lambda_slack(0.25, 2);
  CHECK(at8.log_size / 8 >= 1.0 - slack);
  CHECK(at8.log_size / 8 <= 1.0 + slack);
}

TEST_CASE("the candidate-space ceiling is enforced") {
  Eigen::VectorXd uniform(2);
  uniform << 0.5, 0.5;
  CHECK_THROWS_AS(malleate::enumerate_typical(uniform, {25, 0.25}),
                  malleate::LimitError);
  // A tightened per-call ceiling triggers the same refusal.
  CHECK_THROWS_AS(
      malleate::enumerate_typical(uniform, {10, 0.25}, 2.0, {.limit = 1000}),
      malleate::LimitError);
  // The census route stays open far beyond the enumeration ceiling.
  CHECK_NOTHROW(malleate::type_census(uniform, {64, 0.25}));
}

TEST_CASE("count-vector census agrees with enumeration") {
  std::mt19937_64 rng = malleate::stream_rng(13, 0);
  for (int trial = 0; trial < 15; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 3);
    Eigen::VectorXd p(k);
    for (int s = 0; s < k; ++s) p[s] = 0.1 + malleate::uniform01(rng);
    p /= p.sum();
    const int n = 4 + static_cast<int>(rng() % 5);
    const double delta = 0.8 * malleate::uniform01(rng);
    const auto census = malleate::type_census(p, {n, delta});
    const auto set =
        malleate::enumerate_typical(p, {n, delta}, 2.0, {.materialize = false});
    CHECK(census.count == static_cast<double>(set.count));
    CHECK(census.probability == doctest::Approx(set.probability).epsilon(1e-11));
    if (set.count > 0) {
      CHECK(census.log_size == doctest::Approx(set.log_size).epsilon(1e-11));
    }
  }
}

TEST_CASE("census mass keeps growing with the blocklength") {
  Eigen::VectorXd p(2);
  p << 0.3, 0.7;  // deliberately non-dyadic
  double last = 0.0;
  for (int n : {10, 20, 40, 80, 160}) {
    const auto census = malleate::type_census(p, {n, 0.2});
    CHECK(census.probability >= last - 1e-12);
    last = census.probability;
  }
  CHECK(last > 0.95);
}

TEST_CASE("joint enumeration walks the product alphabet") {
  const auto d = testsrc::independent_uniform(2, 2);
  const auto set = malleate::enumerate_jointly_typical(d, {4, 0.0});
  // Each product symbol must appear exactly once: 4! arrangements.
  REQUIRE(set.count == 24);
  CHECK(set.probability == doctest::Approx(24.0 / 256.0).epsilon(1e-12));
  for (const auto& seq : set.sequences) {
    std::vector<int> xs, ys;
    for (int w : seq) {
      xs.push_back(w / d.size_y());
      ys.push_back(w % d.size_y());
    }
    CHECK(malleate::is_jointly_typical(xs, ys, d, {4, 0.0}));
  }
}

TEST_CASE("support restriction changes the count but never the mass") {
  const auto d = testsrc::mod2_source();  // 8 product symbols, 4 carrying mass
  const TypicalSpec tight{4, 0.0};
  const auto full = malleate::enumerate_jointly_typical(d, tight);
  const auto restricted =
      malleate::enumerate_jointly_typical(d, tight, {.support_restricted = true});
  // With zero slack a zero-probability symbol disqualifies the sequence, so
  // the two walks see the same set.
  CHECK(full.count == restricted.count);
  CHECK(full.count == 24);
  CHECK(full.probability == doctest::Approx(restricted.probability).epsilon(1e-12));

  const TypicalSpec loose{4, 1.0};
  const auto full_loose =
      malleate::enumerate_jointly_typical(d, loose, {.materialize = false});
  const auto restricted_loose = malleate::enumerate_jointly_typical(
      d, loose, {.materialize = false, .support_restricted = true});
  CHECK(full_loose.count > restricted_loose.count);
  CHECK(full_loose.probability ==
        doctest::Approx(restricted_loose.probability).epsilon(1e-12));
}

TEST_CASE("conditional set of a copy source is the sequence itself") {
  const auto d = testsrc::copy_uniform(2);
  const std::vector<int> balanced = repeat_pattern({0, 1}, 4);
  const auto set = malleate::conditional_typical_set(balanced, d, {8, 0.1});
  REQUIRE(set.count == 1);
  CHECK(set.sequences.front() == balanced);
  CHECK(set.probability == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<int> lopsided(8, 0);
  const auto empty = malleate::conditional_typical_set(lopsided, d, {8, 0.1});
  CHECK(empty.count == 0);
  CHECK(empty.probability == 0.0);
  CHECK(empty.log_size == -std::numeric_limits<double>::infinity());
}

TEST_CASE("conditional membership is the double filter it claims to be") {
  std::mt19937_64 rng = malleate::stream_rng(14, 0);
  const auto py_of = [](const JointDistribution& d) { return d.marginal_y(); };
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = testsrc::random_joint(rng, 2, 3);
    const int n = 5;
    std::vector<int> xs(n);
    const auto px = d.marginal_x();
    for (int& s : xs) {
      do {
        s = static_cast<int>(rng() % 2);
      } while (px[s] <= 1e-12);
    }
    for (double delta : {0.2, 0.6, 1.2}) {
      const auto set = malleate::conditional_typical_set(xs, d, {n, delta});
      // Walk every candidate directly.
      std::uint64_t expected = 0;
      std::vector<int> ys(n, 0);
      const Eigen::VectorXd py = py_of(d);
      while (true) {
        if (malleate::is_strongly_typical(ys, py, {n, delta}) &&
            malleate::is_jointly_typical(xs, ys, d, {n, delta})) {
          ++expected;
        }
        int pos = n - 1;
        while (pos >= 0 && ys[pos] == 2) ys[pos--] = 0;
        if (pos < 0) break;
        ++ys[pos];
      }
      CHECK(set.count == expected);
      for (const auto& y : set.sequences) {
        CHECK(malleate::is_strongly_typical(y, py, {n, delta}));
        CHECK(malleate::is_jointly_typical(xs, y, d, {n, delta}));
      }
    }
  }
}

TEST_CASE("conditional mass is the product of kernel rows") {
  const auto d = testsrc::dsbs(0.25);
  const std::vector<int> xs = repeat_pattern({0, 1}, 3);
  const auto set = malleate::conditional_typical_set(xs, d, {6, 0.5});
  double expected = 0.0;
  for (const auto& y : set.sequences) {
    double prob = 1.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      prob *= (y[i] == xs[i]) ? 0.75 : 0.25;
    }
    expected += prob;
  }
  CHECK(set.probability == doctest::Approx(expected).epsilon(1e-12));
  CHECK(set.count > 0);
}

TEST_CASE("conditioning on a zero-probability symbol is refused") {
  const auto d = testsrc::point_mass();
  const std::vector<int> xs{0, 1, 0, 0};
  CHECK_THROWS_AS(malleate::conditional_typical_set(xs, d, {4, 0.5}),
                  malleate::ValidationError);
}

TEST_CASE("slack helper") {
  CHECK(malleate::lambda_slack(0.0, 2) == 0.0);
  CHECK(malleate::lambda_slack(0.25, 2) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(malleate::lambda_slack(0.25, 16) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(malleate::lambda_slack(0.25, 16, std::exp(1.0)) ==
        doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(malleate::lambda_slack(-0.1, 2), malleate::ValidationError);
}

TEST_CASE("sampled blocks are reproducible and follow the law") {
  const auto d = testsrc::dsbs(0.11);
  std::vector<int> xs, ys, xs2, ys2;
  {
    auto rng = malleate::stream_rng(7, 3);
    malleate::sample_block(d, 32, rng, xs, ys);
    auto rng2 = malleate::stream_rng(7, 3);
    malleate::sample_block(d, 32, rng2, xs2, ys2);
  }
  CHECK(xs == xs2);
  CHECK(ys == ys2);
  REQUIRE(xs.size() == 32);

  auto rng = malleate::stream_rng(7, 4);
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(2, 2);
  const int blocks = 500, n = 40;
  for (int b = 0; b < blocks; ++b) {
    malleate::sample_block(d, n, rng, xs, ys);
    for (int i = 0; i < n; ++i) freq(xs[i], ys[i]) += 1.0;
  }
  freq /= blocks * n;  // 20000 draws: 4-sigma is about 0.014
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      CHECK(freq(x, y) == doctest::Approx(d.pxy()(x, y)).scale(1.0).epsilon(0.015));
}

TEST_CASE("the transfer estimate is exact for a copied chain") {
  const auto d = testsrc::copy_uniform(2);
  const auto est = malleate::verify_markov_lemma(d, malleate::Partition::discrete(2),
                                                 {8, 0.25}, 500, 21);
  REQUIRE(est.conditioning_events > 0);
  // U = X and Y = X: success uses the same counts at double the slack.
  CHECK(est.successes == est.conditioning_events);
  CHECK(est.estimate == 1.0);
  CHECK(est.success_slack == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("the transfer estimate clears its target on the symmetric source") {
  const auto d = testsrc::dsbs(0.11);
  const auto est = malleate::verify_markov_lemma(d, malleate::Partition::discrete(2),
                                                 {64, 0.1}, 10000, 1);
  CHECK(est.trials == 10000);
  CHECK(est.conditioning_events > 2000);
  CHECK(est.estimate > 0.9);

  const auto repeat = malleate::verify_markov_lemma(d, malleate::Partition::discrete(2),
                                                    {64, 0.1}, 10000, 1);
  CHECK(repeat.successes == est.successes);
  CHECK(repeat.conditioning_events == est.conditioning_events);
}

TEST_CASE("a one-cell side variable transfers typicality almost surely") {
  const auto d = testsrc::dsbs(0.11);
  const auto est = malleate::verify_markov_lemma(d, malleate::Partition::whole(2),
                                                 {32, 0.25}, 2000, 5);
  CHECK(est.conditioning_events > 0);
  CHECK(est.estimate > 0.75);
}

TEST_CASE("an unreachable conditioning event is reported, not averaged") {
  // 0.11-weighted cells never match the empirical law exactly at this length.
  const auto d = testsrc::dsbs(0.11);
  CHECK_THROWS_AS(malleate::verify_markov_lemma(d, malleate::Partition::discrete(2),
                                                {7, 0.0}, 50, 1),
                  malleate::ValidationError);
  CHECK_THROWS_AS(malleate::verify_markov_lemma(d, malleate::Partition::discrete(2),
                                                {8, 0.25}, 0, 1),
                  malleate::ValidationError);
  // Partition size must match the X support.
  CHECK_THROWS_AS(malleate::verify_markov_lemma(d, malleate::Partition::discrete(3),
                                                {8, 0.25}, 10, 1),
                  malleate::ValidationError);
}

TEST_CASE("bound report on a copy source clears every row at n = 16") {
  const auto d = testsrc::copy_uniform(2);
  malleate::LemmaOptions options;
  options.markov_trials = 400;
  const auto rows = malleate::lemma_report(d, {16, 0.25}, options);

  REQUIRE(rows.size() == 7);
  std::map<std::string, malleate::LemmaCheck> by_name;
  for (const auto& row : rows) by_name[row.name] = row;

  REQUIRE(by_name.count("marginal-size-upper") == 1);
  REQUIRE(by_name.count("joint-size-lower") == 1);
  REQUIRE(by_name.count("joint-size-upper") == 1);
  REQUIRE(by_name.count("joint-probability") == 1);
  REQUIRE(by_name.count("conditional-size-lower") == 1);
  REQUIRE(by_name.count("conditional-size-upper") == 1);
  REQUIRE(by_name.count("markov-transfer") == 1);
  for (const auto& row : rows) CHECK(row.pass);

  // The joint walk counts at least the aligned pairs, so its exponent can
  // only exceed the marginal one (off-support cells admit extra sequences
  // within the slack, at zero mass).
  const auto marginal = by_name["marginal-size-upper"];
  const auto joint_upper = by_name["joint-size-upper"];
  CHECK(joint_upper.measured >= marginal.measured - 1e-12);
  // Aligned pairs carry all the mass, and their pair counts reduce to the
  // marginal counts: the captured joint mass equals the marginal one.
  CHECK(by_name["joint-probability"].measured ==
        doctest::Approx(0.789886474609375).epsilon(1e-15));
  CHECK(by_name["joint-probability"].lower.value() == doctest::Approx(0.75));
  CHECK(by_name["conditional-size-lower"].measured >= 0.0);
  CHECK(by_name["conditional-size-upper"].measured <=
        by_name["conditional-size-upper"].upper.value());
}

TEST_CASE("bound rows report honestly when a limit has not kicked in yet") {
  const auto d = testsrc::dsbs(0.11);
  const auto rows = malleate::lemma_report(d, {8, 0.25});
  REQUIRE(rows.size() == 6);  // no Monte-Carlo row unless trials are requested
  for (const auto& row : rows) {
    const bool above = !row.lower || row.measured >= *row.lower;
    const bool below = !row.upper || row.measured <= *row.upper;
    CHECK(row.pass == (above && below));
  }
  // The size rows are guaranteed at any blocklength; only the mass row may
  // lag its asymptotic target.
  std::map<std::string, malleate::LemmaCheck> by_name;
  for (const auto& row : rows) by_name[row.name] = row;
  CHECK(by_name["marginal-size-upper"].pass);
  CHECK(by_name["joint-size-upper"].pass);
  CHECK(by_name["conditional-size-lower"].pass);
  CHECK(by_name["conditional-size-upper"].pass);
}
