#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "malleate/curve.hpp"
#include "malleate/info.hpp"
#include "test_helpers.hpp"

using malleate::CurvePoint;
using malleate::JointDistribution;
using malleate::MalleabilityCurve;
using malleate::Partition;

namespace {

constexpr double kH011 = 0.499915958164528;

// Independent reference: evaluate a partition of the X support by direct
// summation with std::log2, no library calls.
std::pair<double, double> ref_point(const JointDistribution& d, const std::vector<int>& labels) {
  const auto support = d.support_x();
  std::map<int, std::vector<double>> cell_rows;
  for (std::size_t s = 0; s < support.size(); ++s) {
    auto& row = cell_rows[labels[s]];
    row.resize(d.size_y(), 0.0);
    for (int y = 0; y < d.size_y(); ++y) row[y] += d.pxy()(support[s], y);
  }
  double j = 0.0, l = 0.0;
  for (const auto& [cell, row] : cell_rows) {
    double mass = 0.0;
    for (double v : row) {
      mass += v;
      if (v > 0.0) l -= v * std::log2(v);
    }
    if (mass > 0.0) j -= mass * std::log2(mass);
  }
  return {j, l};
}

}  // namespace

TEST_CASE("evaluating the extreme partitions recovers the corner points") {
  auto m2 = testsrc::mod2_source();
  auto whole = malleate::evaluate_partition(m2, Partition::whole(4));
  CHECK(whole.j == doctest::Approx(0.0));
  CHECK(whole.l == doctest::Approx(1.0).epsilon(1e-12));  // H(Y)

  auto discrete = malleate::evaluate_partition(m2, Partition::discrete(4));
  CHECK(discrete.j == doctest::Approx(2.0).epsilon(1e-12));  // H(X)
  CHECK(discrete.l == doctest::Approx(2.0).epsilon(1e-12));  // H(X,Y)
}

TEST_CASE("the parity partition of the mod-2 source is a free lunch") {
  auto m2 = testsrc::mod2_source();
  auto pt = malleate::evaluate_partition(m2, Partition::parse("0.1.0.1"));
  CHECK(pt.j == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pt.l == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pt.m() == doctest::Approx(0.0));
}

TEST_CASE("partition evaluation matches an independent reference") {
  auto rng = malleate::stream_rng(23, 0);
  for (int t = 0; t < 100; ++t) {
    auto d = testsrc::random_joint(rng, 2 + int(rng() % 4), 2 + int(rng() % 4),
                                   t % 3 == 0 ? 0.3 : 0.0);
    const int m = static_cast<int>(d.support_x().size());
    malleate::PartitionEnumerator en(m);
    std::vector<int> labels;
    while (en.next(labels)) {
      auto pt = malleate::evaluate_partition(d, Partition::from_labels(labels));
      auto [j, l] = ref_point(d, labels);
      CHECK(pt.j == doctest::Approx(j).epsilon(1e-10));
      CHECK(pt.l == doctest::Approx(l).epsilon(1e-10));
    }
  }
}

TEST_CASE("exact curve of the mod-2 source") {
  auto m2 = testsrc::mod2_source();
  auto curve = malleate::exact_curve(m2);
  CHECK(curve.raw_count() == 15);

  const auto& env = curve.envelope();
  REQUIRE(env.size() == 3);
  CHECK(env[0].j == doctest::Approx(0.0));
  CHECK(env[0].l == doctest::Approx(1.0));
  CHECK(env[1].j == doctest::Approx(1.0));
  CHECK(env[1].l == doctest::Approx(1.0));
  CHECK(env[1].labels == std::vector<int>{0, 1, 0, 1});
  CHECK(env[2].j == doctest::Approx(2.0));
  CHECK(env[2].l == doctest::Approx(2.0));

  // Past the sufficient statistic the envelope climbs with unit slope.
  CHECK(curve.envelope_value(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(curve.envelope_value(1.5) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(curve.envelope_value(2.5) == doctest::Approx(2.5).epsilon(1e-12));
  // Below it, time sharing between the first two vertices.
  CHECK(curve.envelope_value(0.5) == doctest::Approx(1.0).epsilon(1e-12));

  const auto& w = curve.sufficient_statistic();
  CHECK(w.partition.canonical_form() == "0.1.0.1");
  CHECK(w.entropy == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.h_y_given_w == doctest::Approx(0.0));
}

TEST_CASE("exact curve of the doubly symmetric binary source") {
  auto d = testsrc::dsbs(0.11);
  auto curve = malleate::exact_curve(d);
  CHECK(curve.raw_count() == 2);
  const auto& env = curve.envelope();
  REQUIRE(env.size() == 2);
  CHECK(env[0].j == doctest::Approx(0.0));
  CHECK(env[0].l == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(env[1].j == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(env[1].l == doctest::Approx(1.0 + kH011).epsilon(1e-9));
  // Both raw points sit on the envelope.
  CHECK(curve.raw_on_envelope(0));
  CHECK(curve.raw_on_envelope(1));
  // The sufficient statistic is X itself.
  CHECK(curve.sufficient_statistic().partition.canonical_form() == "0.1");
}

TEST_CASE("copy source: flat envelope, then the unit-slope ray") {
  auto d = testsrc::copy_uniform(2);
  auto curve = malleate::exact_curve(d);
  auto slopes = malleate::check_slope_bounds(curve);
  REQUIRE(slopes.slopes.size() == 1);
  CHECK(slopes.slopes[0] == doctest::Approx(0.0));
  CHECK(slopes.within_bounds);
  CHECK(curve.envelope_value(0.3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(curve.envelope_value(1.7) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("independent pair: a single unit-slope segment") {
  auto d = testsrc::independent_uniform(2, 2);
  auto curve = malleate::exact_curve(d);
  auto slopes = malleate::check_slope_bounds(curve);
  REQUIRE(!slopes.slopes.empty());
  for (double s : slopes.slopes) CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  // W is trivial: no information about Y is shared.
  CHECK(curve.sufficient_statistic().entropy == doctest::Approx(0.0));
  CHECK(curve.envelope_value(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(curve.envelope_value(2.0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sufficient statistic groups equal conditional rows") {
  auto m2 = testsrc::mod2_source();
  auto w = malleate::minimal_sufficient_statistic(m2);
  CHECK(w.partition.canonical_form() == "0.1.0.1");
  CHECK(w.entropy == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.h_y_given_w ==
        doctest::Approx(malleate::conditional_entropy_y_given_x(m2)).epsilon(1e-9));

  auto ind = testsrc::independent_uniform(3, 2);
  CHECK(malleate::minimal_sufficient_statistic(ind).partition.num_cells() == 1);

  auto d = testsrc::dsbs(0.11);
  CHECK(malleate::minimal_sufficient_statistic(d).partition.num_cells() == 2);
}

TEST_CASE("curve invariants hold on random joints") {
  auto rng = malleate::stream_rng(29, 0);
  for (int t = 0; t < 60; ++t) {
    auto d = testsrc::random_joint(rng, 2 + int(rng() % 5), 2 + int(rng() % 4),
                                   t % 4 == 0 ? 0.25 : 0.0);
    auto curve = malleate::exact_curve(d);
    const double hx = malleate::entropy_x(d);
    const double hy = malleate::entropy_y(d);
    const double hxy = malleate::joint_entropy(d);

    // Corner points.
    CHECK(curve.envelope_value(0.0) == doctest::Approx(hy).epsilon(1e-9));
    CHECK(curve.envelope_value(hx) == doctest::Approx(hxy).epsilon(1e-9));

    // Elementary bounds at every evaluated partition.
    for (std::size_t i = 0; i < curve.raw_count(); ++i) {
      const double j = curve.raw_j(i), l = curve.raw_l(i);
      CHECK(l >= hy - 1e-9);
      CHECK(l >= j - 1e-9);
      CHECK(l <= j + hy + 1e-9);
      // No raw point may dip below the envelope.
      CHECK(l >= curve.envelope_value(j) - 1e-9);
    }

    // Envelope is convex with slopes in [0, 1].
    auto slopes = malleate::check_slope_bounds(curve);
    CHECK(slopes.within_bounds);
    for (std::size_t s = 1; s < slopes.slopes.size(); ++s) {
      CHECK(slopes.slopes[s] >= slopes.slopes[s - 1] - 1e-9);
    }

    // Past H(W) the envelope is the unit-slope ray through (H(W), H(Y,W)).
    const auto& w = curve.sufficient_statistic();
    for (double extra : {0.0, 0.1, 0.9}) {
      CHECK(curve.envelope_value(w.entropy + extra) ==
            doctest::Approx(w.entropy + w.h_y_given_w + extra).epsilon(1e-9));
    }
  }
}

TEST_CASE("coarsening a partition lowers j and raises the malleability cost") {
  auto rng = malleate::stream_rng(31, 0);
  for (int t = 0; t < 100; ++t) {
    auto d = testsrc::random_joint(rng, 3 + int(rng() % 4), 2 + int(rng() % 4));
    const int m = static_cast<int>(d.support_x().size());
    // Random partition, then merge two random cells.
    std::vector<int> labels(m);
    for (auto& v : labels) v = int(rng() % std::max(2, m - 1));
    auto fine = Partition::from_labels(labels);
    if (fine.num_cells() < 2) continue;
    const int a = int(rng() % fine.num_cells());
    int b = int(rng() % fine.num_cells());
    if (a == b) b = (b + 1) % fine.num_cells();
    std::vector<int> merged = fine.labels();
    for (auto& v : merged) {
      if (v == std::max(a, b)) v = std::min(a, b);
    }
    auto coarse = Partition::from_labels(merged);

    auto pf = malleate::evaluate_partition(d, fine);
    auto pc = malleate::evaluate_partition(d, coarse);
    CHECK(pc.j <= pf.j + 1e-9);
    CHECK(pc.m() >= pf.m() - 1e-9);
  }
}

TEST_CASE("the heuristic curve never undercuts the exact envelope") {
  auto rng = malleate::stream_rng(37, 0);
  for (int t = 0; t < 20; ++t) {
    auto d = testsrc::random_joint(rng, 4 + int(rng() % 4), 2 + int(rng() % 4));
    auto exact = malleate::exact_curve(d);
    auto heur = malleate::heuristic_curve(d, 5, /*seed=*/1000 + t);
    for (double j = 0.0; j <= exact.h_x() + 0.2; j += exact.h_x() / 7 + 1e-3) {
      CHECK(heur.envelope_value(j) >= exact.envelope_value(j) - 1e-9);
    }
    // The heuristic still nails both corners: its merge chain starts at the
    // discrete partition and ends at the single cell.
    CHECK(heur.envelope_value(0.0) == doctest::Approx(exact.envelope_value(0.0)).epsilon(1e-9));
    CHECK(heur.envelope_value(exact.h_x()) ==
          doctest::Approx(exact.envelope_value(exact.h_x())).epsilon(1e-9));
  }
}

TEST_CASE("heuristic runs are deterministic for a fixed seed") {
  auto rng = malleate::stream_rng(41, 0);
  auto d = testsrc::random_joint(rng, 7, 3);
  auto a = malleate::heuristic_curve(d, 6, 99);
  auto b = malleate::heuristic_curve(d, 6, 99);
  REQUIRE(a.raw_count() == b.raw_count());
  for (std::size_t i = 0; i < a.raw_count(); ++i) {
    CHECK(a.raw_j(i) == b.raw_j(i));
    CHECK(a.raw_l(i) == b.raw_l(i));
    CHECK(a.raw_canonical_form(i) == b.raw_canonical_form(i));
  }
}

TEST_CASE("exact curve is independent of the worker cap") {
  auto rng = malleate::stream_rng(43, 0);
  auto d = testsrc::random_joint(rng, 8, 3);
  malleate::SolverOptions one, four;
  one.threads = 1;
  four.threads = 4;
  auto a = malleate::exact_curve(d, one);
  auto b = malleate::exact_curve(d, four);
  REQUIRE(a.raw_count() == b.raw_count());
  for (std::size_t i = 0; i < a.raw_count(); ++i) {
    CHECK(a.raw_j(i) == b.raw_j(i));
    CHECK(a.raw_l(i) == b.raw_l(i));
    CHECK(a.raw_canonical_form(i) == b.raw_canonical_form(i));
  }
}

TEST_CASE("oversized supports are refused with a pointer to heuristic mode") {
  auto rng = malleate::stream_rng(47, 0);
  auto d = testsrc::random_joint(rng, 13, 2);
  CHECK_THROWS_AS(malleate::exact_curve(d), malleate::LimitError);
  CHECK_NOTHROW(malleate::heuristic_curve(d, 2, 7));
}

TEST_CASE("max_cells restricts the sweep") {
  auto m2 = testsrc::mod2_source();
  malleate::SolverOptions opt;
  opt.max_cells = 2;
  auto curve = malleate::exact_curve(m2, opt);
  CHECK(curve.raw_count() == 8);
}
