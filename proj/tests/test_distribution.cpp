#include "doctest.h"

#include <Eigen/Dense>

#include "malleate/joint_distribution.hpp"
#include "test_helpers.hpp"

using malleate::Alphabet;
using malleate::ConditionalKernel;
using malleate::JointDistribution;
using malleate::ValidationError;

TEST_CASE("construction validates entries and normalization") {
  Eigen::MatrixXd good(2, 2);
  good << 0.25, 0.25, 0.25, 0.25;
  CHECK_NOTHROW(JointDistribution(malleate::numeric_alphabet(2), malleate::numeric_alphabet(2),
                                  good));

  Eigen::MatrixXd negative(2, 2);
  negative << 0.5, 0.6, -0.1, 0.0;
  CHECK_THROWS_AS(JointDistribution(malleate::numeric_alphabet(2), malleate::numeric_alphabet(2),
                                    negative),
                  ValidationError);

  // Off by 1e-6 is rejected, not renormalized.
  Eigen::MatrixXd off(2, 2);
  off << 0.25, 0.25, 0.25, 0.250001;
  CHECK_THROWS_AS(JointDistribution(malleate::numeric_alphabet(2), malleate::numeric_alphabet(2),
                                    off),
                  ValidationError);

  // Off by 1e-12 is inside the tolerance.
  Eigen::MatrixXd nearly = good;
  nearly(0, 0) += 1e-12;
  CHECK_NOTHROW(JointDistribution(malleate::numeric_alphabet(2), malleate::numeric_alphabet(2),
                                  nearly));

  // Dimension mismatch with alphabets.
  CHECK_THROWS_AS(JointDistribution(malleate::numeric_alphabet(3), malleate::numeric_alphabet(2),
                                    good),
                  ValidationError);

  // Duplicate alphabet labels.
  CHECK_THROWS_AS(Alphabet({"a", "a"}), ValidationError);
}

TEST_CASE("marginals of the uniform 2x2 joint are uniform") {
  auto d = testsrc::independent_uniform(2, 2);
  const Eigen::VectorXd mx = d.marginal_x();
  const Eigen::VectorXd my = d.marginal_y();
  CHECK(mx(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mx(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(my(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(my(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("point mass marginals and support") {
  auto d = testsrc::point_mass();
  CHECK(d.marginal_x()(0) == doctest::Approx(1.0));
  CHECK(d.marginal_x()(1) == doctest::Approx(0.0));
  CHECK(d.support_x() == std::vector<int>{0});
  CHECK(d.support_y() == std::vector<int>{0});
}

TEST_CASE("dsbs marginals are uniform and supports are full") {
  auto d = testsrc::dsbs(0.11);
  CHECK(d.marginal_x()(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.marginal_y()(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.support_x().size() == 2);
  CHECK(d.support_y().size() == 2);
}

TEST_CASE("conditional kernel of the copy source is the identity") {
  auto d = testsrc::copy_uniform(2);
  auto k = malleate::conditional_y_given_x(d);
  CHECK(k.row(0)(0) == doctest::Approx(1.0));
  CHECK(k.row(0)(1) == doctest::Approx(0.0));
  CHECK(k.row(1)(1) == doctest::Approx(1.0));
}

TEST_CASE("conditional kernel of an independent pair repeats the marginal") {
  auto d = testsrc::independent_uniform(2, 3);
  auto k = malleate::conditional_y_given_x(d);
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 3; ++y) {
      CHECK(k.row(x)(y) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
  }
}

TEST_CASE("dsbs conditional rows are the crossover rows") {
  auto d = testsrc::dsbs(0.11);
  auto k = malleate::conditional_y_given_x(d);
  CHECK(k.row(0)(0) == doctest::Approx(0.89).epsilon(1e-12));
  CHECK(k.row(0)(1) == doctest::Approx(0.11).epsilon(1e-12));
  CHECK(k.row(1)(0) == doctest::Approx(0.11).epsilon(1e-12));
}

TEST_CASE("asking for a conditional row at a zero-probability symbol errors") {
  auto d = testsrc::point_mass();
  auto k = malleate::conditional_y_given_x(d);
  CHECK(k.defined(0));
  CHECK_FALSE(k.defined(1));
  CHECK_THROWS_AS(k.row(1), ValidationError);
}

TEST_CASE("kernel rows are row-stochastic on random joints") {
  auto rng = malleate::stream_rng(7, 0);
  for (int t = 0; t < 200; ++t) {
    auto d = testsrc::random_joint(rng, 2 + int(rng() % 4), 2 + int(rng() % 4),
                                   t % 3 == 0 ? 0.3 : 0.0);
    auto k = malleate::conditional_y_given_x(d);
    for (int x = 0; x < d.size_x(); ++x) {
      if (!k.defined(x)) continue;
      CHECK(k.row(x).sum() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(k.row(x).minCoeff() >= 0.0);
    }
  }
}
