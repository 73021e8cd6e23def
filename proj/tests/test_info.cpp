#include "doctest.h"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "malleate/info.hpp"
#include "test_helpers.hpp"

using malleate::JointDistribution;

namespace {

// Independent reference entropy used to cross-check the library: plain loop
// over std::log2 with explicit zero skipping.
double ref_entropy_bits(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) h -= p(i) * std::log2(p(i));
  }
  return h;
}

constexpr double kH011 = 0.499915958164528;  // binary entropy of 0.11, bits

}  // namespace

TEST_CASE("entropy of canonical vectors") {
  Eigen::VectorXd fair(2);
  fair << 0.5, 0.5;
  CHECK(malleate::entropy(fair) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd det(2);
  det << 1.0, 0.0;
  CHECK(malleate::entropy(det) == doctest::Approx(0.0));

  Eigen::VectorXd skew(2);
  skew << 0.89, 0.11;
  CHECK(malleate::entropy(skew) == doctest::Approx(kH011).epsilon(1e-9));

  Eigen::VectorXd tri(3);
  tri << 0.5, 0.25, 0.25;
  CHECK(malleate::entropy(tri) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("entropy validates its argument") {
  Eigen::VectorXd bad(2);
  bad << 0.7, 0.2;
  CHECK_THROWS_AS(malleate::entropy(bad), malleate::ValidationError);
  bad << -0.2, 1.2;
  CHECK_THROWS_AS(malleate::entropy(bad), malleate::ValidationError);
}

TEST_CASE("joint, conditional and mutual information on the standard sources") {
  auto ind = testsrc::independent_uniform(2, 2);
  CHECK(malleate::joint_entropy(ind) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(malleate::mutual_information(ind) == doctest::Approx(0.0).epsilon(1e-12));

  auto copy = testsrc::copy_uniform(2);
  CHECK(malleate::joint_entropy(copy) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(malleate::conditional_entropy_y_given_x(copy) == doctest::Approx(0.0));
  CHECK(malleate::mutual_information(copy) == doctest::Approx(1.0).epsilon(1e-12));

  auto d = testsrc::dsbs(0.11);
  CHECK(malleate::joint_entropy(d) == doctest::Approx(1.0 + kH011).epsilon(1e-9));
  CHECK(malleate::conditional_entropy_y_given_x(d) == doctest::Approx(kH011).epsilon(1e-9));
  CHECK(malleate::mutual_information(d) == doctest::Approx(1.0 - kH011).epsilon(1e-9));

  auto m2 = testsrc::mod2_source();
  CHECK(malleate::entropy_x(m2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(malleate::entropy_y(m2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(malleate::joint_entropy(m2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(malleate::conditional_entropy_y_given_x(m2) == doctest::Approx(0.0));
  CHECK(malleate::conditional_entropy_x_given_y(m2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chain rule and information inequalities hold on random joints") {
  auto rng = malleate::stream_rng(11, 0);
  for (int t = 0; t < 1000; ++t) {
    auto d = testsrc::random_joint(rng, 2 + int(rng() % 5), 2 + int(rng() % 5),
                                   t % 4 == 0 ? 0.25 : 0.0);
    const double hx = malleate::entropy_x(d);
    const double hy = malleate::entropy_y(d);
    const double hxy = malleate::joint_entropy(d);
    const double hyx = malleate::conditional_entropy_y_given_x(d);
    const double hxy_ = malleate::conditional_entropy_x_given_y(d);
    const double i = malleate::mutual_information(d);

    CHECK(hxy == doctest::Approx(hx + hyx).epsilon(1e-9));
    CHECK(hxy == doctest::Approx(hy + hxy_).epsilon(1e-9));
    CHECK(i == doctest::Approx(hx + hy - hxy).epsilon(1e-9));
    CHECK(i >= -1e-9);
    CHECK(hyx <= hy + 1e-9);  // conditioning cannot increase entropy
    CHECK(hxy_ <= hx + 1e-9);
  }
}

TEST_CASE("mutual information vanishes exactly on product joints") {
  auto rng = malleate::stream_rng(13, 0);
  for (int t = 0; t < 200; ++t) {
    const int kx = 2 + int(rng() % 4), ky = 2 + int(rng() % 4);
    Eigen::VectorXd px(kx), py(ky);
    for (int i = 0; i < kx; ++i) px(i) = -std::log(1.0 - malleate::uniform01(rng));
    for (int j = 0; j < ky; ++j) py(j) = -std::log(1.0 - malleate::uniform01(rng));
    px /= px.sum();
    py /= py.sum();
    Eigen::MatrixXd p = px * py.transpose();
    p /= p.sum();
    JointDistribution d(malleate::numeric_alphabet(kx), malleate::numeric_alphabet(ky), p);
    CHECK(std::abs(malleate::mutual_information(d)) <= 1e-9);
  }
}

TEST_CASE("changing the log base rescales every entropy") {
  auto d = testsrc::dsbs(0.11);
  auto d4 = d.with_log_base(4.0);
  CHECK(malleate::joint_entropy(d4) ==
        doctest::Approx(malleate::joint_entropy(d) / 2.0).epsilon(1e-12));
  CHECK(malleate::mutual_information(d4) ==
        doctest::Approx(malleate::mutual_information(d) / 2.0).epsilon(1e-12));

  Eigen::VectorXd tri(3);
  tri << 0.5, 0.25, 0.25;
  CHECK(malleate::entropy(tri, 2.0) / std::log2(7.0) ==
        doctest::Approx(malleate::entropy(tri, 7.0)).epsilon(1e-12));
}

TEST_CASE("entropy of a labeling of X") {
  auto m2 = testsrc::mod2_source();

  std::vector<int> constant{0, 0, 0, 0};
  CHECK(malleate::entropy_of_labels(m2, constant) == doctest::Approx(0.0));

  std::vector<int> identity{0, 1, 2, 3};
  CHECK(malleate::entropy_of_labels(m2, identity) == doctest::Approx(2.0).epsilon(1e-12));

  std::vector<int> parity{0, 1, 0, 1};
  CHECK(malleate::entropy_of_labels(m2, parity) == doctest::Approx(1.0).epsilon(1e-12));

  // Unassigned label on a positive-probability symbol is an error...
  std::vector<int> partial{0, -1, 0, 1};
  CHECK_THROWS_AS(malleate::entropy_of_labels(m2, partial), malleate::ValidationError);

  // ...but fine on a zero-probability symbol.
  auto pm = testsrc::point_mass();
  std::vector<int> on_support{0, -1};
  CHECK(malleate::entropy_of_labels(pm, on_support) == doctest::Approx(0.0));
}

TEST_CASE("library entropy matches an independent reference on random pmfs") {
  auto rng = malleate::stream_rng(17, 0);
  for (int t = 0; t < 500; ++t) {
    const int k = 2 + int(rng() % 6);
    Eigen::VectorXd p(k);
    for (int i = 0; i < k; ++i) p(i) = -std::log(1.0 - malleate::uniform01(rng));
    p /= p.sum();
    CHECK(malleate::entropy(p) == doctest::Approx(ref_entropy_bits(p)).epsilon(1e-10));
  }
}
