#pragma once

#include <vector>

#include <Eigen/Dense>

#include "malleate/alphabet.hpp"
#include "malleate/constants.hpp"
#include "malleate/errors.hpp"

namespace malleate {

// A finite joint pmf p(x, y) over two labeled alphabets.  Rows index X,
// columns index Y.  Construction validates; marginals and kernels are always
// derived from pxy on demand, never stored separately.
//
// log_base fixes the unit of every entropy and rate computed from this
// distribution (2 = bits).
class JointDistribution {
 public:
  JointDistribution(Alphabet alphabet_x, Alphabet alphabet_y, Eigen::MatrixXd pxy,
                    double log_base = 2.0);

  const Alphabet& alphabet_x() const { return alphabet_x_; }
  const Alphabet& alphabet_y() const { return alphabet_y_; }
  const Eigen::MatrixXd& pxy() const { return pxy_; }
  double log_base() const { return log_base_; }

  int size_x() const { return static_cast<int>(pxy_.rows()); }
  int size_y() const { return static_cast<int>(pxy_.cols()); }

  Eigen::VectorXd marginal_x() const { return pxy_.rowwise().sum(); }
  Eigen::VectorXd marginal_y() const { return pxy_.colwise().sum().transpose(); }

  // Indices of symbols with marginal probability above the structural-zero
  // threshold, in alphabet order.
  std::vector<int> support_x() const;
  std::vector<int> support_y() const;

  // Same distribution expressed in a different entropy unit.
  JointDistribution with_log_base(double base) const {
    return JointDistribution(alphabet_x_, alphabet_y_, pxy_, base);
  }

 private:
  Alphabet alphabet_x_;
  Alphabet alphabet_y_;
  Eigen::MatrixXd pxy_;
  double log_base_;
};

// Row-stochastic conditional p(y | x), defined only for x with positive
// marginal.  Asking for an undefined row is an error.
class ConditionalKernel {
 public:
  ConditionalKernel(Eigen::MatrixXd rows, std::vector<bool> defined)
      : rows_(std::move(rows)), defined_(std::move(defined)) {}

  bool defined(int x) const { return defined_.at(static_cast<std::size_t>(x)); }

  Eigen::VectorXd row(int x) const {
    if (!defined(x)) {
      throw ValidationError("undefined-row: conditional p(y|x) does not exist for x index " +
                            std::to_string(x) + " (zero marginal)");
    }
    return rows_.row(x).transpose();
  }

  int size_x() const { return static_cast<int>(rows_.rows()); }
  int size_y() const { return static_cast<int>(rows_.cols()); }

 private:
  Eigen::MatrixXd rows_;
  std::vector<bool> defined_;
};

ConditionalKernel conditional_y_given_x(const JointDistribution& d);
ConditionalKernel conditional_x_given_y(const JointDistribution& d);

}  // namespace malleate
