#include "malleate/joint_distribution.hpp"

#include <cmath>
#include <sstream>

namespace malleate {

JointDistribution::JointDistribution(Alphabet alphabet_x, Alphabet alphabet_y,
                                     Eigen::MatrixXd pxy, double log_base)
    : alphabet_x_(std::move(alphabet_x)),
      alphabet_y_(std::move(alphabet_y)),
      pxy_(std::move(pxy)),
      log_base_(log_base) {
  if (pxy_.rows() != alphabet_x_.size() || pxy_.cols() != alphabet_y_.size()) {
    std::ostringstream msg;
    msg << "pxy shape (" << pxy_.rows() << "x" << pxy_.cols()
        << ") does not match alphabet sizes (" << alphabet_x_.size() << "x"
        << alphabet_y_.size() << ")";
    throw ValidationError(msg.str());
  }
  for (int i = 0; i < pxy_.rows(); ++i) {
    for (int j = 0; j < pxy_.cols(); ++j) {
      const double v = pxy_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "pxy entries must be finite and nonnegative: entry (" << i << "," << j
            << ") = " << v;
        throw ValidationError(msg.str());
      }
    }
  }
  const double total = pxy_.sum();
  if (std::abs(total - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg << "pxy must sum to 1 within " << kSumTolerance << " (got " << total
        << "); inputs are rejected, not renormalized";
    throw ValidationError(msg.str());
  }
  if (!(log_base_ > 1.0)) {
    throw ValidationError("log_base must be > 1");
  }
}

std::vector<int> JointDistribution::support_x() const {
  const Eigen::VectorXd m = marginal_x();
  std::vector<int> out;
  for (int i = 0; i < m.size(); ++i) {
    if (m(i) > kStructuralZero) out.push_back(i);
  }
  return out;
}

std::vector<int> JointDistribution::support_y() const {
  const Eigen::VectorXd m = marginal_y();
  std::vector<int> out;
  for (int i = 0; i < m.size(); ++i) {
    if (m(i) > kStructuralZero) out.push_back(i);
  }
  return out;
}

namespace {

ConditionalKernel make_kernel(const Eigen::MatrixXd& joint_rows) {
  const int n = static_cast<int>(joint_rows.rows());
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(n, joint_rows.cols());
  std::vector<bool> defined(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const double mass = joint_rows.row(i).sum();
    if (mass > kStructuralZero) {
      rows.row(i) = joint_rows.row(i) / mass;
      defined[static_cast<std::size_t>(i)] = true;
    }
  }
  return {std::move(rows), std::move(defined)};
}

}  // namespace

ConditionalKernel conditional_y_given_x(const JointDistribution& d) {
  return make_kernel(d.pxy());
}

ConditionalKernel conditional_x_given_y(const JointDistribution& d) {
  return make_kernel(d.pxy().transpose());
}

}  // namespace malleate
