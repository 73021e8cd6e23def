#include "malleate/info.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace malleate {

namespace {

// -sum p log p in nats over raw entries; entries <= 0 contribute nothing
// (0 log 0 = 0 by convention).  Works on any dense expression.
template <typename Derived>
double neg_p_log_p_raw(const Eigen::MatrixBase<Derived>& p) {
  double acc = 0.0;
  for (int i = 0; i < p.rows(); ++i) {
    for (int j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (v > 0.0) acc -= v * std::log(v);
    }
  }
  return acc;
}

void validate_pmf(const Eigen::VectorXd& p) {
  for (int i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i)) || p(i) < 0.0) {
      std::ostringstream msg;
      msg << "probability vector entry " << i << " = " << p(i) << " is invalid";
      throw ValidationError(msg.str());
    }
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg << "probability vector sums to " << total << ", not 1 within " << kSumTolerance;
    throw ValidationError(msg.str());
  }
}

}  // namespace

double neg_p_log_p(const Eigen::VectorXd& p) { return neg_p_log_p_raw(p); }

double entropy(const Eigen::VectorXd& p, double base) {
  validate_pmf(p);
  if (!(base > 1.0)) throw ValidationError("entropy base must be > 1");
  return neg_p_log_p_raw(p) / std::log(base);
}

double entropy_x(const JointDistribution& d) {
  return neg_p_log_p_raw(d.marginal_x()) / std::log(d.log_base());
}

double entropy_y(const JointDistribution& d) {
  return neg_p_log_p_raw(d.marginal_y()) / std::log(d.log_base());
}

double joint_entropy(const JointDistribution& d) {
  return neg_p_log_p_raw(d.pxy()) / std::log(d.log_base());
}

double conditional_entropy_y_given_x(const JointDistribution& d) {
  return joint_entropy(d) - entropy_x(d);
}

double conditional_entropy_x_given_y(const JointDistribution& d) {
  return joint_entropy(d) - entropy_y(d);
}

double mutual_information(const JointDistribution& d) {
  return entropy_x(d) + entropy_y(d) - joint_entropy(d);
}

double entropy_of_labels(const JointDistribution& d, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != d.size_x()) {
    throw ValidationError("labeling must assign one cell per X symbol");
  }
  const Eigen::VectorXd mx = d.marginal_x();
  int max_label = -1;
  for (int x = 0; x < d.size_x(); ++x) {
    if (labels[static_cast<std::size_t>(x)] < 0 && mx(x) > kStructuralZero) {
      throw ValidationError("labeling is undefined at positive-probability X symbol index " +
                            std::to_string(x));
    }
    max_label = std::max(max_label, labels[static_cast<std::size_t>(x)]);
  }
  Eigen::VectorXd push = Eigen::VectorXd::Zero(max_label + 1);
  for (int x = 0; x < d.size_x(); ++x) {
    const int u = labels[static_cast<std::size_t>(x)];
    if (u >= 0) push(u) += mx(x);
  }
  return neg_p_log_p_raw(push) / std::log(d.log_base());
}

}  // namespace malleate
