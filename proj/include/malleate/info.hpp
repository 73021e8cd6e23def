#pragma once

#include <span>

#include <Eigen/Dense>

#include "malleate/joint_distribution.hpp"

namespace malleate {

// Shannon entropy of a probability vector, with 0 log 0 = 0.  Validates that
// p is a pmf (nonnegative, sums to 1 within tolerance).
double entropy(const Eigen::VectorXd& p, double base = 2.0);

// Entropy-style sum -sum p log p without pmf validation, for internal reuse
// on sub-pmf slices (e.g. unnormalized cell masses).
double neg_p_log_p(const Eigen::VectorXd& p);  // in nats

double entropy_x(const JointDistribution& d);
double entropy_y(const JointDistribution& d);
double joint_entropy(const JointDistribution& d);                  // H(X,Y)
double conditional_entropy_y_given_x(const JointDistribution& d);  // H(Y|X)
double conditional_entropy_x_given_y(const JointDistribution& d);  // H(X|Y)
double mutual_information(const JointDistribution& d);             // I(X;Y)

// Entropy of f(X) where f is given as a cell label per X symbol (label -1
// marks "unassigned").  Errors if any symbol with positive marginal lacks a
// label; zero-probability symbols may be left unassigned.
double entropy_of_labels(const JointDistribution& d, std::span<const int> labels);

}  // namespace malleate
