#pragma once

#include <vector>

#include "malleate/joint_distribution.hpp"

namespace malleate {

// Decomposition of a joint distribution into the connected components of its
// support graph (x — y edge iff p(x,y) is structurally nonzero).  The
// component index is the maximal common function of X and Y: c_value is the
// Gács–Körner common information C(X;Y).
struct CommonDecomposition {
  // Component index per alphabet symbol; -1 marks zero-marginal symbols,
  // which belong to no component.  Components are numbered by first
  // appearance in X order.
  std::vector<int> x_component;
  std::vector<int> y_component;
  int num_components = 0;
  Eigen::VectorXd component_probs;
  double c_value = 0.0;  // H(component index), in d's log base
};

CommonDecomposition gacs_korner(const JointDistribution& d);

// True iff the support graph is connected: no nontrivial common function
// exists and C(X;Y) = 0.
bool is_indecomposable(const JointDistribution& d);

// H(Y) - C(X;Y): the smallest malleability cost compatible with storing both
// sources at their entropy rates (K = H(X), L = H(Y)).
double converse_malleability_bound(const JointDistribution& d);

}  // namespace malleate
