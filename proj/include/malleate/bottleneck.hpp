#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "malleate/curve.hpp"
#include "malleate/joint_distribution.hpp"

namespace malleate {

// Soft (stochastic) encoder p(u|x) over the X support.  Rows index support
// slots, columns the auxiliary alphabet.  U ↔ X ↔ Y always holds because
// p(u,y) is only ever formed through p(u|x) p(x,y).
struct SoftEncoder {
  Eigen::MatrixXd rows;  // |X-support| x u_card, each row a pmf
  int u_card = 0;
};

// One operating point of the relaxed trade-off.  All rates are in the
// distribution's log base.  The defining identity is
// h_y_given_u + i_yu = H(Y); both sides are computed along separate routes,
// so the identity doubles as an internal consistency check.
struct TradeoffPoint {
  double beta = 0.0;
  double i_ux = 0.0;
  double h_y_given_u = 0.0;
  double i_yu = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct BottleneckOptions {
  int u_card = 0;            // 0 = |X-support| + 1
  int max_iterations = 5000;
  double tolerance = 1e-10;  // sup-norm change of encoder rows
};

// Uniform rows perturbed by seeded noise, the standard restart initializer.
SoftEncoder initial_encoder(const JointDistribution& d, int u_card, std::uint64_t seed,
                            std::uint64_t stream);

// One self-consistent update at inverse temperature beta: rows become
// proportional to p(u) exp(-beta D(p(y|x) || p(y|u))).  Throws when every
// weight of some row underflows to zero (beta too large for the tolerance).
SoftEncoder ib_step(const JointDistribution& d, const SoftEncoder& enc, double beta);

// The soft objective the update descends: H(Y|U) + (1/beta) I(U;X) for
// beta > 0, in the distribution's log base.
double ib_lagrangian(const JointDistribution& d, const SoftEncoder& enc, double beta);

// Measures (I(U;X), H(Y|U), I(Y;U)) for a given encoder.
TradeoffPoint encoder_point(const JointDistribution& d, const SoftEncoder& enc, double beta);

// For each beta: iterate to a fixed point from `restarts` seeded starts and
// keep the lowest-Lagrangian result.  Output is sorted by i_ux.
std::vector<TradeoffPoint> sweep_beta(const JointDistribution& d,
                                      const std::vector<double>& beta_grid, int restarts,
                                      std::uint64_t seed, const BottleneckOptions& options = {});

// 50 log-spaced values in [0.01, 100].
std::vector<double> default_beta_grid();

// Lower convex envelope of the point cloud in the (i_ux, h_y_given_u) plane,
// anchored at the always-feasible (0, H(Y)).  Every surviving point is a
// certified upper bound on the relaxed trade-off at its i_ux.
std::vector<TradeoffPoint> relaxation_envelope(const JointDistribution& d,
                                               std::vector<TradeoffPoint> points);

// Checks constraint-set inclusion against the exact partition envelope: the
// relaxed bound interpolated at an exact vertex's j may never exceed that
// vertex's l - j (beyond tolerance).
struct RelaxationComparison {
  struct Row {
    double j = 0.0;
    double exact_m = 0.0;    // l - j at the exact envelope vertex
    double relaxed_f = 0.0;  // interpolated relaxed bound at j
    bool ok = false;
  };
  std::vector<Row> rows;
  bool all_ok = true;
};

RelaxationComparison compare_to_exact(const std::vector<TradeoffPoint>& points,
                                      const MalleabilityCurve& curve);

}  // namespace malleate
