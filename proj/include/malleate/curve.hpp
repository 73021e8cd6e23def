#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "malleate/joint_distribution.hpp"
#include "malleate/partition.hpp"

namespace malleate {

// One operating point: j = H(U) (shared-prefix rate), l = j + H(Y|U) (total
// Y rate), both in the distribution's log base.  m() = l - j is the
// malleability cost H(Y|U).  Points without a partition arise from
// time-sharing (interpolated envelope queries).
struct CurvePoint {
  double j = 0.0;
  double l = 0.0;
  std::optional<Partition> partition;

  double m() const { return l - j; }
};

// The coarsest function of X that preserves the conditional law of Y: X
// symbols are grouped when their p(y|x) rows agree within row_tol sup-norm.
// Defined over the X support (see MalleabilityCurve::support_map).
struct SufficientStatistic {
  Partition partition{Partition::whole(1)};
  double entropy = 0.0;        // H(W)
  double h_y_given_w = 0.0;    // equals H(Y|X) up to row_tol effects
};

struct SolverOptions {
  int max_cells = 0;                          // 0 = unlimited
  int exact_limit = kDefaultExactSearchLimit; // largest support for exhaustive search
  int threads = 1;                            // worker cap; never changes results
};

// Rate region trade-off for one source: every evaluated partition point plus
// the lower convex envelope.  Partitions live on the X support; support_map
// translates support slots back to alphabet indices.
class MalleabilityCurve {
 public:
  struct Vertex {
    double j = 0.0;
    double l = 0.0;
    std::vector<int> labels;  // achieving partition (restricted-growth form)
  };

  MalleabilityCurve(std::vector<int> support_map, std::vector<double> j,
                    std::vector<double> l, std::vector<std::uint8_t> labels_arena,
                    SufficientStatistic w, double h_x, double h_y, double h_xy);

  std::size_t raw_count() const { return raw_j_.size(); }
  double raw_j(std::size_t i) const { return raw_j_[i]; }
  double raw_l(std::size_t i) const { return raw_l_[i]; }
  std::string raw_canonical_form(std::size_t i) const;
  bool raw_on_envelope(std::size_t i) const;

  const std::vector<Vertex>& envelope() const { return envelope_; }

  // Piecewise-linear envelope; beyond the last vertex it continues with
  // slope 1 (each extra prefix symbol costs exactly one total symbol).
  double envelope_value(double j) const;

  const SufficientStatistic& sufficient_statistic() const { return w_; }
  double h_x() const { return h_x_; }
  double h_y() const { return h_y_; }
  double h_xy() const { return h_xy_; }
  int support_size() const { return static_cast<int>(support_map_.size()); }
  const std::vector<int>& support_map() const { return support_map_; }

 private:
  std::vector<int> support_map_;
  std::vector<double> raw_j_, raw_l_;
  std::vector<std::uint8_t> raw_labels_;  // flattened, support_size per point
  std::vector<Vertex> envelope_;
  SufficientStatistic w_;
  double h_x_, h_y_, h_xy_;
};

// Evaluates one partition of the X support: j = H(f(X)), l = H(f(X), Y).
CurvePoint evaluate_partition(const JointDistribution& d, const Partition& partition);

// Exhaustive sweep over all partitions of the X support (subject to
// options.max_cells), envelope included.
MalleabilityCurve exact_curve(const JointDistribution& d, const SolverOptions& options = {});

// Agglomerative alternative for supports too large to enumerate: repeatedly
// merge the cell pair costing the least H(Y|U) increase per unit of H(U)
// saved.  restarts > 1 adds seeded randomized tie-breaking among the best
// few merges; every evaluated partition feeds the envelope.
MalleabilityCurve heuristic_curve(const JointDistribution& d, int restarts, std::uint64_t seed,
                                  const SolverOptions& options = {});

SufficientStatistic minimal_sufficient_statistic(const JointDistribution& d,
                                                 double row_tol = kRowTolerance);

// Slopes of consecutive envelope segments (the terminal unit-slope ray is
// reported separately by callers that care).  within_bounds checks
// [0 - 1e-9, 1 + 1e-9].
struct SlopeReport {
  std::vector<double> slopes;
  double min_slope = 0.0;
  double max_slope = 0.0;
  bool within_bounds = true;
};

SlopeReport check_slope_bounds(const MalleabilityCurve& curve);

}  // namespace malleate
