#include "malleate/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "malleate/info.hpp"
#include "malleate/rng.hpp"

namespace malleate {

namespace {

constexpr double kHullCrossTolerance = 1e-12;

inline double plogp(double v) { return v > 0.0 ? -v * std::log(v) : 0.0; }

// X-support rows of the joint pmf, the workhorse view for partition sweeps.
Eigen::MatrixXd support_rows(const JointDistribution& d, const std::vector<int>& support) {
  Eigen::MatrixXd rows(static_cast<int>(support.size()), d.size_y());
  for (std::size_t s = 0; s < support.size(); ++s) {
    rows.row(static_cast<int>(s)) = d.pxy().row(support[s]);
  }
  return rows;
}

// Evaluates one label vector against precomputed support rows.  Returns
// (H(U), H(U, Y)) in nats; q is scratch with at least rows.rows() rows.
std::pair<double, double> evaluate_labels(const Eigen::MatrixXd& rows,
                                          std::span<const std::uint8_t> labels, int num_cells,
                                          Eigen::MatrixXd& q) {
  q.topRows(num_cells).setZero();
  for (int s = 0; s < rows.rows(); ++s) {
    q.row(labels[static_cast<std::size_t>(s)]) += rows.row(s);
  }
  double j = 0.0, l = 0.0;
  for (int c = 0; c < num_cells; ++c) {
    double mass = 0.0;
    for (int y = 0; y < q.cols(); ++y) {
      mass += q(c, y);
      l += plogp(q(c, y));
    }
    j += plogp(mass);
  }
  return {j, l};
}

double cross(double oj, double ol, double aj, double al, double bj, double bl) {
  return (aj - oj) * (bl - ol) - (al - ol) * (bj - oj);
}

}  // namespace

MalleabilityCurve::MalleabilityCurve(std::vector<int> support_map, std::vector<double> j,
                                     std::vector<double> l,
                                     std::vector<std::uint8_t> labels_arena,
                                     SufficientStatistic w, double h_x, double h_y, double h_xy)
    : support_map_(std::move(support_map)),
      raw_j_(std::move(j)),
      raw_l_(std::move(l)),
      raw_labels_(std::move(labels_arena)),
      w_(std::move(w)),
      h_x_(h_x),
      h_y_(h_y),
      h_xy_(h_xy) {
  const std::size_t m = support_map_.size();
  if (raw_j_.size() != raw_l_.size() || raw_labels_.size() != raw_j_.size() * m) {
    throw ValidationError("curve storage arrays disagree on the number of points");
  }

  // Sort points by (j, l, labels); of every same-j run only the first (the
  // cheapest l, lexicographically smallest partition) feeds the hull.
  std::vector<std::size_t> order(raw_j_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (raw_j_[a] != raw_j_[b]) return raw_j_[a] < raw_j_[b];
    if (raw_l_[a] != raw_l_[b]) return raw_l_[a] < raw_l_[b];
    return std::lexicographical_compare(
        raw_labels_.begin() + static_cast<std::ptrdiff_t>(a * m),
        raw_labels_.begin() + static_cast<std::ptrdiff_t>((a + 1) * m),
        raw_labels_.begin() + static_cast<std::ptrdiff_t>(b * m),
        raw_labels_.begin() + static_cast<std::ptrdiff_t>((b + 1) * m));
  });

  // Lower convex hull by monotone chain; collinear interior points are
  // dropped so each envelope segment has a distinct slope.
  std::vector<std::size_t> hull;
  double last_j = 0.0;
  bool have_last = false;
  for (std::size_t idx : order) {
    if (have_last && raw_j_[idx] <= last_j + kHullCrossTolerance) continue;
    last_j = raw_j_[idx];
    have_last = true;
    while (hull.size() >= 2) {
      const std::size_t o = hull[hull.size() - 2], a = hull.back();
      if (cross(raw_j_[o], raw_l_[o], raw_j_[a], raw_l_[a], raw_j_[idx], raw_l_[idx]) <=
          kHullCrossTolerance) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(idx);
  }

  envelope_.reserve(hull.size());
  for (std::size_t idx : hull) {
    Vertex v;
    v.j = raw_j_[idx];
    v.l = raw_l_[idx];
    v.labels.assign(raw_labels_.begin() + static_cast<std::ptrdiff_t>(idx * m),
                    raw_labels_.begin() + static_cast<std::ptrdiff_t>((idx + 1) * m));
    envelope_.push_back(std::move(v));
  }
}

std::string MalleabilityCurve::raw_canonical_form(std::size_t i) const {
  const std::size_t m = support_map_.size();
  std::string out;
  for (std::size_t k = 0; k < m; ++k) {
    if (k > 0) out += '.';
    out += std::to_string(int(raw_labels_[i * m + k]));
  }
  return out;
}

bool MalleabilityCurve::raw_on_envelope(std::size_t i) const {
  return raw_l_[i] <= envelope_value(raw_j_[i]) + kEnvelopeTolerance;
}

double MalleabilityCurve::envelope_value(double j) const {
  const auto& env = envelope_;
  if (env.empty()) throw ValidationError("empty envelope");
  if (j <= env.front().j) return env.front().l;
  if (j >= env.back().j) return env.back().l + (j - env.back().j);
  auto it = std::upper_bound(env.begin(), env.end(), j,
                             [](double v, const Vertex& p) { return v < p.j; });
  const Vertex& hi = *it;
  const Vertex& lo = *(it - 1);
  const double t = (j - lo.j) / (hi.j - lo.j);
  return lo.l + t * (hi.l - lo.l);
}

CurvePoint evaluate_partition(const JointDistribution& d, const Partition& partition) {
  const auto support = d.support_x();
  if (partition.size() != static_cast<int>(support.size())) {
    throw ValidationError("partition covers " + std::to_string(partition.size()) +
                          " symbols but the X support has " + std::to_string(support.size()));
  }
  const Eigen::MatrixXd rows = support_rows(d, support);
  std::vector<std::uint8_t> labels(partition.labels().begin(), partition.labels().end());
  Eigen::MatrixXd q(rows.rows(), rows.cols());
  auto [j, l] = evaluate_labels(rows, labels, partition.num_cells(), q);
  const double scale = std::log(d.log_base());
  return CurvePoint{j / scale, l / scale, partition};
}

SufficientStatistic minimal_sufficient_statistic(const JointDistribution& d, double row_tol) {
  const auto support = d.support_x();
  const auto kernel = conditional_y_given_x(d);
  std::vector<int> labels(support.size());
  std::vector<Eigen::VectorXd> reps;
  for (std::size_t s = 0; s < support.size(); ++s) {
    const Eigen::VectorXd row = kernel.row(support[s]);
    int cell = -1;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if ((row - reps[r]).cwiseAbs().maxCoeff() <= row_tol) {
        cell = static_cast<int>(r);
        break;
      }
    }
    if (cell < 0) {
      cell = static_cast<int>(reps.size());
      reps.push_back(row);
    }
    labels[s] = cell;
  }
  SufficientStatistic w;
  w.partition = Partition::from_labels(labels);
  auto pt = evaluate_partition(d, w.partition);
  w.entropy = pt.j;
  w.h_y_given_w = pt.l - pt.j;
  return w;
}

namespace {

MalleabilityCurve assemble_curve(const JointDistribution& d, std::vector<int> support_map,
                                 std::vector<double> j, std::vector<double> l,
                                 std::vector<std::uint8_t> arena) {
  auto w = minimal_sufficient_statistic(d);
  return MalleabilityCurve(std::move(support_map), std::move(j), std::move(l), std::move(arena),
                           std::move(w), entropy_x(d), entropy_y(d), joint_entropy(d));
}

}  // namespace

MalleabilityCurve exact_curve(const JointDistribution& d, const SolverOptions& options) {
  const auto support = d.support_x();
  const int m = static_cast<int>(support.size());
  const std::uint64_t total = PartitionEnumerator::count(m, options.max_cells);
  PartitionEnumerator en(m, options.max_cells, options.exact_limit);

  // Materialize the label stream once, then score it (optionally in
  // parallel); the output never depends on the worker count.
  std::vector<std::uint8_t> arena(total * static_cast<std::uint64_t>(m));
  std::vector<int> num_cells(total);
  {
    std::vector<int> labels;
    std::uint64_t i = 0;
    while (en.next(labels)) {
      int cells = 0;
      for (int s = 0; s < m; ++s) {
        arena[i * m + static_cast<std::uint64_t>(s)] = static_cast<std::uint8_t>(labels[s]);
        cells = std::max(cells, labels[s] + 1);
      }
      num_cells[i++] = cells;
    }
  }

  const Eigen::MatrixXd rows = support_rows(d, support);
  const double scale = std::log(d.log_base());
  std::vector<double> raw_j(total), raw_l(total);

  const int workers = std::max(1, std::min<int>(options.threads, static_cast<int>(total)));
  auto score_range = [&](std::uint64_t begin, std::uint64_t end) {
    Eigen::MatrixXd q(rows.rows(), rows.cols());
    for (std::uint64_t i = begin; i < end; ++i) {
      auto [pj, pl] = evaluate_labels(
          rows, std::span<const std::uint8_t>(arena.data() + i * m, static_cast<std::size_t>(m)),
          num_cells[i], q);
      raw_j[i] = pj / scale;
      raw_l[i] = pl / scale;
    }
  };
  if (workers == 1) {
    score_range(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (total + workers - 1) / workers;
    for (int wk = 0; wk < workers; ++wk) {
      const std::uint64_t begin = chunk * static_cast<std::uint64_t>(wk);
      const std::uint64_t end = std::min(total, begin + chunk);
      if (begin < end) pool.emplace_back(score_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  return assemble_curve(d, support, std::move(raw_j), std::move(raw_l), std::move(arena));
}

MalleabilityCurve heuristic_curve(const JointDistribution& d, int restarts, std::uint64_t seed,
                                  const SolverOptions& options) {
  if (restarts < 1) {
    throw ValidationError("restarts must be at least 1, got " + std::to_string(restarts));
  }
  const auto support = d.support_x();
  const int m = static_cast<int>(support.size());
  if (m > 255) {
    throw LimitError("agglomerative solver handles supports up to 255 symbols, got " +
                     std::to_string(m));
  }
  const int max_cells = options.max_cells == 0 ? m : options.max_cells;
  const Eigen::MatrixXd rows = support_rows(d, support);
  const double scale = std::log(d.log_base());

  std::vector<double> raw_j, raw_l;
  std::vector<std::uint8_t> arena;
  std::set<std::vector<std::uint8_t>> seen;
  Eigen::MatrixXd q(rows.rows(), rows.cols());

  auto record = [&](const std::vector<int>& labels) {
    int cells = 0;
    for (int v : labels) cells = std::max(cells, v + 1);
    if (cells > max_cells) return;
    std::vector<std::uint8_t> key(labels.begin(), labels.end());
    if (!seen.insert(key).second) return;
    auto [pj, pl] = evaluate_labels(rows, key, cells, q);
    raw_j.push_back(pj / scale);
    raw_l.push_back(pl / scale);
    arena.insert(arena.end(), key.begin(), key.end());
  };

  struct Merge {
    double ratio;
    int a, b;
  };

  for (int restart = 0; restart < restarts; ++restart) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(restart));
    std::vector<int> labels(static_cast<std::size_t>(m));
    for (int s = 0; s < m; ++s) labels[static_cast<std::size_t>(s)] = s;
    record(labels);

    // Cell rows and masses for the current partition, rebuilt after every
    // merge (supports are small; clarity beats the incremental update).
    auto cells_of = [&](const std::vector<int>& lab) {
      int cells = 0;
      for (int v : lab) cells = std::max(cells, v + 1);
      Eigen::MatrixXd cr = Eigen::MatrixXd::Zero(cells, rows.cols());
      for (int s = 0; s < m; ++s) cr.row(lab[static_cast<std::size_t>(s)]) += rows.row(s);
      return cr;
    };

    Eigen::MatrixXd cr = cells_of(labels);
    while (cr.rows() > 1) {
      // Cost of merging cells a and b: the H(Y|U) increase per unit of H(U)
      // given up.  Every cell carries positive mass, so the denominator is
      // strictly positive.
      std::vector<Merge> candidates;
      for (int a = 0; a < cr.rows(); ++a) {
        for (int b = a + 1; b < cr.rows(); ++b) {
          double delta_l = 0.0;
          for (int y = 0; y < cr.cols(); ++y) {
            delta_l += plogp(cr(a, y) + cr(b, y)) - plogp(cr(a, y)) - plogp(cr(b, y));
          }
          const double ma = cr.row(a).sum(), mb = cr.row(b).sum();
          const double delta_j = plogp(ma + mb) - plogp(ma) - plogp(mb);
          candidates.push_back(Merge{(delta_l - delta_j) / (-delta_j), a, b});
        }
      }
      std::sort(candidates.begin(), candidates.end(), [](const Merge& x, const Merge& y) {
        if (x.ratio != y.ratio) return x.ratio < y.ratio;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
      });
      std::size_t pick = 0;
      if (restart > 0) {
        const std::size_t top = std::min<std::size_t>(3, candidates.size());
        pick = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(top)),
                        top - 1);
      }
      const Merge chosen = candidates[pick];
      for (auto& v : labels) {
        if (v == chosen.b) v = chosen.a;
      }
      labels = Partition::from_labels(labels).labels();
      cr = cells_of(labels);
      record(labels);
    }
  }

  // Make sure the sufficient statistic itself is in the evaluated set: the
  // merge chains are not guaranteed to pass through it.
  record(minimal_sufficient_statistic(d).partition.labels());

  return assemble_curve(d, support, std::move(raw_j), std::move(raw_l), std::move(arena));
}

SlopeReport check_slope_bounds(const MalleabilityCurve& curve) {
  SlopeReport report;
  const auto& env = curve.envelope();
  for (std::size_t i = 1; i < env.size(); ++i) {
    report.slopes.push_back((env[i].l - env[i - 1].l) / (env[i].j - env[i - 1].j));
  }
  if (!report.slopes.empty()) {
    report.min_slope = *std::min_element(report.slopes.begin(), report.slopes.end());
    report.max_slope = *std::max_element(report.slopes.begin(), report.slopes.end());
    report.within_bounds = report.min_slope >= -kEnvelopeTolerance &&
                           report.max_slope <= 1.0 + kEnvelopeTolerance;
  }
  return report;
}

}  // namespace malleate
