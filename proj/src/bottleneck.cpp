#include "malleate/bottleneck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "malleate/info.hpp"
#include "malleate/rng.hpp"

namespace malleate {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double plogp(double v) { return v > 0.0 ? -v * std::log(v) : 0.0; }

// Everything the iteration needs, in nats over the X support.
struct Workspace {
  Eigen::VectorXd px;    // support marginal
  Eigen::MatrixXd pyx;   // p(y|x), support rows
  Eigen::VectorXd py;    // original Y marginal
  double scale;          // log of the report base
};

Workspace workspace(const JointDistribution& d) {
  const auto support = d.support_x();
  Workspace w;
  w.px.resize(static_cast<int>(support.size()));
  w.pyx.resize(static_cast<int>(support.size()), d.size_y());
  for (std::size_t s = 0; s < support.size(); ++s) {
    const double mass = d.pxy().row(support[s]).sum();
    w.px[static_cast<int>(s)] = mass;
    w.pyx.row(static_cast<int>(s)) = d.pxy().row(support[s]) / mass;
  }
  w.py = d.marginal_y();
  w.scale = std::log(d.log_base());
  return w;
}

void check_encoder(const Workspace& w, const SoftEncoder& enc) {
  if (enc.rows.rows() != w.px.size() || enc.rows.cols() != enc.u_card || enc.u_card < 1) {
    throw ValidationError("encoder shape does not match the X support / u_card");
  }
  for (int x = 0; x < enc.rows.rows(); ++x) {
    if (std::abs(enc.rows.row(x).sum() - 1.0) > 1e-9 || enc.rows.row(x).minCoeff() < 0.0) {
      throw ValidationError("encoder row " + std::to_string(x) + " is not a pmf");
    }
  }
}

// p(u) and p(u, y) induced through the chain U <- X -> Y.
void induced(const Workspace& w, const SoftEncoder& enc, Eigen::VectorXd& pu,
             Eigen::MatrixXd& puy) {
  pu = enc.rows.transpose() * w.px;
  puy = enc.rows.transpose() * w.px.asDiagonal() * w.pyx;
}

}  // namespace

SoftEncoder initial_encoder(const JointDistribution& d, int u_card, std::uint64_t seed,
                            std::uint64_t stream) {
  const auto support = d.support_x();
  const int m = static_cast<int>(support.size());
  const int u = u_card == 0 ? m + 1 : u_card;
  if (u < 1) throw ValidationError("u_card must be positive, got " + std::to_string(u));
  auto rng = stream_rng(seed, stream);
  SoftEncoder enc;
  enc.u_card = u;
  enc.rows.resize(m, u);
  for (int x = 0; x < m; ++x) {
    for (int j = 0; j < u; ++j) enc.rows(x, j) = 1.0 + 0.25 * uniform01(rng);
    enc.rows.row(x) /= enc.rows.row(x).sum();
  }
  return enc;
}

SoftEncoder ib_step(const JointDistribution& d, const SoftEncoder& enc, double beta) {
  if (beta < 0.0 || !std::isfinite(beta)) {
    throw ValidationError("beta must be finite and nonnegative");
  }
  const Workspace w = workspace(d);
  check_encoder(w, enc);

  Eigen::VectorXd pu;
  Eigen::MatrixXd puy;
  induced(w, enc, pu, puy);

  SoftEncoder next;
  next.u_card = enc.u_card;
  next.rows.resize(enc.rows.rows(), enc.rows.cols());
  Eigen::VectorXd logw(enc.u_card);
  for (int x = 0; x < enc.rows.rows(); ++x) {
    for (int u = 0; u < enc.u_card; ++u) {
      if (pu[u] <= 0.0) {
        logw[u] = kNegInf;  // dead cluster attracts nothing
        continue;
      }
      double lw = std::log(pu[u]);
      if (beta > 0.0) {
        // D(p(y|x) || p(y|u)); infinite when p(y|u) misses support of p(y|x).
        double div = 0.0;
        for (int y = 0; y < w.pyx.cols(); ++y) {
          const double pxy = w.pyx(x, y);
          if (pxy <= 0.0) continue;
          const double pyu = puy(u, y) / pu[u];
          if (pyu <= 0.0) {
            div = std::numeric_limits<double>::infinity();
            break;
          }
          div += pxy * std::log(pxy / pyu);
        }
        lw = std::isinf(div) ? kNegInf : lw - beta * div;
      }
      logw[u] = lw;
    }
    const double peak = logw.maxCoeff();
    if (peak == kNegInf) {
      throw ValidationError("information-bottleneck update underflowed for x slot " +
                            std::to_string(x) + ": beta " + std::to_string(beta) +
                            " is too large for the working tolerance");
    }
    double total = 0.0;
    for (int u = 0; u < enc.u_card; ++u) {
      const double v = logw[u] == kNegInf ? 0.0 : std::exp(logw[u] - peak);
      next.rows(x, u) = v;
      total += v;
    }
    next.rows.row(x) /= total;
  }
  return next;
}

TradeoffPoint encoder_point(const JointDistribution& d, const SoftEncoder& enc, double beta) {
  const Workspace w = workspace(d);
  check_encoder(w, enc);
  Eigen::VectorXd pu;
  Eigen::MatrixXd puy;
  induced(w, enc, pu, puy);

  TradeoffPoint pt;
  pt.beta = beta;
  double i_ux = 0.0;
  for (int x = 0; x < enc.rows.rows(); ++x) {
    for (int u = 0; u < enc.u_card; ++u) {
      const double v = enc.rows(x, u);
      if (v > 0.0 && pu[u] > 0.0) i_ux += w.px[x] * v * std::log(v / pu[u]);
    }
  }
  double h_yu = 0.0;  // H(Y|U) = H(U,Y) - H(U)
  double i_yu = 0.0;  // computed against the original Y marginal
  for (int u = 0; u < enc.u_card; ++u) {
    if (pu[u] <= 0.0) continue;
    for (int y = 0; y < puy.cols(); ++y) {
      const double v = puy(u, y);
      if (v <= 0.0) continue;
      h_yu -= v * std::log(v / pu[u]);
      if (w.py[y] > 0.0) i_yu += v * std::log(v / (pu[u] * w.py[y]));
    }
  }
  pt.i_ux = i_ux / w.scale;
  pt.h_y_given_u = h_yu / w.scale;
  pt.i_yu = i_yu / w.scale;
  return pt;
}

double ib_lagrangian(const JointDistribution& d, const SoftEncoder& enc, double beta) {
  const TradeoffPoint pt = encoder_point(d, enc, beta);
  return beta > 0.0 ? pt.h_y_given_u + pt.i_ux / beta : pt.h_y_given_u;
}

std::vector<double> default_beta_grid() {
  std::vector<double> grid(50);
  const double lo = std::log10(0.01), hi = std::log10(100.0);
  for (int i = 0; i < 50; ++i) {
    grid[static_cast<std::size_t>(i)] = std::pow(10.0, lo + (hi - lo) * i / 49.0);
  }
  return grid;
}

std::vector<TradeoffPoint> sweep_beta(const JointDistribution& d,
                                      const std::vector<double>& beta_grid, int restarts,
                                      std::uint64_t seed, const BottleneckOptions& options) {
  if (beta_grid.empty()) throw ValidationError("beta grid must be nonempty");
  if (restarts < 1) {
    throw ValidationError("restarts must be at least 1, got " + std::to_string(restarts));
  }
  for (double b : beta_grid) {
    if (b < 0.0 || !std::isfinite(b)) {
      throw ValidationError("beta values must be finite and nonnegative");
    }
  }

  std::vector<TradeoffPoint> out;
  out.reserve(beta_grid.size());
  for (std::size_t bi = 0; bi < beta_grid.size(); ++bi) {
    const double beta = beta_grid[bi];
    TradeoffPoint best;
    double best_value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
      const std::uint64_t stream = bi * static_cast<std::uint64_t>(restarts) +
                                   static_cast<std::uint64_t>(r);
      SoftEncoder enc = initial_encoder(d, options.u_card, seed, stream);
      bool converged = false;
      int iterations = 0;
      while (iterations < options.max_iterations) {
        SoftEncoder next = ib_step(d, enc, beta);
        const double change = (next.rows - enc.rows).cwiseAbs().maxCoeff();
        enc = std::move(next);
        ++iterations;
        if (change < options.tolerance) {
          converged = true;
          break;
        }
      }
      TradeoffPoint pt = encoder_point(d, enc, beta);
      pt.converged = converged;
      pt.iterations = iterations;
      const double value = beta > 0.0 ? pt.h_y_given_u + pt.i_ux / beta : pt.h_y_given_u;
      if (value < best_value) {
        best_value = value;
        best = pt;
      }
    }
    out.push_back(best);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TradeoffPoint& a, const TradeoffPoint& b) { return a.i_ux < b.i_ux; });
  return out;
}

namespace {

// Lower convex hull in the (i_ux, h_y_given_u) plane, anchored at
// (0, H(Y)), trimmed to the decreasing part (feasibility is monotone: a
// helper budget never hurts).
std::vector<TradeoffPoint> envelope_core(double h_y, std::vector<TradeoffPoint> points) {
  TradeoffPoint anchor;
  anchor.beta = 0.0;
  anchor.i_ux = 0.0;
  anchor.h_y_given_u = h_y;
  anchor.i_yu = 0.0;
  anchor.converged = true;
  points.push_back(anchor);
  std::sort(points.begin(), points.end(), [](const TradeoffPoint& a, const TradeoffPoint& b) {
    if (a.i_ux != b.i_ux) return a.i_ux < b.i_ux;
    return a.h_y_given_u < b.h_y_given_u;
  });

  std::vector<TradeoffPoint> hull;
  for (const auto& p : points) {
    if (!hull.empty() && p.i_ux <= hull.back().i_ux + 1e-12) continue;
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      const double cross = (a.i_ux - o.i_ux) * (p.h_y_given_u - o.h_y_given_u) -
                           (a.h_y_given_u - o.h_y_given_u) * (p.i_ux - o.i_ux);
      if (cross <= 1e-12) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  // Keep the nonincreasing prefix; a later rise only reflects a worse local
  // optimum at high beta, which a smaller-budget encoder already dominates.
  std::size_t keep = hull.size();
  for (std::size_t i = 1; i < hull.size(); ++i) {
    if (hull[i].h_y_given_u > hull[i - 1].h_y_given_u + 1e-12) {
      keep = i;
      break;
    }
  }
  hull.resize(keep);
  return hull;
}

double interpolate_f(const std::vector<TradeoffPoint>& env, double j) {
  if (j <= env.front().i_ux) return env.front().h_y_given_u;
  if (j >= env.back().i_ux) return env.back().h_y_given_u;  // flat beyond the sweep
  for (std::size_t i = 1; i < env.size(); ++i) {
    if (j <= env[i].i_ux) {
      const double t = (j - env[i - 1].i_ux) / (env[i].i_ux - env[i - 1].i_ux);
      return env[i - 1].h_y_given_u + t * (env[i].h_y_given_u - env[i - 1].h_y_given_u);
    }
  }
  return env.back().h_y_given_u;
}

}  // namespace

std::vector<TradeoffPoint> relaxation_envelope(const JointDistribution& d,
                                               std::vector<TradeoffPoint> points) {
  return envelope_core(entropy_y(d), std::move(points));
}

RelaxationComparison compare_to_exact(const std::vector<TradeoffPoint>& points,
                                      const MalleabilityCurve& curve) {
  const auto env = envelope_core(curve.h_y(), points);
  RelaxationComparison cmp;
  for (const auto& vertex : curve.envelope()) {
    RelaxationComparison::Row row;
    row.j = vertex.j;
    row.exact_m = vertex.l - vertex.j;
    row.relaxed_f = interpolate_f(env, vertex.j);
    row.ok = row.relaxed_f <= row.exact_m + 1e-6;
    cmp.all_ok = cmp.all_ok && row.ok;
    cmp.rows.push_back(row);
  }
  return cmp;
}

}  // namespace malleate
