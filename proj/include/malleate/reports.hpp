#pragma once

#include <string>
#include <utility>
#include <vector>

#include "malleate/bottleneck.hpp"
#include "malleate/codec.hpp"
#include "malleate/common_info.hpp"
#include "malleate/curve.hpp"
#include "malleate/joint_distribution.hpp"
#include "malleate/typicality.hpp"

namespace malleate {

// Serialization of module outputs into byte-stable reports.  Every number is
// printed with 12 significant digits, object keys keep insertion order, and
// nothing here depends on locale or platform, so identical inputs always
// yield identical bytes.

enum class ReportFormat { kJson, kCsv };

ReportFormat parse_report_format(const std::string& text);

// 12-significant-digit decimal form; non-finite values render as "null" so
// the JSON stays parseable.
std::string format_number(double v);

// The resolved run configuration, echoed verbatim into every report.
struct ReportMeta {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;
};

// Entropy functionals and derived views of one distribution.
std::string stats_report(const JointDistribution& d, const ReportMeta& meta,
                         ReportFormat format);

// Raw partition points plus the envelope, the sufficient statistic, and the
// corner entropies.
std::string curve_report(const MalleabilityCurve& curve, const ReportMeta& meta,
                         ReportFormat format);

// The minimal sufficient statistic and its operating point.
std::string suffstat_report(const SufficientStatistic& w, const CurvePoint& point,
                            double h_y_given_x, const ReportMeta& meta,
                            ReportFormat format);

// Common-structure decomposition and the converse bound derived from it.
std::string gk_report(const JointDistribution& d, const CommonDecomposition& c,
                      bool indecomposable, double converse_bound,
                      const ReportMeta& meta, ReportFormat format);

// Relaxed trade-off points (the envelope of a beta sweep).
std::string ib_report(const std::vector<TradeoffPoint>& points, double h_y,
                      const ReportMeta& meta, ReportFormat format);

// Typicality bound checks.
std::string lemmas_report(const std::vector<LemmaCheck>& checks,
                          const ReportMeta& meta, ReportFormat format);

// Codec simulation aggregates (structured or uniform-binning).
std::string sim_report(const SimReport& r, const ReportMeta& meta,
                       ReportFormat format);

// Per-trial rows of a simulation run with traces kept.
std::string sim_trace_csv(const SimReport& r);

// One table aligning, at each exact-envelope vertex, the exact rates, the
// relaxed bound, and the simple bounds, plus the breakpoint and converse
// summaries.  The only derived columns are sums/differences of module
// outputs (m = l - j and the bound line l = j + H(Y)).
std::string compare_report(const MalleabilityCurve& curve,
                           const RelaxationComparison& relaxed,
                           const CommonDecomposition& gk, double converse_bound,
                           const ReportMeta& meta, ReportFormat format);

}  // namespace malleate
