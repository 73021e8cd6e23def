#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "malleate/bottleneck.hpp"
#include "malleate/codec.hpp"
#include "malleate/common_info.hpp"
#include "malleate/constants.hpp"
#include "malleate/curve.hpp"
#include "malleate/errors.hpp"
#include "malleate/info.hpp"
#include "malleate/io.hpp"
#include "malleate/joint_distribution.hpp"
#include "malleate/partition.hpp"
#include "malleate/reports.hpp"
#include "malleate/typicality.hpp"

namespace {

// The CLI wires modules together and formats their outputs; every number in
// a report comes from a module call.

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw malleate::ValidationError("cannot open output file \"" + path + "\"");
  }
  out << text;
}

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

malleate::ReportMeta make_meta(const std::string& subcommand,
                               const std::string& input,
                               const std::string& output,
                               const std::string& format, ConfigEcho extra) {
  malleate::ReportMeta meta;
  meta.subcommand = subcommand;
  meta.config.emplace_back("input", input);
  meta.config.emplace_back("output", output.empty() ? "-" : output);
  meta.config.emplace_back("format", format);
  for (auto& kv : extra) meta.config.push_back(std::move(kv));
  return meta;
}

std::string fmt_double(double v) { return malleate::format_number(v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Rate/malleability toolkit for two correlated finite sources: exact "
      "partition curves, relaxations, converse bounds, typicality checks, "
      "and a finite-blocklength codec simulator."};
  app.require_subcommand(1);

  std::string input;
  std::string output;
  std::string format = "json";
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", input, "joint distribution file (.json or .csv)")
        ->required();
    sub->add_option("-o,--output", output,
                    "write the report to this file instead of stdout");
    sub->add_option("--format", format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* stats_cmd =
      app.add_subcommand("stats", "entropy and information functionals");
  add_common(stats_cmd);

  int max_cells = 0;
  int exact_limit = malleate::kDefaultExactSearchLimit;
  int threads = 1;
  bool heuristic = false;
  int restarts = 4;
  std::uint64_t seed = 1;
  CLI::App* curve_cmd = app.add_subcommand(
      "curve", "prefix-rate / total-rate trade-off over partitions");
  add_common(curve_cmd);
  curve_cmd->add_option("--max-cells", max_cells,
                        "cap on partition cell count (0 = unlimited)");
  curve_cmd->add_option("--exact-limit", exact_limit,
                        "largest support size for exhaustive search");
  curve_cmd->add_option("--threads", threads, "worker cap (never changes results)");
  curve_cmd->add_flag("--heuristic", heuristic,
                      "agglomerative search instead of exhaustive enumeration");
  curve_cmd->add_option("--restarts", restarts,
                        "randomized restarts in heuristic mode");
  curve_cmd->add_option("--seed", seed, "seed for heuristic tie-breaking");

  double row_tol = malleate::kRowTolerance;
  CLI::App* suffstat_cmd = app.add_subcommand(
      "suffstat", "minimal sufficient statistic of X for Y");
  add_common(suffstat_cmd);
  suffstat_cmd->add_option("--row-tol", row_tol,
                           "sup-norm tolerance for equal conditional rows");

  CLI::App* gk_cmd = app.add_subcommand(
      "gk", "common structure of the support graph and the converse bound");
  add_common(gk_cmd);

  int ib_restarts = 10;
  std::uint64_t ib_seed = 1;
  int u_card = 0;
  int max_iterations = 5000;
  double ib_tolerance = 1e-10;
  CLI::App* ib_cmd = app.add_subcommand(
      "ib", "soft-encoder relaxation of the trade-off (beta sweep)");
  add_common(ib_cmd);
  ib_cmd->add_option("--restarts", ib_restarts, "seeded restarts per beta");
  ib_cmd->add_option("--seed", ib_seed, "restart seed");
  ib_cmd->add_option("--u-card", u_card,
                     "auxiliary alphabet size (0 = support size + 1)");
  ib_cmd->add_option("--max-iterations", max_iterations,
                     "iteration cap per restart");
  ib_cmd->add_option("--tolerance", ib_tolerance,
                     "encoder fixed-point tolerance");

  int lemma_n = 8;
  double lemma_delta = 0.25;
  std::uint64_t markov_trials = 0;
  std::uint64_t lemma_seed = 1;
  std::uint64_t lemma_limit = malleate::kDefaultEnumerationLimit;
  std::string lemma_partition;
  CLI::App* lemmas_cmd = app.add_subcommand(
      "lemmas", "typical-set size and probability bound checks");
  add_common(lemmas_cmd);
  lemmas_cmd->add_option("--n", lemma_n, "blocklength");
  lemmas_cmd->add_option("--delta", lemma_delta, "typicality slack");
  lemmas_cmd->add_option("--markov-trials", markov_trials,
                         "Monte-Carlo trials for the transfer check (0 = skip)");
  lemmas_cmd->add_option("--seed", lemma_seed, "Monte-Carlo seed");
  lemmas_cmd->add_option("--limit", lemma_limit, "enumeration cap on |alphabet|^n");
  lemmas_cmd->add_option(
      "--partition", lemma_partition,
      "X-support partition for the transfer check, e.g. 0.1.0.1 "
      "(default: every symbol alone)");

  std::string sim_partition;
  int sim_n = 8;
  double sim_delta = 0.25;
  int storage_base = 2;
  std::uint64_t sim_trials = 1000;
  std::uint64_t sim_seed = 1;
  int sim_threads = 1;
  std::string trace_path;
  bool uniform_binning = false;
  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "finite-blocklength codec Monte Carlo");
  add_common(simulate_cmd);
  simulate_cmd->add_option(
      "--partition", sim_partition,
      "X-support partition defining the shared prefix, e.g. 0.1.0.1 "
      "(default: every symbol alone)");
  simulate_cmd->add_option("--n", sim_n, "blocklength");
  simulate_cmd->add_option("--delta", sim_delta, "typicality slack");
  simulate_cmd->add_option("--base", storage_base, "storage alphabet size");
  simulate_cmd->add_option("--trials", sim_trials, "number of simulated blocks");
  simulate_cmd->add_option("--seed", sim_seed, "per-trial stream seed");
  simulate_cmd->add_option("--threads", sim_threads,
                           "worker cap (never changes results)");
  simulate_cmd->add_option("--trace", trace_path,
                           "also write a per-trial CSV trace to this file");
  simulate_cmd->add_flag("--uniform", uniform_binning,
                         "structure-blind uniform binning baseline");

  int cmp_exact_limit = malleate::kDefaultExactSearchLimit;
  int cmp_max_cells = 0;
  int cmp_threads = 1;
  int cmp_restarts = 10;
  std::uint64_t cmp_seed = 1;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "align exact curve, relaxation, simple bounds, and converse");
  add_common(compare_cmd);
  compare_cmd->add_option("--exact-limit", cmp_exact_limit,
                          "largest support size for exhaustive search");
  compare_cmd->add_option("--max-cells", cmp_max_cells,
                          "cap on partition cell count (0 = unlimited)");
  compare_cmd->add_option("--threads", cmp_threads,
                          "worker cap (never changes results)");
  compare_cmd->add_option("--restarts", cmp_restarts,
                          "relaxation restarts per beta");
  compare_cmd->add_option("--seed", cmp_seed, "relaxation restart seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const malleate::ReportFormat fmt = malleate::parse_report_format(format);
    const malleate::JointDistribution d = malleate::load_joint(input);

    if (*stats_cmd) {
      const auto meta = make_meta("stats", input, output, format, {});
      emit(malleate::stats_report(d, meta, fmt), output);
    } else if (*curve_cmd) {
      malleate::SolverOptions opts;
      opts.max_cells = max_cells;
      opts.exact_limit = exact_limit;
      opts.threads = threads;
      const malleate::MalleabilityCurve curve =
          heuristic ? malleate::heuristic_curve(d, restarts, seed, opts)
                    : malleate::exact_curve(d, opts);
      ConfigEcho extra{{"max_cells", std::to_string(max_cells)},
                       {"exact_limit", std::to_string(exact_limit)},
                       {"threads", std::to_string(threads)},
                       {"heuristic", heuristic ? "true" : "false"}};
      if (heuristic) {
        extra.emplace_back("restarts", std::to_string(restarts));
        extra.emplace_back("seed", std::to_string(seed));
      }
      const auto meta = make_meta("curve", input, output, format, std::move(extra));
      emit(malleate::curve_report(curve, meta, fmt), output);
    } else if (*suffstat_cmd) {
      const malleate::SufficientStatistic w =
          malleate::minimal_sufficient_statistic(d, row_tol);
      const malleate::CurvePoint point = malleate::evaluate_partition(d, w.partition);
      const auto meta = make_meta("suffstat", input, output, format,
                                  {{"row_tol", fmt_double(row_tol)}});
      emit(malleate::suffstat_report(w, point,
                                     malleate::conditional_entropy_y_given_x(d),
                                     meta, fmt),
           output);
    } else if (*gk_cmd) {
      const malleate::CommonDecomposition c = malleate::gacs_korner(d);
      const auto meta = make_meta("gk", input, output, format, {});
      emit(malleate::gk_report(d, c, malleate::is_indecomposable(d),
                               malleate::converse_malleability_bound(d), meta,
                               fmt),
           output);
    } else if (*ib_cmd) {
      malleate::BottleneckOptions opts;
      opts.u_card = u_card;
      opts.max_iterations = max_iterations;
      opts.tolerance = ib_tolerance;
      const std::vector<malleate::TradeoffPoint> points =
          malleate::relaxation_envelope(
              d, malleate::sweep_beta(d, malleate::default_beta_grid(),
                                      ib_restarts, ib_seed, opts));
      const auto meta = make_meta(
          "ib", input, output, format,
          {{"restarts", std::to_string(ib_restarts)},
           {"seed", std::to_string(ib_seed)},
           {"u_card", std::to_string(u_card)},
           {"max_iterations", std::to_string(max_iterations)},
           {"tolerance", fmt_double(ib_tolerance)}});
      emit(malleate::ib_report(points, malleate::entropy_y(d), meta, fmt), output);
    } else if (*lemmas_cmd) {
      const malleate::TypicalSpec spec{.n = lemma_n, .delta = lemma_delta};
      malleate::LemmaOptions opts;
      opts.limit = lemma_limit;
      opts.markov_trials = markov_trials;
      opts.seed = lemma_seed;
      if (!lemma_partition.empty()) {
        opts.markov_partition = malleate::Partition::parse(lemma_partition);
      }
      const std::vector<malleate::LemmaCheck> checks =
          malleate::lemma_report(d, spec, opts);
      const auto meta = make_meta(
          "lemmas", input, output, format,
          {{"n", std::to_string(lemma_n)},
           {"delta", fmt_double(lemma_delta)},
           {"markov_trials", std::to_string(markov_trials)},
           {"seed", std::to_string(lemma_seed)},
           {"limit", std::to_string(lemma_limit)},
           {"partition",
            lemma_partition.empty() ? "discrete" : lemma_partition}});
      emit(malleate::lemmas_report(checks, meta, fmt), output);
    } else if (*simulate_cmd) {
      const int support = static_cast<int>(d.support_x().size());
      const malleate::Partition partition =
          sim_partition.empty() ? malleate::Partition::discrete(support)
                                : malleate::Partition::parse(sim_partition);
      const malleate::CodecConfig cfg{.d = d,
                                      .partition = partition,
                                      .n = sim_n,
                                      .delta = sim_delta,
                                      .storage_base = storage_base,
                                      .seed = sim_seed};
      const malleate::SimOptions sopts{.threads = sim_threads,
                                       .keep_trace = !trace_path.empty()};
      const malleate::SimReport report =
          uniform_binning ? malleate::simulate_uniform_binning(cfg, sim_trials, sopts)
                          : malleate::simulate(cfg, sim_trials, sopts);
      const auto meta = make_meta(
          "simulate", input, output, format,
          {{"partition", partition.canonical_form()},
           {"n", std::to_string(sim_n)},
           {"delta", fmt_double(sim_delta)},
           {"base", std::to_string(storage_base)},
           {"trials", std::to_string(sim_trials)},
           {"seed", std::to_string(sim_seed)},
           {"threads", std::to_string(sim_threads)},
           {"uniform", uniform_binning ? "true" : "false"}});
      emit(malleate::sim_report(report, meta, fmt), output);
      if (!trace_path.empty()) {
        emit(malleate::sim_trace_csv(report), trace_path);
      }
    } else if (*compare_cmd) {
      malleate::SolverOptions opts;
      opts.max_cells = cmp_max_cells;
      opts.exact_limit = cmp_exact_limit;
      opts.threads = cmp_threads;
      const malleate::MalleabilityCurve curve = malleate::exact_curve(d, opts);
      const std::vector<malleate::TradeoffPoint> points =
          malleate::relaxation_envelope(
              d, malleate::sweep_beta(d, malleate::default_beta_grid(),
                                      cmp_restarts, cmp_seed, {}));
      const malleate::RelaxationComparison relaxed =
          malleate::compare_to_exact(points, curve);
      const malleate::CommonDecomposition gk = malleate::gacs_korner(d);
      const auto meta = make_meta(
          "compare", input, output, format,
          {{"exact_limit", std::to_string(cmp_exact_limit)},
           {"max_cells", std::to_string(cmp_max_cells)},
           {"threads", std::to_string(cmp_threads)},
           {"restarts", std::to_string(cmp_restarts)},
           {"seed", std::to_string(cmp_seed)}});
      emit(malleate::compare_report(curve, relaxed, gk,
                                    malleate::converse_malleability_bound(d),
                                    meta, fmt),
           output);
    }
  } catch (const malleate::LimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const malleate::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
