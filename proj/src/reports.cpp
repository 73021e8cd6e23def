#include "malleate/reports.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "malleate/errors.hpp"
#include "malleate/info.hpp"

namespace malleate {
namespace {

// Minimal ordered JSON emitter.  Keys appear exactly in call order and
// numbers go through format_number, which is what makes reports byte-stable;
// a DOM library would re-derive number strings and own the key order.
class JsonWriter {
 public:
  JsonWriter& begin_object() { return open('{'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array() { return open('['); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(const std::string& k) {
    comma();
    indent();
    out_ += '"';
    escape(k);
    out_ += "\": ";
    pending_value_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(format_number(v)); }
  JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(const std::string& v) {
    comma();
    indent();
    out_ += '"';
    escape(v);
    out_ += '"';
    mark_value();
    return *this;
  }
  JsonWriter& value(const char* v) { return value(std::string(v)); }
  JsonWriter& null() { return raw("null"); }

  std::string str() const { return out_ + "\n"; }

 private:
  JsonWriter& open(char c) {
    comma();
    indent();
    out_ += c;
    need_comma_.push_back(false);
    pending_value_ = false;
    return *this;
  }

  JsonWriter& close(char c) {
    const bool had_items = need_comma_.back();
    need_comma_.pop_back();
    if (had_items) {
      out_ += '\n';
      pad(need_comma_.size());
    }
    out_ += c;
    mark_value();
    return *this;
  }

  JsonWriter& raw(const std::string& token) {
    comma();
    indent();
    out_ += token;
    mark_value();
    return *this;
  }

  void comma() {
    if (pending_value_ || need_comma_.empty()) return;
    if (need_comma_.back()) out_ += ',';
  }

  void indent() {
    if (pending_value_ || need_comma_.empty()) return;
    out_ += '\n';
    pad(need_comma_.size());
  }

  void pad(std::size_t depth) {
    for (std::size_t i = 0; i < depth; ++i) out_ += "  ";
  }

  void mark_value() {
    pending_value_ = false;
    if (!need_comma_.empty()) need_comma_.back() = true;
  }

  void escape(const std::string& s) {
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        case '\r': out_ += "\\r"; break;
        default: out_ += c;
      }
    }
  }

  std::string out_;
  std::vector<bool> need_comma_;
  bool pending_value_ = false;
};

// CSV with '#'-prefixed comment lines for the configuration echo; data rows
// stay directly loadable by the usual table readers.
class CsvWriter {
 public:
  void comment(const std::string& text) { out_ += "# " + text + "\n"; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }

  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

void echo_config_json(JsonWriter& w, const ReportMeta& meta) {
  w.key("subcommand").value(meta.subcommand);
  w.key("config").begin_object();
  for (const auto& [k, v] : meta.config) w.key(k).value(v);
  w.end_object();
}

void echo_config_csv(CsvWriter& w, const ReportMeta& meta) {
  w.comment("subcommand=" + meta.subcommand);
  for (const auto& [k, v] : meta.config) w.comment(k + "=" + v);
}

void vector_field(JsonWriter& w, const std::string& key, const Eigen::VectorXd& v) {
  w.key(key).begin_array();
  for (Eigen::Index i = 0; i < v.size(); ++i) w.value(v[i]);
  w.end_array();
}

void label_field(JsonWriter& w, const std::string& key,
                 const std::vector<std::string>& labels) {
  w.key(key).begin_array();
  for (const std::string& s : labels) w.value(s);
  w.end_array();
}

void int_field(JsonWriter& w, const std::string& key, const std::vector<int>& v) {
  w.key(key).begin_array();
  for (int i : v) w.value(i);
  w.end_array();
}

std::string bool_cell(bool v) { return v ? "true" : "false"; }

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  throw ValidationError("unknown report format \"" + text +
                        "\" (expected json or csv)");
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  // Normalize the one ambiguous token: a negative zero prints as "-0".
  if (buf[0] == '-' && buf[1] == '0' && buf[2] == '\0') return "0";
  return buf;
}

std::string stats_report(const JointDistribution& d, const ReportMeta& meta,
                         ReportFormat format) {
  const double h_x = entropy_x(d);
  const double h_y = entropy_y(d);
  const double h_xy = joint_entropy(d);
  const double h_y_x = conditional_entropy_y_given_x(d);
  const double h_x_y = conditional_entropy_x_given_y(d);
  const double i_xy = mutual_information(d);

  if (format == ReportFormat::kCsv) {
    CsvWriter w;
    echo_config_csv(w, meta);
    w.row({"metric", "value"});
    w.row({"log_base", format_number(d.log_base())});
    w.row({"size_x", std::to_string(d.size_x())});
    w.row({"size_y", std::to_string(d.size_y())});
    w.row({"support_x", std::to_string(d.support_x().size())});
    w.row({"support_y", std::to_string(d.support_y().size())});
    w.row({"h_x", format_number(h_x)});
    w.row({"h_y", format_number(h_y)});
    w.row({"h_xy", format_number(h_xy)});
    w.row({"h_y_given_x", format_number(h_y_x)});
    w.row({"h_x_given_y", format_number(h_x_y)});
    w.row({"i_xy", format_number(i_xy)});
    return w.str();
  }

  JsonWriter w;
  w.begin_object();
  echo_config_json(w, meta);
  label_field(w, "alphabet_x", d.alphabet_x().symbols());
  label_field(w, "alphabet_y", d.alphabet_y().symbols());
  w.key("log_base").value(d.log_base());
  int_field(w, "support_x", d.support_x());
  int_field(w, "support_y", d.support_y());
  vector_field(w, "marginal_x", d.marginal_x());
  vector_field(w, "marginal_y", d.marginal_y());
  w.key("h_x").value(h_x);
  w.key("h_y").value(h_y);
  w.key("h_xy").value(h_xy);
  w.key("h_y_given_x").value(h_y_x);
  w.key("h_x_given_y").value(h_x_y);
  w.key("i_xy").value(i_xy);
  const ConditionalKernel kernel = conditional_y_given_x(d);
  w.key("conditional_y_given_x").begin_array();
  for (int x = 0; x < kernel.size_x(); ++x) {
    if (!kernel.defined(x)) {
      w.null();
      continue;
    }
    const Eigen::VectorXd row = kernel.row(x);
    w.begin_array();
    for (Eigen::Index y = 0; y < row.size(); ++y) w.value(row[y]);
    w.end_array();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string curve_report(const MalleabilityCurve& curve, const ReportMeta& meta,
                         ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    CsvWriter w;
    echo_config_csv(w, meta);
    w.comment("h_x=" + format_number(curve.h_x()));
    w.comment("h_y=" + format_number(curve.h_y()));
    w.comment("h_xy=" + format_number(curve.h_xy()));
    w.comment("h_w=" + format_number(curve.sufficient_statistic().entropy));
    w.row({"kind", "partition", "j", "l", "m", "on_envelope"});
    for (std::size_t i = 0; i < curve.raw_count(); ++i) {
      w.row({"raw", curve.raw_canonical_form(i), format_number(curve.raw_j(i)),
             format_number(curve.raw_l(i)),
             format_number(curve.raw_l(i) - curve.raw_j(i)),
             bool_cell(curve.raw_on_envelope(i))});
    }
    for (const auto& v : curve.envelope()) {
      w.row({"envelope", Partition::from_labels(v.labels).canonical_form(),
             format_number(v.j), format_number(v.l), format_number(v.l - v.j),
             "true"});
    }
    return w.str();
  }

  JsonWriter w;
  w.begin_object();
  echo_config_json(w, meta);
  w.key("h_x").value(curve.h_x());
  w.key("h_y").value(curve.h_y());
  w.key("h_xy").value(curve.h_xy());
  w.key("support_size").value(curve.support_size());
  int_field(w, "support_map", curve.support_map());
  const SufficientStatistic& ss = curve.sufficient_statistic();
  w.key("sufficient_statistic").begin_object();
  w.key("partition").value(ss.partition.canonical_form());
  w.key("entropy").value(ss.entropy);
  w.key("h_y_given_w").value(ss.h_y_given_w);
  w.end_object();
  w.key("raw").begin_array();
  for (std::size_t i = 0; i < curve.raw_count(); ++i) {
    w.begin_object();
    w.key("partition").value(curve.raw_canonical_form(i));
    w.key("j").value(curve.raw_j(i));
    w.key("l").value(curve.raw_l(i));
    w.key("m").value(curve.raw_l(i) - curve.raw_j(i));
    w.key("on_envelope").value(curve.raw_on_envelope(i));
    w.end_object();
  }
  w.end_array();
  w.key("envelope").begin_array();
  for (const auto& v : curve.envelope()) {
    w.begin_object();
    w.key("partition").value(Partition::from_labels(v.labels).canonical_form());
    w.key("j").value(v.j);
    w.key("l").value(v.l);
    w.key("m").value(v.l - v.j);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string suffstat_report(const SufficientStatistic& w_stat,
                            const CurvePoint& point, double h_y_given_x,
                            const ReportMeta& meta, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    CsvWriter w;
    echo_config_csv(w, meta);
    w.row({"metric", "value"});
    w.row({"partition", w_stat.partition.canonical_form()});
    w.row({"num_cells", std::to_string(w_stat.partition.num_cells())});
    w.row({"h_w", format_number(w_stat.entropy)});
    w.row({"h_y_given_w", format_number(w_stat.h_y_given_w)});
    w.row({"h_y_given_x", format_number(h_y_given_x)});
    w.row({"j", format_number(point.j)});
    w.row({"l", format_number(point.l)});
    w.row({"m", format_number(point.m())});
    return w.str();
  }

  JsonWriter w;
  w.begin_object();
  echo_config_json(w, meta);
  w.key("partition").value(w_stat.partition.canonical_form());
  w.key("num_cells").value(w_stat.partition.num_cells());
  w.key("cells").begin_array();
  for (const auto& cell : w_stat.partition.cells()) {
    w.begin_array();
    for (int member : cell) w.value(member);
    w.end_array();
  }
  w.end_array();
  w.key("h_w").value(w_stat.entropy);
  w.key("h_y_given_w").value(w_stat.h_y_given_w);
  w.key("h_y_given_x").value(h_y_given_x);
  w.key("point").begin_object();
  w.key("j").value(point.j);
  w.key("l").value(point.l);
  w.key("m").value(point.m());
  w.end_object();
  w.end_object();
  return w.str();
}

std::string gk_report(const JointDistribution& d, const CommonDecomposition& c,
                      bool indecomposable, double converse_bound,
                      const ReportMeta& meta, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    CsvWriter w;
    echo_config_csv(w, meta);
    w.row({"metric", "value"});
    w.row({"c_value", format_number(c.c_value)});
    w.row({"num_components", std::to_string(c.num_components)});
    w.row({"is_indecomposable", bool_cell(indecomposable)});
    w.row({"converse_malleability_bound", format_number(converse_bound)});
    return w.str();
  }

  JsonWriter w;
  w.begin_object();
  echo_config_json(w, meta);
  w.key("c_value").value(c.c_value);
  w.key("num_components").value(c.num_components);
  w.key("is_indecomposable").value(indecomposable);
  w.key("converse_malleability_bound").value(converse_bound);
  vector_field(w, "component_probs", c.component_probs);
  label_field(w, "alphabet_x", d.alphabet_x().symbols());
  int_field(w, "x_component", c.x_component);
  label_field(w, "alphabet_y", d.alphabet_y().symbols());
  int_field(w, "y_component", c.y_component);
  w.end_object();
  return w.str();
}

std::string ib_report(const std::vector<TradeoffPoint>& points, double h_y,
                      const ReportMeta& meta, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    CsvWriter w;
    echo_config_csv(w, meta);
    w.comment("h_y=" + format_number(h_y));
    w.row({"beta", "i_ux", "h_y_given_u", "i_yu", "converged", "iterations"});
    for (const auto& p : points) {
      w.row({format_number(p.beta), format_number(p.i_ux),
             format_number(p.h_y_given_u), format_number(p.i_yu),
             bool_cell(p.converged), std::to_string(p.iterations)});
    }
    return w.str();
  }

  JsonWriter w;
  w.begin_object();
  echo_config_json(w, meta);
  w.key("h_y").value(h_y);
  w.key("points").begin_array();
  for (const auto& p : points) {
    w.begin_object();
    w.key("beta").value(p.beta);
    w.key("i_ux").value(p.i_ux);
    w.key("h_y_given_u").value(p.h_y_given_u);
    w.key("i_yu").value(p.i_yu);
    w.key("converged").value(p.converged);
    w.key("iterations").value(p.iterations);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string lemmas_report(const std::vector<LemmaCheck>& checks,
                          const ReportMeta& meta, ReportFormat format) {
  bool all_pass = true;
  for (const auto& c : checks) all_pass = all_pass && c.pass;

  if (format == ReportFormat::kCsv) {
    CsvWriter w;
    echo_config_csv(w, meta);
    w.comment(std::string("all_pass=") + bool_cell(all_pass));
    w.row({"name", "measured", "lower", "upper", "pass"});
    for (const auto& c : checks) {
      w.row({c.name, format_number(c.measured),
             c.lower.has_value() ? format_number(*c.lower) : "",
             c.upper.has_value() ? format_number(*c.upper) : "",
             bool_cell(c.pass)});
    }
    return w.str();
  }

  JsonWriter w;
  w.begin_object();
  echo_config_json(w, meta);
  w.key("all_pass").value(all_pass);
  w.key("checks").begin_array();
  for (const auto& c : checks) {
    w.begin_object();
    w.key("name").value(c.name);
    w.key("measured").value(c.measured);
    if (c.lower.has_value()) {
      w.key("lower").value(*c.lower);
    } else {
      w.key("lower").null();
    }
    if (c.upper.has_value()) {
      w.key("upper").value(*c.upper);
    } else {
      w.key("upper").null();
    }
    w.key("pass").value(c.pass);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string sim_report(const SimReport& r, const ReportMeta& meta,
                       ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    CsvWriter w;
    echo_config_csv(w, meta);
    w.row({"metric", "value"});
    w.row({"trials", std::to_string(r.trials)});
    w.row({"delta_x", format_number(r.delta_x)});
    w.row({"delta_y", format_number(r.delta_y)});
    w.row({"delta_u", format_number(r.delta_u)});
    w.row({"delta", format_number(r.delta)});
    w.row({"j_emp", format_number(r.j_emp)});
    w.row({"k_emp", format_number(r.k_emp)});
    w.row({"l_emp", format_number(r.l_emp)});
    w.row({"y_suffix_required", format_number(r.y_suffix_required)});
    w.row({"theory_h_x", format_number(r.theory_h_x)});
    w.row({"theory_j", format_number(r.theory_j)});
    w.row({"theory_h_y_given_u", format_number(r.theory_h_y_given_u)});
    w.row({"design_j", format_number(r.design_j)});
    w.row({"design_k", format_number(r.design_k)});
    w.row({"design_l", format_number(r.design_l)});
    w.row({"flag_overhead", format_number(r.flag_overhead)});
    w.row({"prefix_rounding", format_number(r.prefix_rounding)});
    w.row({"decode_failures", std::to_string(r.decode_failures)});
    return w.str();
  }

  JsonWriter w;
  w.begin_object();
  echo_config_json(w, meta);
  w.key("trials").value(r.trials);
  w.key("delta_x").value(r.delta_x);
  w.key("delta_y").value(r.delta_y);
  w.key("delta_u").value(r.delta_u);
  w.key("delta").value(r.delta);
  w.key("j_emp").value(r.j_emp);
  w.key("k_emp").value(r.k_emp);
  w.key("l_emp").value(r.l_emp);
  w.key("y_suffix_required").value(r.y_suffix_required);
  w.key("theory").begin_object();
  w.key("h_x").value(r.theory_h_x);
  w.key("j").value(r.theory_j);
  w.key("h_y_given_u").value(r.theory_h_y_given_u);
  w.end_object();
  w.key("design").begin_object();
  w.key("j").value(r.design_j);
  w.key("k").value(r.design_k);
  w.key("l").value(r.design_l);
  w.key("flag_overhead").value(r.flag_overhead);
  w.key("prefix_rounding").value(r.prefix_rounding);
  w.end_object();
  w.key("decode_failures").value(r.decode_failures);
  w.end_object();
  return w.str();
}

std::string sim_trace_csv(const SimReport& r) {
  CsvWriter w;
  w.row({"trial", "x_escape", "y_escape", "prefix_match", "x_suffix_symbols",
         "y_suffix_symbols"});
  for (const auto& t : r.trace) {
    w.row({std::to_string(t.trial), bool_cell(t.x_escape), bool_cell(t.y_escape),
           bool_cell(t.prefix_match), std::to_string(t.x_suffix_symbols),
           std::to_string(t.y_suffix_symbols)});
  }
  return w.str();
}

std::string compare_report(const MalleabilityCurve& curve,
                           const RelaxationComparison& relaxed,
                           const CommonDecomposition& gk, double converse_bound,
                           const ReportMeta& meta, ReportFormat format) {
  const double h_y = curve.h_y();
  if (format == ReportFormat::kCsv) {
    CsvWriter w;
    echo_config_csv(w, meta);
    w.comment("h_x=" + format_number(curve.h_x()));
    w.comment("h_y=" + format_number(curve.h_y()));
    w.comment("h_xy=" + format_number(curve.h_xy()));
    w.comment("h_w=" + format_number(curve.sufficient_statistic().entropy));
    w.comment("gk_c=" + format_number(gk.c_value));
    w.comment("gk_converse_m=" + format_number(converse_bound));
    w.row({"j", "exact_l", "exact_m", "relaxed_f", "relaxed_below_exact",
           "bound_l_floor", "bound_l_ceiling", "partition"});
    for (std::size_t i = 0; i < curve.envelope().size(); ++i) {
      const auto& v = curve.envelope()[i];
      const auto& row = relaxed.rows[i];
      w.row({format_number(v.j), format_number(v.l), format_number(v.l - v.j),
             format_number(row.relaxed_f), bool_cell(row.ok),
             format_number(h_y), format_number(v.j + h_y),
             Partition::from_labels(v.labels).canonical_form()});
    }
    return w.str();
  }

  JsonWriter w;
  w.begin_object();
  echo_config_json(w, meta);
  w.key("h_x").value(curve.h_x());
  w.key("h_y").value(curve.h_y());
  w.key("h_xy").value(curve.h_xy());
  w.key("corners").begin_object();
  w.key("l_at_j0").value(curve.envelope_value(0.0));
  w.key("l_at_j_hx").value(curve.envelope_value(curve.h_x()));
  w.end_object();
  w.key("breakpoint_h_w").value(curve.sufficient_statistic().entropy);
  w.key("gacs_korner").begin_object();
  w.key("c_value").value(gk.c_value);
  w.key("num_components").value(gk.num_components);
  w.key("converse_m_at_entropy_rates").value(converse_bound);
  w.end_object();
  w.key("relaxation_consistent").value(relaxed.all_ok);
  w.key("table").begin_array();
  for (std::size_t i = 0; i < curve.envelope().size(); ++i) {
    const auto& v = curve.envelope()[i];
    const auto& row = relaxed.rows[i];
    w.begin_object();
    w.key("j").value(v.j);
    w.key("exact_l").value(v.l);
    w.key("exact_m").value(v.l - v.j);
    w.key("relaxed_f").value(row.relaxed_f);
    w.key("relaxed_below_exact").value(row.ok);
    w.key("bound_l_floor").value(h_y);
    w.key("bound_l_ceiling").value(v.j + h_y);
    w.key("partition").value(Partition::from_labels(v.labels).canonical_form());
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

}  // namespace malleate
