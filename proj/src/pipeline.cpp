#include "cfflow/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cfflow/induced.hpp"

namespace cfflow {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

using Row = std::vector<std::string>;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0) x = 0;  // no "-0" in reports
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Doubles go through the same formatting as the CSV so both files agree digit for digit.
ordered_json jnum(double x) {
  if (!std::isfinite(x)) return num(x);
  return std::stod(num(x));
}

std::string flag(bool b) { return b ? "true" : "false"; }

std::string element_text(const Element& e) {
  std::string s;
  for (size_t i = 0; i < e.size(); ++i) s += (i ? "." : "") + std::to_string(e[i]);
  return s;
}

ordered_json exact(const ExactReal& x, const XiBasis& xi) {
  return {{"exact", x.to_string()}, {"approx", jnum(xi.to_double(x))}};
}

ordered_json complex_json(std::complex<double> z) { return {{"re", jnum(z.real())}, {"im", jnum(z.imag())}}; }

template <class C>
ordered_json set_json(const C& c) {
  ordered_json a = ordered_json::array();
  for (const auto& x : c) a.push_back(x);
  return a;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

class Output {
 public:
  explicit Output(const RunConfig& c) : dir_(c.output_dir), csv_(c.csv), json_(c.json) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_ + "': " + ec.message());
  }

  void write_json(const std::string& name, const ordered_json& j) {
    if (json_) write(name, j.dump(2) + "\n");
  }
  void write_csv(const std::string& name, const Row& header, const std::vector<Row>& rows) {
    if (!csv_) return;
    std::string text;
    auto line = [&](const Row& r) {
      for (size_t i = 0; i < r.size(); ++i) text += (i ? "," : "") + csv_cell(r[i]);
      text += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    write(name, text);
  }
  void write_text(const std::string& name, const std::string& text) { write(name, text); }
  const std::vector<std::string>& files() const { return files_; }

 private:
  void write(const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir_) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + name);
    out << text;
    files_.push_back(name);
  }

  std::string dir_;
  bool csv_, json_;
  std::vector<std::string> files_;
};

ordered_json header(const char* command, const RunConfig& c) {
  return {{"schema", kReportSchema}, {"command", command}, {"seed", c.seed}};
}

void require_character(const FiniteAbelianGroup& k, const Element& chi, const std::string& where) {
  if (!k.is_element(chi))
    throw ConfigError(where + ": character " + element_text(chi) + " does not exist in " + k.to_string());
}

// ---------------------------------------------------------------------------
// Tower dump

ordered_json element_json(const Element& e) { return set_json(e); }

Element element_from(const json& j) { return j.get<Element>(); }

std::vector<ExactReal> exact_list(const json& j) {
  std::vector<ExactReal> out;
  for (const auto& x : j) out.push_back(ExactReal::parse(x.get<std::string>()));
  return out;
}

ordered_json exact_list_json(const std::vector<ExactReal>& v) {
  ordered_json a = ordered_json::array();
  for (const auto& x : v) a.push_back(x.to_string());
  return a;
}

// ---------------------------------------------------------------------------
// Validation report

ordered_json validation_json(const TowerSchedule& s, const ValidationReport& v, const ConditionReport& c) {
  ordered_json levels = ordered_json::array();
  for (size_t i = 0; i < v.levels.size(); ++i) {
    const LevelCheck& lc = v.levels[i];
    const LevelSpec& lv = s.level(lc.index);
    ordered_json e{{"level", lc.index},
                   {"label", lv.label.to_string()},
                   {"size", lv.size()},
                   {"h", exact(lv.h, s.xi)},
                   {"spacer_total", exact(lc.spacer_total, s.xi)},
                   {"ratio", jnum(lc.ratio)},
                   {"min_and_size", lc.min_and_size},
                   {"spacer", lc.spacer},
                   {"spacer_relaxed", lc.spacer_relaxed},
                   {"disjoint", lc.disjoint},
                   {"ordered", lc.ordered},
                   {"repaired", lv.repaired},
                   {"note", lc.note}};
    if (i < c.levels.size()) {
      const LevelConditions& k = c.levels[i];
      ordered_json subsets = ordered_json::array();
      for (const auto& sc : k.subsets)
        subsets.push_back({{"i", sc.i},
                           {"builder_count", sc.builder_count},
                           {"maximal_count", sc.maximal_count},
                           {"builder_valid", sc.builder_valid},
                           {"exists", sc.exists}});
      ordered_json fails = ordered_json::array();
      for (long f : k.shift_failures) fails.push_back(f);
      e["cocycle"] = {{"neutral_ok", k.neutral_ok},
                      {"shift_ok", k.shift_ok},
                      {"shift_failures", fails},
                      {"subsets_ok", k.subsets_ok},
                      {"subsets", subsets},
                      {"d2_neutral_ok", k.d2_neutral_ok},
                      {"overlap", k.overlap},
                      {"circ", k.circ},
                      {"symdiff", k.symdiff},
                      {"defect", rational_to_string(k.defect)},
                      {"one_minus_circ", rational_to_string(k.one_minus_circ)},
                      {"symdiff_ratio", rational_to_string(k.symdiff_ratio)},
                      {"closed_form", rational_to_string(k.closed_form)},
                      {"closed_form_ok", k.closed_form_ok},
                      {"ok", k.ok()}};
    }
    e["ok"] = lc.ok() && (i >= c.levels.size() || c.levels[i].ok());
    levels.push_back(e);
  }
  ordered_json repaired = set_json(v.repaired_levels);
  return {{"variant", variant_name(s.variant)},
          {"depth", s.depth()},
          {"spacer_mode", s.strict ? "strict" : "repair"},
          {"xi", {s.xi.xi_text(1), s.xi.xi_text(2)}},
          {"schedule_ok", v.ok()},
          {"base_height", v.base_height},
          {"ratio_monotone", v.ratio_monotone},
          {"ratio_limit_upper", jnum(v.ratio_limit_upper)},
          {"repaired_levels", repaired},
          {"cocycle_ok", c.ok()},
          {"defect_sum", rational_to_string(c.defect_sum)},
          {"circ_sum", rational_to_string(c.circ_sum)},
          {"symdiff_sum", rational_to_string(c.symdiff_sum)},
          {"levels", levels},
          {"ok", v.ok() && c.ok()}};
}

std::vector<Row> validation_rows(const TowerSchedule& s, const ValidationReport& v, const ConditionReport& c) {
  std::vector<Row> rows;
  for (size_t i = 0; i < v.levels.size(); ++i) {
    const LevelCheck& lc = v.levels[i];
    const LevelSpec& lv = s.level(lc.index);
    Row r{std::to_string(lc.index), lv.label.to_string(), std::to_string(lv.size()), lv.h.to_string(),
          num(s.xi.to_double(lv.h)), lc.spacer_total.to_string(), num(lc.ratio), flag(lc.min_and_size),
          flag(lc.spacer), flag(lc.spacer_relaxed), flag(lc.disjoint), flag(lc.ordered), flag(lv.repaired)};
    if (i < c.levels.size()) {
      const LevelConditions& k = c.levels[i];
      for (const auto& x : {flag(k.neutral_ok), flag(k.shift_ok), flag(k.subsets_ok), flag(k.d2_neutral_ok),
                            std::to_string(k.overlap), std::to_string(k.circ), std::to_string(k.symdiff),
                            rational_to_string(k.symdiff_ratio), rational_to_string(k.closed_form),
                            flag(k.closed_form_ok)})
        r.push_back(x);
    } else {
      r.insert(r.end(), 10, "");
    }
    r.push_back(lc.note);
    rows.push_back(r);
  }
  return rows;
}

const Row kValidationHeader{"level",        "label",         "size",        "h",          "h_approx",
                            "spacer_total", "ratio",         "min_and_size", "spacer",    "spacer_relaxed",
                            "disjoint",     "ordered",       "repaired",    "neutral_ok", "shift_ok",
                            "subsets_ok",   "d2_neutral_ok", "overlap",     "circ",       "symdiff",
                            "symdiff_ratio", "closed_form",  "closed_form_ok", "note"};

int write_validation(const char* command, const RunConfig& cfg, const TowerSchedule& s, const CocycleTable& table,
                     Output& out, std::string& summary) {
  const ValidationReport v = validate_schedule(s);
  const ConditionReport c = check_conditions(table, s);
  ordered_json j = header(command, cfg);
  j.update(validation_json(s, v, c));
  out.write_json("validation.json", j);
  out.write_csv("validation.csv", kValidationHeader, validation_rows(s, v, c));
  const bool ok = v.ok() && c.ok();
  std::ostringstream msg;
  msg << variant_name(s.variant) << " depth " << s.depth() << ": schedule " << (v.ok() ? "pass" : "FAIL")
      << ", cocycle " << (c.ok() ? "pass" : "FAIL");
  if (!v.repaired_levels.empty()) {
    msg << ", repaired levels";
    for (int n : v.repaired_levels) msg << " " << n;
  }
  for (const auto& lc : v.levels)
    if (!lc.ok()) msg << "; level " << lc.index << (lc.spacer ? "" : " spacer") << (lc.spacer_relaxed ? " (relaxed)" : "")
                      << (lc.disjoint ? "" : " overlap") << (lc.ordered ? "" : " order");
  summary = msg.str();
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Probes

struct Outcome {
  std::string id;
  std::string kind;
  ordered_json data;
  std::vector<Row> rows;
  Verdict verdict;
  std::string error;
};

struct ProbeEnv {
  const TowerSchedule& s;
  const CocycleTable& table;
  int depth;
  ResidualMode mode;
  Thresholds thresholds;
};

StepFunction make_function(const FunctionSpec& f, const Character& chi, const ProbeEnv& env) {
  if (f.interval) {
    const ExactReal lo = ExactReal::parse(f.interval->first);
    const ExactReal hi = ExactReal::parse(f.interval->second);
    return StepFunction::indicator(f.level, lo, hi, env.table.k.exponent(),
                                   "[" + f.interval->first + "," + f.interval->second + ")@" + std::to_string(f.level));
  }
  auto fam = column_family({f.level}, env.s, env.table, chi, f.twisted);
  const std::string name = "col:" + std::to_string(f.level) + ":" + std::to_string(f.column) + (f.twisted ? "~chi" : "");
  for (auto& g : fam)
    if (g.name == name) return g;
  throw ConfigError("no test function " + name);
}

void check_function(const FunctionSpec& f, const TowerSchedule& s, const std::string& where) {
  if (f.level < 1 || f.level > s.depth())
    throw ConfigError(where + ": test function level must lie in 1.." + std::to_string(s.depth()));
  if (f.interval) {
    ExactReal lo, hi;
    try {
      lo = ExactReal::parse(f.interval->first);
      hi = ExactReal::parse(f.interval->second);
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (s.xi.sign(lo) < 0 || !s.xi.less(lo, hi) || s.xi.less(s.h(f.level), hi))
      throw ConfigError(where + ": interval must satisfy 0 <= lo < hi <= h_level");
  } else if (f.column < 0 || f.column >= s.level(f.level).size()) {
    throw ConfigError(where + ": column index out of range");
  }
}

std::vector<ExactReal> time_grid(const std::string& t0, const std::string& dt, long count) {
  const ExactReal a = ExactReal::parse(t0), d = ExactReal::parse(dt);
  std::vector<ExactReal> out;
  for (long k = 0; k < count; ++k) out.push_back(a + d * Rational(k));
  return out;
}

Outcome run_weak_limit(const WeakLimitProbe& p, const ProbeEnv& env) {
  Outcome o;
  const Label label = Label::parse(p.label, env.table.k);
  const Character chi(env.table.k, p.chi);
  LevelSeries series = weak_limit_series(label, chi, p.j, env.s, env.table, env.depth, env.mode);
  if (p.max_level > 0)
    std::erase_if(series.rows, [&](const ResidualReport& r) { return r.level > p.max_level; });
  ordered_json rows = ordered_json::array();
  for (const auto& r : series.rows) {
    rows.push_back({{"level", r.level},
                    {"time", exact(r.time, env.s.xi)},
                    {"residual", jnum(r.residual)},
                    {"deficiency", jnum(r.deficiency)},
                    {"worst", r.worst}});
    o.rows.push_back({p.label, element_text(p.chi), std::to_string(p.j), std::to_string(r.level), r.time.to_string(),
                      num(env.s.xi.to_double(r.time)), num(r.residual), num(r.deficiency), r.worst});
  }
  o.verdict = judge_weak_limit(series, env.thresholds.weak_limit);
  o.data = {{"label", p.label}, {"chi", element_json(p.chi)}, {"j", p.j}, {"max_level", p.max_level}, {"rows", rows}};
  return o;
}

Outcome run_singularity(const SingularityProbe& p, const ProbeEnv& env) {
  Outcome o;
  const Character chi(env.table.k, p.chi), eta(env.table.k, p.eta);
  const MultiplicityEvidence ev = singularity_probe(chi, eta, env.s, env.table, env.depth);
  ordered_json rows = ordered_json::array();
  for (const auto& r : ev.rows) {
    rows.push_back({{"level", r.level},
                    {"gap", jnum(r.gap)},
                    {"residual_chi", jnum(r.residual_chi)},
                    {"residual_eta", jnum(r.residual_eta)},
                    {"deficiency", jnum(r.deficiency)},
                    {"bound", jnum(r.bound)}});
    o.rows.push_back({element_text(p.chi), element_text(p.eta), std::to_string(r.level), num(r.gap),
                      num(r.residual_chi), num(r.residual_eta), num(r.deficiency), num(r.bound)});
  }
  o.verdict = judge_singularity(ev, env.thresholds.singularity);
  o.data = {{"chi", element_json(p.chi)},   {"eta", element_json(p.eta)},    {"a", element_json(ev.a)},
            {"l_chi", complex_json(ev.l_chi)}, {"l_eta", complex_json(ev.l_eta)}, {"target_gap", jnum(ev.target_gap)},
            {"rows", rows}};
  return o;
}

Outcome run_rigidity(const std::vector<int>& ms, const ProbeEnv& env) {
  Outcome o;
  const auto rows = rigidity_residual(ms, env.s, env.table, env.depth);
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    out.push_back({{"m", r.m},
                   {"shift", exact(r.shift, env.s.xi)},
                   {"residual", jnum(r.residual)},
                   {"strong", jnum(r.strong)},
                   {"deficiency", jnum(r.deficiency)},
                   {"worst", r.worst}});
    o.rows.push_back({std::to_string(r.m), r.shift.to_string(), num(r.residual), num(r.strong), num(r.deficiency),
                      r.worst});
  }
  o.verdict = judge_rigidity(rows, env.thresholds.rigidity);
  o.data = {{"rows", out}};
  return o;
}

Outcome run_eigen(const EigenGrid& g, const ProbeEnv& env) {
  Outcome o;
  const auto lambdas = lambda_grid(g.from, g.to, g.step);
  const EigenReport rep = eigenvalue_absence_probe(lambdas, env.s, env.table, env.depth, g.levels_per_class);
  double worst = 0;
  double min_bound = rep.min_bound();
  for (const auto& r : rep.rows) {
    if (r.bound == min_bound) worst = r.lambda;
    o.rows.push_back({num(r.lambda), num(r.bound)});
  }
  o.verdict = judge_eigen(rep, env.thresholds.eigenvalue);
  o.data = {{"from", jnum(g.from)},          {"to", jnum(g.to)},          {"step", jnum(g.step)},
            {"levels", set_json(rep.levels)}, {"points", rep.rows.size()}, {"min_bound", jnum(min_bound)},
            {"argmin_lambda", jnum(worst)}};
  return o;
}

Outcome run_cyclicity(const CyclicityProbe& p, const ProbeEnv& env) {
  Outcome o;
  const Character chi(env.table.k, p.chi);
  const StepFunction f = make_function(p.f, chi, env);
  const auto grid = time_grid(p.t0, p.dt, p.count);
  CyclicityReport rep;
  if (p.g) {
    const Character chi2(env.table.k, *p.chi2);
    const StepFunction g = make_function(*p.g, chi2, env);
    rep = tensor_cyclicity_probe(f, chi, g, chi2, grid, p.dimension, env.s, env.table, env.depth);
  } else {
    rep = cyclicity_probe(f, chi, grid, p.dimension, env.s, env.table, env.depth);
  }
  ordered_json eig = ordered_json::array();
  for (size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    eig.push_back(jnum(rep.eigenvalues[i]));
    o.rows.push_back({f.name, std::to_string(i), num(rep.eigenvalues[i])});
  }
  o.verdict = {true, "rank " + std::to_string(rep.rank) + " of " + std::to_string(rep.vectors) + " (evidence only)"};
  o.data = {{"f", f.name},          {"chi", element_json(p.chi)}, {"tensor", rep.tensor},
            {"vectors", rep.vectors}, {"dimension", rep.dimension}, {"rank", rep.rank},
            {"margin", jnum(rep.margin)}, {"eigenvalues", eig}};
  return o;
}

Outcome run_periodogram(const PeriodogramProbe& p, const ProbeEnv& env) {
  Outcome o;
  const Character chi(env.table.k, p.chi);
  const StepFunction f = make_function(p.f, chi, env);
  std::vector<double> omegas;
  const long steps = static_cast<long>(std::floor((p.omega_to - p.omega_from) / p.omega_step + 1e-9));
  for (long k = 0; k <= steps; ++k) omegas.push_back(p.omega_from + static_cast<double>(k) * p.omega_step);
  const auto rows = periodogram(f, chi, ExactReal::parse(p.t0), ExactReal::parse(p.dt), p.count, omegas, env.s,
                                env.table, env.depth);
  double peak = 0, at = 0;
  for (const auto& r : rows) {
    o.rows.push_back({f.name, element_text(p.chi), num(r.omega), num(r.power)});
    if (r.power > peak) peak = r.power, at = r.omega;
  }
  o.verdict = {true, "evidence only"};
  o.data = {{"f", f.name},          {"chi", element_json(p.chi)}, {"count", p.count},
            {"points", rows.size()}, {"peak_power", jnum(peak)},   {"peak_omega", jnum(at)}};
  return o;
}

Outcome run_correlations(const CorrelationProbe& p, const ProbeEnv& env) {
  Outcome o;
  const Character chi(env.table.k, p.chi);
  const StepFunction f = make_function(p.f, chi, env);
  const StepFunction g = make_function(p.g, chi, env);
  std::vector<ExactReal> times;
  for (const auto& t : p.times) times.push_back(ExactReal::parse(t));
  ordered_json out = ordered_json::array();
  const int base = std::max(f.level, g.level);
  for (int d = std::max(base, 1); d <= env.depth; ++d) {
    Correlator corr(env.s, env.table, f, g, chi, d);
    for (const auto& t : times) {
      const ExactReal abs_t = env.s.xi.sign(t) < 0 ? -t : t;
      if (!env.s.xi.less(abs_t, env.s.h(d))) continue;
      const CorrelationReport r = corr.at(t);
      ordered_json window = ordered_json::array();
      if (env.s.xi.sign(t) >= 0)
        for (const auto& c : r.window.reduced()) window.push_back(c.to_string());
      out.push_back({{"level", d},
                     {"t", exact(t, env.s.xi)},
                     {"value", complex_json(r.value)},
                     {"deficiency", jnum(r.deficiency)},
                     {"window", window}});
      o.rows.push_back({f.name, g.name, element_text(p.chi), t.to_string(), num(env.s.xi.to_double(t)),
                        std::to_string(d), num(r.value.real()), num(r.value.imag()), num(r.deficiency)});
    }
  }
  o.verdict = {true, std::to_string(out.size()) + " values"};
  o.data = {{"f", f.name}, {"g", g.name}, {"chi", element_json(p.chi)}, {"rows", out}};
  return o;
}

const std::map<std::string, Row>& csv_headers() {
  static const std::map<std::string, Row> h{
      {"weak_limit",
       {"probe", "label", "chi", "j", "level", "time", "time_approx", "residual", "deficiency", "worst"}},
      {"singularity",
       {"probe", "chi", "eta", "level", "gap", "residual_chi", "residual_eta", "deficiency", "bound"}},
      {"rigidity", {"probe", "m", "shift", "residual", "strong", "deficiency", "worst"}},
      {"eigenvalue", {"probe", "lambda", "bound"}},
      {"cyclicity", {"probe", "f", "index", "eigenvalue"}},
      {"periodogram", {"probe", "f", "chi", "omega", "power"}},
      {"correlation", {"probe", "f", "g", "chi", "t", "t_approx", "level", "re", "im", "deficiency"}},
  };
  return h;
}

// ---------------------------------------------------------------------------
// Induction instances

ordered_json multiplicities_json(const std::map<long, long>& m, const FiniteAbelianGroup& g) {
  ordered_json out = ordered_json::object();
  for (const auto& [idx, k] : m) out[element_text(g.element(idx))] = k;
  return out;
}

std::string group_text(const FiniteAbelianGroup& g) { return g.to_string(); }

}  // namespace

// ---------------------------------------------------------------------------

Verdict judge_weak_limit(const LevelSeries& series, double threshold) {
  if (series.rows.empty()) return {false, "no level carries label " + series.label};
  LevelSeries tail{series.label, {}};
  const size_t from = series.rows.size() > 3 ? series.rows.size() - 3 : 0;
  tail.rows.assign(series.rows.begin() + static_cast<long>(from), series.rows.end());
  const auto& last = tail.rows.back();
  const bool mono = tail.non_increasing();
  const bool small = last.residual <= threshold + last.deficiency;
  std::ostringstream msg;
  msg << "levels";
  for (const auto& r : tail.rows) msg << " " << r.level;
  msg << ": residuals";
  for (const auto& r : tail.rows) msg << " " << num(r.residual);
  msg << (mono ? ", non-increasing" : ", NOT non-increasing") << ", final " << num(last.residual)
      << (small ? " <= " : " > ") << num(threshold) << " + " << num(last.deficiency);
  return {mono && small && tail.rows.size() >= 2, msg.str()};
}

Verdict judge_rigidity(const std::vector<RigidityRow>& rows, double threshold) {
  if (rows.empty()) return {false, "no rows"};
  bool dec = true;
  for (size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].residual < rows[i - 1].residual)) dec = false;
  const bool small = rows.back().residual < threshold;
  std::ostringstream msg;
  msg << "residuals";
  for (const auto& r : rows) msg << " " << num(r.residual);
  msg << (dec ? ", strictly decreasing" : ", NOT strictly decreasing") << ", last " << (small ? "< " : ">= ")
      << num(threshold);
  return {dec && small, msg.str()};
}

Verdict judge_singularity(const MultiplicityEvidence& ev, double threshold) {
  if (ev.rows.empty()) return {false, "no separating levels"};
  const double b = ev.rows.back().bound;
  return {b > threshold, "deepest bound " + num(b) + (b > threshold ? " > " : " <= ") + num(threshold)};
}

Verdict judge_eigen(const EigenReport& rep, double threshold) {
  if (rep.rows.empty()) return {false, "empty grid"};
  const double m = rep.min_bound();
  return {m >= threshold, "min bound " + num(m) + (m >= threshold ? " >= " : " < ") + num(threshold)};
}

std::vector<double> lambda_grid(double from, double to, double step) {
  std::vector<double> out;
  const long lo = static_cast<long>(std::ceil(from / step - 1e-9));
  const long hi = static_cast<long>(std::floor(to / step + 1e-9));
  for (long k = lo; k <= hi; ++k)
    if (k != 0) out.push_back(static_cast<double>(k) * step);
  return out;
}

GroupData resolve_group(const RunConfig& cfg) {
  if (cfg.group) {
    try {
      FiniteAbelianGroup k(cfg.group->orders);
      GroupAutomorphism v = validate_automorphism(k, cfg.group->v_images);
      for (const auto& h : cfg.group->subgroup) require_character(k, h, "subgroup");
      return {k, v};
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("group: ") + e.what());
    }
  }
  const Witness w = realize(cfg.target, cfg.search);
  return {w.group, w.automorphism};
}

TowerSchedule schedule_from_config(const RunConfig& cfg, const GroupData& g) {
  std::vector<Label> assignment;
  if (cfg.assignment.empty()) {
    assignment = round_robin_assignment(cfg.variant, g, cfg.depth);
  } else {
    if (static_cast<int>(cfg.assignment.size()) != cfg.depth - 1)
      throw ConfigError("assignment needs depth - 1 = " + std::to_string(cfg.depth - 1) + " labels");
    for (const auto& text : cfg.assignment) {
      try {
        assignment.push_back(Label::parse(text, g.k));
      } catch (const std::exception& e) {
        throw ConfigError("assignment: " + std::string(e.what()));
      }
    }
  }
  std::optional<XiBasis> xi;
  if (cfg.xi) xi = XiBasis(XiBasis::parse_sqrt(cfg.xi->first), XiBasis::parse_sqrt(cfg.xi->second));
  try {
    return build_schedule(cfg.variant, g, cfg.depth, assignment, xi, cfg.strict);
  } catch (const AssignmentGap& e) {
    throw ConfigError(std::string("assignment: ") + e.what());
  }
}

std::string dump_tower(const TowerSchedule& s, const CocycleTable& table) {
  ordered_json v_images = ordered_json::array();
  for (const auto& x : s.group.v.images()) v_images.push_back(element_json(x));
  ordered_json levels = ordered_json::array();
  for (int n = 0; n <= s.depth(); ++n) {
    const LevelSpec& lv = s.level(n);
    ordered_json e{{"index", lv.index}, {"label", lv.label.to_string()}, {"h", lv.h.to_string()},
                   {"period", lv.period}, {"repaired", lv.repaired}, {"cuts", exact_list_json(lv.cuts)}};
    if (lv.z) e["z"] = lv.z->to_string();
    if (!lv.d1.empty() || !lv.d2.empty()) {
      e["d1"] = exact_list_json(lv.d1);
      e["d2"] = exact_list_json(lv.d2);
    }
    const LevelCocycle& lc = table.levels.at(static_cast<size_t>(n));
    ordered_json alpha = ordered_json::array();
    for (const auto& a : lc.alpha) alpha.push_back(element_json(a));
    ordered_json marked = ordered_json::array();
    for (const auto& m : lc.marked) marked.push_back(set_json(m));
    e["alpha"] = alpha;
    e["marked"] = marked;
    levels.push_back(e);
  }
  ordered_json j{{"schema", kReportSchema},
                 {"variant", variant_name(s.variant)},
                 {"xi", {rational_to_string(s.xi.radicand(1)), rational_to_string(s.xi.radicand(2))}},
                 {"spacer_mode", s.strict ? "strict" : "repair"},
                 {"group", {{"orders", set_json(s.group.k.orders())}, {"v", v_images}}},
                 {"levels", levels}};
  return j.dump(2) + "\n";
}

std::pair<TowerSchedule, CocycleTable> load_tower(const std::string& text) {
  try {
    const json j = json::parse(text);
    TowerSchedule s;
    s.variant = parse_variant(j.at("variant").get<std::string>());
    s.xi = XiBasis(parse_rational(j.at("xi")[0].get<std::string>()), parse_rational(j.at("xi")[1].get<std::string>()));
    s.strict = j.at("spacer_mode").get<std::string>() == "strict";
    FiniteAbelianGroup k(j.at("group").at("orders").get<std::vector<long>>());
    std::vector<Element> images;
    for (const auto& x : j.at("group").at("v")) images.push_back(element_from(x));
    s.group = {k, validate_automorphism(k, images)};
    CocycleTable table{k, s.group.v, {}};
    for (const auto& e : j.at("levels")) {
      LevelSpec lv;
      lv.index = e.at("index").get<int>();
      lv.label = Label::parse(e.at("label").get<std::string>(), k);
      lv.h = ExactReal::parse(e.at("h").get<std::string>());
      lv.period = e.at("period").get<long>();
      lv.repaired = e.at("repaired").get<bool>();
      lv.cuts = exact_list(e.at("cuts"));
      if (e.contains("z")) lv.z = ExactReal::parse(e["z"].get<std::string>());
      if (e.contains("d1")) lv.d1 = exact_list(e["d1"]);
      if (e.contains("d2")) lv.d2 = exact_list(e["d2"]);
      finalize_level(lv, s.xi);
      if (lv.index != static_cast<int>(s.levels.size())) throw ConfigError("levels out of order in tower dump");
      s.levels.push_back(std::move(lv));
      LevelCocycle lc;
      for (const auto& a : e.at("alpha")) {
        lc.alpha.push_back(element_from(a));
        if (!k.is_element(lc.alpha.back())) throw ConfigError("alpha value outside the group in tower dump");
      }
      lc.marked = e.at("marked").get<std::vector<std::vector<long>>>();
      table.levels.push_back(std::move(lc));
    }
    if (s.levels.empty()) throw ConfigError("tower dump has no levels");
    return {std::move(s), std::move(table)};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("unreadable tower dump: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_realize(const RunConfig& cfg) {
  if (cfg.target.empty()) throw ConfigError("target set E is empty");
  Output out(cfg);
  CommandResult res;
  ordered_json j = header("realize", cfg);
  j["target"] = set_json(cfg.target);
  j["bounds"] = {{"max_order", cfg.search.max_order}, {"max_automorphisms", cfg.search.max_automorphisms}};
  try {
    const Witness w = realize(cfg.target, cfg.search);
    ordered_json images = ordered_json::array();
    for (const auto& x : w.automorphism.images()) images.push_back(element_json(x));
    ordered_json gens = ordered_json::array();
    for (const auto& x : w.subgroup.generators()) gens.push_back(element_json(x));
    ordered_json transcript = ordered_json::array();
    for (const auto& h : w.subgroup.elements()) {
      if (h == w.group.zero()) continue;
      const auto orb = orbit(w.automorphism, h);
      long inside = 0;
      for (const auto& x : orb) inside += w.subgroup.contains(x) ? 1 : 0;
      transcript.push_back({{"element", element_json(h)}, {"orbit_size", orb.size()}, {"orbit_in_h", inside}});
    }
    const auto recomputed = multiplicity_set(w.group, Subgroup(w.group, w.subgroup.generators()),
                                             validate_automorphism(w.group, w.automorphism.images()));
    j["found"] = true;
    j["witness"] = {{"group", w.group.to_string()},
                    {"orders", set_json(w.group.orders())},
                    {"v", images},
                    {"subgroup", gens},
                    {"subgroup_order", w.subgroup.order()}};
    j["candidates_examined"] = w.candidates_examined;
    j["transcript"] = transcript;
    j["multiplicity_set"] = set_json(recomputed);
    j["verified"] = recomputed == cfg.target;
    res.exit_code = recomputed == cfg.target ? 0 : 1;
    res.summary = "E = " + j["target"].dump() + ": " + w.group.to_string() + ", |H| = " +
                  std::to_string(w.subgroup.order()) + ", v = " + w.automorphism.to_string();
  } catch (const NotFound& e) {
    j["found"] = false;
    j["error"] = e.what();
    res.exit_code = 1;
    res.summary = std::string("not found: ") + e.what();
  }
  out.write_json("witness.json", j);
  res.files = out.files();
  return res;
}

CommandResult cmd_build(const RunConfig& cfg) {
  const GroupData g = resolve_group(cfg);
  const TowerSchedule s = schedule_from_config(cfg, g);
  const CocycleTable table = build_cocycle(s);
  Output out(cfg);
  out.write_text("schedule.json", dump_tower(s, table));
  CommandResult res;
  res.exit_code = write_validation("build", cfg, s, table, out, res.summary);
  res.files = out.files();
  return res;
}

CommandResult cmd_validate(const RunConfig& cfg) {
  CommandResult res;
  if (cfg.schedule_path.empty()) {
    const GroupData g = resolve_group(cfg);
    const TowerSchedule s = schedule_from_config(cfg, g);
    const CocycleTable table = build_cocycle(s);
    Output out(cfg);
    res.exit_code = write_validation("validate", cfg, s, table, out, res.summary);
    res.files = out.files();
    return res;
  }
  std::ifstream in(cfg.schedule_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read tower dump '" + cfg.schedule_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto [s, table] = load_tower(buf.str());
  Output out(cfg);
  res.exit_code = write_validation("validate", cfg, s, table, out, res.summary);
  res.files = out.files();
  return res;
}

CommandResult cmd_spectra(const RunConfig& cfg) {
  const ProbeConfig& pc = cfg.probes;
  std::optional<GroupData> g;
  std::optional<TowerSchedule> s;
  std::optional<CocycleTable> table;
  if (!pc.empty()) {
    g = resolve_group(cfg);
    s = schedule_from_config(cfg, *g);
    table = build_cocycle(*s);
    // Every reference is checked before any probe runs, so a bad config never yields a partial bundle.
    const FiniteAbelianGroup& k = g->k;
    for (const auto& p : pc.weak_limits) {
      require_character(k, p.chi, "weak limit " + p.label);
      try {
        (void)Label::parse(p.label, k);
      } catch (const std::exception& e) {
        throw ConfigError("weak limit label: " + std::string(e.what()));
      }
      if (p.j < 1) throw ConfigError("weak limit j must be positive");
    }
    for (const auto& p : pc.singularity) {
      require_character(k, p.chi, "singularity");
      require_character(k, p.eta, "singularity");
    }
    for (int m : pc.rigidity)
      if (m < 1 || m >= cfg.depth) throw ConfigError("rigidity m must lie in 1.." + std::to_string(cfg.depth - 1));
    for (const auto& p : pc.cyclicity) {
      require_character(k, p.chi, "cyclicity");
      check_function(p.f, *s, "cyclicity");
      if (p.g) {
        require_character(k, *p.chi2, "cyclicity");
        check_function(*p.g, *s, "cyclicity");
      }
      (void)time_grid(p.t0, p.dt, 1);
    }
    for (const auto& p : pc.periodogram) {
      require_character(k, p.chi, "periodogram");
      check_function(p.f, *s, "periodogram");
    }
    for (const auto& p : pc.correlations) {
      require_character(k, p.chi, "correlation");
      check_function(p.f, *s, "correlation");
      check_function(p.g, *s, "correlation");
    }
  }

  using Task = std::function<Outcome()>;
  std::vector<std::pair<std::string, Task>> tasks;
  if (s) {
    const ProbeEnv env{*s, *table, cfg.depth, pc.strong_residual ? ResidualMode::Strong : ResidualMode::Weak,
                       pc.thresholds};
    auto add = [&](std::string kind, Task t) { tasks.emplace_back(std::move(kind), std::move(t)); };
    for (const auto& p : pc.weak_limits) add("weak_limit", [env, p] { return run_weak_limit(p, env); });
    for (const auto& p : pc.singularity) add("singularity", [env, p] { return run_singularity(p, env); });
    if (!pc.rigidity.empty()) add("rigidity", [env, ms = pc.rigidity] { return run_rigidity(ms, env); });
    if (pc.eigenvalue) add("eigenvalue", [env, e = *pc.eigenvalue] { return run_eigen(e, env); });
    for (const auto& p : pc.cyclicity) add("cyclicity", [env, p] { return run_cyclicity(p, env); });
    for (const auto& p : pc.periodogram) add("periodogram", [env, p] { return run_periodogram(p, env); });
    for (const auto& p : pc.correlations) add("correlation", [env, p] { return run_correlations(p, env); });
  }

  // Probes run concurrently; results are merged in configuration order.
  std::vector<std::future<Outcome>> running;
  for (const auto& [kind, task] : tasks) {
    running.push_back(std::async(std::launch::async, [task = task, kind = kind] {
      try {
        Outcome o = task();
        o.kind = kind;
        return o;
      } catch (const std::exception& e) {
        Outcome o;
        o.kind = kind;
        o.error = e.what();
        o.verdict = {false, std::string("error: ") + e.what()};
        return o;
      }
    }));
  }
  std::vector<Outcome> results;
  std::map<std::string, long> counter;
  for (auto& f : running) {
    results.push_back(f.get());
    Outcome& o = results.back();
    o.id = o.kind + "#" + std::to_string(counter[o.kind]++);
  }

  Output out(cfg);
  ordered_json j = header("spectra", cfg);
  if (s) {
    j["variant"] = variant_name(s->variant);
    j["depth"] = s->depth();
    j["group"] = g->k.to_string();
    j["v"] = g->v.to_string();
  }
  j["residual"] = pc.strong_residual ? "strong" : "weak";
  ordered_json probes = ordered_json::array();
  bool all = true;
  std::map<std::string, std::vector<Row>> tables;
  for (const auto& o : results) {
    ordered_json e{{"id", o.id}, {"kind", o.kind}, {"pass", o.verdict.pass}, {"detail", o.verdict.detail}};
    if (!o.error.empty()) e["error"] = o.error;
    e["data"] = o.data.is_null() ? ordered_json::object() : o.data;
    probes.push_back(e);
    all = all && o.verdict.pass;
    for (const auto& r : o.rows) {
      Row row{o.id};
      row.insert(row.end(), r.begin(), r.end());
      tables[o.kind].push_back(std::move(row));
    }
  }
  j["probes"] = probes;
  j["pass"] = all;
  out.write_json("spectra.json", j);
  for (const auto& [kind, rows] : tables) out.write_csv(kind + ".csv", csv_headers().at(kind), rows);

  CommandResult res;
  res.exit_code = all ? 0 : 1;
  long failed = 0;
  for (const auto& o : results) failed += o.verdict.pass ? 0 : 1;
  res.summary = std::to_string(results.size()) + " probes, " + std::to_string(failed) + " failed";
  res.files = out.files();
  return res;
}

CommandResult cmd_induce(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const InduceConfig& ic = cfg.induce;
  ordered_json j = header("induce", cfg);
  std::vector<Row> rows;
  long failures = 0;
  auto record = [&](const std::string& section, long index, const std::string& instance, bool pass,
                    const std::string& detail) {
    rows.push_back({section, std::to_string(index), instance, flag(pass), detail});
    failures += pass ? 0 : 1;
  };

  ordered_json induction = ordered_json::array();
  for (long i = 0; i < ic.induction_instances; ++i) {
    const InductionInstance inst = random_induction_instance(rng, ic.max_order, ic.max_index, ic.max_dim);
    const InductionReport r = check_induction(inst.g, inst.v, default_cross_section(inst.g, inst.v.h));
    const std::string name = group_text(inst.g) + " |H|=" + std::to_string(inst.v.h.order());
    induction.push_back({{"group", group_text(inst.g)},
                      {"subgroup_order", inst.v.h.order()},
                      {"dim_v", r.dim_v},
                      {"dim_u", r.dim_u},
                      {"set_v", set_json(r.set_v)},
                      {"set_u", set_json(r.set_u)},
                      {"support_equal", r.support_equal},
                      {"pass", r.ok()}});
    record("induction", i, name, r.ok(), "M(V)=" + set_json(r.set_v).dump() + " M(U)=" + set_json(r.set_u).dump());
  }
  j["induction"] = induction;

  ordered_json cross = ordered_json::array();
  for (long i = 0; i < ic.cross_section_instances; ++i) {
    const InductionInstance inst = random_induction_instance(rng, ic.max_order, ic.max_index, ic.max_dim);
    const CrossSection a = default_cross_section(inst.g, inst.v.h);
    const CrossSection b = random_cross_section(inst.g, inst.v.h, rng);
    const auto ma = multiplicity_function(induce(inst.g, inst.v, a));
    const auto mb = multiplicity_function(induce(inst.g, inst.v, b));
    const bool same = ma == mb;
    cross.push_back({{"group", group_text(inst.g)},
                     {"subgroup_order", inst.v.h.order()},
                     {"multiplicities", multiplicities_json(ma, inst.g)},
                     {"pass", same}});
    record("cross_section", i, group_text(inst.g) + " |H|=" + std::to_string(inst.v.h.order()), same,
           same ? "equal multiplicity functions" : "multiplicity functions differ");
  }
  j["cross_section"] = cross;

  auto product_entry = [&](const std::string& section, long index, const std::string& name, const FiniteAction& t1,
                           const FiniteAction& t2, bool expect_violation) {
    ordered_json e{{"name", name}};
    try {
      const ProductReport r = product_multiplicity_check(t1, t2);
      e["m_t1"] = set_json(r.m1);
      e["m_t2"] = set_json(r.m2);
      e["m_product"] = set_json(r.product);
      e["t2_orbits"] = r.orbits2;
      e["union_with_one"] = r.union_with_one;
      e["union_with_orbits"] = r.union_with_orbits;
      const bool pass = !expect_violation && r.ok();
      e["pass"] = pass;
      record(section, index, name, pass, "M(T2)=" + e["m_t2"].dump() + " M(T1xT2)=" + e["m_product"].dump());
    } catch (const HypothesisViolation& ex) {
      e["hypothesis_violation"] = ex.what();
      e["pass"] = expect_violation;
      record(section, index, name, expect_violation, std::string("hypothesis violation: ") + ex.what());
    }
    return e;
  };

  const FiniteAbelianGroup z2({2}), z3({3});
  const FiniteAction two_cycles = disjoint_union({translation_action(z2), translation_action(z2)}, {ratio(1, 2), ratio(1, 2)});
  ordered_json named = ordered_json::array();
  named.push_back(product_entry("product_named", 0, "Z/3 on itself x Z/2 on itself", translation_action(z3),
                                translation_action(z2), false));
  named.push_back(product_entry("product_named", 1, "Z/3 on itself x Z/2 on two 2-cycles", translation_action(z3),
                                two_cycles, false));
  named.push_back(product_entry("product_named", 2, "Z/2 on two 2-cycles x Z/2 on itself", two_cycles,
                                translation_action(z2), true));
  j["product_named"] = named;

  ordered_json products = ordered_json::array();
  for (long i = 0; i < ic.product_instances; ++i) {
    const FiniteAction t1 = random_simple_ergodic_action(rng);
    const FiniteAction t2 = random_action(rng);
    const std::string name = group_text(t1.group) + " on " + std::to_string(t1.points()) + " x " +
                             group_text(t2.group) + " on " + std::to_string(t2.points());
    products.push_back(product_entry("product_random", i, name, t1, t2, false));
  }
  j["product_random"] = products;

  {
    const FiniteAbelianGroup z4({4});
    const InducedActionReport r =
        check_induced_action(z4, {{2}}, two_cycles, default_cross_section(z4, Subgroup(z4, {{2}})));
    const bool pass = r.extra_one;
    j["induced_action"] = {{"name", "Z/4 induced from 2Z/4 acting on two 2-cycles"},
                           {"m_s", set_json(r.m_s)},
                           {"m_t", set_json(r.m_t)},
                           {"index", r.index},
                           {"pass", pass}};
    record("induced_action", 0, "Z/4 from 2Z/4", pass,
           "M(S)=" + set_json(r.m_s).dump() + " M(T)=" + set_json(r.m_t).dump());
  }

  j["failures"] = failures;
  j["pass"] = failures == 0;
  Output out(cfg);
  out.write_json("induce.json", j);
  out.write_csv("induce.csv", {"section", "index", "instance", "pass", "detail"}, rows);
  CommandResult res;
  res.exit_code = failures == 0 ? 0 : 1;
  res.summary = std::to_string(rows.size()) + " instances, " + std::to_string(failures) + " failed";
  res.files = out.files();
  return res;
}

CommandResult cmd_report(const RunConfig& cfg) {
  ordered_json stages = ordered_json::array();
  CommandResult total;
  auto stage = [&](const char* name, CommandResult r) {
    stages.push_back({{"stage", name}, {"exit_code", r.exit_code}, {"summary", r.summary}, {"files", r.files}});
    total.exit_code = std::max(total.exit_code, r.exit_code);
    total.files.insert(total.files.end(), r.files.begin(), r.files.end());
  };
  if (!cfg.target.empty()) stage("realize", cmd_realize(cfg));
  stage("build", cmd_build(cfg));
  stage("spectra", cmd_spectra(cfg));
  stage("induce", cmd_induce(cfg));
  ordered_json j = header("report", cfg);
  j["stages"] = stages;
  j["exit_code"] = total.exit_code;
  Output out(cfg);
  // report.json is always written so the stage table survives a disabled JSON format.
  out.write_text("report.json", j.dump(2) + "\n");
  total.files.push_back("report.json");
  total.summary = std::to_string(stages.size()) + " stages, exit " + std::to_string(total.exit_code);
  return total;
}

}  // namespace cfflow
