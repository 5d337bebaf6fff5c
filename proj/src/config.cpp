#include "cfflow/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cfflow {

using nlohmann::json;

namespace {

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <class T>
T get(const json& j, const char* key, T fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  try {
    return v->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

Element element(const json& j, const char* what) {
  if (j.is_number_integer()) return {j.get<long>()};
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an integer or an integer array");
  Element e;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw ConfigError(std::string(what) + ": expected integers");
    e.push_back(x.get<long>());
  }
  return e;
}

std::string exact_text(const json& j, const char* what) {
  std::string text;
  if (j.is_string()) {
    text = j.get<std::string>();
  } else if (j.is_number_integer()) {
    text = std::to_string(j.get<long>());
  } else {
    throw ConfigError(std::string(what) + ": exact reals are given as strings such as \"1/2 + 3*xi1\"");
  }
  try {
    (void)ExactReal::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
  return text;
}

FunctionSpec function_spec(const json& j) {
  if (!j.is_object()) throw ConfigError("test function must be an object");
  FunctionSpec f;
  f.level = get<int>(j, "level", 1);
  f.column = get<long>(j, "column", 0);
  f.twisted = get<bool>(j, "twisted", false);
  if (const json* iv = find(j, "interval")) {
    if (!iv->is_array() || iv->size() != 2) throw ConfigError("interval must be [lo, hi]");
    f.interval = std::make_pair(exact_text((*iv)[0], "interval"), exact_text((*iv)[1], "interval"));
  }
  if (f.level < 0) throw ConfigError("test function level must be nonnegative");
  return f;
}

void parse_grid(const json& j, std::string& t0, std::string& dt, long& count) {
  if (const json* v = find(j, "t0")) t0 = exact_text(*v, "t0");
  if (const json* v = find(j, "dt")) dt = exact_text(*v, "dt");
  count = get<long>(j, "count", count);
  if (count < 1) throw ConfigError("grid count must be positive");
}

ProbeConfig parse_probes(const json& p) {
  ProbeConfig out;
  if (!p.is_object()) throw ConfigError("'probes' must be an object");
  if (const json* w = find(p, "weak_limits")) {
    for (const auto& x : *w) {
      WeakLimitProbe probe;
      probe.label = get<std::string>(x, "label", "");
      if (probe.label.empty()) throw ConfigError("weak limit probe needs a label");
      probe.chi = element(x.at("chi"), "chi");
      probe.j = get<long>(x, "j", 1);
      probe.max_level = get<int>(x, "max_level", 0);
      out.weak_limits.push_back(probe);
    }
  }
  if (const json* s = find(p, "singularity")) {
    for (const auto& x : *s) {
      if (!x.contains("chi") || !x.contains("eta")) throw ConfigError("singularity probe needs chi and eta");
      out.singularity.push_back({element(x["chi"], "chi"), element(x["eta"], "eta")});
    }
  }
  if (const json* e = find(p, "eigenvalue")) {
    EigenGrid g;
    g.from = get<double>(*e, "from", g.from);
    g.to = get<double>(*e, "to", g.to);
    g.step = get<double>(*e, "step", g.step);
    g.levels_per_class = get<int>(*e, "levels_per_class", g.levels_per_class);
    if (!(g.step > 0) || g.to < g.from) throw ConfigError("eigenvalue grid needs from <= to and step > 0");
    out.eigenvalue = g;
  }
  if (const json* r = find(p, "rigidity")) {
    try {
      out.rigidity = r->get<std::vector<int>>();
    } catch (const json::exception&) {
      throw ConfigError("'rigidity' must be a list of levels");
    }
  }
  if (const json* c = find(p, "cyclicity")) {
    for (const auto& x : *c) {
      CyclicityProbe probe;
      probe.f = function_spec(x.at("f"));
      probe.chi = element(x.at("chi"), "chi");
      if (x.contains("g")) probe.g = function_spec(x["g"]);
      if (x.contains("chi2")) probe.chi2 = element(x["chi2"], "chi2");
      if (probe.g.has_value() != probe.chi2.has_value()) throw ConfigError("tensor cyclicity needs both g and chi2");
      parse_grid(x, probe.t0, probe.dt, probe.count);
      probe.dimension = get<long>(x, "dimension", probe.count);
      out.cyclicity.push_back(probe);
    }
  }
  if (const json* c = find(p, "periodogram")) {
    for (const auto& x : *c) {
      PeriodogramProbe probe;
      probe.f = function_spec(x.at("f"));
      probe.chi = element(x.at("chi"), "chi");
      parse_grid(x, probe.t0, probe.dt, probe.count);
      probe.omega_from = get<double>(x, "omega_from", probe.omega_from);
      probe.omega_to = get<double>(x, "omega_to", probe.omega_to);
      probe.omega_step = get<double>(x, "omega_step", probe.omega_step);
      if (!(probe.omega_step > 0)) throw ConfigError("omega_step must be positive");
      out.periodogram.push_back(probe);
    }
  }
  if (const json* c = find(p, "correlations")) {
    for (const auto& x : *c) {
      CorrelationProbe probe;
      probe.f = function_spec(x.at("f"));
      probe.g = x.contains("g") ? function_spec(x["g"]) : probe.f;
      probe.chi = element(x.at("chi"), "chi");
      for (const auto& t : x.at("times")) probe.times.push_back(exact_text(t, "times"));
      out.correlations.push_back(probe);
    }
  }
  const std::string mode = get<std::string>(p, "residual", "weak");
  if (mode != "weak" && mode != "strong") throw ConfigError("residual must be 'weak' or 'strong'");
  out.strong_residual = mode == "strong";
  if (const json* t = find(p, "thresholds")) {
    out.thresholds.weak_limit = get<double>(*t, "weak_limit", out.thresholds.weak_limit);
    out.thresholds.singularity = get<double>(*t, "singularity", out.thresholds.singularity);
    out.thresholds.eigenvalue = get<double>(*t, "eigenvalue", out.thresholds.eigenvalue);
    out.thresholds.rigidity = get<double>(*t, "rigidity", out.thresholds.rigidity);
  }
  return out;
}

}  // namespace

void RunConfig::check() const {
  if (depth < 2) throw ConfigError("depth must be at least 2");
  if (target.empty() && !group) throw ConfigError("target set E is empty and no witness group is given");
  for (long e : target)
    if (e < 1) throw ConfigError("multiplicities in E must be positive");
  if (!csv && !json) throw ConfigError("no output format selected");
  if (search.max_order < 1) throw ConfigError("search bound must be positive");
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig c;
  try {
    if (const json* t = find(j, "target")) {
      if (!t->is_array()) throw ConfigError("'target' must be a list of positive integers");
      for (const auto& e : *t) {
        if (!e.is_number_integer()) throw ConfigError("'target' must be a list of positive integers");
        c.target.insert(e.get<long>());
      }
      if (c.target.empty()) throw ConfigError("target set E is empty");
    }
    if (const json* g = find(j, "group")) {
      GroupSpec spec;
      spec.orders = g->at("orders").get<std::vector<long>>();
      for (const auto& x : g->at("v")) spec.v_images.push_back(element(x, "v"));
      if (const json* h = find(*g, "subgroup"))
        for (const auto& x : *h) spec.subgroup.push_back(element(x, "subgroup"));
      c.group = spec;
    }
    if (const json* s = find(j, "search")) {
      c.search.max_order = get<long>(*s, "max_order", c.search.max_order);
      c.search.max_automorphisms = get<size_t>(*s, "max_automorphisms", c.search.max_automorphisms);
    }
    try {
      c.variant = parse_variant(get<std::string>(j, "variant", "wn"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    c.depth = get<int>(j, "depth", c.depth);
    if (const json* x = find(j, "xi")) {
      if (!x->is_array() || x->size() != 2) throw ConfigError("'xi' must be two strings \"sqrt(q)\"");
      c.xi = std::make_pair((*x)[0].get<std::string>(), (*x)[1].get<std::string>());
      try {
        (void)XiBasis::parse_sqrt(c.xi->first);
        (void)XiBasis::parse_sqrt(c.xi->second);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("xi: ") + e.what());
      }
    }
    const std::string mode = get<std::string>(j, "spacer_mode", "repair");
    if (mode != "repair" && mode != "strict") throw ConfigError("spacer_mode must be 'repair' or 'strict'");
    c.strict = mode == "strict";
    if (const json* a = find(j, "assignment")) {
      if (a->is_string()) {
        if (a->get<std::string>() != "round-robin") throw ConfigError("assignment must be 'round-robin' or a list");
      } else {
        c.assignment = a->get<std::vector<std::string>>();
      }
    }
    if (const json* p = find(j, "probes")) c.probes = parse_probes(*p);
    if (const json* in = find(j, "induce")) {
      c.induce.induction_instances = get<long>(*in, "induction_instances", c.induce.induction_instances);
      c.induce.cross_section_instances = get<long>(*in, "cross_section_instances", c.induce.cross_section_instances);
      c.induce.product_instances = get<long>(*in, "product_instances", c.induce.product_instances);
      c.induce.max_order = get<long>(*in, "max_order", c.induce.max_order);
      c.induce.max_index = get<long>(*in, "max_index", c.induce.max_index);
      c.induce.max_dim = get<long>(*in, "max_dim", c.induce.max_dim);
    }
    c.seed = get<std::uint64_t>(j, "seed", c.seed);
    if (const json* o = find(j, "output")) {
      c.output_dir = get<std::string>(*o, "dir", c.output_dir);
      if (const json* f = find(*o, "formats")) {
        const auto formats = f->get<std::vector<std::string>>();
        c.csv = c.json = false;
        for (const auto& s : formats) {
          if (s == "csv") c.csv = true;
          else if (s == "json") c.json = true;
          else throw ConfigError("unknown output format '" + s + "'");
        }
      }
    }
    c.schedule_path = get<std::string>(j, "schedule", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.check();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace cfflow
