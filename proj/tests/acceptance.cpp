// One PASS/FAIL line per acceptance criterion, with the measured values and wall time.
// Exit code 0 when every criterion passes, 1 otherwise.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

#include "cfflow/pipeline.hpp"
#include "oracles.hpp"

using namespace cfflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

GroupData z3_witness() {
  FiniteAbelianGroup k({3});
  return {k, validate_automorphism(k, {{2}})};
}

std::vector<Label> labels(const std::vector<std::string>& texts, const FiniteAbelianGroup& k) {
  std::vector<Label> out;
  for (const auto& t : texts) out.push_back(Label::parse(t, k));
  return out;
}

// ---------------------------------------------------------------------------

constexpr long kMaxOrder = 36;
constexpr size_t kAutomorphismCap = 500;

Outcome oracle_equivalence() {
  long triples = 0, mismatches = 0, capped = 0;
  for (long n = 2; n <= kMaxOrder; ++n) {
    for (const auto& d : invariant_factor_forms(n)) {
      const FiniteAbelianGroup g(d);
      const auto autos = enumerate_automorphisms(g, kAutomorphismCap);
      if (autos.size() == kAutomorphismCap) ++capped;
      for (const auto& h : enumerate_subgroups(g)) {
        if (h.order() < 2) continue;
        for (const auto& v : autos) {
          ++triples;
          if (multiplicity_set(g, h, v) != oracle::multiplicity_set_by_cycles(d, h.generators(), v.images()))
            ++mismatches;
        }
      }
    }
  }
  return {mismatches == 0 && triples > 0,
          std::to_string(triples) + " triples, " + std::to_string(mismatches) + " mismatches; " +
              std::to_string(capped) + " groups enumerated up to " + std::to_string(kAutomorphismCap) +
              " automorphisms"};
}

Outcome realization() {
  bool ok = true;
  std::ostringstream msg;
  for (const std::set<long>& e : {std::set<long>{1}, {2}, {1, 2}, {1, 3}}) {
    const Witness w = realize(e, {16, 100000});
    const auto got = oracle::multiplicity_set_by_cycles(w.group.orders(), w.subgroup.generators(), w.automorphism.images());
    const bool good = got == e && w.group.order() <= 16;
    ok = ok && good;
    msg << "{";
    for (auto it = e.begin(); it != e.end(); ++it) msg << (it == e.begin() ? "" : ",") << *it;
    msg << "}: " << w.group.to_string() << (good ? " ok" : " WRONG") << "; ";
  }
  return {ok, msg.str()};
}

Outcome schedule_validity() {
  const GroupData g = z3_witness();
  const int depth = 6;
  const auto s4 = build_schedule(Variant::WN, g, depth, round_robin_assignment(Variant::WN, g, depth));
  const ValidationReport v4 = validate_schedule(s4);
  const bool wn_ok = v4.ok() && v4.repaired_levels.empty();

  const auto a5 = round_robin_assignment(Variant::NM, g, depth);
  const auto s5 = build_schedule(Variant::NM, g, depth, a5, std::nullopt, false);
  const ValidationReport v5 = validate_schedule(s5);
  const ValidationReport strict = validate_schedule(build_schedule(Variant::NM, g, depth, a5, std::nullopt, true));
  // Strict failures must be exactly the repaired levels, each failing only its spacer bound.
  bool only_repair = v5.ok();
  for (const auto& c : strict.levels) {
    const bool repaired = s5.level(c.index).repaired;
    if (repaired != !c.ok()) only_repair = false;
    if (repaired && !(c.spacer_relaxed && c.min_and_size && c.disjoint && c.ordered)) only_repair = false;
  }

  long checked = 0, closed_ok = 0;
  for (const TowerSchedule* s : {&s4, &s5}) {
    for (int n = 1; n <= s->depth(); ++n) {
      const auto& lv = s->level(n);
      if (!lv.z) continue;
      ++checked;
      const long k = lv.n();
      if (Rational(oracle::symdiff_count(lv.cuts, *lv.z)) / Rational(lv.size()) == ratio(2, k * k)) ++closed_ok;
    }
  }
  std::ostringstream msg;
  msg << "wn strict " << (wn_ok ? "valid" : "INVALID") << "; nm repaired levels {";
  for (size_t i = 0; i < v5.repaired_levels.size(); ++i) msg << (i ? "," : "") << v5.repaired_levels[i];
  msg << "} " << (only_repair ? "account for every strict failure" : "DO NOT account for the strict failures")
      << "; closed form " << closed_ok << "/" << checked << " N/M levels";
  return {wn_ok && only_repair && checked > 0 && closed_ok == checked, msg.str()};
}

Outcome cocycle_conditions() {
  const GroupData g = z3_witness();
  bool ok = true;
  std::ostringstream msg;
  for (Variant v : {Variant::WN, Variant::NM}) {
    const auto s = build_schedule(v, g, 6, round_robin_assignment(v, g, 6));
    const ConditionReport r = check_conditions(build_cocycle(s), s);
    long subsets = 0;
    bool fractions = true;
    for (const auto& lc : r.levels) {
      if (lc.overlap != lc.circ) fractions = false;
      for (const auto& sc : lc.subsets) {
        ++subsets;
        fractions = fractions && sc.builder_valid && sc.exists;
      }
    }
    const bool good = r.ok() && r.defect_sum == 0 && fractions;
    ok = ok && good;
    msg << variant_name(v) << ": " << (good ? "ok" : "FAILED") << ", defect " << r.defect_sum.get_str() << ", "
        << subsets << " marked subsets; ";
  }
  return {ok, msg.str()};
}

Outcome cocycle_identity() {
  const GroupData g = z3_witness();
  bool ok = true;
  std::ostringstream msg;
  for (Variant v : {Variant::WN, Variant::NM}) {
    const int depth = 6;
    const auto s = build_schedule(v, g, depth, round_robin_assignment(v, g, depth));
    const auto table = build_cocycle(s);
    std::mt19937_64 rng(2024);
    const long scale = 1000;
    const long top = static_cast<long>(s.h_approx(depth)) * scale;
    auto point = [&] {
      // Rational points, half of them shifted by an irrational amount that keeps them inside F_D.
      ExactReal x = ExactReal::rational(ratio(static_cast<long>(rng() % static_cast<unsigned long>(top)), scale));
      if (rng() % 2) {
        const ExactReal y = x + ExactReal::parse("0 + 1/5*xi1 + 1/7*xi2");
        if (s.xi.less(y, s.h(depth))) x = y;
      }
      return digits(x, depth, s);
    };
    long failures = 0;
    for (int i = 0; i < 1000; ++i) {
      const DigitWord x = point(), y = point(), z = point();
      if (g.k.add(alpha_between(x, y, table), alpha_between(y, z, table)) != alpha_between(x, z, table)) ++failures;
    }
    ok = ok && failures == 0;
    msg << variant_name(v) << " " << failures << "/1000 failures; ";
  }
  return {ok, msg.str()};
}

Outcome rigidity() {
  const GroupData g = z3_witness();
  const auto s = build_schedule(Variant::WN, g, 5, labels({"W1", "N:1", "N:1", "N:1"}, g.k));
  const auto rows = rigidity_residual({2, 3, 4}, s, build_cocycle(s), 5);
  const Verdict v = judge_rigidity(rows, 0.3);
  return {v.pass, "assignment [W1, N:1, N:1, N:1]: " + v.detail};
}

Outcome weak_limits_n_w() {
  const GroupData g = z3_witness();
  struct Job {
    std::vector<std::string> assignment;
    int depth, max_level;
    std::string label;
    long chi;
  };
  std::vector<Job> jobs;
  for (long chi : {1, 2}) {
    jobs.push_back({{"W1", "W2", "N:1", "N:1", "N:1"}, 6, 6, "N:1", chi});
    jobs.push_back({std::vector<std::string>(6, "W1"), 7, 6, "W1", chi});
    jobs.push_back({std::vector<std::string>(6, "W2"), 7, 6, "W2", chi});
  }
  std::vector<std::future<std::pair<Verdict, std::string>>> futures;
  for (const auto& job : jobs) {
    futures.push_back(std::async(std::launch::async, [&g, job] {
      const auto s = build_schedule(Variant::WN, g, job.depth, labels(job.assignment, g.k));
      LevelSeries series =
          weak_limit_series(Label::parse(job.label, g.k), Character(g.k, {job.chi}), 1, s, build_cocycle(s), job.depth);
      std::erase_if(series.rows, [&](const ResidualReport& r) { return r.level > job.max_level; });
      return std::make_pair(judge_weak_limit(series, 0.25), job.label + " chi=" + std::to_string(job.chi));
    }));
  }
  bool ok = true;
  std::string detail;
  for (auto& f : futures) {
    const auto [v, name] = f.get();
    ok = ok && v.pass;
    detail += name + " [" + v.detail + "]; ";
  }
  return {ok, detail};
}

Outcome weak_limits_m() {
  const GroupData g = z3_witness();
  std::vector<std::future<std::pair<Verdict, std::string>>> futures;
  for (int i : {1, 2, 3}) {
    for (long j : {1, 2}) {
      for (long chi : {1, 2}) {
        futures.push_back(std::async(std::launch::async, [&g, i, j, chi] {
          const std::string m = "M:1:" + std::to_string(i);
          const auto s = build_schedule(Variant::NM, g, 6, labels({"N:1", "N:1", m, m, m}, g.k));
          const LevelSeries series =
              weak_limit_series(Label::parse(m, g.k), Character(g.k, {chi}), j, s, build_cocycle(s), 6);
          return std::make_pair(judge_weak_limit(series, 0.25),
                                m + " j=" + std::to_string(j) + " chi=" + std::to_string(chi));
        }));
      }
    }
  }
  bool ok = true;
  std::string detail;
  for (auto& f : futures) {
    const auto [v, name] = f.get();
    ok = ok && v.pass;
    detail += name + " [" + v.detail + "]; ";
  }
  return {ok, detail};
}

Outcome sector_separation() {
  const GroupData g = z3_witness();
  const auto s = build_schedule(Variant::WN, g, 6, labels({"W1", "W2", "N:1", "N:1", "N:1"}, g.k));
  const MultiplicityEvidence ev =
      singularity_probe(Character::trivial(g.k), Character(g.k, {1}), s, build_cocycle(s), 6);
  const Verdict v = judge_singularity(ev, 0.5);
  std::string detail = "target gap " + fmt(ev.target_gap) + "; bounds";
  for (const auto& r : ev.rows) detail += " L" + std::to_string(r.level) + "=" + fmt(r.bound);
  return {v.pass && ev.target_gap >= 1.5 - 1e-12, detail + "; " + v.detail};
}

Outcome eigenvalue_absence() {
  const GroupData g = z3_witness();
  const auto s = build_schedule(Variant::WN, g, 5, round_robin_assignment(Variant::WN, g, 5));
  const auto lambdas = lambda_grid(-10, 10, 0.01);
  const EigenReport rep = eigenvalue_absence_probe(lambdas, s, build_cocycle(s), 5, 1);
  const Verdict v = judge_eigen(rep, 0.05);
  std::string levels;
  for (int l : rep.levels) levels += " " + std::to_string(l);
  return {v.pass && rep.rows.size() == 2000,
          std::to_string(rep.rows.size()) + " grid points, W levels" + levels + "; " + v.detail};
}

Outcome induced_representations() {
  std::mt19937_64 rng(11);
  long equal = 0, oracle_ok = 0;
  for (int i = 0; i < 100; ++i) {
    const InductionInstance inst = random_induction_instance(rng, 24, 6, 8);
    const CrossSection cs = default_cross_section(inst.g, inst.v.h);
    if (check_induction(inst.g, inst.v, cs).ok()) ++equal;
    if (multiplicity_function(induce(inst.g, inst.v, cs)) == oracle::induced_multiplicities(inst.g, inst.v))
      ++oracle_ok;
  }
  long independent = 0;
  for (int i = 0; i < 20; ++i) {
    const InductionInstance inst = random_induction_instance(rng, 24, 6, 8);
    const auto base = multiplicity_function(induce(inst.g, inst.v, default_cross_section(inst.g, inst.v.h)));
    const auto other = multiplicity_function(induce(inst.g, inst.v, random_cross_section(inst.g, inst.v.h, rng)));
    if (base == other) ++independent;
  }
  return {equal == 100 && oracle_ok == 100 && independent == 20,
          "set equality " + std::to_string(equal) + "/100, Frobenius oracle " + std::to_string(oracle_ok) +
              "/100, cross-section independence " + std::to_string(independent) + "/20"};
}

Outcome product_fact() {
  FiniteAction pairs;
  pairs.group = FiniteAbelianGroup({2});
  pairs.weights.assign(4, ratio(1, 4));
  pairs.generators = {{1, 0, 3, 2}};
  const FiniteAction z3 = translation_action(FiniteAbelianGroup({3}));
  const ProductReport a = product_multiplicity_check(z3, translation_action(FiniteAbelianGroup({2})));
  const ProductReport b = product_multiplicity_check(z3, pairs);
  bool named = a.ok() && a.union_with_one && a.product == std::set<long>{1} && b.ok() && b.union_with_one &&
               b.product == std::set<long>{1, 2};
  bool rejected = false;
  try {
    product_multiplicity_check(pairs, z3);
  } catch (const HypothesisViolation&) {
    rejected = true;
  }
  named = named && rejected;

  std::mt19937_64 rng(12);
  long ok = 0, with_one = 0, ergodic = 0;
  for (int i = 0; i < 50; ++i) {
    const FiniteAction t1 = random_simple_ergodic_action(rng, 12);
    const FiniteAction t2 = random_action(rng, 8, 3);
    const ProductReport r = product_multiplicity_check(t1, t2);
    std::set<long> want;
    for (const auto& [k, m] : oracle::koopman_multiplicities(product_action(t1, t2), true))
      if (m > 0) want.insert(m);
    if (r.ok() && r.product == want) ++ok;
    if (r.t2_ergodic) ++ergodic;
    if (r.t2_ergodic && r.union_with_one) ++with_one;
  }
  return {named && ok == 50 && with_one == ergodic,
          std::string("named instances ") + (named ? "ok" : "FAILED") + "; random " + std::to_string(ok) +
              "/50 (M(T2) u {#orbits(T2)} and orbit oracle), M(T2) u {1} on " + std::to_string(with_one) + "/" +
              std::to_string(ergodic) + " ergodic T2"};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = buf.str();
  }
  return out;
}

Outcome determinism() {
  RunConfig c = parse_config(R"({
    "target": [2],
    "depth": 6,
    "assignment": ["W1", "W2", "N:1", "N:1", "N:1"],
    "seed": 31,
    "probes": {
      "weak_limits": [{"label": "N:1", "chi": 1}],
      "singularity": [{"chi": 0, "eta": 1}],
      "rigidity": [3, 4, 5],
      "eigenvalue": {"from": -10, "to": 10, "step": 0.01},
      "cyclicity": [{"f": {"level": 2}, "chi": 1, "t0": "0", "dt": "1/2", "count": 8}],
      "periodogram": [{"f": {"level": 1}, "chi": 0, "t0": "0", "dt": "1/3", "count": 16}],
      "correlations": [{"f": {"level": 2, "twisted": true}, "chi": 1, "times": ["0", "1 + 1*xi1", "-3/2"]}]
    }
  })");
  const fs::path root = fs::temp_directory_path() / "cfflow_acceptance_determinism";
  fs::remove_all(root);
  c.output_dir = (root / "a").string();
  const int e1 = cmd_report(c).exit_code;
  c.output_dir = (root / "b").string();
  const int e2 = cmd_report(c).exit_code;
  const auto a = read_tree(root / "a"), b = read_tree(root / "b");
  long differing = 0;
  for (const auto& [name, text] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != text) ++differing;
  }
  const bool same = a.size() == b.size() && differing == 0 && !a.empty();
  return {same && e1 == e2,
          std::to_string(a.size()) + " files per run, " + std::to_string(differing) + " differing; exit codes " +
              std::to_string(e1) + "/" + std::to_string(e2)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "algebraic oracle equivalence", 60, oracle_equivalence},
      {2, "realization", 60, realization},
      {3, "schedule validity", 60, schedule_validity},
      {4, "cocycle conditions", 60, cocycle_conditions},
      {5, "cocycle identity", 60, cocycle_identity},
      {6, "rigidity", 600, rigidity},
      {7, "weak limits along N and W levels", 1800, weak_limits_n_w},
      {8, "weak limits along M levels", 1800, weak_limits_m},
      {9, "sector separation", 600, sector_separation},
      {10, "eigenvalue absence", 1800, eigenvalue_absence},
      {11, "induced representations", 300, induced_representations},
      {12, "product multiplicity fact", 300, product_fact},
      {13, "determinism", 600, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failed;
    std::printf("%s [%2d] %s: %s (%.1f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s, in_budget ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
