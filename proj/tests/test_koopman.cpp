#include <doctest.h>

#include "cfflow/koopman.hpp"
#include "oracles.hpp"

using namespace cfflow;

namespace {

struct Fixture {
  GroupData g;
  TowerSchedule s;
  CocycleTable table;
  int depth;

  explicit Fixture(int d = 4)
      : g{FiniteAbelianGroup({3}), validate_automorphism(FiniteAbelianGroup({3}), {{2}})},
        s(build_schedule(Variant::WN, g, d, round_robin_assignment(Variant::WN, g, d))),
        table(build_cocycle(s)),
        depth(d) {}

  Character chi(long y) const { return Character(g.k, {y}); }
};

std::vector<StepFunction> test_functions(const Fixture& fx) {
  std::vector<StepFunction> out;
  const auto cols = column_family({1, 2}, fx.s, fx.table, fx.chi(1), true);
  out.push_back(cols.front());
  out.push_back(cols.back());
  out.push_back(StepFunction::indicator(2, ExactReal::rational(ratio(1, 2)), ExactReal::parse("2 + 1/3*xi1"), 3, "mid"));
  StepFunction mixed;
  mixed.level = 2;
  mixed.roots = 3;
  mixed.name = "mixed";
  mixed.pieces.push_back({ExactReal(0), ExactReal(1), ratio(2, 3), 1});
  mixed.pieces.push_back({ExactReal(4), ExactReal::parse("5 + 1/2*xi1"), Rational(-1), 2});
  out.push_back(mixed);
  return out;
}

std::vector<ExactReal> test_times() {
  return {ExactReal(0), ExactReal(1), ExactReal::rational(ratio(5, 2)), ExactReal::parse("0 + 1*xi1"),
          ExactReal::parse("3 - 1*xi1 + 1*xi2"), ExactReal::parse("6 + 1*xi1"), ExactReal::parse("19 + 2*xi1 + 1/2*xi2")};
}

}  // namespace

TEST_CASE("windows agree exactly with the pairwise oracle") {
  const Fixture fx;
  const auto fs = test_functions(fx);
  for (long y : {0, 1, 2}) {
    const Character chi = fx.chi(y);
    for (size_t a = 0; a < fs.size(); ++a) {
      for (size_t b = 0; b < fs.size(); b += 2) {
        Correlator c(fx.s, fx.table, fs[a], fs[b], chi, fx.depth);
        for (const auto& t : test_times()) {
          const CycloReal want = oracle::window(fs[a], fs[b], chi, t, fx.depth, fx.s, fx.table);
          CHECK_MESSAGE(c.window(t).equals(want), fs[a].name, " vs ", fs[b].name, " chi ", y, " t ", t.to_string());
        }
      }
    }
  }
}

TEST_CASE("negative times") {
  const Fixture fx;
  const auto fs = test_functions(fx);
  Correlator c(fx.s, fx.table, fs[2], fs[3], fx.chi(1), fx.depth);
  for (const auto& t : test_times()) {
    if (fx.s.xi.sign(t) == 0) continue;
    const CorrelationReport r = c.at(-t);
    CHECK(r.window.equals(oracle::window(fs[2], fs[3], fx.chi(1), -t, fx.depth, fx.s, fx.table)));
    const CorrelationReport swapped = correlation(fs[3], fs[2], fx.chi(1), t, fx.depth, fx.s, fx.table);
    CHECK(std::abs(r.value - std::conj(swapped.value)) < 1e-12);
  }
}

TEST_CASE("skew product sectors") {
  const Fixture fx(3);
  const auto fs = test_functions(fx);
  const ExactReal t = ExactReal::parse("3 + 1*xi1");
  for (long y : {0, 1, 2}) {
    for (long e : {0, 1, 2}) {
      const std::complex<double> skew =
          oracle::skew_window(fs[0], fs[2], fx.chi(y), fx.chi(e), t, fx.depth, fx.s, fx.table);
      if (y != e) {
        CHECK(std::abs(skew) < 1e-12);
      } else {
        const auto want = oracle::window(fs[0], fs[2], fx.chi(y), t, fx.depth, fx.s, fx.table).to_complex(fx.s.xi);
        CHECK(std::abs(skew - want) < 1e-9);
      }
    }
  }
}

TEST_CASE("normalization and norms") {
  const Fixture fx;
  const auto fs = test_functions(fx);
  for (const auto& f : fs) {
    Correlator c(fx.s, fx.table, f, f, fx.chi(1), fx.depth);
    const CorrelationReport r = c.at(ExactReal(0));
    CHECK(std::abs(r.value.imag()) < 1e-12);
    CHECK(r.value.real() == doctest::Approx(norm(f, fx.s) * norm(f, fx.s)).epsilon(1e-4));
    CHECK(std::abs(c.inner_product() - r.value) < 1e-4 * std::abs(r.value));
    CHECK(r.deficiency >= 0);
  }
  // A unit interval on F_0 has window norm 1.
  CHECK(norm_squared_window(StepFunction::indicator(0, ExactReal(0), ExactReal(1), 1)) == ExactReal(1));
}

TEST_CASE("lifting matches the oracle copies") {
  const Fixture fx;
  const auto fs = test_functions(fx);
  const StepFunction up = fs[3].lift(fx.depth, fx.s);
  const auto ls = oracle::leaves(fx.s, fx.table, fx.depth);
  const auto pieces = oracle::lifted(fs[3], ls, fx.s.xi);
  ExactReal a(0), b(0);
  for (const auto& p : up.pieces) a += (p.hi - p.lo) * (p.weight * p.weight);
  for (const auto& p : pieces) b += (p.hi - p.lo) * (p.weight * p.weight);
  CHECK(a == b);
  CHECK_THROWS(fs[3].lift(1, fx.s));
}

TEST_CASE("times beyond the window are rejected") {
  const Fixture fx;
  const auto fs = test_functions(fx);
  Correlator c(fx.s, fx.table, fs[0], fs[0], fx.chi(0), fx.depth);
  CHECK_THROWS_AS(c.at(fx.s.h(fx.depth)), TimeTooLarge);
  CHECK_THROWS_AS(c.at(-fx.s.h(fx.depth)), TimeTooLarge);
  CHECK_NOTHROW(c.at(fx.s.h(fx.depth - 1)));
}

TEST_CASE("weak-limit targets") {
  const Fixture fx(5);
  const Character chi = fx.chi(1);
  const auto n_target = weak_limit_target(fx.s.level(4), chi, 1, fx.s);
  REQUIRE(n_target.size() == 1);
  CHECK(n_target[0].coeff.real() == doctest::Approx(-0.5));
  CHECK(std::abs(n_target[0].coeff.imag()) < 1e-15);
  CHECK(n_target[0].time == ExactReal(0));
  const auto trivial = weak_limit_target(fx.s.level(4), fx.chi(0), 1, fx.s);
  CHECK(trivial[0].coeff.real() == doctest::Approx(1.0));
  const auto w = weak_limit_target(fx.s.level(3), chi, 2, fx.s);
  REQUIRE(w.size() == 2);
  CHECK(w[0].coeff.real() == doctest::Approx(0.5));
  CHECK(w[1].time == -(fx.s.xi_value(2) * Rational(2)));
  CHECK_THROWS(weak_limit_target(fx.s.level(1), chi, 1, fx.s));
}

TEST_CASE("CycloReal reduction") {
  CycloReal a(3), b(3);
  // 1 + omega + omega^2 = 0
  a.add(0, ExactReal(1));
  a.add(1, ExactReal(1));
  a.add(2, ExactReal(1));
  CHECK(a.equals(b));
  CycloReal c(3);
  c.add(1, ExactReal::parse("0 + 1*xi1"));
  CHECK(c.conj().coeff(2) == ExactReal::parse("0 + 1*xi1"));
  const XiBasis xi = default_xi(Variant::WN);
  CHECK(c.to_complex(xi).real() == doctest::Approx(-std::sqrt(2.0) / 2));
}
