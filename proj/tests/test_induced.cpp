#include <doctest.h>

#include <random>

#include "cfflow/induced.hpp"
#include "oracles.hpp"

using namespace cfflow;

namespace {

FiniteAction two_two_cycles() {
  FiniteAction a;
  a.group = FiniteAbelianGroup({2});
  a.weights.assign(4, ratio(1, 4));
  a.generators = {{1, 0, 3, 2}};
  return a;
}

}  // namespace

TEST_CASE("index one gives back V") {
  const FiniteAbelianGroup g({2, 3});
  const SubgroupRep v{Subgroup::full(g), {{1, 0}, {0, 2}, {1, 0}}};
  const FiniteUnitaryRep u = induce(g, v, default_cross_section(g, v.h));
  CHECK(u.dimension() == 3);
  CHECK(multiplicity_function(u) == oracle::induced_multiplicities(g, v));
  CHECK(multiplicity_function(u).at(g.index({1, 0})) == 2);
  const InductionReport r = check_induction(g, v, default_cross_section(g, v.h));
  CHECK(r.ok());
  CHECK(r.set_u == std::set<long>{1, 2});
}

TEST_CASE("Z/4 induced from 2Z/4") {
  const FiniteAbelianGroup g({4});
  const Subgroup h(g, {{2}});
  // chi_1 restricted to {0, 2} is the nontrivial character of H.
  const SubgroupRep v{h, {{1}}};
  const FiniteUnitaryRep u = induce(g, v, default_cross_section(g, h));
  u.validate();
  CHECK(u.dimension() == 2);
  const auto m = multiplicity_function(u);
  CHECK(m == oracle::induced_multiplicities(g, v));
  CHECK(m.at(1) == 1);
  CHECK(m.at(3) == 1);
  CHECK(m.at(0) == 0);
  CHECK(m.at(2) == 0);
}

TEST_CASE("Frobenius sanity for the trivial character") {
  const FiniteAbelianGroup g({2, 4});
  for (const auto& h : enumerate_subgroups(g)) {
    const SubgroupRep v{h, {g.zero()}};
    const auto m = multiplicity_function(induce(g, v, default_cross_section(g, h)));
    long total = 0;
    for (const auto& y : g.elements()) {
      const bool annihilates = oracle::agree_on(Character(g, y), Character::trivial(g), h.elements());
      CHECK(m.at(g.index(y)) == (annihilates ? 1 : 0));
      total += m.at(g.index(y));
    }
    CHECK(total * h.order() == g.order());
  }
}

TEST_CASE("multiplicity set {2} is preserved") {
  const FiniteAbelianGroup g({6});
  const Subgroup h(g, {{2}});
  const SubgroupRep v{h, {{1}, {1}, {2}, {2}}};  // two H-characters, each twice
  const InductionReport r = check_induction(g, v, default_cross_section(g, h));
  CHECK(r.ok());
  CHECK(r.set_v == std::set<long>{2});
  CHECK(r.set_u == std::set<long>{2});
  CHECK(r.dim_u == 8);
}

TEST_CASE("random instances against the Frobenius oracle") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 60; ++i) {
    const InductionInstance inst = random_induction_instance(rng, 24, 6, 8);
    const CrossSection s = random_cross_section(inst.g, inst.v.h, rng);
    const FiniteUnitaryRep u = induce(inst.g, inst.v, s);
    u.validate();
    const auto m = multiplicity_function(u);
    CHECK(m == oracle::induced_multiplicities(inst.g, inst.v));
    CHECK(u.dimension() == static_cast<long>(inst.v.characters.size()) * inst.g.order() / inst.v.h.order());
    CHECK(m == multiplicity_function(induce(inst.g, inst.v, default_cross_section(inst.g, inst.v.h))));
    CHECK(check_induction(inst.g, inst.v, s).ok());
  }
}

TEST_CASE("bad cross sections") {
  const FiniteAbelianGroup g({4});
  const Subgroup h(g, {{2}});
  CrossSection s = default_cross_section(g, h);
  s.rep[0] = {2};
  CHECK_THROWS_AS(validate_cross_section(g, h, s), BadCrossSection);
  s = default_cross_section(g, h);
  s.rep[1] = {0};
  CHECK_THROWS_AS(induce(g, {h, {{1}}}, s), BadCrossSection);
  s = default_cross_section(g, h);
  s.rep.pop_back();
  CHECK_THROWS_AS(validate_cross_section(g, h, s), BadCrossSection);
}

TEST_CASE("Koopman representations of finite actions") {
  const FiniteAbelianGroup g({2, 3});
  const auto reg = multiplicity_function(koopman_rep(translation_action(g), true));
  for (const auto& y : g.elements()) CHECK(reg.at(g.index(y)) == (y == g.zero() ? 0 : 1));

  FiniteAction fixed;
  fixed.group = FiniteAbelianGroup({3});
  fixed.weights.assign(5, ratio(1, 5));
  fixed.generators = {{0, 1, 2, 3, 4}};
  CHECK(multiplicity_function(koopman_rep(fixed, false)).at(0) == 5);
  CHECK(multiplicity_function(koopman_rep(fixed, true)).at(0) == 4);

  const auto pairs = multiplicity_function(koopman_rep(two_two_cycles(), true));
  CHECK(pairs.at(0) == 1);
  CHECK(pairs.at(1) == 2);
  CHECK(multiplicity_values(pairs) == std::set<long>{1, 2});

  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    const FiniteAction a = random_action(rng, 8, 3);
    CHECK(multiplicity_function(koopman_rep(a, true)) == oracle::koopman_multiplicities(a, true));
  }
}

TEST_CASE("product multiplicity examples") {
  const FiniteAction z3 = translation_action(FiniteAbelianGroup({3}));
  const ProductReport a = product_multiplicity_check(z3, translation_action(FiniteAbelianGroup({2})));
  CHECK(a.ok());
  CHECK(a.product == std::set<long>{1});

  const ProductReport b = product_multiplicity_check(z3, two_two_cycles());
  CHECK(b.ok());
  CHECK(b.product == std::set<long>{1, 2});
  CHECK(b.orbits2 == 2);
  CHECK_FALSE(b.t2_ergodic);

  try {
    product_multiplicity_check(two_two_cycles(), z3);
    FAIL("expected a hypothesis violation");
  } catch (const HypothesisViolation& e) {
    const std::string msg = e.what();
    CHECK(msg.find("simple spectrum") != std::string::npos);
    CHECK(msg.find("not ergodic") != std::string::npos);
  }

  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const FiniteAction t1 = random_simple_ergodic_action(rng, 8);
    const FiniteAction t2 = random_action(rng, 6, 2);
    const ProductReport r = product_multiplicity_check(t1, t2);
    CHECK(r.ok());
    const auto oracle = oracle::koopman_multiplicities(product_action(t1, t2), true);
    std::set<long> values;
    for (const auto& [k, m] : oracle)
      if (m > 0) values.insert(m);
    CHECK(r.product == values);
  }
}

TEST_CASE("induced action gains an extra multiplicity one") {
  const FiniteAbelianGroup g({4});
  const CrossSection cs = default_cross_section(g, Subgroup(g, {{2}}));
  const InducedActionReport r = check_induced_action(g, {{2}}, two_two_cycles(), cs);
  CHECK(r.index == 2);
  CHECK(r.extra_one);
  const FiniteAction t = induce_action(g, {{2}}, two_two_cycles(), cs);
  CHECK(t.points() == 8);
  CHECK(multiplicity_function(koopman_rep(t, true)) == oracle::koopman_multiplicities(t, true));
  CHECK_THROWS(induce_action(g, {{1}}, two_two_cycles(), cs));
}
