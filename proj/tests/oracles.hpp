#pragma once

// Brute-force reference computations used by the unit and acceptance tests.
// They share data types with the library but none of its algorithms.

#include <algorithm>
#include <complex>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "cfflow/induced.hpp"
#include "cfflow/koopman.hpp"

namespace oracle {

using cfflow::Element;
using cfflow::ExactReal;
using cfflow::Rational;

// ---------------------------------------------------------------------------
// Groups

inline Element add(const std::vector<long>& d, const Element& a, const Element& b) {
  Element c(d.size());
  for (size_t i = 0; i < d.size(); ++i) c[i] = ((a[i] + b[i]) % d[i] + d[i]) % d[i];
  return c;
}

inline Element apply(const std::vector<long>& d, const std::vector<Element>& images, const Element& x) {
  Element y(d.size(), 0);
  for (size_t j = 0; j < d.size(); ++j)
    for (long r = 0; r < x[j]; ++r) y = add(d, y, images[j]);
  return y;
}

inline std::set<Element> closure(const std::vector<long>& d, const std::vector<Element>& gens) {
  std::set<Element> seen{Element(d.size(), 0)};
  std::deque<Element> todo{Element(d.size(), 0)};
  while (!todo.empty()) {
    const Element x = todo.front();
    todo.pop_front();
    for (const auto& g : gens) {
      Element y = add(d, x, g);
      if (seen.insert(y).second) todo.push_back(y);
    }
  }
  return seen;
}

/// Cycles of v on all of G; for every cycle meeting H \ {0}, the number of its points in H.
inline std::set<long> multiplicity_set_by_cycles(const std::vector<long>& d, const std::vector<Element>& h_gens,
                                                 const std::vector<Element>& images) {
  const std::set<Element> h = closure(d, h_gens);
  const std::set<Element> all = closure(d, [&] {
    std::vector<Element> unit;
    for (size_t j = 0; j < d.size(); ++j) {
      Element e(d.size(), 0);
      e[j] = 1;
      unit.push_back(e);
    }
    return unit;
  }());
  std::set<Element> done;
  std::set<long> out;
  for (const auto& x : all) {
    if (done.count(x)) continue;
    std::vector<Element> cycle;
    Element y = x;
    do {
      cycle.push_back(y);
      done.insert(y);
      y = apply(d, images, y);
    } while (y != x);
    long inside = 0;
    bool nonzero_h = false;
    for (const auto& z : cycle) {
      if (h.count(z)) {
        ++inside;
        if (std::any_of(z.begin(), z.end(), [](long c) { return c != 0; })) nonzero_h = true;
      }
    }
    if (nonzero_h) out.insert(inside);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Towers

/// A maximal interval of F_D on which every digit is fixed.
struct Leaf {
  ExactReal lo, hi;
  Element a;                                  // partial cocycle sum with absent digits read as cut 0
  int spacer_level = 0;                       // 0 for unit leaves, n for spacers of level n
  std::vector<std::optional<ExactReal>> off;  // off[L]: start of the F_L copy containing the leaf
};

inline std::vector<Leaf> leaves(const cfflow::TowerSchedule& s, const cfflow::CocycleTable& t, int depth) {
  const auto& k = t.k;
  std::vector<Leaf> out;
  std::vector<std::optional<ExactReal>> off(static_cast<size_t>(depth) + 1);
  auto visit = [&](auto&& self, int n, const ExactReal& start, const Element& above) -> void {
    off[static_cast<size_t>(n)] = start;
    if (n == 0) {
      out.push_back({start, start + ExactReal(1), above, 0, off});
      return;
    }
    const auto& lv = s.level(n);
    const ExactReal& hp = s.h(n - 1);
    Element pad = above;
    for (int m = 1; m <= n; ++m) pad = k.add(pad, t.at(m, 0));
    ExactReal cursor = start;
    for (size_t j = 0; j < lv.cuts.size(); ++j) {
      const ExactReal c = start + lv.cuts[j];
      if (s.xi.less(cursor, c)) {
        auto o = off;
        for (int m = 0; m < n; ++m) o[static_cast<size_t>(m)].reset();
        out.push_back({cursor, c, pad, n, o});
      }
      self(self, n - 1, c, k.add(above, t.at(n, static_cast<long>(j))));
      off[static_cast<size_t>(n)] = start;
      cursor = c + hp;
    }
    const ExactReal end = start + lv.h;
    if (s.xi.less(cursor, end)) {
      auto o = off;
      for (int m = 0; m < n; ++m) o[static_cast<size_t>(m)].reset();
      out.push_back({cursor, end, pad, n, o});
    }
  };
  visit(visit, depth, ExactReal(0), k.zero());
  return out;
}

struct Piece {
  ExactReal lo, hi;
  double lo_d = 0, hi_d = 0;
  Rational weight;
  long root = 0;
  Element a;
};

/// The function f (given on F_level) lifted to F_D: copies under every digit path, zero on higher spacers.
inline std::vector<Piece> lifted(const cfflow::StepFunction& f, const std::vector<Leaf>& ls, const cfflow::XiBasis& xi) {
  std::vector<Piece> out;
  for (const auto& leaf : ls) {
    const auto& o = leaf.off[static_cast<size_t>(f.level)];
    if (!o) continue;
    for (const auto& p : f.pieces) {
      const ExactReal lo = xi.max(leaf.lo, *o + p.lo);
      const ExactReal hi = xi.min(leaf.hi, *o + p.hi);
      if (!xi.less(lo, hi)) continue;
      out.push_back({lo, hi, xi.to_double(lo), xi.to_double(hi), p.weight, p.root, leaf.a});
    }
  }
  std::sort(out.begin(), out.end(), [](const Piece& x, const Piece& y) { return x.lo_d < y.lo_d; });
  return out;
}

/// J_D(t) = int_{u, u+t in F_D} chi(A(u) - A(u+t)) f(u) conj g(u+t) du, summed pair by pair (t >= 0).
inline cfflow::CycloReal window(const cfflow::StepFunction& f, const cfflow::StepFunction& g,
                                const cfflow::Character& chi, const ExactReal& t, int depth,
                                const cfflow::TowerSchedule& s, const cfflow::CocycleTable& table) {
  const long n = table.k.exponent();
  const auto ls = leaves(s, table, depth);
  const auto pf = lifted(f, ls, s.xi);
  const auto pg = lifted(g, ls, s.xi);
  const double td = s.xi.to_double(t);
  const long sf = n / f.roots, sg = n / g.roots;
  cfflow::CycloReal j(n);
  for (const auto& p : pf) {
    for (const auto& q : pg) {
      if (q.lo_d - td > p.hi_d + 1e-6) break;
      if (q.hi_d - td < p.lo_d - 1e-6) continue;
      const ExactReal lo = s.xi.max(p.lo, q.lo - t);
      const ExactReal hi = s.xi.min(p.hi, q.hi - t);
      if (!s.xi.less(lo, hi)) continue;
      const long e = p.root * sf - q.root * sg + chi.root_index(table.k.sub(p.a, q.a));
      j.add(((e % n) + n) % n, (hi - lo) * (p.weight * q.weight));
    }
  }
  return j;
}

/// <U(t) F, G> on X x K for F = f (x) chi, G = g (x) eta with the literal skew action, unnormalized in X.
inline std::complex<double> skew_window(const cfflow::StepFunction& f, const cfflow::StepFunction& g,
                                        const cfflow::Character& chi, const cfflow::Character& eta,
                                        const ExactReal& t, int depth, const cfflow::TowerSchedule& s,
                                        const cfflow::CocycleTable& table) {
  const auto& k = table.k;
  const auto ls = leaves(s, table, depth);
  const auto pf = lifted(f, ls, s.xi);
  const auto pg = lifted(g, ls, s.xi);
  const double td = s.xi.to_double(t);
  const auto ks = k.elements();
  auto w = [&](const Piece& p, long roots) { return p.weight.get_d() * cfflow::root_of_unity(p.root, roots); };
  std::complex<double> total = 0;
  // U(t)F(x, y) = F(T_{-t} x, y + alpha(T_{-t} x, x)); with x = u + t: F(u, y + A(u) - A(u + t)).
  for (const auto& p : pf) {
    for (const auto& q : pg) {
      if (q.lo_d - td > p.hi_d + 1e-6) break;
      if (q.hi_d - td < p.lo_d - 1e-6) continue;
      const ExactReal lo = s.xi.max(p.lo, q.lo - t);
      const ExactReal hi = s.xi.min(p.hi, q.hi - t);
      if (!s.xi.less(lo, hi)) continue;
      const Element shift = k.sub(p.a, q.a);
      std::complex<double> fiber = 0;
      for (const auto& y : ks) fiber += chi.value(k.add(y, shift)) * std::conj(eta.value(y));
      fiber /= static_cast<double>(ks.size());
      total += s.xi.to_double(hi - lo) * w(p, f.roots) * std::conj(w(q, g.roots)) * fiber;
    }
  }
  return total;
}

/// Symmetric difference count #(C xor (C - z)) by structural set membership.
inline long symdiff_count(const std::vector<ExactReal>& c, const ExactReal& z) {
  std::set<ExactReal, cfflow::StructuralLess> a(c.begin(), c.end()), b;
  for (const auto& x : c) b.insert(x - z);
  long common = 0;
  for (const auto& x : a) common += b.count(x) ? 1 : 0;
  return static_cast<long>(a.size() + b.size()) - 2 * common;
}

// ---------------------------------------------------------------------------
// Finite representations

inline bool agree_on(const cfflow::Character& a, const cfflow::Character& b, const std::vector<Element>& xs) {
  for (const auto& x : xs)
    if (std::abs(a.value(x) - b.value(x)) > 1e-9) return false;
  return true;
}

// Frobenius reciprocity for abelian groups: chi occurs in Ind psi once iff chi restricts to psi.
inline std::map<long, long> induced_multiplicities(const cfflow::FiniteAbelianGroup& g, const cfflow::SubgroupRep& v) {
  const auto hs = v.h.elements();
  std::map<long, long> out;
  for (const auto& y : g.elements()) {
    long m = 0;
    for (const auto& psi : v.characters) m += agree_on(cfflow::Character(g, y), cfflow::Character(g, psi), hs) ? 1 : 0;
    out[g.index(y)] = m;
  }
  return out;
}

inline long apply_element(const cfflow::FiniteAction& a, const Element& x, long p) {
  for (size_t j = 0; j < x.size(); ++j)
    for (long r = 0; r < x[j]; ++r) p = a.generators[j][static_cast<size_t>(p)];
  return p;
}

// Each orbit is G/Stab; chi occurs once per orbit whose stabilizer lies in ker chi.
inline std::map<long, long> koopman_multiplicities(const cfflow::FiniteAction& a, bool mean_zero) {
  const auto elems = a.group.elements();
  std::vector<bool> seen(a.points(), false);
  std::vector<std::vector<Element>> stabilizers;
  for (long p = 0; p < static_cast<long>(a.points()); ++p) {
    if (seen[static_cast<size_t>(p)]) continue;
    std::vector<Element> stab;
    for (const auto& x : elems) {
      const long q = apply_element(a, x, p);
      seen[static_cast<size_t>(q)] = true;
      if (q == p) stab.push_back(x);
    }
    stabilizers.push_back(stab);
  }
  std::map<long, long> out;
  for (const auto& y : elems) {
    const cfflow::Character chi(a.group, y);
    long m = 0;
    for (const auto& stab : stabilizers) m += agree_on(chi, cfflow::Character::trivial(a.group), stab) ? 1 : 0;
    if (mean_zero && chi.is_trivial()) --m;
    out[a.group.index(y)] = m;
  }
  return out;
}

}  // namespace oracle
