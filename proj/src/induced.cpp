#include "cfflow/induced.hpp"

#include <algorithm>
#include <numeric>

namespace cfflow {

namespace {

long mod(long a, long n) { return ((a % n) + n) % n; }

size_t pick(std::mt19937_64& rng, size_t n) { return static_cast<size_t>(rng() % n); }

std::vector<long> compose(const std::vector<long>& first, const std::vector<long>& second) {
  std::vector<long> out(first.size());
  for (size_t i = 0; i < first.size(); ++i) out[i] = second[static_cast<size_t>(first[i])];
  return out;
}

std::vector<long> identity_perm(size_t n) {
  std::vector<long> p(n);
  std::iota(p.begin(), p.end(), 0L);
  return p;
}

std::vector<long> perm_power(const std::vector<long>& p, long k) {
  std::vector<long> out = identity_perm(p.size());
  for (long i = 0; i < k; ++i) out = compose(out, p);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Monomial representations

Monomial Monomial::identity(size_t dim) { return {identity_perm(dim), std::vector<long>(dim, 0)}; }

Monomial Monomial::then(const Monomial& next, long roots) const {
  Monomial out;
  out.perm.resize(dim());
  out.phase.resize(dim());
  for (size_t i = 0; i < dim(); ++i) {
    const auto j = static_cast<size_t>(perm[i]);
    out.perm[i] = next.perm[j];
    out.phase[i] = mod(phase[i] + next.phase[j], roots);
  }
  return out;
}

Monomial Monomial::power(long k, long roots) const {
  Monomial out = identity(dim());
  for (long i = 0; i < k; ++i) out = out.then(*this, roots);
  return out;
}

Cyclotomic Monomial::trace(long roots) const {
  Cyclotomic t(roots);
  for (size_t i = 0; i < dim(); ++i)
    if (perm[i] == static_cast<long>(i)) t.add_root(phase[i], Rational(1));
  return t;
}

long FiniteUnitaryRep::dimension() const { return space - removed_trivial; }

Monomial FiniteUnitaryRep::at(const Element& g) const {
  Monomial m = Monomial::identity(static_cast<size_t>(space));
  for (size_t j = 0; j < generators.size(); ++j) m = m.then(generators[j].power(g[j], roots), roots);
  return m;
}

void FiniteUnitaryRep::validate() const {
  if (generators.size() != group.rank()) throw InvalidRepresentation("one generator matrix per cyclic factor expected");
  const Monomial id = Monomial::identity(static_cast<size_t>(space));
  for (size_t i = 0; i < generators.size(); ++i) {
    if (generators[i].dim() != static_cast<size_t>(space)) throw InvalidRepresentation("generator size mismatch");
    if (!(generators[i].power(group.orders()[i], roots) == id))
      throw InvalidRepresentation("generator " + std::to_string(i) + " does not satisfy its order");
    for (size_t j = i + 1; j < generators.size(); ++j)
      if (!(generators[i].then(generators[j], roots) == generators[j].then(generators[i], roots)))
        throw InvalidRepresentation("generators " + std::to_string(i) + " and " + std::to_string(j) + " do not commute");
  }
}

std::map<long, long> multiplicity_function(const FiniteUnitaryRep& rep) {
  const FiniteAbelianGroup& g = rep.group;
  const long n = rep.roots;
  if (n % g.exponent() != 0) throw InvalidRepresentation("phase roots must be a multiple of the group exponent");
  const long scale = n / g.exponent();
  const std::vector<Element> elems = g.elements();
  std::vector<Cyclotomic> traces;
  traces.reserve(elems.size());
  for (const auto& x : elems) traces.push_back(rep.at(x).trace(n));
  std::map<long, long> out;
  for (const auto& y : elems) {
    const Character chi(g, y);
    Cyclotomic acc(n);
    for (size_t i = 0; i < elems.size(); ++i) {
      const long shift = -chi.root_index(elems[i]) * scale;
      for (long k = 0; k < n; ++k)
        if (sgn(traces[i].coeff(k)) != 0) acc.add_root(mod(k + shift, n), traces[i].coeff(k));
    }
    acc *= ratio(1, g.order());
    const auto q = acc.as_rational();
    if (!q || q->get_den() != 1 || sgn(*q) < 0)
      throw InvalidRepresentation("character multiplicity is not a non-negative integer");
    long m = q->get_num().get_si();
    if (chi.is_trivial()) m -= rep.removed_trivial;
    if (m < 0) throw InvalidRepresentation("removed more constants than the trivial isotypic part holds");
    out[g.index(y)] = m;
  }
  return out;
}

std::set<long> multiplicity_values(const std::map<long, long>& m) {
  std::set<long> out;
  for (const auto& [k, v] : m)
    if (v > 0) out.insert(v);
  return out;
}

// ---------------------------------------------------------------------------
// Induction

std::vector<long> restriction_key(const Character& chi, const Subgroup& h) {
  std::vector<long> key;
  for (const auto& x : h.generators()) key.push_back(chi.root_index(x));
  return key;
}

std::map<std::vector<long>, long> subgroup_multiplicities(const SubgroupRep& v) {
  std::map<std::vector<long>, long> out;
  for (const auto& y : v.characters) ++out[restriction_key(Character(v.h.group(), y), v.h)];
  return out;
}

CrossSection default_cross_section(const FiniteAbelianGroup& g, const Subgroup& h) {
  CrossSection s;
  s.coset_of.assign(static_cast<size_t>(g.order()), -1);
  const std::vector<Element> hs = h.elements();
  for (long i = 0; i < g.order(); ++i) {
    if (s.coset_of[static_cast<size_t>(i)] >= 0) continue;
    const long c = static_cast<long>(s.rep.size());
    const Element x = g.element(i);
    s.rep.push_back(x);
    for (const auto& y : hs) s.coset_of[static_cast<size_t>(g.index(g.add(x, y)))] = c;
  }
  return s;
}

CrossSection random_cross_section(const FiniteAbelianGroup& g, const Subgroup& h, std::mt19937_64& rng) {
  CrossSection s = default_cross_section(g, h);
  const std::vector<Element> hs = h.elements();
  for (size_t c = 1; c < s.rep.size(); ++c) s.rep[c] = g.add(s.rep[c], hs[pick(rng, hs.size())]);
  return s;
}

void validate_cross_section(const FiniteAbelianGroup& g, const Subgroup& h, const CrossSection& s) {
  if (s.coset_of.size() != static_cast<size_t>(g.order())) throw BadCrossSection("coset table has the wrong size");
  if (static_cast<long>(s.rep.size()) * h.order() != g.order()) throw BadCrossSection("wrong number of cosets");
  if (s.coset_of[0] != 0 || s.rep[0] != g.zero()) throw BadCrossSection("s(H) must be 0");
  for (size_t c = 0; c < s.rep.size(); ++c)
    if (s.coset_of[static_cast<size_t>(g.index(s.rep[c]))] != static_cast<long>(c))
      throw BadCrossSection("representative of coset " + std::to_string(c) + " lies in another coset");
}

namespace {

/// h(g, y) = -s(g + y) + g + s(y) for y given by its coset id; returns (coset of g + y, h).
std::pair<long, Element> cocycle(const FiniteAbelianGroup& g, const CrossSection& s, const Element& x, long y) {
  const Element gy = g.add(x, s.rep[static_cast<size_t>(y)]);
  const long c = s.coset_of[static_cast<size_t>(g.index(gy))];
  return {c, g.sub(gy, s.rep[static_cast<size_t>(c)])};
}

}  // namespace

FiniteUnitaryRep induce(const FiniteAbelianGroup& g, const SubgroupRep& v, const CrossSection& s) {
  validate_cross_section(g, v.h, s);
  const long cosets = static_cast<long>(s.rep.size());
  const long k = static_cast<long>(v.characters.size());
  FiniteUnitaryRep u;
  u.group = g;
  u.roots = g.exponent();
  u.space = cosets * k;
  for (size_t j = 0; j < g.rank(); ++j) {
    const Element gen = g.generator(j);
    Monomial m;
    m.perm.resize(static_cast<size_t>(u.space));
    m.phase.resize(static_cast<size_t>(u.space));
    for (long c = 0; c < cosets; ++c) {
      // U_gen e_(c, i) = psi_i(h(gen, c)) e_(c + gen, i).
      const auto [target, hh] = cocycle(g, s, gen, c);
      if (!v.h.contains(hh)) throw BadCrossSection("cocycle value outside H");
      for (long i = 0; i < k; ++i) {
        const auto idx = static_cast<size_t>(c * k + i);
        m.perm[idx] = target * k + i;
        m.phase[idx] = Character(g, v.characters[static_cast<size_t>(i)]).root_index(hh);
      }
    }
    u.generators.push_back(std::move(m));
  }
  return u;
}

InductionReport check_induction(const FiniteAbelianGroup& g, const SubgroupRep& v, const CrossSection& s) {
  InductionReport r;
  const FiniteUnitaryRep u = induce(g, v, s);
  u.validate();
  const auto mu = multiplicity_function(u);
  const auto mv = subgroup_multiplicities(v);
  r.set_u = multiplicity_values(mu);
  for (const auto& [key, m] : mv) r.set_v.insert(m);
  r.sets_equal = r.set_u == r.set_v;
  std::set<std::vector<long>> restricted;
  for (const auto& [idx, m] : mu)
    if (m > 0) restricted.insert(restriction_key(Character(g, g.element(idx)), v.h));
  std::set<std::vector<long>> supp_v;
  for (const auto& [key, m] : mv) supp_v.insert(key);
  r.support_equal = restricted == supp_v;
  r.dim_v = static_cast<long>(v.characters.size());
  r.dim_u = u.dimension();
  return r;
}

// ---------------------------------------------------------------------------
// Finite actions

void FiniteAction::validate() const {
  if (generators.size() != group.rank()) throw InvalidRepresentation("one permutation per cyclic factor expected");
  Rational total(0);
  for (const auto& w : weights) {
    if (sgn(w) <= 0) throw InvalidRepresentation("point weights must be positive");
    total += w;
  }
  if (total != 1) throw InvalidRepresentation("point weights must sum to 1");
  const std::vector<long> id = identity_perm(points());
  for (size_t j = 0; j < generators.size(); ++j) {
    const auto& p = generators[j];
    if (p.size() != points()) throw InvalidRepresentation("permutation size mismatch");
    std::vector<bool> seen(points(), false);
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] < 0 || static_cast<size_t>(p[i]) >= points() || seen[static_cast<size_t>(p[i])])
        throw InvalidRepresentation("generator " + std::to_string(j) + " is not a permutation");
      seen[static_cast<size_t>(p[i])] = true;
      if (weights[static_cast<size_t>(p[i])] != weights[i])
        throw InvalidRepresentation("generator " + std::to_string(j) + " does not preserve the weights");
    }
    if (perm_power(p, group.orders()[j]) != id)
      throw InvalidRepresentation("generator " + std::to_string(j) + " does not satisfy its order");
    for (size_t k = j + 1; k < generators.size(); ++k)
      if (compose(p, generators[k]) != compose(generators[k], p))
        throw InvalidRepresentation("generators " + std::to_string(j) + " and " + std::to_string(k) + " do not commute");
  }
}

long FiniteAction::orbits() const {
  std::vector<long> parent = identity_perm(points());
  auto find = [&](long x) {
    while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
    return x;
  };
  for (const auto& p : generators)
    for (size_t i = 0; i < p.size(); ++i) parent[static_cast<size_t>(find(static_cast<long>(i)))] = find(p[i]);
  long count = 0;
  for (size_t i = 0; i < points(); ++i)
    if (find(static_cast<long>(i)) == static_cast<long>(i)) ++count;
  return count;
}

FiniteAction translation_action(const FiniteAbelianGroup& g) { return quotient_action(g, Subgroup::trivial(g)); }

FiniteAction quotient_action(const FiniteAbelianGroup& g, const Subgroup& k) {
  const CrossSection s = default_cross_section(g, k);
  FiniteAction a;
  a.group = g;
  const long n = static_cast<long>(s.rep.size());
  a.weights.assign(static_cast<size_t>(n), ratio(1, n));
  for (auto& w : a.weights) w.canonicalize();
  for (size_t j = 0; j < g.rank(); ++j) {
    std::vector<long> p(static_cast<size_t>(n));
    for (long c = 0; c < n; ++c)
      p[static_cast<size_t>(c)] = s.coset_of[static_cast<size_t>(g.index(g.add(s.rep[static_cast<size_t>(c)], g.generator(j))))];
    a.generators.push_back(std::move(p));
  }
  return a;
}

FiniteAction disjoint_union(const std::vector<FiniteAction>& parts, const std::vector<Rational>& probabilities) {
  if (parts.empty() || parts.size() != probabilities.size()) throw std::invalid_argument("one probability per part");
  FiniteAction a;
  a.group = parts.front().group;
  a.generators.assign(a.group.rank(), {});
  for (size_t p = 0; p < parts.size(); ++p) {
    if (!(parts[p].group == a.group)) throw std::invalid_argument("parts act by different groups");
    const long offset = static_cast<long>(a.weights.size());
    for (const auto& w : parts[p].weights) a.weights.push_back(w * probabilities[p]);
    for (size_t j = 0; j < a.group.rank(); ++j)
      for (long x : parts[p].generators[j]) a.generators[j].push_back(x + offset);
  }
  return a;
}

FiniteAction product_action(const FiniteAction& a, const FiniteAction& b) {
  std::vector<long> orders = a.group.orders();
  orders.insert(orders.end(), b.group.orders().begin(), b.group.orders().end());
  FiniteAction p;
  p.group = FiniteAbelianGroup(orders);
  const long nb = static_cast<long>(b.points());
  for (const auto& wa : a.weights)
    for (const auto& wb : b.weights) p.weights.push_back(wa * wb);
  const auto n = static_cast<long>(p.weights.size());
  for (const auto& g : a.generators) {
    std::vector<long> q(static_cast<size_t>(n));
    for (long x = 0; x < n; ++x) q[static_cast<size_t>(x)] = g[static_cast<size_t>(x / nb)] * nb + x % nb;
    p.generators.push_back(std::move(q));
  }
  for (const auto& g : b.generators) {
    std::vector<long> q(static_cast<size_t>(n));
    for (long x = 0; x < n; ++x) q[static_cast<size_t>(x)] = (x / nb) * nb + g[static_cast<size_t>(x % nb)];
    p.generators.push_back(std::move(q));
  }
  return p;
}

FiniteAction induce_action(const FiniteAbelianGroup& g, const std::vector<Element>& embedding, const FiniteAction& s,
                           const CrossSection& cs) {
  s.validate();
  const FiniteAbelianGroup& a = s.group;
  if (embedding.size() != a.rank()) throw std::invalid_argument("one image per generator of the acting group");
  // Table: element of H (index in G) -> permutation S_a.
  std::map<long, std::vector<long>> act;
  for (const auto& x : a.elements()) {
    Element img = g.zero();
    std::vector<long> p = identity_perm(s.points());
    for (size_t j = 0; j < a.rank(); ++j) {
      img = g.add(img, g.times(embedding[j], x[j]));
      p = compose(p, perm_power(s.generators[j], x[j]));
    }
    if (!act.emplace(g.index(img), std::move(p)).second) throw NotHomomorphism("the embedding is not injective");
  }
  const Subgroup h(g, embedding);
  if (h.order() != a.order()) throw NotHomomorphism("the embedding is not a homomorphism onto its image");
  validate_cross_section(g, h, cs);
  const long cosets = static_cast<long>(cs.rep.size());
  const auto ny = static_cast<long>(s.points());
  FiniteAction t;
  t.group = g;
  for (long c = 0; c < cosets; ++c)
    for (const auto& w : s.weights) t.weights.push_back(w * ratio(1, cosets));
  for (auto& w : t.weights) w.canonicalize();
  for (size_t j = 0; j < g.rank(); ++j) {
    std::vector<long> p(static_cast<size_t>(cosets * ny));
    for (long c = 0; c < cosets; ++c) {
      // T_g(c, y) = (c + g, S_{h(g, c)} y)
      const auto [target, hval] = cocycle(g, cs, g.generator(j), c);
      const auto it = act.find(g.index(hval));
      if (it == act.end()) throw BadCrossSection("cocycle value outside H");
      for (long y = 0; y < ny; ++y) p[static_cast<size_t>(c * ny + y)] = target * ny + it->second[static_cast<size_t>(y)];
    }
    t.generators.push_back(std::move(p));
  }
  return t;
}

FiniteUnitaryRep koopman_rep(const FiniteAction& a, bool mean_zero) {
  a.validate();
  FiniteUnitaryRep u;
  u.group = a.group;
  u.roots = a.group.exponent();
  u.space = static_cast<long>(a.points());
  for (const auto& p : a.generators) u.generators.push_back({p, std::vector<long>(p.size(), 0)});
  u.removed_trivial = mean_zero ? 1 : 0;
  return u;
}

ProductReport product_multiplicity_check(const FiniteAction& t1, const FiniteAction& t2) {
  t1.validate();
  t2.validate();
  if (t1.points() < 2) throw HypothesisViolation("T1 is trivial: its mean-zero space is empty");
  const auto m1 = multiplicity_function(koopman_rep(t1, true));
  std::vector<std::string> failed;
  if (std::any_of(m1.begin(), m1.end(), [](const auto& kv) { return kv.second > 1; }))
    failed.push_back("T1 does not have simple spectrum");
  if (t1.orbits() != 1) failed.push_back("T1 is not ergodic");
  if (!failed.empty()) {
    std::string msg = failed[0];
    for (size_t i = 1; i < failed.size(); ++i) msg += "; " + failed[i];
    throw HypothesisViolation(msg);
  }
  ProductReport r;
  r.m1 = multiplicity_values(m1);
  r.m2 = multiplicity_values(multiplicity_function(koopman_rep(t2, true)));
  r.product = multiplicity_values(multiplicity_function(koopman_rep(product_action(t1, t2), true)));
  r.orbits2 = t2.orbits();
  r.t2_ergodic = r.orbits2 == 1;
  std::set<long> with_one = r.m2;
  with_one.insert(1);
  std::set<long> general = r.m2;
  general.insert(r.orbits2);
  r.union_with_one = r.product == with_one;
  r.union_with_orbits = r.product == general;
  return r;
}

InducedActionReport check_induced_action(const FiniteAbelianGroup& g, const std::vector<Element>& embedding,
                                         const FiniteAction& s, const CrossSection& cs) {
  InducedActionReport r;
  const FiniteAction t = induce_action(g, embedding, s, cs);
  r.m_s = multiplicity_values(multiplicity_function(koopman_rep(s, true)));
  r.m_t = multiplicity_values(multiplicity_function(koopman_rep(t, true)));
  r.index = static_cast<long>(cs.rep.size());
  r.s_ergodic = s.orbits() == 1;
  std::set<long> expect = r.m_s;
  if (r.index > 1) expect.insert(1);
  r.extra_one = r.m_t == expect;
  return r;
}

// ---------------------------------------------------------------------------
// Random instances

namespace {

FiniteAbelianGroup random_group(std::mt19937_64& rng, long min_order, long max_order) {
  const long order = min_order + static_cast<long>(pick(rng, static_cast<size_t>(max_order - min_order + 1)));
  const auto forms = invariant_factor_forms(order);
  return FiniteAbelianGroup(forms[pick(rng, forms.size())]);
}

}  // namespace

InductionInstance random_induction_instance(std::mt19937_64& rng, long max_order, long max_index, long max_dim) {
  const FiniteAbelianGroup g = random_group(rng, 2, max_order);
  std::vector<Subgroup> subs;
  for (auto& h : enumerate_subgroups(g))
    if (g.order() / h.order() <= max_index) subs.push_back(std::move(h));
  InductionInstance inst{g, {subs[pick(rng, subs.size())], {}}};
  const long dim = 1 + static_cast<long>(pick(rng, static_cast<size_t>(max_dim)));
  const std::vector<Element> chars = g.elements();
  for (long i = 0; i < dim; ++i) inst.v.characters.push_back(chars[pick(rng, chars.size())]);
  return inst;
}

FiniteAction random_simple_ergodic_action(std::mt19937_64& rng, long max_order) {
  const FiniteAbelianGroup g = random_group(rng, 2, max_order);
  std::vector<Subgroup> subs;
  for (auto& h : enumerate_subgroups(g))
    if (h.order() < g.order()) subs.push_back(std::move(h));
  return quotient_action(g, subs[pick(rng, subs.size())]);
}

FiniteAction random_action(std::mt19937_64& rng, long max_order, long max_orbits) {
  const FiniteAbelianGroup g = random_group(rng, 2, max_order);
  const std::vector<Subgroup> subs = enumerate_subgroups(g);
  const long orbits = 1 + static_cast<long>(pick(rng, static_cast<size_t>(max_orbits)));
  std::vector<FiniteAction> parts;
  std::vector<long> raw;
  long total = 0;
  for (long i = 0; i < orbits; ++i) {
    parts.push_back(quotient_action(g, subs[pick(rng, subs.size())]));
    raw.push_back(1 + static_cast<long>(pick(rng, 4)));
    total += raw.back();
  }
  std::vector<Rational> probs;
  for (long w : raw) probs.push_back(ratio(w, total));
  return disjoint_union(parts, probs);
}

}  // namespace cfflow
