#include "cfflow/abelian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cfflow {

namespace {

long mod(long a, long n) {
  long r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

std::complex<double> root_of_unity(long k, long n) {
  const long r = mod(k, n);
  // Exact values on the axes keep trivial characters free of rounding.
  if (r == 0) return {1.0, 0.0};
  if (2 * r == n) return {-1.0, 0.0};
  if (4 * r == n) return {0.0, 1.0};
  if (4 * r == 3 * n) return {0.0, -1.0};
  const double angle = 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<long> cyclic_orders) : d_(std::move(cyclic_orders)) {
  if (d_.empty()) throw std::invalid_argument("group needs at least one cyclic factor");
  for (long d : d_) {
    if (d < 2) throw std::invalid_argument("cyclic orders must be >= 2");
    order_ *= d;
    exponent_ = std::lcm(exponent_, d);
  }
}

Element FiniteAbelianGroup::generator(size_t j) const {
  Element e = zero();
  e.at(j) = 1;
  return e;
}

bool FiniteAbelianGroup::is_element(const Element& x) const {
  if (x.size() != d_.size()) return false;
  for (size_t j = 0; j < d_.size(); ++j)
    if (x[j] < 0 || x[j] >= d_[j]) return false;
  return true;
}

Element FiniteAbelianGroup::add(const Element& a, const Element& b) const {
  Element r(d_.size());
  for (size_t j = 0; j < d_.size(); ++j) r[j] = mod(a[j] + b[j], d_[j]);
  return r;
}

Element FiniteAbelianGroup::sub(const Element& a, const Element& b) const {
  Element r(d_.size());
  for (size_t j = 0; j < d_.size(); ++j) r[j] = mod(a[j] - b[j], d_[j]);
  return r;
}

Element FiniteAbelianGroup::neg(const Element& a) const { return sub(zero(), a); }

Element FiniteAbelianGroup::times(const Element& a, long k) const {
  Element r(d_.size());
  for (size_t j = 0; j < d_.size(); ++j) r[j] = mod(a[j] * mod(k, d_[j]), d_[j]);
  return r;
}

long FiniteAbelianGroup::element_order(const Element& a) const {
  long ord = 1;
  for (size_t j = 0; j < d_.size(); ++j) ord = std::lcm(ord, d_[j] / std::gcd(a[j], d_[j]));
  return ord;
}

long FiniteAbelianGroup::index(const Element& x) const {
  long idx = 0;
  for (size_t j = 0; j < d_.size(); ++j) idx = idx * d_[j] + x[j];
  return idx;
}

Element FiniteAbelianGroup::element(long idx) const {
  Element x(d_.size());
  for (size_t j = d_.size(); j-- > 0;) {
    x[j] = idx % d_[j];
    idx /= d_[j];
  }
  return x;
}

std::vector<Element> FiniteAbelianGroup::elements() const {
  std::vector<Element> out;
  out.reserve(static_cast<size_t>(order_));
  for (long i = 0; i < order_; ++i) out.push_back(element(i));
  return out;
}

std::string FiniteAbelianGroup::element_to_string(const Element& x) const {
  std::ostringstream s;
  s << '(';
  for (size_t j = 0; j < x.size(); ++j) s << (j ? "," : "") << x[j];
  s << ')';
  return s.str();
}

std::string FiniteAbelianGroup::to_string() const {
  std::ostringstream s;
  for (size_t j = 0; j < d_.size(); ++j) s << (j ? " x " : "") << "Z/" << d_[j];
  return s.str();
}

GroupAutomorphism GroupAutomorphism::identity(const FiniteAbelianGroup& g) {
  std::vector<Element> images;
  for (size_t j = 0; j < g.rank(); ++j) images.push_back(g.generator(j));
  std::vector<long> perm(static_cast<size_t>(g.order()));
  std::iota(perm.begin(), perm.end(), 0L);
  return {g, std::move(images), std::move(perm)};
}

GroupAutomorphism GroupAutomorphism::from_images(const FiniteAbelianGroup& g, std::vector<Element> images) {
  if (images.size() != g.rank())
    throw std::invalid_argument("expected " + std::to_string(g.rank()) + " generator images");
  for (size_t j = 0; j < images.size(); ++j) {
    if (!g.is_element(images[j]))
      throw std::invalid_argument("generator image " + std::to_string(j) + " is not a group element");
    if (g.orders()[j] % g.element_order(images[j]) != 0)
      throw NotHomomorphism("image of generator " + std::to_string(j) + " has order " +
                            std::to_string(g.element_order(images[j])) + " not dividing " +
                            std::to_string(g.orders()[j]));
  }
  std::vector<long> perm(static_cast<size_t>(g.order()));
  std::vector<bool> hit(perm.size(), false);
  for (long i = 0; i < g.order(); ++i) {
    const Element x = g.element(i);
    Element y = g.zero();
    for (size_t j = 0; j < x.size(); ++j) y = g.add(y, g.times(images[j], x[j]));
    const long k = g.index(y);
    if (hit[static_cast<size_t>(k)])
      throw NotBijective("two elements map to " + g.element_to_string(y));
    hit[static_cast<size_t>(k)] = true;
    perm[static_cast<size_t>(i)] = k;
  }
  return {g, std::move(images), std::move(perm)};
}

GroupAutomorphism validate_automorphism(const FiniteAbelianGroup& g, std::vector<Element> images) {
  return GroupAutomorphism::from_images(g, std::move(images));
}

Element GroupAutomorphism::apply(const Element& x) const {
  return g_.element(perm_[static_cast<size_t>(g_.index(x))]);
}

GroupAutomorphism GroupAutomorphism::compose(const GroupAutomorphism& inner) const {
  if (!(g_ == inner.g_)) throw std::invalid_argument("composing automorphisms of different groups");
  std::vector<Element> images;
  for (const auto& e : inner.images_) images.push_back(apply(e));
  std::vector<long> perm(perm_.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = perm_[static_cast<size_t>(inner.perm_[i])];
  return {g_, std::move(images), std::move(perm)};
}

GroupAutomorphism GroupAutomorphism::inverse() const {
  std::vector<long> perm(perm_.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[static_cast<size_t>(perm_[i])] = static_cast<long>(i);
  std::vector<Element> images;
  for (size_t j = 0; j < g_.rank(); ++j)
    images.push_back(g_.element(perm[static_cast<size_t>(g_.index(g_.generator(j)))]));
  return {g_, std::move(images), std::move(perm)};
}

GroupAutomorphism GroupAutomorphism::power(long k) const {
  GroupAutomorphism base = k < 0 ? inverse() : *this;
  GroupAutomorphism out = identity(g_);
  for (long e = k < 0 ? -k : k; e > 0; --e) out = base.compose(out);
  return out;
}

long GroupAutomorphism::period(const Element& x) const {
  const long start = g_.index(x);
  long cur = perm_[static_cast<size_t>(start)];
  long p = 1;
  while (cur != start) {
    cur = perm_[static_cast<size_t>(cur)];
    ++p;
  }
  return p;
}

std::string GroupAutomorphism::to_string() const {
  std::ostringstream s;
  s << '[';
  for (size_t j = 0; j < images_.size(); ++j) s << (j ? " " : "") << g_.element_to_string(images_[j]);
  s << ']';
  return s.str();
}

std::vector<GroupAutomorphism> enumerate_automorphisms(const FiniteAbelianGroup& g, size_t cap) {
  // Backtracking over generator images. The first j images must generate a
  // subgroup of order d_1...d_j with image j of order exactly d_j.
  std::vector<GroupAutomorphism> out;
  const size_t k = g.rank();
  std::vector<Element> images;
  std::vector<std::vector<long>> spans{{0}};  // element indices of <images[0..j)>
  std::vector<Element> all = g.elements();

  auto recurse = [&](auto&& self, size_t j) -> void {
    if (out.size() >= cap) return;
    if (j == k) {
      out.push_back(GroupAutomorphism::from_images(g, images));
      return;
    }
    const long dj = g.orders()[j];
    const std::vector<long> span = spans.back();
    for (long cand = 0; cand < g.order() && out.size() < cap; ++cand) {
      const Element& y = all[static_cast<size_t>(cand)];
      if (g.element_order(y) != dj) continue;
      std::vector<bool> seen(all.size(), false);
      std::vector<long> next;
      for (long m = 0; m < dj; ++m) {
        const Element step = g.times(y, m);
        for (long s : span) {
          const long idx = g.index(g.add(all[static_cast<size_t>(s)], step));
          if (!seen[static_cast<size_t>(idx)]) {
            seen[static_cast<size_t>(idx)] = true;
            next.push_back(idx);
          }
        }
      }
      if (static_cast<long>(next.size()) != static_cast<long>(span.size()) * dj) continue;
      images.push_back(y);
      spans.push_back(std::move(next));
      self(self, j + 1);
      spans.pop_back();
      images.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

Subgroup::Subgroup(const FiniteAbelianGroup& g, std::vector<Element> generators)
    : g_(g), gens_(std::move(generators)), mask_(static_cast<size_t>(g.order()), false) {
  for (const auto& x : gens_)
    if (!g.is_element(x)) throw std::invalid_argument("subgroup generator is not a group element");
  std::vector<long> frontier{0};
  mask_[0] = true;
  members_.push_back(0);
  while (!frontier.empty()) {
    std::vector<long> next;
    for (long idx : frontier) {
      const Element x = g.element(idx);
      for (const auto& s : gens_) {
        const long y = g.index(g.add(x, s));
        if (!mask_[static_cast<size_t>(y)]) {
          mask_[static_cast<size_t>(y)] = true;
          members_.push_back(y);
          next.push_back(y);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(members_.begin(), members_.end());
}

Subgroup Subgroup::full(const FiniteAbelianGroup& g) {
  std::vector<Element> gens;
  for (size_t j = 0; j < g.rank(); ++j) gens.push_back(g.generator(j));
  return {g, std::move(gens)};
}

Subgroup Subgroup::trivial(const FiniteAbelianGroup& g) { return {g, {}}; }

std::vector<Element> Subgroup::elements() const {
  std::vector<Element> out;
  for (long idx : members_) out.push_back(g_.element(idx));
  return out;
}

bool Subgroup::contains(const Element& x) const { return g_.is_element(x) && mask_[static_cast<size_t>(g_.index(x))]; }

std::vector<Subgroup> enumerate_subgroups(const FiniteAbelianGroup& g) {
  std::vector<Subgroup> found{Subgroup::trivial(g)};
  std::set<std::vector<long>> keys{found[0].element_indices()};
  for (size_t i = 0; i < found.size(); ++i) {
    for (long idx = 1; idx < g.order(); ++idx) {
      if (found[i].contains_index(idx)) continue;
      std::vector<Element> gens = found[i].generators();
      gens.push_back(g.element(idx));
      Subgroup s(g, std::move(gens));
      if (keys.insert(s.element_indices()).second) found.push_back(std::move(s));
    }
  }
  std::sort(found.begin(), found.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.element_indices() < b.element_indices();
  });
  return found;
}

Character::Character(const FiniteAbelianGroup& g, Element y) : g_(g), y_(std::move(y)) {
  if (!g.is_element(y_)) throw std::invalid_argument("character label is not a dual element");
}

long Character::root_index(const Element& x) const {
  const long n = g_.exponent();
  long k = 0;
  for (size_t j = 0; j < y_.size(); ++j) k = mod(k + x[j] * y_[j] % g_.orders()[j] * (n / g_.orders()[j]), n);
  return k;
}

std::complex<double> Character::value(const Element& x) const { return root_of_unity(root_index(x), g_.exponent()); }

bool Character::is_trivial() const {
  return std::all_of(y_.begin(), y_.end(), [](long c) { return c == 0; });
}

Character Character::compose(const GroupAutomorphism& v) const { return {g_, dual_automorphism(v).apply(y_)}; }

std::vector<Element> orbit(const GroupAutomorphism& v, const Element& g) {
  std::vector<Element> out{g};
  for (Element x = v.apply(g); x != g; x = v.apply(x)) out.push_back(x);
  return out;
}

std::set<long> multiplicity_set(const FiniteAbelianGroup& g, const Subgroup& h, const GroupAutomorphism& v) {
  if (h.order() <= 1) throw EmptySubgroup("the subgroup is trivial, so H \\ {0} is empty");
  std::set<long> out;
  for (long idx : h.element_indices()) {
    if (idx == 0) continue;
    long count = 0;
    for (const auto& x : orbit(v, g.element(idx)))
      if (h.contains(x)) ++count;
    out.insert(count);
  }
  return out;
}

std::vector<std::vector<long>> invariant_factor_forms(long order) {
  std::vector<std::vector<long>> out;
  std::vector<long> cur;
  // d1 | d2 | ... | dk with product = order, smallest factor first.
  auto rec = [&](auto&& self, long remaining) -> void {
    if (remaining == 1) {
      if (!cur.empty()) out.push_back(cur);
      return;
    }
    const long prev = cur.empty() ? 1 : cur.back();
    for (long d = std::max(2L, prev); d <= remaining; d += prev) {
      if (d % prev != 0 || remaining % d != 0) continue;
      // The remaining factors are multiples of d, so d must divide what is left.
      if ((remaining / d) % d != 0 && remaining != d) continue;
      cur.push_back(d);
      self(self, remaining / d);
      cur.pop_back();
    }
  };
  rec(rec, order);
  std::sort(out.begin(), out.end());
  return out;
}

Witness realize(const std::set<long>& target, const SearchBounds& bounds) {
  if (target.empty()) throw std::invalid_argument("target set E is empty");
  for (long e : target)
    if (e < 1) throw std::invalid_argument("target set E must contain positive integers");
  const long need = *target.rbegin();
  long examined = 0;
  for (long order = 2; order <= bounds.max_order; ++order) {
    for (const auto& orders : invariant_factor_forms(order)) {
      FiniteAbelianGroup g(orders);
      const auto subgroups = enumerate_subgroups(g);
      for (const auto& v : enumerate_automorphisms(g, bounds.max_automorphisms)) {
        long longest = 1;
        for (long i = 0; i < g.order(); ++i) longest = std::max(longest, v.period(g.element(i)));
        if (longest < need) continue;
        for (const auto& h : subgroups) {
          if (h.order() <= 1 || h.order() <= need - 1) continue;
          ++examined;
          if (multiplicity_set(g, h, v) == target) {
            // Post-verification on a freshly validated automorphism.
            auto check = validate_automorphism(g, v.images());
            if (multiplicity_set(g, Subgroup(g, h.generators()), check) != target)
              throw std::logic_error("realize produced an unverifiable witness");
            return {g, h, check, examined};
          }
        }
      }
    }
  }
  std::ostringstream msg;
  msg << "no witness with group order <= " << bounds.max_order << " and at most " << bounds.max_automorphisms
      << " automorphisms per group";
  throw NotFound(msg.str());
}

std::complex<double> LValue::value() const {
  std::complex<double> s = 0;
  const long n = static_cast<long>(root_counts.size());
  for (long k = 0; k < n; ++k)
    if (root_counts[static_cast<size_t>(k)] != 0)
      s += static_cast<double>(root_counts[static_cast<size_t>(k)]) * root_of_unity(k, n);
  return s / static_cast<double>(period);
}

LValue l_value_exact(const Character& chi, const Element& a, const GroupAutomorphism& v) {
  LValue out;
  out.root_counts.assign(static_cast<size_t>(chi.group().exponent()), 0);
  const auto orb = orbit(v, a);
  out.period = static_cast<long>(orb.size());
  for (const auto& x : orb) ++out.root_counts[static_cast<size_t>(chi.root_index(x))];
  return out;
}

std::complex<double> l_value(const Character& chi, const Element& a, const GroupAutomorphism& v) {
  return l_value_exact(chi, a, v).value();
}

GroupAutomorphism dual_automorphism(const GroupAutomorphism& v) {
  const auto& g = v.group();
  const auto& d = g.orders();
  std::vector<Element> images;
  // Image of the j-th dual generator: y'_i = d_i * img_i[j] / d_j (mod d_i).
  for (size_t j = 0; j < g.rank(); ++j) {
    Element y(g.rank());
    for (size_t i = 0; i < g.rank(); ++i) {
      const long num = d[i] * v.images()[i][j];
      y[i] = mod(num / d[j], d[i]);
    }
    images.push_back(std::move(y));
  }
  return GroupAutomorphism::from_images(g, std::move(images));
}

}  // namespace cfflow
