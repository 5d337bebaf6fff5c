#pragma once

// Finite abelian groups Z/d1 x ... x Z/dk, their automorphisms, subgroups and
// characters, plus the orbit-intersection multiplicity set and its realization.

#include <complex>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfflow {

using Element = std::vector<long>;

class NotHomomorphism : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class NotBijective : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class EmptySubgroup : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class NotFound : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class FiniteAbelianGroup {
 public:
  FiniteAbelianGroup() = default;
  explicit FiniteAbelianGroup(std::vector<long> cyclic_orders);

  const std::vector<long>& orders() const { return d_; }
  size_t rank() const { return d_.size(); }
  long order() const { return order_; }
  /// Least common multiple of the cyclic orders; characters take values in mu_exponent.
  long exponent() const { return exponent_; }

  Element zero() const { return Element(d_.size(), 0); }
  Element generator(size_t j) const;
  bool is_element(const Element& x) const;

  Element add(const Element& a, const Element& b) const;
  Element sub(const Element& a, const Element& b) const;
  Element neg(const Element& a) const;
  Element times(const Element& a, long k) const;
  long element_order(const Element& a) const;

  /// Mixed-radix index, first coordinate most significant; element(index(x)) == x.
  long index(const Element& x) const;
  Element element(long idx) const;
  std::vector<Element> elements() const;

  std::string element_to_string(const Element& x) const;
  std::string to_string() const;

  friend bool operator==(const FiniteAbelianGroup& a, const FiniteAbelianGroup& b) { return a.d_ == b.d_; }

 private:
  std::vector<long> d_;
  long order_ = 1;
  long exponent_ = 1;
};

class GroupAutomorphism {
 public:
  GroupAutomorphism() = default;

  static GroupAutomorphism identity(const FiniteAbelianGroup& g);
  /// Validating constructor (validate_automorphism).
  static GroupAutomorphism from_images(const FiniteAbelianGroup& g, std::vector<Element> images);

  const FiniteAbelianGroup& group() const { return g_; }
  const std::vector<Element>& images() const { return images_; }

  Element apply(const Element& x) const;
  /// Permutation of element indices.
  const std::vector<long>& permutation() const { return perm_; }

  GroupAutomorphism compose(const GroupAutomorphism& inner) const;  // this o inner
  GroupAutomorphism inverse() const;
  GroupAutomorphism power(long k) const;
  /// Least p > 0 with v^p(x) = x.
  long period(const Element& x) const;

  std::string to_string() const;

  friend bool operator==(const GroupAutomorphism& a, const GroupAutomorphism& b) {
    return a.g_ == b.g_ && a.images_ == b.images_;
  }

 private:
  GroupAutomorphism(FiniteAbelianGroup g, std::vector<Element> images, std::vector<long> perm)
      : g_(std::move(g)), images_(std::move(images)), perm_(std::move(perm)) {}

  FiniteAbelianGroup g_;
  std::vector<Element> images_;
  std::vector<long> perm_;
};

GroupAutomorphism validate_automorphism(const FiniteAbelianGroup& g, std::vector<Element> images);

/// All automorphisms in lexicographic order of generator-image indices, at most `cap` of them.
std::vector<GroupAutomorphism> enumerate_automorphisms(const FiniteAbelianGroup& g, size_t cap = SIZE_MAX);

class Subgroup {
 public:
  Subgroup() = default;
  Subgroup(const FiniteAbelianGroup& g, std::vector<Element> generators);
  static Subgroup full(const FiniteAbelianGroup& g);
  static Subgroup trivial(const FiniteAbelianGroup& g);

  const FiniteAbelianGroup& group() const { return g_; }
  const std::vector<Element>& generators() const { return gens_; }
  /// Sorted element indices.
  const std::vector<long>& element_indices() const { return members_; }
  std::vector<Element> elements() const;
  long order() const { return static_cast<long>(members_.size()); }
  bool contains(const Element& x) const;
  bool contains_index(long idx) const { return mask_[static_cast<size_t>(idx)]; }

 private:
  FiniteAbelianGroup g_;
  std::vector<Element> gens_;
  std::vector<long> members_;
  std::vector<bool> mask_;
};

/// Every subgroup, ordered by (order, sorted element indices).
std::vector<Subgroup> enumerate_subgroups(const FiniteAbelianGroup& g);

/// chi_y(x) = exp(2 pi i sum_j x_j y_j / d_j); y is read in the same coordinates as x.
class Character {
 public:
  Character(const FiniteAbelianGroup& g, Element y);
  static Character trivial(const FiniteAbelianGroup& g) { return {g, g.zero()}; }

  const Element& label() const { return y_; }
  const FiniteAbelianGroup& group() const { return g_; }
  /// chi(x) = omega^k with omega = exp(2 pi i / exponent); returns k.
  long root_index(const Element& x) const;
  std::complex<double> value(const Element& x) const;
  bool is_trivial() const;
  /// chi o v, i.e. the dual automorphism applied to chi.
  Character compose(const GroupAutomorphism& v) const;

  friend bool operator==(const Character& a, const Character& b) { return a.g_ == b.g_ && a.y_ == b.y_; }

 private:
  FiniteAbelianGroup g_;
  Element y_;
};

std::complex<double> root_of_unity(long k, long n);

std::vector<Element> orbit(const GroupAutomorphism& v, const Element& g);

std::set<long> multiplicity_set(const FiniteAbelianGroup& g, const Subgroup& h, const GroupAutomorphism& v);

struct SearchBounds {
  long max_order = 16;
  size_t max_automorphisms = 100000;
};

struct Witness {
  FiniteAbelianGroup group;
  Subgroup subgroup;
  GroupAutomorphism automorphism;
  long candidates_examined = 0;
};

/// First witness in the canonical order (group order, invariant factors, automorphism, subgroup).
Witness realize(const std::set<long>& target, const SearchBounds& bounds = {});

/// Invariant-factor decompositions d1 | d2 | ... of the given order.
std::vector<std::vector<long>> invariant_factor_forms(long order);

/// Exact orbit average of chi over the v-orbit of a, as counts per root index / period.
struct LValue {
  long period = 1;
  std::vector<long> root_counts;  // length = exponent of the group
  std::complex<double> value() const;
};
LValue l_value_exact(const Character& chi, const Element& a, const GroupAutomorphism& v);
std::complex<double> l_value(const Character& chi, const Element& a, const GroupAutomorphism& v);

/// Dual automorphism on character labels: (v^ chi)(x) = chi(v(x)).
GroupAutomorphism dual_automorphism(const GroupAutomorphism& v);

}  // namespace cfflow
