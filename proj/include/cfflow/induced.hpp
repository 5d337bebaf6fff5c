#pragma once

// Exact induction for finite abelian pairs H <= G, character multiplicities of
// monomial representations, Koopman representations of finite actions and the
// product-multiplicity check.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cfflow/abelian.hpp"
#include "cfflow/cyclotomic.hpp"

namespace cfflow {

class BadCrossSection : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class HypothesisViolation : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class InvalidRepresentation : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// M e_i = omega_N^phase[i] e_perm[i].
struct Monomial {
  std::vector<long> perm;
  std::vector<long> phase;

  static Monomial identity(size_t dim);
  size_t dim() const { return perm.size(); }
  Monomial then(const Monomial& next, long roots) const;  // next o this
  Monomial power(long k, long roots) const;
  Cyclotomic trace(long roots) const;
  friend bool operator==(const Monomial& a, const Monomial& b) { return a.perm == b.perm && a.phase == b.phase; }
};

struct FiniteUnitaryRep {
  FiniteAbelianGroup group;
  long roots = 1;                  // phases are powers of exp(2 pi i / roots); the group exponent
  long space = 0;                  // dimension of the ambient space the monomials act on
  std::vector<Monomial> generators;
  long removed_trivial = 0;        // copies of the trivial character split off (constants)

  long dimension() const;
  Monomial at(const Element& g) const;
  /// Throws InvalidRepresentation if generators fail to commute or to satisfy their orders.
  void validate() const;
};

/// Multiplicity of every character of G, keyed by character label index, via projector traces.
std::map<long, long> multiplicity_function(const FiniteUnitaryRep& rep);
std::set<long> multiplicity_values(const std::map<long, long>& m);

/// A diagonal representation of H given by characters of G restricted to H (repetition allowed).
struct SubgroupRep {
  Subgroup h;
  std::vector<Element> characters;  // labels of characters of G
};

/// Restriction class of a character of G to H: its root indices on the subgroup generators.
std::vector<long> restriction_key(const Character& chi, const Subgroup& h);
/// Multiplicities of V on the dual of H, keyed by restriction class.
std::map<std::vector<long>, long> subgroup_multiplicities(const SubgroupRep& v);

/// Coset representatives; s[c] is the representative of the coset with id c, and s of the coset of 0 is 0.
struct CrossSection {
  std::vector<long> coset_of;   // element index -> coset id
  std::vector<Element> rep;     // coset id -> representative
};
CrossSection default_cross_section(const FiniteAbelianGroup& g, const Subgroup& h);
CrossSection random_cross_section(const FiniteAbelianGroup& g, const Subgroup& h, std::mt19937_64& rng);
void validate_cross_section(const FiniteAbelianGroup& g, const Subgroup& h, const CrossSection& s);

/// U_g e_(y, i) = psi_i(h(g, y)) e_(g + y, i) with h(g, y) = -s(g + y) + g + s(y); index one gives back V.
FiniteUnitaryRep induce(const FiniteAbelianGroup& g, const SubgroupRep& v, const CrossSection& s);

struct InductionReport {
  std::set<long> set_v, set_u;
  bool sets_equal = false;
  bool support_equal = false;   // restriction of supp(U) equals supp(V)
  long dim_v = 0, dim_u = 0;
  bool ok() const { return sets_equal && support_equal && dim_u > 0; }
};
InductionReport check_induction(const FiniteAbelianGroup& g, const SubgroupRep& v, const CrossSection& s);

struct FiniteAction {
  FiniteAbelianGroup group;
  std::vector<Rational> weights;            // point weights summing to 1
  std::vector<std::vector<long>> generators;  // one permutation per cyclic factor

  size_t points() const { return weights.size(); }
  void validate() const;
  long orbits() const;
};

FiniteAction translation_action(const FiniteAbelianGroup& g);
/// G acting on G/K by translation.
FiniteAction quotient_action(const FiniteAbelianGroup& g, const Subgroup& k);
/// Disjoint union of actions of one group (weights rescaled by the given probabilities).
FiniteAction disjoint_union(const std::vector<FiniteAction>& parts, const std::vector<Rational>& probabilities);
FiniteAction product_action(const FiniteAction& a, const FiniteAction& b);
/// The G-action on G/H x Y induced by an action S of A, where H is the image of the injective
/// homomorphism A -> G sending the j-th generator of A to embedding[j].
FiniteAction induce_action(const FiniteAbelianGroup& g, const std::vector<Element>& embedding, const FiniteAction& s,
                           const CrossSection& cs);

/// U(g) f = f o T_{-g}; with mean_zero the constants are split off.
FiniteUnitaryRep koopman_rep(const FiniteAction& a, bool mean_zero);

struct ProductReport {
  std::set<long> m1, m2, product;
  long orbits2 = 1;
  bool t2_ergodic = true;
  bool union_with_one = false;        // product == M(T2) u {1}
  bool union_with_orbits = false;      // product == M(T2) u {#orbits(T2)}
  bool ok() const { return union_with_orbits && (!t2_ergodic || union_with_one); }
};
/// Throws HypothesisViolation naming the failed hypothesis on T1.
ProductReport product_multiplicity_check(const FiniteAction& t1, const FiniteAction& t2);

struct InducedActionReport {
  std::set<long> m_s, m_t;
  long index = 1;
  bool s_ergodic = true;
  bool extra_one = false;  // M(T) == M(S) u {1} for index > 1
};
InducedActionReport check_induced_action(const FiniteAbelianGroup& g, const std::vector<Element>& embedding,
                                         const FiniteAction& s, const CrossSection& cs);

// Seeded instance generators.
struct InductionInstance {
  FiniteAbelianGroup g;
  SubgroupRep v;
};
InductionInstance random_induction_instance(std::mt19937_64& rng, long max_order = 24, long max_index = 6, long max_dim = 8);
FiniteAction random_simple_ergodic_action(std::mt19937_64& rng, long max_order = 12);
FiniteAction random_action(std::mt19937_64& rng, long max_order = 8, long max_orbits = 3);

}  // namespace cfflow
