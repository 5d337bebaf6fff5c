#pragma once

// (C,F) tower schedules: cut sets C_n, heights h_n, rigidity shifts z_n and
// the level labels that drive the inductive choices.

#include <optional>
#include <string>
#include <vector>

#include "cfflow/abelian.hpp"
#include "cfflow/exact_real.hpp"

namespace cfflow {

class AssignmentGap : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class DegenerateLevel : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class OutOfRange : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Variant { WN, NM };
std::string variant_name(Variant v);
Variant parse_variant(const std::string& s);

enum class LabelKind { Bootstrap, W, N, M };

struct Label {
  LabelKind kind = LabelKind::Bootstrap;
  int i = 0;     // W(i), M(a,i)
  Element a;     // N(a), M(a,i)

  /// Text forms: "B", "W1", "W2", "N:1", "M:1:3"; multi-coordinate elements as "1.0".
  std::string to_string() const;
  static Label parse(const std::string& text, const FiniteAbelianGroup& k);
  static Label bootstrap() { return {}; }
  static Label w(int i) { return {LabelKind::W, i, {}}; }
  static Label n(Element a) { return {LabelKind::N, 0, std::move(a)}; }
  static Label m(Element a, int i) { return {LabelKind::M, i, std::move(a)}; }

  friend bool operator==(const Label& x, const Label& y) { return x.kind == y.kind && x.i == y.i && x.a == y.a; }
};

/// The algebraic data (K, v) the schedules read periods from.
struct GroupData {
  FiniteAbelianGroup k;
  GroupAutomorphism v;
  long period(const Element& a) const { return v.period(a); }
};

struct LevelSpec {
  int index = 0;
  Label label;
  std::vector<ExactReal> cuts;      // C_n, sorted
  std::vector<double> cuts_approx;  // same order, for candidate search only
  ExactReal h;
  std::optional<ExactReal> z;
  long period = 1;  // m_a at N/M levels
  // M levels: block structure C_n = union_j (j z + (D1 u D2)).
  std::vector<ExactReal> d1, d2;
  bool repaired = false;  // the +1 spacer added at an N level of the nm variant

  long size() const { return static_cast<long>(cuts.size()); }
  /// n in the recurrences, i.e. index - 1.
  long n() const { return index - 1; }
};

struct TowerSchedule {
  Variant variant = Variant::WN;
  XiBasis xi;
  bool strict = false;
  GroupData group;
  std::vector<LevelSpec> levels;  // levels[0] has h = 1 and no cuts

  int depth() const { return static_cast<int>(levels.size()) - 1; }
  const LevelSpec& level(int n) const { return levels.at(static_cast<size_t>(n)); }
  const ExactReal& h(int n) const { return level(n).h; }
  double h_approx(int n) const { return xi.to_double(h(n)); }
  /// xi_i for i = 1, 2, 3 (xi_3 = xi_2 - xi_1).
  ExactReal xi_value(int i) const;
  /// Index of cut c in C_n, exact; nullopt if c is not a cut.
  std::optional<long> cut_index(int n, const ExactReal& c) const;
  /// Index of the cut c with c <= x < c + h_{n-1}, if any.
  std::optional<long> locate(int n, const ExactReal& x) const;
};

/// Labels needed by each variant, in canonical order: W1, W2, N(a) for wn;
/// N(a), M(a,1..3), M(0,1..3) for nm, a over orbit representatives of K \ {0}.
std::vector<Label> required_labels(Variant variant, const GroupData& g);
/// Round-robin over required_labels for indices 2..depth.
std::vector<Label> round_robin_assignment(Variant variant, const GroupData& g, int depth);

/// sqrt(2), sqrt(3) for wn; sqrt(2), sqrt(7) for nm so that xi_2 - xi_1 >= 1.
XiBasis default_xi(Variant variant);

/// assignment[k] labels index k + 2.
TowerSchedule build_schedule(Variant variant, const GroupData& g, int depth, const std::vector<Label>& assignment,
                             const std::optional<XiBasis>& xi = std::nullopt, bool strict = false);
TowerSchedule build_schedule_wn(const GroupData& g, int depth, const std::vector<Label>& assignment,
                                  const std::optional<XiBasis>& xi = std::nullopt);
TowerSchedule build_schedule_nm(const GroupData& g, int depth, const std::vector<Label>& assignment,
                                  const std::optional<XiBasis>& xi = std::nullopt, bool strict = false);

struct LevelCheck {
  int index = 0;
  bool min_and_size = true;
  bool spacer = true;
  bool spacer_relaxed = false;  // passes only in [0, h_n)
  bool disjoint = true;
  bool ordered = true;
  ExactReal spacer_total;  // h_n - #C_n h_{n-1}
  double ratio = 0;        // h_n / prod #C_k
  std::string note;
  bool ok() const { return min_and_size && spacer && disjoint && ordered; }
};

struct ValidationReport {
  std::vector<LevelCheck> levels;
  bool base_height = true;
  bool ratio_monotone = true;
  double ratio_limit_upper = 0;  // bound on lim h_n / prod #C_k
  std::vector<int> repaired_levels;
  bool ok() const;
};

ValidationReport validate_schedule(const TowerSchedule& s);

struct DigitWord {
  int top = 0;
  int pad = 0;                // digits below and at pad are absent
  std::vector<long> digits;   // digits[k] = cut index at level top - k, for levels top..pad+1
  ExactReal offset;           // position inside F_pad

  long digit_at(int level) const { return digits.at(static_cast<size_t>(top - level)); }
  bool has_digit(int level) const { return level > pad && level <= top; }
  friend bool operator==(const DigitWord& a, const DigitWord& b) {
    return a.top == b.top && a.pad == b.pad && a.digits == b.digits && a.offset == b.offset;
  }
};

DigitWord digits(const ExactReal& f, int top, const TowerSchedule& s);
ExactReal reconstruct(const DigitWord& w, const TowerSchedule& s);

struct Interval {
  double lo = 0, hi = 0;
  double width() const { return hi - lo; }
};

/// Enclosure of mu(X_n) from the computed prefix and a tail bound beyond the depth.
Interval level_mass(int n, const TowerSchedule& s);
/// mu([A]_n) for |A| = length.
Interval cylinder_measure(int n, const ExactReal& length, const TowerSchedule& s);
/// Upper bound on the spacer fraction of any future level, times h of its predecessor.
double spacer_constant(const TowerSchedule& s);

/// Recomputes approximations and block data after a schedule is loaded from text.
void finalize_level(LevelSpec& level, const XiBasis& xi);

}  // namespace cfflow
