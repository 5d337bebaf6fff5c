#pragma once

// Level maps alpha_n : C_n -> K, the (C,F)-cocycle they generate, the
// commuting transformation S_z and the checker for the level conditions.

#include <string>
#include <vector>

#include "cfflow/cftower.hpp"

namespace cfflow {

class FractionBoundViolated : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class NotTailEquivalent : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class OutsideDomain : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Table slice for one level: alpha values by cut index and the marked subsets
/// (C_{n,i} at N levels, D_{n,l} inside D1 at M levels), as sorted cut indices.
struct LevelCocycle {
  std::vector<Element> alpha;
  std::vector<std::vector<long>> marked;
};

LevelCocycle build_alpha(const LevelSpec& level, const GroupAutomorphism& v);

struct CocycleTable {
  FiniteAbelianGroup k;
  GroupAutomorphism v;
  std::vector<LevelCocycle> levels;  // levels[0] empty

  const Element& at(int n, long idx) const {
    return levels.at(static_cast<size_t>(n)).alpha.at(static_cast<size_t>(idx));
  }
};

CocycleTable build_cocycle(const TowerSchedule& s);

struct SubsetCheck {
  long i = 0;
  long builder_count = 0;
  long maximal_count = 0;   // largest admissible subset for this increment
  bool builder_valid = true;  // members satisfy the increment rule and the density bound
  bool exists = true;         // some admissible subset meets the density bound
};

struct LevelConditions {
  int index = 0;
  LabelKind kind = LabelKind::Bootstrap;
  bool neutral_ok = true;        // W/bootstrap: identically neutral
  bool shift_ok = true;          // alpha(c + z) = v(alpha(c)) on the overlap
  std::vector<long> shift_failures;  // offending cut indices c
  std::vector<SubsetCheck> subsets;  // marked subsets and their density bounds
  bool subsets_ok = true;
  bool d2_neutral_ok = true;     // M levels: neutral on D2
  long size = 0;
  long overlap = 0;              // #(C ∩ (C - z))
  long circ = 0;                 // #C°
  long symdiff = 0;              // #(C △ (C - z))
  Rational defect;               // (overlap - circ) / #C
  Rational one_minus_circ;       // 1 - #C° / #C
  Rational symdiff_ratio;        // #(C △ (C - z)) / #C
  Rational closed_form;          // 2 / n^2 at N/M levels, 0 otherwise
  bool closed_form_ok = true;
  bool ok() const { return neutral_ok && shift_ok && subsets_ok && d2_neutral_ok && closed_form_ok; }
};

struct ConditionReport {
  std::vector<LevelConditions> levels;
  Rational defect_sum;
  Rational circ_sum;      // prefix sum of 1 - #C°/#C
  Rational symdiff_sum;   // prefix sum of #(C △ (C - z))/#C
  bool ok() const;
};

ConditionReport check_conditions(const CocycleTable& table, const TowerSchedule& s);

/// alpha(x, y) for points given by digit words at a common top level.
Element alpha_between(const DigitWord& x, const DigitWord& y, const CocycleTable& table);

/// Sum of alpha_k over the digits of w (absent digits contribute alpha_k(0)) for levels 1..w.top.
Element alpha_sum(const DigitWord& w, const CocycleTable& table);

/// z_1 + ... + z_m, with z_k = 0 at W and bootstrap levels.
ExactReal z_prefix(int m, const TowerSchedule& s);

/// S_z applied to x = (f_m, c_{m+1}, ..., c_top) with m = x.pad.
DigitWord s_zbar(const DigitWord& x, const TowerSchedule& s);

}  // namespace cfflow
