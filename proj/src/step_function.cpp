#include "cfflow/koopman.hpp"

namespace cfflow {

StepFunction StepFunction::indicator(int level, const ExactReal& lo, const ExactReal& hi, long roots,
                                     const std::string& name) {
  StepFunction f;
  f.level = level;
  f.roots = roots;
  f.name = name;
  f.pieces.push_back({lo, hi, Rational(1), 0});
  return f;
}

StepFunction StepFunction::lift(int to_level, const TowerSchedule& s) const {
  if (to_level < level) throw std::invalid_argument("cannot lift a function to a lower level");
  StepFunction out = *this;
  for (int k = level + 1; k <= to_level; ++k) {
    std::vector<StepPiece> next;
    next.reserve(out.pieces.size() * s.level(k).cuts.size());
    for (const auto& c : s.level(k).cuts)
      for (const auto& p : out.pieces) next.push_back({p.lo + c, p.hi + c, p.weight, p.root});
    out.pieces = std::move(next);
  }
  out.level = to_level;
  return out;
}

Rational StepFunction::sup_weight() const {
  Rational m(0);
  for (const auto& p : pieces)
    if (abs(p.weight) > m) m = abs(p.weight);
  return m;
}

std::vector<Cell> level_cells(int level, const TowerSchedule& s, const CocycleTable& table) {
  const auto& k = table.k;
  std::vector<Cell> cells{{ExactReal(0), ExactReal(1), k.zero(), -1}};
  Element pad = k.zero();
  for (int n = 1; n <= level; ++n) {
    const LevelSpec& lv = s.level(n);
    const ExactReal& hp = s.h(n - 1);
    pad = k.add(pad, table.at(n, 0));
    std::vector<Cell> next;
    for (size_t j = 0; j < lv.cuts.size(); ++j) {
      const ExactReal& c = lv.cuts[j];
      const Element& a = table.at(n, static_cast<long>(j));
      for (const auto& cell : cells) next.push_back({cell.lo + c, cell.hi + c, k.add(cell.a_sum, a), static_cast<long>(j)});
      const ExactReal gap_lo = c + hp;
      const ExactReal gap_hi = j + 1 < lv.cuts.size() ? lv.cuts[j + 1] : lv.h;
      if (s.xi.less(gap_lo, gap_hi)) next.push_back({gap_lo, gap_hi, pad, -1});
    }
    cells = std::move(next);
  }
  return cells;
}

std::vector<StepFunction> column_family(const std::vector<int>& levels, const TowerSchedule& s,
                                        const CocycleTable& table, const Character& chi, bool twisted) {
  const long roots = chi.group().exponent();
  std::vector<StepFunction> out;
  for (int k : levels) {
    const LevelSpec& lv = s.level(k);
    for (size_t j = 0; j < lv.cuts.size(); ++j) {
      const std::string name = "col:" + std::to_string(k) + ":" + std::to_string(j);
      out.push_back(StepFunction::indicator(k, lv.cuts[j], lv.cuts[j] + s.h(k - 1), roots, name));
    }
    if (!twisted || chi.is_trivial()) continue;
    const std::vector<Cell> cells = level_cells(k, s, table);
    for (size_t j = 0; j < lv.cuts.size(); ++j) {
      StepFunction f;
      f.level = k;
      f.roots = roots;
      f.name = "col:" + std::to_string(k) + ":" + std::to_string(j) + "~chi";
      for (const auto& cell : cells)
        if (cell.top_digit == static_cast<long>(j))
          f.pieces.push_back({cell.lo, cell.hi, Rational(1), chi.root_index(cell.a_sum)});
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace cfflow
