#include "cfflow/cocycle.hpp"

#include <map>

namespace cfflow {

namespace {

using CutIndex = std::map<ExactReal, long, StructuralLess>;

CutIndex index_cuts(const std::vector<ExactReal>& cuts) {
  CutIndex out;
  for (size_t j = 0; j < cuts.size(); ++j) out.emplace(cuts[j], static_cast<long>(j));
  return out;
}

bool is_zero(const Element& x) {
  for (long c : x)
    if (c != 0) return false;
  return true;
}

/// beta(0) = 0, beta(r) = beta(r - 1) + v^((r - 1) / n)(a) for r < m n.
std::vector<Element> block_values(const GroupAutomorphism& v, const Element& a, long m, long n) {
  const auto& k = v.group();
  std::vector<Element> powers{a};
  for (long i = 1; i < m; ++i) powers.push_back(v.apply(powers.back()));
  std::vector<Element> beta{k.zero()};
  for (long r = 1; r < m * n; ++r) beta.push_back(k.add(beta.back(), powers[static_cast<size_t>((r - 1) / n)]));
  return beta;
}

void check_fraction(long count, long total, long m, long n, int index) {
  const Rational dev = abs(ratio(count, total) - ratio(1, m));
  const Rational bound(2, n * m);
  if (!(dev < bound))
    throw FractionBoundViolated("level " + std::to_string(index) + ": marked count " + std::to_string(count) +
                                " of " + std::to_string(total) + " misses 1/" + std::to_string(m) + " by " +
                                dev.get_str());
}

}  // namespace

LevelCocycle build_alpha(const LevelSpec& level, const GroupAutomorphism& v) {
  const auto& k = v.group();
  LevelCocycle out;
  out.alpha.assign(level.cuts.size(), k.zero());
  if (level.label.kind == LabelKind::Bootstrap || level.label.kind == LabelKind::W) return out;

  const long m = level.period;
  const long n = level.n();
  const Element& a = level.label.a;
  const std::vector<Element> beta = block_values(v, a, m, n);
  out.marked.assign(static_cast<size_t>(m), {});

  if (level.label.kind == LabelKind::N) {
    const long blen = m * n;
    const long blocks = level.size() / blen;
    std::vector<Element> twisted = beta;
    for (long q = 0; q < blocks; ++q) {
      for (long r = 0; r < blen; ++r) {
        const long j = q * blen + r;
        out.alpha[static_cast<size_t>(j)] = twisted[static_cast<size_t>(r)];
        if (r >= 1) out.marked[static_cast<size_t>((q + (r - 1) / n) % m)].push_back(j);
      }
      for (auto& x : twisted) x = v.apply(x);
    }
    for (long i = 0; i < m; ++i)
      check_fraction(static_cast<long>(out.marked[static_cast<size_t>(i)].size()), level.size(), m, n, level.index);
    return out;
  }

  // M level: blocks of D1 (beta) followed by D2 (neutral), twisted by v per block.
  const long half = m * n;
  const long blocks = level.size() / (2 * half);
  std::vector<Element> twisted = beta;
  for (long b = 0; b < blocks; ++b) {
    for (long r = 0; r < half; ++r) out.alpha[static_cast<size_t>(b * 2 * half + r)] = twisted[static_cast<size_t>(r)];
    for (auto& x : twisted) x = v.apply(x);
  }
  for (long r = 1; r < half; ++r) out.marked[static_cast<size_t>(((r - 1) / n) % m)].push_back(r);
  for (long l = 0; l < m; ++l)
    check_fraction(static_cast<long>(out.marked[static_cast<size_t>(l)].size()), half, m, n, level.index);
  return out;
}

CocycleTable build_cocycle(const TowerSchedule& s) {
  CocycleTable t{s.group.k, s.group.v, {}};
  t.levels.emplace_back();
  for (int n = 1; n <= s.depth(); ++n) t.levels.push_back(build_alpha(s.level(n), s.group.v));
  return t;
}

bool ConditionReport::ok() const {
  for (const auto& l : levels)
    if (!l.ok()) return false;
  return true;
}

ConditionReport check_conditions(const CocycleTable& table, const TowerSchedule& s) {
  const auto& k = table.k;
  const auto& v = table.v;
  ConditionReport rep;
  for (int n = 1; n <= s.depth(); ++n) {
    const LevelSpec& lv = s.level(n);
    const auto& alpha = table.levels.at(static_cast<size_t>(n)).alpha;
    if (alpha.size() != lv.cuts.size())
      throw std::invalid_argument("cocycle table domain differs from C_" + std::to_string(n));
    LevelConditions c;
    c.index = n;
    c.kind = lv.label.kind;
    c.size = lv.size();
    const CutIndex where = index_cuts(lv.cuts);

    if (c.kind == LabelKind::Bootstrap || c.kind == LabelKind::W) {
      for (const auto& x : alpha) c.neutral_ok = c.neutral_ok && is_zero(x);
    }

    const ExactReal z = lv.z ? *lv.z : ExactReal(0);
    for (long j = 0; j < c.size; ++j) {
      auto it = where.find(lv.cuts[static_cast<size_t>(j)] + z);
      if (it == where.end()) continue;
      ++c.overlap;
      if (alpha[static_cast<size_t>(it->second)] == v.apply(alpha[static_cast<size_t>(j)])) {
        ++c.circ;
      } else if (lv.z) {
        c.shift_ok = false;
        c.shift_failures.push_back(j);
      }
    }
    c.symdiff = 2 * (c.size - c.overlap);
    c.defect = ratio(c.overlap - c.circ, c.size);
    c.one_minus_circ = 1 - ratio(c.circ, c.size);
    c.symdiff_ratio = ratio(c.symdiff, c.size);

    if (c.kind == LabelKind::N || c.kind == LabelKind::M) {
      const long m = lv.period;
      const long nn = lv.n();
      c.closed_form = ratio(2, nn * nn);
      c.closed_form_ok = c.symdiff_ratio == c.closed_form;
      const auto& marked = table.levels.at(static_cast<size_t>(n)).marked;
      // Domain of the increment rule: all of C at N levels, D1 at M levels.
      const std::vector<ExactReal>& dom = c.kind == LabelKind::N ? lv.cuts : lv.d1;
      const CutIndex dom_index = index_cuts(dom);
      const ExactReal& hp = s.h(n - 1);
      const long total = static_cast<long>(dom.size());
      Element inc = lv.label.a;
      for (long i = 0; i < m; ++i, inc = v.apply(inc)) {
        SubsetCheck sc;
        sc.i = i;
        std::vector<bool> admissible(dom.size(), false);
        for (size_t j = 0; j < dom.size(); ++j) {
          auto prev = dom_index.find(dom[j] - hp);
          if (prev == dom_index.end()) continue;
          const long cj = where.at(dom[j]);
          const long cp = where.at(prev->first);
          if (k.sub(alpha[static_cast<size_t>(cj)], alpha[static_cast<size_t>(cp)]) == inc) {
            admissible[j] = true;
            ++sc.maximal_count;
          }
        }
        const Rational lower = Rational(total) * (ratio(1, m) - ratio(2, nn * m));
        const Rational upper = Rational(total) * (ratio(1, m) + ratio(2, nn * m));
        // Largest integer strictly below upper, capped by the admissible count.
        mpz_class cap = upper.get_num() / upper.get_den();
        if (Rational(cap) == upper) cap -= 1;
        const long best = std::min(sc.maximal_count, cap.get_si());
        sc.exists = Rational(best) > lower;
        if (static_cast<size_t>(i) < marked.size()) {
          const auto& mem = marked[static_cast<size_t>(i)];
          sc.builder_count = static_cast<long>(mem.size());
          for (long j : mem) {
            const auto pos = static_cast<size_t>(j);
            if (pos >= dom.size() || !admissible[pos]) sc.builder_valid = false;
          }
          const Rational dev = abs(ratio(sc.builder_count, total) - ratio(1, m));
          sc.builder_valid = sc.builder_valid && dev < ratio(2, nn * m);
        } else {
          sc.builder_valid = false;
        }
        c.subsets_ok = c.subsets_ok && sc.exists;
        c.subsets.push_back(sc);
      }
      if (c.kind == LabelKind::M) {
        for (const auto& d : lv.d2) c.d2_neutral_ok = c.d2_neutral_ok && is_zero(alpha[static_cast<size_t>(where.at(d))]);
      }
    }
    rep.defect_sum += c.defect;
    rep.circ_sum += c.one_minus_circ;
    rep.symdiff_sum += c.symdiff_ratio;
    rep.levels.push_back(std::move(c));
  }
  return rep;
}

Element alpha_sum(const DigitWord& w, const CocycleTable& table) {
  Element acc = table.k.zero();
  for (int lvl = 1; lvl <= w.top; ++lvl) acc = table.k.add(acc, table.at(lvl, w.has_digit(lvl) ? w.digit_at(lvl) : 0));
  return acc;
}

Element alpha_between(const DigitWord& x, const DigitWord& y, const CocycleTable& table) {
  if (x.top != y.top)
    throw NotTailEquivalent("digit words end at levels " + std::to_string(x.top) + " and " + std::to_string(y.top));
  return table.k.sub(alpha_sum(x, table), alpha_sum(y, table));
}

ExactReal z_prefix(int m, const TowerSchedule& s) {
  ExactReal acc(0);
  for (int k = 1; k <= m; ++k)
    if (s.level(k).z) acc += *s.level(k).z;
  return acc;
}

DigitWord s_zbar(const DigitWord& x, const TowerSchedule& s) {
  const int m = x.pad;
  const ExactReal zm = z_prefix(m, s);
  if (s.xi.sign(x.offset) < 0 || !s.xi.less(x.offset, s.h(m) - zm))
    throw OutsideDomain("offset " + x.offset.to_string() + " is not in [0, h_m - z_1 - ... - z_m) for m = " +
                        std::to_string(m));
  DigitWord out = x;
  out.offset = x.offset + zm;
  for (int k = x.top; k > m; --k) {
    const LevelSpec& lv = s.level(k);
    if (!lv.z) continue;
    const ExactReal target = lv.cuts[static_cast<size_t>(x.digit_at(k))] + *lv.z;
    auto idx = s.cut_index(k, target);
    if (!idx)
      throw OutsideDomain("digit at level " + std::to_string(k) + " is not in C_k ∩ (C_k - z_k)");
    out.digits[static_cast<size_t>(x.top - k)] = *idx;
  }
  return out;
}

}  // namespace cfflow
