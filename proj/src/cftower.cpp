#include "cfflow/cftower.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfflow {

std::string variant_name(Variant v) { return v == Variant::WN ? "wn" : "nm"; }

Variant parse_variant(const std::string& s) {
  if (s == "wn") return Variant::WN;
  if (s == "nm") return Variant::NM;
  throw std::invalid_argument("unknown schedule variant '" + s + "' (expected wn or nm)");
}

namespace {

std::string element_text(const Element& a) {
  std::string out;
  for (size_t j = 0; j < a.size(); ++j) out += (j ? "." : "") + std::to_string(a[j]);
  return out;
}

Element parse_element_text(const std::string& text, const FiniteAbelianGroup& k) {
  Element a;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad group element '" + text + "'");
    a.push_back(std::stol(part));
  }
  if (!k.is_element(a)) throw std::invalid_argument("'" + text + "' is not an element of " + k.to_string());
  return a;
}

}  // namespace

std::string Label::to_string() const {
  switch (kind) {
    case LabelKind::Bootstrap: return "B";
    case LabelKind::W: return "W" + std::to_string(i);
    case LabelKind::N: return "N:" + element_text(a);
    case LabelKind::M: return "M:" + element_text(a) + ":" + std::to_string(i);
  }
  return "?";
}

Label Label::parse(const std::string& text, const FiniteAbelianGroup& k) {
  if (text == "B") return bootstrap();
  if (text == "W1") return w(1);
  if (text == "W2") return w(2);
  if (text.rfind("N:", 0) == 0) return n(parse_element_text(text.substr(2), k));
  if (text.rfind("M:", 0) == 0) {
    const auto colon = text.rfind(':');
    if (colon <= 2 || colon + 2 != text.size() || text[colon + 1] < '1' || text[colon + 1] > '3')
      throw std::invalid_argument("bad M label '" + text + "' (expected M:a:i with i in 1..3)");
    return m(parse_element_text(text.substr(2, colon - 2), k), text[colon + 1] - '0');
  }
  throw std::invalid_argument("unknown level label '" + text + "'");
}

ExactReal TowerSchedule::xi_value(int i) const {
  switch (i) {
    case 1: return ExactReal::xi1();
    case 2: return ExactReal::xi2();
    case 3: return ExactReal::xi2() - ExactReal::xi1();
  }
  throw std::invalid_argument("xi index must be 1, 2 or 3");
}

std::optional<long> TowerSchedule::locate(int n, const ExactReal& x) const {
  const LevelSpec& lv = level(n);
  if (lv.cuts.empty()) return std::nullopt;
  const double xd = xi.to_double(x);
  const auto& ap = lv.cuts_approx;
  const long guess = static_cast<long>(std::upper_bound(ap.begin(), ap.end(), xd) - ap.begin()) - 1;
  const ExactReal& hp = h(n - 1);
  for (long idx = guess - 1; idx <= guess + 1; ++idx) {
    if (idx < 0 || idx >= lv.size()) continue;
    const ExactReal& c = lv.cuts[static_cast<size_t>(idx)];
    if (xi.less_equal(c, x) && xi.less(x, c + hp)) return idx;
  }
  return std::nullopt;
}

std::optional<long> TowerSchedule::cut_index(int n, const ExactReal& c) const {
  auto idx = locate(n, c);
  if (idx && level(n).cuts[static_cast<size_t>(*idx)] == c) return idx;
  return std::nullopt;
}

std::vector<Label> required_labels(Variant variant, const GroupData& g) {
  std::vector<Element> reps;
  std::vector<bool> seen(static_cast<size_t>(g.k.order()), false);
  seen[0] = true;
  for (long idx = 1; idx < g.k.order(); ++idx) {
    if (seen[static_cast<size_t>(idx)]) continue;
    const Element a = g.k.element(idx);
    reps.push_back(a);
    for (const auto& x : orbit(g.v, a)) seen[static_cast<size_t>(g.k.index(x))] = true;
  }
  std::vector<Label> out;
  if (variant == Variant::WN) {
    out = {Label::w(1), Label::w(2)};
    for (const auto& a : reps) out.push_back(Label::n(a));
  } else {
    for (const auto& a : reps) out.push_back(Label::n(a));
    for (int i = 1; i <= 3; ++i) out.push_back(Label::m(g.k.zero(), i));
    for (const auto& a : reps)
      for (int i = 1; i <= 3; ++i) out.push_back(Label::m(a, i));
  }
  return out;
}

std::vector<Label> round_robin_assignment(Variant variant, const GroupData& g, int depth) {
  const auto labels = required_labels(variant, g);
  std::vector<Label> out;
  for (int k = 2; k <= depth; ++k) out.push_back(labels[static_cast<size_t>(k - 2) % labels.size()]);
  return out;
}

XiBasis default_xi(Variant variant) { return variant == Variant::WN ? XiBasis(2, 3) : XiBasis(2, 7); }

void finalize_level(LevelSpec& level, const XiBasis& xi) {
  level.cuts_approx.clear();
  for (const auto& c : level.cuts) level.cuts_approx.push_back(xi.to_double(c));
}

TowerSchedule build_schedule(Variant variant, const GroupData& g, int depth, const std::vector<Label>& assignment,
                             const std::optional<XiBasis>& xi_opt, bool strict) {
  if (depth < 2) throw std::invalid_argument("depth must be at least 2");
  if (static_cast<int>(assignment.size()) < depth - 1)
    throw AssignmentGap("index " + std::to_string(assignment.size() + 2) + " has no label");

  TowerSchedule s;
  s.variant = variant;
  s.xi = xi_opt ? *xi_opt : default_xi(variant);
  s.strict = strict;
  s.group = g;

  const ExactReal one(1);
  for (int i = 1; i <= 2; ++i)
    if (!s.xi.less(one, i == 1 ? ExactReal::xi1() : ExactReal::xi2()))
      throw std::invalid_argument("xi" + std::to_string(i) + " = " + s.xi.xi_text(i) + " must exceed 1");
  if (variant == Variant::NM && !s.xi.less(ExactReal::xi1(), ExactReal::xi2()))
    throw std::invalid_argument("the nm construction needs xi2 > xi1");

  LevelSpec base;
  base.index = 0;
  base.h = ExactReal(1);
  s.levels.push_back(base);

  LevelSpec boot;
  boot.index = 1;
  boot.cuts = {ExactReal(0), ExactReal(1)};
  boot.h = ExactReal(3);
  finalize_level(boot, s.xi);
  s.levels.push_back(boot);

  for (int k = 2; k <= depth; ++k) {
    const Label& label = assignment[static_cast<size_t>(k - 2)];
    const long n = k - 1;
    const ExactReal h = s.h(k - 1);
    LevelSpec lv;
    lv.index = k;
    lv.label = label;
    switch (label.kind) {
      case LabelKind::Bootstrap:
        throw AssignmentGap("index " + std::to_string(k) + " carries the bootstrap label");
      case LabelKind::W: {
        if (variant != Variant::WN)
          throw std::invalid_argument("W labels belong to the wn variant (index " + std::to_string(k) + ")");
        const ExactReal xi = s.xi_value(label.i);
        for (long j = 0; j < n; ++j) lv.cuts.push_back(h * Rational(j));
        for (long j = 0; j < n; ++j) lv.cuts.push_back((h + xi) * Rational(j) + h * Rational(n));
        lv.h = h * Rational(2 * n) + xi * Rational(n);
        break;
      }
      case LabelKind::N: {
        if (!g.k.is_element(label.a)) throw std::invalid_argument("label " + label.to_string() + " is not in K");
        const long m = g.period(label.a);
        const long r = n * n * n * m;
        lv.period = m;
        if (r <= 1)
          throw DegenerateLevel("label " + label.to_string() + " at index " + std::to_string(k) + " gives #C = " +
                                std::to_string(r));
        lv.z = h * Rational(m * n);
        for (long j = 0; j < r; ++j) lv.cuts.push_back(h * Rational(j));
        lv.h = h * Rational(r);
        if (variant == Variant::WN) {
          lv.h += ExactReal(1);
        } else if (!strict) {
          lv.h += ExactReal(1);
          lv.repaired = true;
        }
        break;
      }
      case LabelKind::M: {
        if (variant != Variant::NM)
          throw std::invalid_argument("M labels belong to the nm variant (index " + std::to_string(k) + ")");
        if (!g.k.is_element(label.a)) throw std::invalid_argument("label " + label.to_string() + " is not in K");
        const ExactReal xi = s.xi_value(label.i);
        if (label.i == 3 && s.xi.less(xi, one))
          throw std::invalid_argument("M(a,3) levels need xi2 - xi1 >= 1 for the spacer condition");
        const long m = g.period(label.a);
        lv.period = m;
        const ExactReal block = h * Rational(2) + xi;
        lv.z = block * Rational(m * n);
        for (long j = 0; j < m * n; ++j) lv.d1.push_back(h * Rational(j));
        for (long j = 0; j < m * n; ++j) lv.d2.push_back((h + xi) * Rational(j) + h * Rational(m * n));
        for (long b = 0; b < n * n; ++b) {
          const ExactReal shift = *lv.z * Rational(b);
          for (const auto& d : lv.d1) lv.cuts.push_back(shift + d);
          for (const auto& d : lv.d2) lv.cuts.push_back(shift + d);
        }
        lv.h = block * Rational(m * n * n * n);
        break;
      }
    }
    if (lv.cuts.size() <= 1)
      throw DegenerateLevel("label " + label.to_string() + " at index " + std::to_string(k) + " gives #C <= 1");
    finalize_level(lv, s.xi);
    s.levels.push_back(std::move(lv));
  }
  return s;
}

TowerSchedule build_schedule_wn(const GroupData& g, int depth, const std::vector<Label>& assignment,
                                  const std::optional<XiBasis>& xi) {
  return build_schedule(Variant::WN, g, depth, assignment, xi, false);
}

TowerSchedule build_schedule_nm(const GroupData& g, int depth, const std::vector<Label>& assignment,
                                  const std::optional<XiBasis>& xi, bool strict) {
  return build_schedule(Variant::NM, g, depth, assignment, xi, strict);
}

bool ValidationReport::ok() const {
  if (!base_height || !ratio_monotone) return false;
  return std::all_of(levels.begin(), levels.end(), [](const LevelCheck& c) { return c.ok(); });
}

ValidationReport validate_schedule(const TowerSchedule& s) {
  ValidationReport rep;
  rep.base_height = s.level(0).h == ExactReal(1);
  const XiBasis& xi = s.xi;
  const ExactReal one(1);
  long double prod = 1;
  double prev_ratio = 0;
  for (int n = 1; n <= s.depth(); ++n) {
    const LevelSpec& lv = s.level(n);
    const ExactReal& hp = s.h(n - 1);
    LevelCheck c;
    c.index = n;
    c.min_and_size = lv.size() > 1 && !lv.cuts.empty() && lv.cuts.front() == ExactReal(0);
    for (size_t j = 1; j < lv.cuts.size(); ++j) {
      const auto& a = lv.cuts[j - 1];
      const auto& b = lv.cuts[j];
      if (!xi.less(a, b)) c.ordered = false;
      // Sorted and gaps of at least h_{n-1} give pairwise disjoint windows.
      if (xi.less(b - a, hp)) c.disjoint = false;
    }
    if (!c.ordered) {
      for (size_t j = 0; j < lv.cuts.size() && c.min_and_size; ++j)
        if (xi.sign(lv.cuts[j]) < 0) c.min_and_size = false;
    }
    const ExactReal top = lv.cuts.empty() ? ExactReal(0) : lv.cuts.back() + hp;
    if (xi.less_equal(top, lv.h - one)) {
      c.spacer = true;
    } else if (xi.less_equal(top, lv.h)) {
      c.spacer = false;
      c.spacer_relaxed = true;
    } else {
      c.spacer = false;
    }
    if (lv.repaired) {
      rep.repaired_levels.push_back(n);
      c.note = "spacer repaired: h_n = r h_{n-1} + 1";
    } else if (c.spacer_relaxed) {
      c.note = "max(F_{n-1} + C_n) = h_n: passes only in [0, h_n)";
    }
    c.spacer_total = lv.h - hp * Rational(lv.size());
    prod *= static_cast<long double>(lv.size());
    c.ratio = static_cast<double>(xi.to_long_double(lv.h) / prod);
    if (n > 1 && c.ratio < prev_ratio) rep.ratio_monotone = false;
    prev_ratio = c.ratio;
    rep.levels.push_back(c);
  }
  // h_n / prod #C_k = lim(h / prod #C) * mu(X_n) and mu(X_depth) >= 1 - 2c/h_depth.
  const double tail = 2.0 * spacer_constant(s) / s.h_approx(s.depth());
  rep.ratio_limit_upper = tail < 1 ? prev_ratio / (1.0 - tail) : INFINITY;
  if (!std::isfinite(rep.ratio_limit_upper)) rep.ratio_monotone = false;
  return rep;
}

DigitWord digits(const ExactReal& f, int top, const TowerSchedule& s) {
  if (s.xi.sign(f) < 0 || !s.xi.less(f, s.h(top)))
    throw OutOfRange(f.to_string() + " is outside [0, h_" + std::to_string(top) + ")");
  DigitWord w;
  w.top = top;
  ExactReal rest = f;
  int k = top;
  for (; k >= 1; --k) {
    auto idx = s.locate(k, rest);
    if (!idx) break;
    w.digits.push_back(*idx);
    rest -= s.level(k).cuts[static_cast<size_t>(*idx)];
  }
  w.pad = k;
  w.offset = rest;
  return w;
}

ExactReal reconstruct(const DigitWord& w, const TowerSchedule& s) {
  ExactReal x = w.offset;
  for (int k = w.top; k > w.pad; --k) x += s.level(k).cuts[static_cast<size_t>(w.digit_at(k))];
  return x;
}

double spacer_constant(const TowerSchedule& s) {
  double c = 1.0;
  for (int i = 1; i <= 3; ++i) {
    const double x = s.xi.to_double(s.xi_value(i));
    if (x > 0) c = std::max(c, x / 2.0);
  }
  return c * (1.0 + 1e-12);
}

Interval level_mass(int n, const TowerSchedule& s) {
  if (n < 0 || n > s.depth()) throw std::invalid_argument("level outside the schedule");
  long double lo = 1, hi = 1;
  constexpr long double rel = 1e-15L;
  for (int k = n + 1; k <= s.depth(); ++k) {
    const LevelSpec& lv = s.level(k);
    const long double f = static_cast<long double>(lv.size()) * s.xi.to_long_double(s.h(k - 1)) /
                          s.xi.to_long_double(lv.h);
    lo *= f * (1 - rel);
    hi *= std::min(1.0L, f * (1 + rel));
  }
  const long double tail = 2.0L * spacer_constant(s) / s.xi.to_long_double(s.h(s.depth()));
  lo *= std::max(0.0L, 1 - tail);
  return {std::nextafter(static_cast<double>(lo), 0.0), std::min(1.0, std::nextafter(static_cast<double>(hi), 2.0))};
}

Interval cylinder_measure(int n, const ExactReal& length, const TowerSchedule& s) {
  const Interval m = level_mass(n, s);
  const auto [llo, lhi] = s.xi.enclose(length);
  const auto [hlo, hhi] = s.xi.enclose(s.h(n));
  return {m.lo * llo / hhi * (1 - 1e-15), m.hi * lhi / hlo * (1 + 1e-15)};
}

}  // namespace cfflow
