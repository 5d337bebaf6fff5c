#include "cfflow/koopman.hpp"

#include <algorithm>
#include <cmath>

#include "cfflow/cyclotomic.hpp"

namespace cfflow {

// ---------------------------------------------------------------------------
// CycloReal

void CycloReal::add(long k, const ExactReal& x) {
  const long n = order();
  c_[static_cast<size_t>(((k % n) + n) % n)] += x;
}

void CycloReal::add_convolved(const std::vector<long>& counts, const CycloReal& other) {
  const long n = order();
  for (long e = 0; e < n; ++e) {
    const long w = counts[static_cast<size_t>(e)];
    if (w == 0) continue;
    for (long r = 0; r < n; ++r) {
      const ExactReal& x = other.coeff(r);
      if (x.is_zero()) continue;
      c_[static_cast<size_t>((e + r) % n)] += x * Rational(w);
    }
  }
}

CycloReal& CycloReal::operator*=(const Rational& q) {
  for (auto& x : c_) x *= q;
  return *this;
}

CycloReal CycloReal::conj() const {
  const long n = order();
  CycloReal out(n);
  for (long k = 0; k < n; ++k) out.c_[static_cast<size_t>((n - k) % n)] = c_[static_cast<size_t>(k)];
  return out;
}

std::vector<ExactReal> CycloReal::reduced() const {
  const std::vector<long> phi = cyclotomic_polynomial(order());
  const long deg = static_cast<long>(phi.size()) - 1;
  std::vector<ExactReal> c = c_;
  for (long top = order() - 1; top >= deg; --top) {
    const ExactReal q = c[static_cast<size_t>(top)];
    if (q.is_zero()) continue;
    for (long i = 0; i <= deg; ++i)
      if (phi[static_cast<size_t>(i)] != 0) c[static_cast<size_t>(top - deg + i)] -= q * Rational(phi[static_cast<size_t>(i)]);
  }
  c.resize(static_cast<size_t>(deg));
  return c;
}

bool CycloReal::equals(const CycloReal& o) const {
  if (order() != o.order()) throw std::invalid_argument("cyclotomic orders differ");
  return reduced() == o.reduced();
}

std::complex<double> CycloReal::to_complex(const XiBasis& xi) const {
  const std::vector<ExactReal> r = reduced();
  std::complex<double> acc = 0;
  for (size_t k = 0; k < r.size(); ++k)
    if (!r[k].is_zero()) acc += xi.to_double(r[k]) * root_of_unity(static_cast<long>(k), order());
  return acc;
}

// ---------------------------------------------------------------------------
// Sector context

namespace {

struct Diff {
  ExactReal d;
  double approx = 0;
  std::vector<long> counts;
};

struct BasePiece {
  ExactReal lo, hi;
  double lo_a = 0, hi_a = 0;
  Rational weight;
  long root = 0;
};

}  // namespace

class SectorContext {
 public:
  SectorContext(const TowerSchedule& s, const CocycleTable& t, const Character& chi, int depth)
      : s_(s), t_(t), chi_(chi), depth_(depth), n_(chi.group().exponent()), tables_(static_cast<size_t>(depth) + 1) {
    if (depth < 1 || depth > s.depth()) throw std::invalid_argument("depth outside the schedule");
    mass_ = level_mass(depth, s);
  }

  const TowerSchedule& schedule() const { return s_; }
  const CocycleTable& table() const { return t_; }
  const Character& chi() const { return chi_; }
  int depth() const { return depth_; }
  long roots() const { return n_; }
  const Interval& mass() const { return mass_; }

  const std::vector<Diff>& diffs(int k) {
    auto& slot = tables_[static_cast<size_t>(k)];
    if (!slot.empty() || s_.level(k).cuts.empty()) return slot;
    const LevelSpec& lv = s_.level(k);
    std::vector<long> roots(lv.cuts.size());
    for (size_t j = 0; j < lv.cuts.size(); ++j) roots[j] = chi_.root_index(t_.at(k, static_cast<long>(j)));
    std::map<ExactReal, size_t, StructuralLess> index;
    for (size_t i = 0; i < lv.cuts.size(); ++i) {
      for (size_t j = 0; j < lv.cuts.size(); ++j) {
        ExactReal d = lv.cuts[i] - lv.cuts[j];
        auto [it, fresh] = index.emplace(std::move(d), slot.size());
        if (fresh) slot.push_back({it->first, lv.cuts_approx[i] - lv.cuts_approx[j], std::vector<long>(static_cast<size_t>(n_), 0)});
        const long r = ((roots[i] - roots[j]) % n_ + n_) % n_;
        ++slot[it->second].counts[static_cast<size_t>(r)];
      }
    }
    std::stable_sort(slot.begin(), slot.end(), [](const Diff& a, const Diff& b) { return a.approx < b.approx; });
    return slot;
  }

 private:
  const TowerSchedule& s_;
  const CocycleTable& t_;
  Character chi_;
  int depth_;
  long n_;
  std::vector<std::vector<Diff>> tables_;
  Interval mass_;
};

std::shared_ptr<SectorContext> make_sector(const TowerSchedule& s, const CocycleTable& table, const Character& chi,
                                           int depth) {
  return std::make_shared<SectorContext>(s, table, chi, depth);
}

namespace {

/// J_k(s) = integral over u, u + s in F_k of chi(A(u) - A(u + s)) f(u) conj g(u + s).
class DirectedEngine {
 public:
  DirectedEngine(SectorContext& ctx, const StepFunction& f, const StepFunction& g)
      : ctx_(ctx), s_(ctx.schedule()), base_(std::max(f.level, g.level)) {
    if (base_ > ctx.depth()) throw std::invalid_argument("test function above the truncation depth");
    fp_ = refine(f);
    gp_ = refine(g);
    memo_.resize(static_cast<size_t>(ctx.depth()) + 1);
    ExactReal l1(0);
    for (const auto& p : fp_) l1 += (p.hi - p.lo) * abs(p.weight);
    full1_.push_back(l1);
    for (int k = base_ + 1; k <= ctx.depth(); ++k) full1_.push_back(full1_.back() * Rational(s_.level(k).size()));
  }

  const CycloReal& window(int k, const ExactReal& s) {
    auto& memo = memo_[static_cast<size_t>(k)];
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    CycloReal out = k == base_ ? base(s) : recurse(k, s);
    return memo.emplace(s, std::move(out)).first->second;
  }

  /// Integral of |f| over {u in F_k : u >= a}.
  ExactReal escape(int k, const ExactReal& a) const {
    const XiBasis& xi = s_.xi;
    if (xi.sign(a) <= 0) return full1_[static_cast<size_t>(k - base_)];
    if (!xi.less(a, s_.h(k))) return ExactReal(0);
    if (k == base_) {
      ExactReal acc(0);
      for (const auto& p : fp_) {
        if (!xi.less(a, p.hi)) continue;
        acc += (p.hi - xi.max(a, p.lo)) * abs(p.weight);
      }
      return acc;
    }
    const auto& cuts = s_.level(k).cuts;
    const ExactReal& hp = s_.h(k - 1);
    // First cut whose copy ends after a.
    auto first = std::partition_point(cuts.begin(), cuts.end(),
                                      [&](const ExactReal& c) { return xi.less_equal(c + hp, a); });
    if (first == cuts.end()) return ExactReal(0);
    ExactReal acc(0);
    auto full = first;
    if (xi.less(*first, a)) {
      acc += escape(k - 1, a - *first);
      ++full;
    }
    acc += full1_[static_cast<size_t>(k - 1 - base_)] * Rational(static_cast<long>(cuts.end() - full));
    return acc;
  }

  Rational sup_g() const {
    Rational m(0);
    for (const auto& p : gp_)
      if (abs(p.weight) > m) m = abs(p.weight);
    return m;
  }

  int base_level() const { return base_; }

 private:
  std::vector<BasePiece> refine(const StepFunction& f) const {
    const long n = ctx_.roots();
    if (f.roots < 1 || n % f.roots != 0)
      throw std::invalid_argument("weight roots of order " + std::to_string(f.roots) + " do not divide " +
                                  std::to_string(n));
    const long scale = n / f.roots;
    const StepFunction lifted = f.lift(base_, s_);
    const std::vector<Cell> cells = level_cells(base_, s_, ctx_.table());
    const XiBasis& xi = s_.xi;
    std::vector<BasePiece> out;
    size_t c0 = 0;
    for (const auto& p : lifted.pieces) {
      if (sgn(p.weight) == 0) continue;
      while (c0 < cells.size() && xi.less_equal(cells[c0].hi, p.lo)) ++c0;
      for (size_t c = c0; c < cells.size() && xi.less(cells[c].lo, p.hi); ++c) {
        const ExactReal& lo = xi.max(p.lo, cells[c].lo);
        const ExactReal& hi = xi.min(p.hi, cells[c].hi);
        if (!xi.less(lo, hi)) continue;
        const long root = ((p.root * scale + ctx_.chi().root_index(cells[c].a_sum)) % n + n) % n;
        out.push_back({lo, hi, xi.to_double(lo), xi.to_double(hi), p.weight, root});
      }
    }
    return out;
  }

  CycloReal base(const ExactReal& s) const {
    const XiBasis& xi = s_.xi;
    const double sa = xi.to_double(s);
    const double eps = 1e-9 * (1.0 + std::abs(sa) + s_.h_approx(base_));
    CycloReal out(ctx_.roots());
    // g pieces shifted by -s; both lists are sorted and disjoint.
    size_t q0 = 0;
    for (const auto& p : fp_) {
      while (q0 < gp_.size() && gp_[q0].hi_a - sa < p.lo_a - eps) ++q0;
      for (size_t q = q0; q < gp_.size() && gp_[q].lo_a - sa < p.hi_a + eps; ++q) {
        const ExactReal glo = gp_[q].lo - s;
        const ExactReal ghi = gp_[q].hi - s;
        const ExactReal& lo = xi.max(p.lo, glo);
        const ExactReal& hi = xi.min(p.hi, ghi);
        if (!xi.less(lo, hi)) continue;
        out.add(p.root - gp_[q].root, (hi - lo) * (p.weight * gp_[q].weight));
      }
    }
    return out;
  }

  CycloReal recurse(int k, const ExactReal& s) {
    const XiBasis& xi = s_.xi;
    const ExactReal& hp = s_.h(k - 1);
    const double ha = s_.h_approx(k - 1);
    const double sa = xi.to_double(s);
    const double eps = 1e-9 * (1.0 + std::abs(sa) + ha);
    const std::vector<Diff>& table = ctx_.diffs(k);
    const ExactReal neg_hp = -hp;
    CycloReal out(ctx_.roots());
    auto it = std::lower_bound(table.begin(), table.end(), -sa - ha - eps,
                               [](const Diff& d, double v) { return d.approx < v; });
    for (; it != table.end() && it->approx <= -sa + ha + eps; ++it) {
      const ExactReal shifted = s + it->d;
      if (!xi.less(neg_hp, shifted) || !xi.less(shifted, hp)) continue;
      out.add_convolved(it->counts, window(k - 1, shifted));
    }
    return out;
  }

  SectorContext& ctx_;
  const TowerSchedule& s_;
  int base_;
  std::vector<BasePiece> fp_, gp_;
  std::vector<ExactReal> full1_;  // ||f||_1 over F_k, k = base..depth
  std::vector<std::map<ExactReal, CycloReal, StructuralLess>> memo_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Correlator

struct Correlator::Impl {
  std::shared_ptr<SectorContext> ctx;
  StepFunction f, g;
  std::unique_ptr<DirectedEngine> fwd, bwd;
  double nf = 0, ng = 0;

  DirectedEngine& forward() {
    if (!fwd) fwd = std::make_unique<DirectedEngine>(*ctx, f, g);
    return *fwd;
  }
  DirectedEngine& backward() {
    if (!bwd) bwd = std::make_unique<DirectedEngine>(*ctx, g, f);
    return *bwd;
  }
};

Correlator::Correlator(std::shared_ptr<SectorContext> ctx, const StepFunction& f, const StepFunction& g)
    : impl_(std::make_unique<Impl>()) {
  impl_->ctx = std::move(ctx);
  impl_->f = f;
  impl_->g = g;
  impl_->nf = norm(f, impl_->ctx->schedule());
  impl_->ng = norm(g, impl_->ctx->schedule());
}

Correlator::Correlator(const TowerSchedule& s, const CocycleTable& table, const StepFunction& f,
                       const StepFunction& g, const Character& chi, int depth)
    : Correlator(make_sector(s, table, chi, depth), f, g) {}

Correlator::~Correlator() = default;
Correlator::Correlator(Correlator&&) noexcept = default;

CycloReal Correlator::window(const ExactReal& t) {
  auto& ctx = *impl_->ctx;
  if (ctx.schedule().xi.sign(t) < 0) throw std::invalid_argument("window() needs t >= 0");
  return impl_->forward().window(ctx.depth(), t);
}

CorrelationReport Correlator::at(const ExactReal& t) {
  auto& ctx = *impl_->ctx;
  const TowerSchedule& s = ctx.schedule();
  const int d = ctx.depth();
  const bool negative = s.xi.sign(t) < 0;
  const ExactReal abs_t = negative ? -t : t;
  if (!s.xi.less(abs_t, s.h(d)))
    throw TimeTooLarge("|t| = " + abs_t.to_string() + " is not below h_" + std::to_string(d));
  DirectedEngine& e = negative ? impl_->backward() : impl_->forward();
  CycloReal j = e.window(d, abs_t);
  const ExactReal esc = e.escape(d, s.h(d) - abs_t);

  CorrelationReport r;
  r.f_name = impl_->f.name;
  r.g_name = impl_->g.name;
  r.chi = ctx.chi().label();
  r.t = t;
  r.depth = d;
  const double hd = s.h_approx(d);
  const Interval& mass = ctx.mass();
  const double mid = 0.5 * (mass.lo + mass.hi);
  const std::complex<double> raw = j.to_complex(s.xi);
  r.value = negative ? std::conj(raw) * (mid / hd) : raw * (mid / hd);
  const double sup = e.sup_g().get_d();
  r.deficiency = ((mass.hi / hd) * sup * s.xi.to_double(esc) + 0.5 * (mass.hi - mass.lo) * std::abs(raw) / hd) *
                 (1 + 1e-12);
  r.window = negative ? j.conj() : std::move(j);
  return r;
}

std::complex<double> Correlator::inner_product() const {
  auto& ctx = *impl_->ctx;
  DirectedEngine e(ctx, impl_->f, impl_->g);
  const int base = e.base_level();
  const TowerSchedule& s = ctx.schedule();
  const Interval m = level_mass(base, s);
  return e.window(base, ExactReal(0)).to_complex(s.xi) * (0.5 * (m.lo + m.hi) / s.h_approx(base));
}

double Correlator::norm_f() const { return impl_->nf; }
double Correlator::norm_g() const { return impl_->ng; }

CorrelationReport correlation(const StepFunction& f, const StepFunction& g, const Character& chi, const ExactReal& t,
                              int depth, const TowerSchedule& s, const CocycleTable& table) {
  Correlator c(s, table, f, g, chi, depth);
  return c.at(t);
}

ExactReal norm_squared_window(const StepFunction& f) {
  ExactReal acc(0);
  for (const auto& p : f.pieces) acc += (p.hi - p.lo) * (p.weight * p.weight);
  return acc;
}

double norm(const StepFunction& f, const TowerSchedule& s) {
  const Interval m = level_mass(f.level, s);
  return std::sqrt(s.xi.to_double(norm_squared_window(f)) * 0.5 * (m.lo + m.hi) / s.h_approx(f.level));
}

}  // namespace cfflow
