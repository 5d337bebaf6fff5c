#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "cfflow/cyclotomic.hpp"
#include "cfflow/koopman.hpp"

namespace cfflow {

namespace {

struct Measured {
  std::complex<double> value;
  double deficiency = 0;
};

/// rho(t) = <U(t) f, f> with memoized correlator state.
class AutoCorrelation {
 public:
  AutoCorrelation(std::shared_ptr<SectorContext> ctx, const StepFunction& f) : c_(std::move(ctx), f, f) {
    nf2_ = c_.norm_f() * c_.norm_f();
  }
  Measured at(const ExactReal& t) {
    const CorrelationReport r = c_.at(t);
    return {r.value, r.deficiency};
  }
  double norm2() const { return nf2_; }

 private:
  Correlator c_;
  double nf2_ = 0;
};

std::vector<int> levels_up_to(int top) {
  std::vector<int> out;
  for (int k = 1; k <= top; ++k) out.push_back(k);
  return out;
}

std::vector<StepFunction> default_family(int n, const TowerSchedule& s, const CocycleTable& table,
                                         const Character& chi) {
  return column_family(levels_up_to(std::min(3, n)), s, table, chi, true);
}

struct Scored {
  double residual = 0;
  double deficiency = 0;
};

Scored score(AutoCorrelation& rho, const ExactReal& time, const std::vector<ComboTerm>& combo, ResidualMode mode) {
  const double n2 = rho.norm2();
  if (mode == ResidualMode::Weak) {
    Measured m = rho.at(time);
    std::complex<double> v = m.value;
    double d = m.deficiency;
    for (const auto& c : combo) {
      const Measured mk = rho.at(c.time);
      v -= c.coeff * mk.value;
      d += std::abs(c.coeff) * mk.deficiency;
    }
    return {std::abs(v) / n2, d / n2};
  }
  const Measured m0 = rho.at(ExactReal(0));
  double sq = m0.value.real();
  double d = m0.deficiency;
  for (const auto& c : combo) {
    const Measured m = rho.at(time - c.time);
    sq -= 2 * std::real(std::conj(c.coeff) * m.value);
    d += 2 * std::abs(c.coeff) * m.deficiency;
  }
  for (const auto& ck : combo) {
    for (const auto& cl : combo) {
      const Measured m = rho.at(ck.time - cl.time);
      sq += std::real(ck.coeff * std::conj(cl.coeff) * m.value);
      d += std::abs(ck.coeff) * std::abs(cl.coeff) * m.deficiency;
    }
  }
  return {std::sqrt(std::max(0.0, sq) / n2), std::sqrt(d / n2)};
}

ResidualReport residual_in(const std::shared_ptr<SectorContext>& ctx, const std::vector<StepFunction>& family,
                           const ExactReal& time, const std::vector<ComboTerm>& combo, ResidualMode mode) {
  ResidualReport rep;
  rep.time = time;
  bool first = true;
  for (const auto& f : family) {
    AutoCorrelation rho(ctx, f);
    if (rho.norm2() <= 0) continue;
    const Scored sc = score(rho, time, combo, mode);
    if (first || sc.residual > rep.residual) {
      rep.residual = sc.residual;
      rep.deficiency = sc.deficiency;
      rep.worst = f.name;
      first = false;
    }
  }
  return rep;
}

std::complex<double> conj_l(const Character& chi, const Element& a, long j, const GroupAutomorphism& v) {
  return std::conj(l_value(chi, chi.group().times(a, j), v));
}

Cyclotomic exact_l(const Character& chi, const Element& a, const GroupAutomorphism& v) {
  const LValue l = l_value_exact(chi, a, v);
  const long n = static_cast<long>(l.root_counts.size());
  Cyclotomic out(n);
  for (long e = 0; e < n; ++e)
    if (l.root_counts[static_cast<size_t>(e)] != 0) out.add_root(e, ratio(l.root_counts[static_cast<size_t>(e)], l.period));
  return out;
}

}  // namespace

ResidualReport residual(const std::vector<StepFunction>& family, const Character& chi, const ExactReal& time,
                        const std::vector<ComboTerm>& combo, int depth, const TowerSchedule& s,
                        const CocycleTable& table, ResidualMode mode) {
  return residual_in(make_sector(s, table, chi, depth), family, time, combo, mode);
}

std::vector<ComboTerm> weak_limit_target(const LevelSpec& level, const Character& chi, long j,
                                         const TowerSchedule& s) {
  const Label& lab = level.label;
  switch (lab.kind) {
    case LabelKind::N:
      return {{conj_l(chi, lab.a, j, s.group.v), ExactReal(0)}};
    case LabelKind::W:
      return {{0.5, ExactReal(0)}, {0.5, -(s.xi_value(lab.i) * Rational(j))}};
    case LabelKind::M:
      return {{0.5 * conj_l(chi, lab.a, j, s.group.v), ExactReal(0)}, {0.5, -(s.xi_value(lab.i) * Rational(j))}};
    case LabelKind::Bootstrap:
      break;
  }
  throw std::invalid_argument("the bootstrap level has no weak-limit target");
}

bool LevelSeries::non_increasing() const {
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i].residual > rows[i - 1].residual * (1 + 1e-12) + 1e-15) return false;
  return true;
}

LevelSeries weak_limit_series(const Label& label, const Character& chi, long j, const TowerSchedule& s,
                              const CocycleTable& table, int depth, ResidualMode mode) {
  LevelSeries out;
  out.label = label.to_string();
  auto ctx = make_sector(s, table, chi, depth);
  for (int lvl = 2; lvl <= depth; ++lvl) {
    const LevelSpec& lv = s.level(lvl);
    if (!(lv.label == label)) continue;
    const int n = lvl - 1;
    const ExactReal t = s.h(n) * Rational(j);
    ResidualReport r = residual_in(ctx, default_family(n, s, table, chi), t, weak_limit_target(lv, chi, j, s), mode);
    r.level = lvl;
    out.rows.push_back(std::move(r));
  }
  return out;
}

std::vector<RigidityRow> rigidity_residual(const std::vector<int>& ms, const TowerSchedule& s,
                                           const CocycleTable& table, int depth) {
  const Character triv = Character::trivial(table.k);
  auto ctx = make_sector(s, table, triv, depth);
  const std::vector<StepFunction> family = default_family(depth, s, table, triv);
  std::vector<AutoCorrelation> rhos;
  for (const auto& f : family) rhos.emplace_back(ctx, f);
  const ExactReal zd = z_prefix(depth, s);
  std::vector<RigidityRow> out;
  for (int m : ms) {
    if (m < 0 || m > depth) throw std::invalid_argument("m outside 0..depth");
    RigidityRow row;
    row.m = m;
    row.shift = zd - z_prefix(m, s);
    bool first = true;
    for (size_t i = 0; i < family.size(); ++i) {
      auto& rho = rhos[i];
      if (rho.norm2() <= 0) continue;
      const Measured m0 = rho.at(ExactReal(0));
      const Measured ms_ = rho.at(-row.shift);
      const double weak = std::abs(ms_.value - m0.value) / rho.norm2();
      const double strong = std::sqrt(std::max(0.0, 2 * (m0.value.real() - ms_.value.real())) / rho.norm2());
      if (first || weak > row.residual) {
        row.residual = weak;
        row.strong = strong;
        row.deficiency = (ms_.deficiency + m0.deficiency) / rho.norm2();
        row.worst = family[i].name;
        first = false;
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

MultiplicityEvidence singularity_probe(const Character& chi, const Character& eta, const TowerSchedule& s,
                                       const CocycleTable& table, int depth) {
  if (chi == eta) throw PreconditionFailed("the two characters coincide");
  const GroupAutomorphism dual = dual_automorphism(table.v);
  for (const auto& y : orbit(dual, chi.label()))
    if (y == eta.label()) throw PreconditionFailed("the characters lie on one dual orbit");

  MultiplicityEvidence ev;
  ev.chi = chi.label();
  ev.eta = eta.label();
  bool found = false;
  for (int lvl = 2; lvl <= depth && !found; ++lvl) {
    const Label& lab = s.level(lvl).label;
    if (lab.kind != LabelKind::N) continue;
    if (!(exact_l(chi, lab.a, table.v) == exact_l(eta, lab.a, table.v))) {
      ev.a = lab.a;
      found = true;
    }
  }
  if (!found) throw NoSeparatingElement("no N(a) level up to the depth separates the two l-values");
  ev.l_chi = l_value(chi, ev.a, table.v);
  ev.l_eta = l_value(eta, ev.a, table.v);
  ev.target_gap = std::abs(ev.l_chi - ev.l_eta);

  auto cx = make_sector(s, table, chi, depth);
  auto ce = make_sector(s, table, eta, depth);
  for (int lvl = 2; lvl <= depth; ++lvl) {
    const LevelSpec& lv = s.level(lvl);
    if (!(lv.label == Label::n(ev.a))) continue;
    const int n = lvl - 1;
    const std::vector<StepFunction> family = column_family(levels_up_to(std::min(3, n)), s, table, chi, false);
    SingularityRow row;
    row.level = lvl;
    bool first = true;
    for (const auto& f : family) {
      AutoCorrelation rx(cx, f), re(ce, f);
      if (rx.norm2() <= 0) continue;
      const Measured mx = rx.at(s.h(n));
      const Measured me = re.at(s.h(n));
      const double n2 = rx.norm2();
      const double gap = std::abs(mx.value - me.value) / n2;
      row.gap = first ? gap : std::min(row.gap, gap);
      row.residual_chi = std::max(row.residual_chi, std::abs(mx.value / n2 - std::conj(ev.l_chi)));
      row.residual_eta = std::max(row.residual_eta, std::abs(me.value / n2 - std::conj(ev.l_eta)));
      row.deficiency = std::max(row.deficiency, std::max(mx.deficiency, me.deficiency) / n2);
      first = false;
    }
    row.bound = ev.target_gap - 2 * (std::max(row.residual_chi, row.residual_eta) + row.deficiency);
    ev.rows.push_back(row);
  }
  return ev;
}

double EigenReport::min_bound() const {
  double m = INFINITY;
  for (const auto& r : rows) m = std::min(m, r.bound);
  return m;
}

EigenReport eigenvalue_absence_probe(const std::vector<double>& lambdas, const TowerSchedule& s,
                                     const CocycleTable& table, int depth, int levels_per_class) {
  EigenReport rep;
  for (int i : {1, 2}) {
    int taken = 0;
    for (int lvl = depth; lvl >= 2 && taken < levels_per_class; --lvl) {
      if (s.level(lvl).label == Label::w(i)) {
        rep.levels.push_back(lvl);
        ++taken;
      }
    }
  }
  if (rep.levels.empty()) throw std::invalid_argument("no W levels up to the depth");
  std::sort(rep.levels.begin(), rep.levels.end());
  const int n_min = rep.levels.front() - 1;

  struct Sample {
    std::complex<double> rho;
    double def;
    long double h;
  };
  std::vector<std::vector<Sample>> samples;
  for (const auto& y : table.k.elements()) {
    const Character chi(table.k, y);
    auto ctx = make_sector(s, table, chi, depth);
    const std::vector<StepFunction> family = default_family(n_min, s, table, chi);
    for (const auto& f : family) {
      AutoCorrelation rho(ctx, f);
      if (rho.norm2() <= 0) continue;
      std::vector<Sample> row;
      for (int lvl : rep.levels) {
        const Measured m = rho.at(s.h(lvl - 1));
        row.push_back({m.value / rho.norm2(), m.deficiency / rho.norm2(), s.xi.to_long_double(s.h(lvl - 1))});
      }
      samples.push_back(std::move(row));
    }
  }
  for (double lambda : lambdas) {
    double best = INFINITY;
    for (const auto& row : samples) {
      double worst = 0;
      for (const auto& smp : row) {
        const long double phase = std::fmod(static_cast<long double>(lambda) * smp.h, 2 * M_PIl);
        const std::complex<double> e(std::cos(static_cast<double>(phase)), -std::sin(static_cast<double>(phase)));
        const double sq = 2 - 2 * std::real(e * smp.rho) - 2 * smp.def;
        worst = std::max(worst, std::sqrt(std::max(0.0, sq)));
      }
      best = std::min(best, worst);
    }
    rep.rows.push_back({lambda, best});
  }
  return rep;
}

namespace {

CyclicityReport rank_report(const Eigen::MatrixXcd& gram, long dimension, double tolerance, bool tensor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.rbegin(), ev.rend());
  CyclicityReport rep;
  rep.vectors = static_cast<long>(gram.rows());
  rep.dimension = dimension;
  rep.tensor = tensor;
  const double top = ev.empty() ? 0 : ev.front();
  const double tol = std::max(tolerance, 1e-9 * top);
  for (double x : ev)
    if (x > tol) ++rep.rank;
  const double kept = rep.rank > 0 ? ev[static_cast<size_t>(rep.rank - 1)] : 0;
  const double dropped = rep.rank < static_cast<long>(ev.size()) ? std::max(ev[static_cast<size_t>(rep.rank)], tol) : tol;
  rep.margin = dropped > 0 ? kept / dropped : INFINITY;
  rep.eigenvalues = std::move(ev);
  return rep;
}

}  // namespace

CyclicityReport cyclicity_probe(const StepFunction& f, const Character& chi, const std::vector<ExactReal>& grid,
                                long dimension, const TowerSchedule& s, const CocycleTable& table, int depth) {
  AutoCorrelation rho(make_sector(s, table, chi, depth), f);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd g(n, n);
  double def = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Measured m = rho.at(grid[static_cast<size_t>(i)] - grid[static_cast<size_t>(j)]);
      g(i, j) = m.value;
      def = std::max(def, m.deficiency);
    }
  }
  return rank_report(g, dimension, def * static_cast<double>(n), false);
}

CyclicityReport tensor_cyclicity_probe(const StepFunction& f, const Character& chi1, const StepFunction& g,
                                       const Character& chi2, const std::vector<ExactReal>& grid, long dimension,
                                       const TowerSchedule& s, const CocycleTable& table, int depth) {
  AutoCorrelation r1(make_sector(s, table, chi1, depth), f);
  AutoCorrelation r2(make_sector(s, table, chi2, depth), g);
  const double b1 = r1.norm2(), b2 = r2.norm2();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd gram(n, n);
  double def = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const ExactReal dt = grid[static_cast<size_t>(i)] - grid[static_cast<size_t>(j)];
      const Measured m1 = r1.at(dt);
      const Measured m2 = r2.at(dt);
      gram(i, j) = m1.value * m2.value;
      def = std::max(def, m1.deficiency * b2 + m2.deficiency * b1 + m1.deficiency * m2.deficiency);
    }
  }
  return rank_report(gram, dimension, def * static_cast<double>(n), true);
}

std::vector<PeriodogramRow> periodogram(const StepFunction& f, const Character& chi, const ExactReal& t0,
                                        const ExactReal& dt, long count, const std::vector<double>& omegas,
                                        const TowerSchedule& s, const CocycleTable& table, int depth) {
  AutoCorrelation rho(make_sector(s, table, chi, depth), f);
  std::vector<std::complex<double>> c;
  std::vector<double> times;
  for (long j = 0; j < count; ++j) {
    const ExactReal t = t0 + dt * Rational(j);
    c.push_back(rho.at(t).value);
    times.push_back(s.xi.to_double(t));
  }
  std::vector<PeriodogramRow> out;
  for (double w : omegas) {
    std::complex<double> acc = 0;
    for (size_t j = 0; j < c.size(); ++j) acc += c[j] * std::polar(1.0, -w * times[j]);
    out.push_back({w, std::norm(acc) / static_cast<double>(std::max<long>(count, 1))});
  }
  return out;
}

}  // namespace cfflow
