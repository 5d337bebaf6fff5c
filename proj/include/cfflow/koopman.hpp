#pragma once

// Finite-window correlations <U_chi(t) f, g> for step functions on the (C,F)
// tower, computed exactly as cyclotomic combinations of ExactReal lengths.

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfflow/cocycle.hpp"

namespace cfflow {

class TimeTooLarge : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
using PrecisionExhausted = IndependenceViolation;

/// sum_k c_k omega_N^k with ExactReal coefficients.
class CycloReal {
 public:
  explicit CycloReal(long n = 1) : c_(static_cast<size_t>(n)) {}
  long order() const { return static_cast<long>(c_.size()); }
  const ExactReal& coeff(long k) const { return c_[static_cast<size_t>(k)]; }
  void add(long k, const ExactReal& x);
  /// this += sum_e counts[e] * omega^e * other
  void add_convolved(const std::vector<long>& counts, const CycloReal& other);
  CycloReal& operator*=(const Rational& q);
  CycloReal conj() const;
  /// Canonical coefficients modulo the cyclotomic polynomial.
  std::vector<ExactReal> reduced() const;
  bool equals(const CycloReal& o) const;
  std::complex<double> to_complex(const XiBasis& xi) const;

 private:
  std::vector<ExactReal> c_;
};

/// Piecewise-constant function on F_level; weight q * omega_N^root on [lo, hi).
struct StepPiece {
  ExactReal lo, hi;
  Rational weight;
  long root = 0;
};

struct StepFunction {
  int level = 0;
  long roots = 1;  // N: weights live in Q(omega_N)
  std::vector<StepPiece> pieces;  // sorted, disjoint
  std::string name;

  static StepFunction indicator(int level, const ExactReal& lo, const ExactReal& hi, long roots,
                                const std::string& name = "");
  /// The same function viewed at a higher level (copies under every digit path, zero on spacers).
  StepFunction lift(int to_level, const TowerSchedule& s) const;
  Rational sup_weight() const;
};

/// Cells of F_level on which every digit (and so the partial cocycle sum) is constant.
struct Cell {
  ExactReal lo, hi;
  Element a_sum;       // sum_{k <= level} alpha_k(digit_k), padded digits contribute alpha_k(0)
  long top_digit = -1;  // cut index at the level itself, -1 on its spacers
};
std::vector<Cell> level_cells(int level, const TowerSchedule& s, const CocycleTable& table);

/// Column indicators 1_{[F_{k-1} + c]_k}, c in C_k, for k in `levels`; with twist, weighted by chi(A_k).
std::vector<StepFunction> column_family(const std::vector<int>& levels, const TowerSchedule& s,
                                        const CocycleTable& table, const Character& chi, bool twisted);

struct CorrelationReport {
  std::string f_name, g_name;
  Element chi;
  ExactReal t;
  int depth = 0;
  std::complex<double> value;
  double deficiency = 0;
  CycloReal window;  // J_D(t): the exact window integral before normalization
};

/// Per-sector data shared by correlators: difference tables of C_k with their chi-weight counts.
/// Holds references to the schedule and table, which must outlive it.
class SectorContext;
std::shared_ptr<SectorContext> make_sector(const TowerSchedule& s, const CocycleTable& table, const Character& chi,
                                           int depth);

/// Evaluates <U_chi(t) f, g> at truncation depth for many t, memoizing the level recursion.
class Correlator {
 public:
  Correlator(std::shared_ptr<SectorContext> ctx, const StepFunction& f, const StepFunction& g);
  Correlator(const TowerSchedule& s, const CocycleTable& table, const StepFunction& f, const StepFunction& g,
             const Character& chi, int depth);
  ~Correlator();
  Correlator(Correlator&&) noexcept;

  /// t may be negative; negative times are folded by conjugation.
  CorrelationReport at(const ExactReal& t);
  /// Exact window integral J_D(t) for t >= 0.
  CycloReal window(const ExactReal& t);
  /// <f, g> computed directly at the function level, normalized by the level mass.
  std::complex<double> inner_product() const;
  double norm_f() const;
  double norm_g() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CorrelationReport correlation(const StepFunction& f, const StepFunction& g, const Character& chi, const ExactReal& t,
                              int depth, const TowerSchedule& s, const CocycleTable& table);

/// ||f||^2 as an exact length sum (before the level-mass factor) and its normalized value.
ExactReal norm_squared_window(const StepFunction& f);
double norm(const StepFunction& f, const TowerSchedule& s);

// ---------------------------------------------------------------------------
// Probes

enum class ResidualMode { Weak, Strong };

struct ComboTerm {
  std::complex<double> coeff;
  ExactReal time;
};

struct ResidualReport {
  int level = 0;         // labeled level n + 1
  ExactReal time;        // the probe time
  double residual = 0;   // normalized by ||f|| (strong) or ||f|| ||g|| (weak), max over the family
  double deficiency = 0; // normalized accumulated deficiency at the maximizing function
  std::string worst;     // name of the maximizing test function
};

/// Residual of U(time) toward sum_k c_k U(t_k) on the family (weak: probe g = f).
ResidualReport residual(const std::vector<StepFunction>& family, const Character& chi, const ExactReal& time,
                        const std::vector<ComboTerm>& combo, int depth, const TowerSchedule& s,
                        const CocycleTable& table, ResidualMode mode = ResidualMode::Weak);

/// Target combination at a labeled level: conj(l_chi(a)) I at N levels (literal operator convention),
/// 0.5 (I + U(-xi_i)) at W levels, 0.5 (conj(l_chi(j a)) I + U(-j xi_i)) at M levels.
std::vector<ComboTerm> weak_limit_target(const LevelSpec& level, const Character& chi, long j,
                                         const TowerSchedule& s);

struct LevelSeries {
  std::string label;
  std::vector<ResidualReport> rows;
  bool non_increasing() const;
};

/// Residuals along every level carrying `label` (time j h_{n}), test family levels <= min(3, n).
LevelSeries weak_limit_series(const Label& label, const Character& chi, long j, const TowerSchedule& s,
                              const CocycleTable& table, int depth, ResidualMode mode = ResidualMode::Weak);

struct RigidityRow {
  int m = 0;
  ExactReal shift;        // z_{m+1} + ... + z_D
  double residual = 0;    // weak, probe g = S f
  double strong = 0;      // ||U(z_1+...+z_m) f - S f|| point estimate
  double deficiency = 0;
  std::string worst;
};
std::vector<RigidityRow> rigidity_residual(const std::vector<int>& ms, const TowerSchedule& s,
                                           const CocycleTable& table, int depth);

struct SingularityRow {
  int level = 0;
  double gap = 0;
  double residual_chi = 0, residual_eta = 0;
  double deficiency = 0;
  double bound = 0;  // target_gap - 2 (max residual + deficiency)
};
struct MultiplicityEvidence {
  Element chi, eta, a;
  std::complex<double> l_chi, l_eta;
  double target_gap = 0;
  std::vector<SingularityRow> rows;
};
class NoSeparatingElement : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class PreconditionFailed : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
MultiplicityEvidence singularity_probe(const Character& chi, const Character& eta, const TowerSchedule& s,
                                       const CocycleTable& table, int depth);

struct EigenRow {
  double lambda = 0;
  double bound = 0;
};
struct EigenReport {
  std::vector<int> levels;
  std::vector<EigenRow> rows;
  double min_bound() const;
};
/// Lower bounds on ||U(h_n) f - e^{i lambda h_n} f|| / ||f||, max over the W levels, min over the family
/// (trivial and twisted sectors).
EigenReport eigenvalue_absence_probe(const std::vector<double>& lambdas, const TowerSchedule& s,
                                     const CocycleTable& table, int depth, int levels_per_class = 1);

struct CyclicityReport {
  long vectors = 0;
  long dimension = 0;
  long rank = 0;
  std::vector<double> eigenvalues;  // Gram spectrum, descending
  double margin = 0;                // smallest retained / largest discarded eigenvalue ratio
  bool tensor = false;
};
/// Gram rank of {U(t) f : t in grid} (EVIDENCE only).
CyclicityReport cyclicity_probe(const StepFunction& f, const Character& chi, const std::vector<ExactReal>& grid,
                                long dimension, const TowerSchedule& s, const CocycleTable& table, int depth);
/// Gram rank of {U(t) f (x) U'(t) g : t in grid} with U in sector chi1 and U' in sector chi2 (EVIDENCE only).
CyclicityReport tensor_cyclicity_probe(const StepFunction& f, const Character& chi1, const StepFunction& g,
                                       const Character& chi2, const std::vector<ExactReal>& grid, long dimension,
                                       const TowerSchedule& s, const CocycleTable& table, int depth);

struct PeriodogramRow {
  double omega = 0;
  double power = 0;
};
/// Periodogram of t -> <U(t) f, f> on t_j = t0 + j dt, j < count.
std::vector<PeriodogramRow> periodogram(const StepFunction& f, const Character& chi, const ExactReal& t0,
                                        const ExactReal& dt, long count, const std::vector<double>& omegas,
                                        const TowerSchedule& s, const CocycleTable& table, int depth);

}  // namespace cfflow
