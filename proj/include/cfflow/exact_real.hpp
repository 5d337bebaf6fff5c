#pragma once

// Exact arithmetic in the rational module Q + Q*xi1 + Q*xi2.
//
// Every tower height, cut position and probe time lives here. Equality is
// structural (1, xi1, xi2 are assumed rationally independent); ordering is
// decided by evaluating the difference at escalating precision.

#include <array>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace cfflow {

using Rational = mpq_class;

Rational parse_rational(std::string_view text);
std::string rational_to_string(const Rational& q);
/// a / b in canonical form.
Rational ratio(long a, long b);

class IndependenceViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExactReal {
 public:
  ExactReal() = default;
  ExactReal(long v) : c_{Rational(v), Rational(0), Rational(0)} {}  // NOLINT
  ExactReal(Rational q0, Rational q1, Rational q2)
      : c_{std::move(q0), std::move(q1), std::move(q2)} {}

  static ExactReal xi1() { return {0, 1, 0}; }
  static ExactReal xi2() { return {0, 0, 1}; }
  static ExactReal rational(Rational q) { return {std::move(q), 0, 0}; }

  /// Parses "q0 + q1*xi1 + q2*xi2" (terms in any order, any subset, signs allowed).
  static ExactReal parse(std::string_view text);

  const Rational& coeff(int i) const { return c_[static_cast<size_t>(i)]; }
  bool is_zero() const { return sgn(c_[0]) == 0 && sgn(c_[1]) == 0 && sgn(c_[2]) == 0; }
  bool is_rational() const { return sgn(c_[1]) == 0 && sgn(c_[2]) == 0; }

  ExactReal& operator+=(const ExactReal& o);
  ExactReal& operator-=(const ExactReal& o);
  ExactReal& operator*=(const Rational& q);

  friend ExactReal operator+(ExactReal a, const ExactReal& b) { return a += b; }
  friend ExactReal operator-(ExactReal a, const ExactReal& b) { return a -= b; }
  friend ExactReal operator*(ExactReal a, const Rational& q) { return a *= q; }
  friend ExactReal operator*(const Rational& q, ExactReal a) { return a *= q; }
  ExactReal operator-() const;

  /// Structural (coefficient-wise) equality. Never consults enclosures.
  friend bool operator==(const ExactReal& a, const ExactReal& b) {
    return a.c_[0] == b.c_[0] && a.c_[1] == b.c_[1] && a.c_[2] == b.c_[2];
  }

  std::string to_string() const;

 private:
  std::array<Rational, 3> c_{};
};

ExactReal add(const ExactReal& a, const ExactReal& b);
ExactReal negate(const ExactReal& a);
ExactReal scale(const ExactReal& a, const Rational& q);

/// Lexicographic order on coefficients; a key order for maps, not the real order.
struct StructuralLess {
  bool operator()(const ExactReal& a, const ExactReal& b) const;
};

/// The pair of irrational generators, xi_i = sqrt(radicand_i).
class XiBasis {
 public:
  XiBasis();  // sqrt(2), sqrt(3)
  XiBasis(Rational radicand1, Rational radicand2);

  /// Accepts "sqrt(q)" for a positive rational q.
  static Rational parse_sqrt(std::string_view text);

  const Rational& radicand(int i) const { return r_[static_cast<size_t>(i - 1)]; }
  std::string xi_text(int i) const;

  /// Sign of a - b in the real embedding. Throws IndependenceViolation when the
  /// difference is structurally nonzero but not separable from 0 at 4096 bits.
  std::strong_ordering compare(const ExactReal& a, const ExactReal& b) const;
  int sign(const ExactReal& x) const;

  bool less(const ExactReal& a, const ExactReal& b) const { return compare(a, b) < 0; }
  bool less_equal(const ExactReal& a, const ExactReal& b) const { return compare(a, b) <= 0; }
  const ExactReal& min(const ExactReal& a, const ExactReal& b) const { return less(b, a) ? b : a; }
  const ExactReal& max(const ExactReal& a, const ExactReal& b) const { return less(a, b) ? b : a; }

  double to_double(const ExactReal& x) const;
  long double to_long_double(const ExactReal& x) const;
  /// Rigorous double enclosure [lo, hi] of x.
  std::pair<double, double> enclose(const ExactReal& x) const;

  /// Value of x at the given MPFR precision, rounded to nearest, as a decimal string.
  std::string evaluate(const ExactReal& x, long bits) const;

  static constexpr long kMinBits = 64;
  static constexpr long kMaxBits = 4096;

  friend bool operator==(const XiBasis& a, const XiBasis& b) { return a.r_ == b.r_; }

 private:
  int sign_multiprecision(const ExactReal& x) const;

  std::array<Rational, 2> r_;
  std::array<double, 2> approx_{};
};

}  // namespace cfflow
