#pragma once

// Elements of Q(omega_N) stored as rational coefficient vectors over the
// powers 1, omega, ..., omega^(N-1). The representation is redundant; equality
// and rationality are decided after reduction modulo the N-th cyclotomic polynomial.

#include <complex>
#include <optional>
#include <vector>

#include "cfflow/exact_real.hpp"

namespace cfflow {

/// Integer coefficients of Phi_n, lowest degree first.
std::vector<long> cyclotomic_polynomial(long n);

class Cyclotomic {
 public:
  explicit Cyclotomic(long n = 1);
  static Cyclotomic root(long k, long n);
  static Cyclotomic rational(const Rational& q, long n);

  long order() const { return n_; }
  const Rational& coeff(long k) const { return c_[static_cast<size_t>(k)]; }
  void add_root(long k, const Rational& q);

  Cyclotomic& operator+=(const Cyclotomic& o);
  Cyclotomic& operator-=(const Cyclotomic& o);
  Cyclotomic& operator*=(const Rational& q);
  friend Cyclotomic operator+(Cyclotomic a, const Cyclotomic& b) { return a += b; }
  friend Cyclotomic operator-(Cyclotomic a, const Cyclotomic& b) { return a -= b; }
  friend Cyclotomic operator*(Cyclotomic a, const Rational& q) { return a *= q; }
  friend Cyclotomic operator*(const Cyclotomic& a, const Cyclotomic& b);

  Cyclotomic conj() const;
  /// Canonical form: coefficients of degree < phi(N).
  std::vector<Rational> reduced() const;
  bool is_zero() const;
  std::optional<Rational> as_rational() const;
  std::complex<double> to_complex() const;

  friend bool operator==(const Cyclotomic& a, const Cyclotomic& b) { return (a - b).is_zero(); }

 private:
  long n_;
  std::vector<Rational> c_;
};

}  // namespace cfflow
