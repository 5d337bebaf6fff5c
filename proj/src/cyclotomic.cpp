#include "cfflow/cyclotomic.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include "cfflow/abelian.hpp"

namespace cfflow {

namespace {

long mod(long a, long n) {
  long r = a % n;
  return r < 0 ? r + n : r;
}

std::vector<long> poly_div_exact(std::vector<long> num, const std::vector<long>& den) {
  // den is monic.
  const size_t dn = den.size() - 1;
  if (num.size() <= dn) return {0};
  std::vector<long> q(num.size() - dn, 0);
  for (size_t i = num.size(); i-- > dn;) {
    const long lead = num[i];
    q[i - dn] = lead;
    for (size_t j = 0; j <= dn; ++j) num[i - dn + j] -= lead * den[j];
  }
  return q;
}

}  // namespace

std::vector<long> cyclotomic_polynomial(long n) {
  static std::map<long, std::vector<long>> cache;
  static std::recursive_mutex lock;
  std::lock_guard guard(lock);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  if (n < 1) throw std::invalid_argument("cyclotomic order must be positive");
  // x^n - 1 divided by Phi_d for every proper divisor d.
  std::vector<long> p(static_cast<size_t>(n) + 1, 0);
  p[0] = -1;
  p[static_cast<size_t>(n)] = 1;
  for (long d = 1; d < n; ++d)
    if (n % d == 0) p = poly_div_exact(p, cyclotomic_polynomial(d));
  cache[n] = p;
  return p;
}

Cyclotomic::Cyclotomic(long n) : n_(n), c_(static_cast<size_t>(n)) {
  if (n < 1) throw std::invalid_argument("cyclotomic order must be positive");
}

Cyclotomic Cyclotomic::root(long k, long n) {
  Cyclotomic z(n);
  z.c_[static_cast<size_t>(mod(k, n))] = 1;
  return z;
}

Cyclotomic Cyclotomic::rational(const Rational& q, long n) {
  Cyclotomic z(n);
  z.c_[0] = q;
  return z;
}

void Cyclotomic::add_root(long k, const Rational& q) { c_[static_cast<size_t>(mod(k, n_))] += q; }

Cyclotomic& Cyclotomic::operator+=(const Cyclotomic& o) {
  if (o.n_ != n_) throw std::invalid_argument("cyclotomic orders differ");
  for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Cyclotomic& Cyclotomic::operator-=(const Cyclotomic& o) {
  if (o.n_ != n_) throw std::invalid_argument("cyclotomic orders differ");
  for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Cyclotomic& Cyclotomic::operator*=(const Rational& q) {
  for (auto& c : c_) c *= q;
  return *this;
}

Cyclotomic operator*(const Cyclotomic& a, const Cyclotomic& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("cyclotomic orders differ");
  Cyclotomic out(a.n_);
  for (long i = 0; i < a.n_; ++i) {
    if (sgn(a.c_[static_cast<size_t>(i)]) == 0) continue;
    for (long j = 0; j < a.n_; ++j)
      if (sgn(b.c_[static_cast<size_t>(j)]) != 0)
        out.c_[static_cast<size_t>((i + j) % a.n_)] += a.c_[static_cast<size_t>(i)] * b.c_[static_cast<size_t>(j)];
  }
  return out;
}

Cyclotomic Cyclotomic::conj() const {
  Cyclotomic out(n_);
  for (long k = 0; k < n_; ++k) out.c_[static_cast<size_t>(mod(-k, n_))] = c_[static_cast<size_t>(k)];
  return out;
}

std::vector<Rational> Cyclotomic::reduced() const {
  const std::vector<long> phi = cyclotomic_polynomial(n_);
  const size_t deg = phi.size() - 1;
  std::vector<Rational> r = c_;
  for (size_t i = r.size(); i-- > deg;) {
    if (sgn(r[i]) == 0) continue;
    const Rational lead = r[i];
    for (size_t j = 0; j <= deg; ++j) r[i - deg + j] -= lead * phi[j];
  }
  r.resize(deg);
  return r;
}

bool Cyclotomic::is_zero() const {
  for (const auto& q : reduced())
    if (sgn(q) != 0) return false;
  return true;
}

std::optional<Rational> Cyclotomic::as_rational() const {
  const auto r = reduced();
  for (size_t k = 1; k < r.size(); ++k)
    if (sgn(r[k]) != 0) return std::nullopt;
  return r.empty() ? Rational(0) : r[0];
}

std::complex<double> Cyclotomic::to_complex() const {
  std::complex<double> s = 0;
  for (long k = 0; k < n_; ++k)
    if (sgn(c_[static_cast<size_t>(k)]) != 0) s += c_[static_cast<size_t>(k)].get_d() * root_of_unity(k, n_);
  return s;
}

}  // namespace cfflow
