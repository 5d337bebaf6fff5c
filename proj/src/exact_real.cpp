#include "cfflow/exact_real.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include <mpfr.h>

namespace cfflow {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// RAII wrapper; MPFR has no C++ interface in the system headers.
struct Mpfr {
  mpfr_t v;
  explicit Mpfr(long bits) { mpfr_init2(v, bits); }
  ~Mpfr() { mpfr_clear(v); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
};

}  // namespace

Rational parse_rational(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  std::string s(text);
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    bool neg = s[0] == '-';
    std::string body = (neg || s[0] == '+') ? s.substr(1) : s;
    dot = body.find('.');
    std::string digits = body.substr(0, dot) + body.substr(dot + 1);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad decimal literal: " + s);
    mpz_class num(digits, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, body.size() - dot - 1);
    Rational q(num, den);
    q.canonicalize();
    return neg ? Rational(-q) : q;
  }
  if (s[0] == '+') s.erase(0, 1);
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + std::string(text));
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
  q.canonicalize();
  return q;
}

Rational ratio(long a, long b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

std::string rational_to_string(const Rational& q) { return q.get_str(10); }

ExactReal& ExactReal::operator+=(const ExactReal& o) {
  for (size_t i = 0; i < 3; ++i) c_[i] += o.c_[i];
  return *this;
}

ExactReal& ExactReal::operator-=(const ExactReal& o) {
  for (size_t i = 0; i < 3; ++i) c_[i] -= o.c_[i];
  return *this;
}

ExactReal& ExactReal::operator*=(const Rational& q) {
  for (auto& c : c_) c *= q;
  return *this;
}

ExactReal ExactReal::operator-() const { return {-c_[0], -c_[1], -c_[2]}; }

ExactReal add(const ExactReal& a, const ExactReal& b) { return a + b; }
ExactReal negate(const ExactReal& a) { return -a; }
ExactReal scale(const ExactReal& a, const Rational& q) { return a * q; }

std::string ExactReal::to_string() const {
  std::ostringstream out;
  out << rational_to_string(c_[0]);
  for (int i = 1; i <= 2; ++i) {
    const Rational& q = c_[static_cast<size_t>(i)];
    if (sgn(q) < 0)
      out << " - " << rational_to_string(Rational(-q));
    else
      out << " + " << rational_to_string(q);
    out << "*xi" << i;
  }
  return out.str();
}

ExactReal ExactReal::parse(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) throw std::invalid_argument("empty exact-real literal");

  ExactReal out;
  size_t pos = 0;
  while (pos < s.size()) {
    int sign = 1;
    if (s[pos] == '+' || s[pos] == '-') {
      sign = s[pos] == '-' ? -1 : 1;
      ++pos;
    } else if (pos != 0) {
      throw std::invalid_argument("expected '+' or '-' in: " + s);
    }
    size_t end = pos;
    while (end < s.size() && s[end] != '+' && s[end] != '-') ++end;
    std::string term = s.substr(pos, end - pos);
    if (term.empty()) throw std::invalid_argument("empty term in: " + s);
    pos = end;

    int slot = 0;
    std::string coeff = term;
    for (int i = 1; i <= 2; ++i) {
      const std::string name = "xi" + std::to_string(i);
      if (term.size() >= name.size() && term.compare(term.size() - name.size(), name.size(), name) == 0) {
        slot = i;
        coeff = term.substr(0, term.size() - name.size());
        if (!coeff.empty()) {
          if (coeff.back() != '*') throw std::invalid_argument("expected '*' before " + name + " in: " + s);
          coeff.pop_back();
        }
        break;
      }
    }
    Rational q = coeff.empty() ? Rational(1) : parse_rational(coeff);
    if (sign < 0) q = -q;
    out.c_[static_cast<size_t>(slot)] += q;
  }
  return out;
}

bool StructuralLess::operator()(const ExactReal& a, const ExactReal& b) const {
  for (int i = 0; i < 3; ++i) {
    int c = cmp(a.coeff(i), b.coeff(i));
    if (c != 0) return c < 0;
  }
  return false;
}

XiBasis::XiBasis() : XiBasis(Rational(2), Rational(3)) {}

XiBasis::XiBasis(Rational radicand1, Rational radicand2) : r_{std::move(radicand1), std::move(radicand2)} {
  for (size_t i = 0; i < 2; ++i) {
    r_[i].canonicalize();
    if (sgn(r_[i]) <= 0) throw std::invalid_argument("xi radicand must be positive");
    approx_[i] = std::sqrt(r_[i].get_d());
  }
}

Rational XiBasis::parse_sqrt(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.rfind("sqrt(", 0) != 0 || s.back() != ')')
    throw std::invalid_argument("xi must be given as sqrt(q): " + std::string(text));
  Rational q = parse_rational(s.substr(5, s.size() - 6));
  if (sgn(q) <= 0) throw std::invalid_argument("xi radicand must be positive: " + std::string(text));
  return q;
}

std::string XiBasis::xi_text(int i) const { return "sqrt(" + rational_to_string(radicand(i)) + ")"; }

int XiBasis::sign(const ExactReal& x) const {
  if (x.is_zero()) return 0;
  if (x.is_rational()) return sgn(x.coeff(0));
  // Fast path: double evaluation with an a-priori error bound.
  const double d0 = x.coeff(0).get_d();
  const double t1 = x.coeff(1).get_d() * approx_[0];
  const double t2 = x.coeff(2).get_d() * approx_[1];
  const double v = d0 + t1 + t2;
  const double bound = std::ldexp(std::fabs(d0) + std::fabs(t1) + std::fabs(t2), -46);
  if (std::isfinite(v) && std::isfinite(bound) && std::fabs(v) > bound) return v > 0 ? 1 : -1;
  return sign_multiprecision(x);
}

int XiBasis::sign_multiprecision(const ExactReal& x) const {
  for (long bits = kMinBits; bits <= kMaxBits; bits *= 2) {
    Mpfr acc(bits), term(bits), root(bits), mag(bits), bound(bits);
    mpfr_set_q(acc.v, x.coeff(0).get_mpq_t(), MPFR_RNDN);
    mpfr_abs(mag.v, acc.v, MPFR_RNDU);
    for (int i = 1; i <= 2; ++i) {
      mpfr_set_q(root.v, radicand(i).get_mpq_t(), MPFR_RNDN);
      mpfr_sqrt(root.v, root.v, MPFR_RNDN);
      mpfr_set_q(term.v, x.coeff(i).get_mpq_t(), MPFR_RNDN);
      mpfr_mul(term.v, term.v, root.v, MPFR_RNDN);
      mpfr_add(acc.v, acc.v, term.v, MPFR_RNDN);
      mpfr_abs(term.v, term.v, MPFR_RNDU);
      mpfr_add(mag.v, mag.v, term.v, MPFR_RNDU);
    }
    // Fewer than ten roundings, each of relative size 2^-bits.
    mpfr_mul_2si(bound.v, mag.v, 5 - bits, MPFR_RNDU);
    mpfr_abs(term.v, acc.v, MPFR_RNDN);
    if (mpfr_cmp(term.v, bound.v) > 0) return mpfr_sgn(acc.v) > 0 ? 1 : -1;
  }
  throw IndependenceViolation("cannot separate " + x.to_string() + " from 0 at " + std::to_string(kMaxBits) +
                              " bits with xi1=" + xi_text(1) + ", xi2=" + xi_text(2));
}

std::strong_ordering XiBasis::compare(const ExactReal& a, const ExactReal& b) const {
  if (a == b) return std::strong_ordering::equal;
  int s = sign(a - b);
  if (s == 0) return std::strong_ordering::equal;
  return s < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
}

double XiBasis::to_double(const ExactReal& x) const {
  return x.coeff(0).get_d() + x.coeff(1).get_d() * approx_[0] + x.coeff(2).get_d() * approx_[1];
}

long double XiBasis::to_long_double(const ExactReal& x) const {
  Mpfr acc(128), term(128), root(128);
  mpfr_set_q(acc.v, x.coeff(0).get_mpq_t(), MPFR_RNDN);
  for (int i = 1; i <= 2; ++i) {
    mpfr_set_q(root.v, radicand(i).get_mpq_t(), MPFR_RNDN);
    mpfr_sqrt(root.v, root.v, MPFR_RNDN);
    mpfr_set_q(term.v, x.coeff(i).get_mpq_t(), MPFR_RNDN);
    mpfr_mul(term.v, term.v, root.v, MPFR_RNDN);
    mpfr_add(acc.v, acc.v, term.v, MPFR_RNDN);
  }
  return mpfr_get_ld(acc.v, MPFR_RNDN);
}

std::pair<double, double> XiBasis::enclose(const ExactReal& x) const {
  if (x.is_rational()) {
    Mpfr v(53);
    mpfr_set_q(v.v, x.coeff(0).get_mpq_t(), MPFR_RNDD);
    double lo = mpfr_get_d(v.v, MPFR_RNDD);
    mpfr_set_q(v.v, x.coeff(0).get_mpq_t(), MPFR_RNDU);
    return {lo, mpfr_get_d(v.v, MPFR_RNDU)};
  }
  const long double v = to_long_double(x);
  const double mid = static_cast<double>(v);
  const double slack = std::fabs(mid) * 0x1p-50 + 0x1p-1000;
  return {std::nextafter(mid - slack, -INFINITY), std::nextafter(mid + slack, INFINITY)};
}

std::string XiBasis::evaluate(const ExactReal& x, long bits) const {
  Mpfr acc(bits), term(bits), root(bits);
  mpfr_set_q(acc.v, x.coeff(0).get_mpq_t(), MPFR_RNDN);
  for (int i = 1; i <= 2; ++i) {
    mpfr_set_q(root.v, radicand(i).get_mpq_t(), MPFR_RNDN);
    mpfr_sqrt(root.v, root.v, MPFR_RNDN);
    mpfr_set_q(term.v, x.coeff(i).get_mpq_t(), MPFR_RNDN);
    mpfr_mul(term.v, term.v, root.v, MPFR_RNDN);
    mpfr_add(acc.v, acc.v, term.v, MPFR_RNDN);
  }
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Rg", static_cast<int>(bits * 3 / 10), acc.v);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

}  // namespace cfflow
