#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include "topt/errors.hpp"

namespace topt {

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator (GMP canonical form).
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long n) : v_(n) {}  // NOLINT: implicit by design, mirrors int literals
  Rational(long num, long den) {
    if (den == 0) throw Error("rational: zero denominator");
    v_ = mpq_class(num, den);
    v_.canonicalize();
  }
  explicit Rational(mpq_class q) : v_(std::move(q)) { v_.canonicalize(); }

  /// Exact binary expansion of a finite double; no rounding.
  static Rational from_double(double d) {
    if (!std::isfinite(d)) throw Error("rational: non-finite double");
    Rational r;
    mpq_set_d(r.v_.get_mpq_t(), d);
    return r;
  }

  /// Accepts "p/q", plain integers, and decimal notation ("0.25", "-1.5e-2").
  static Rational parse(const std::string& text);

  double to_double() const { return v_.get_d(); }
  std::string str() const { return v_.get_str(); }
  int sign() const { return sgn(v_); }
  bool is_zero() const { return sgn(v_) == 0; }
  const mpq_class& raw() const { return v_; }

  Rational operator-() const { return Rational(mpq_class(-v_)); }
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw Error("rational: division by zero");
    v_ /= o.v_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

 private:
  mpq_class v_;
};

inline Rational Rational::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ParseError("rational: empty string");

  auto slash = s.find('/');
  if (slash != std::string::npos) {
    mpz_class num, den;
    if (num.set_str(s.substr(0, slash), 10) != 0 ||
        den.set_str(s.substr(slash + 1), 10) != 0)
      throw ParseError("rational: bad fraction '" + text + "'");
    if (den == 0) throw ParseError("rational: zero denominator in '" + text + "'");
    mpq_class q(num, den);
    q.canonicalize();
    return Rational(q);
  }

  // decimal / scientific: mantissa digits over a power of ten
  std::string digits;
  long exp10 = 0;
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') neg = (s[i++] == '-');
  bool seen_digit = false;
  for (; i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'); ++i) {
    if (s[i] == '.') {
      if (digits.find('.') != std::string::npos)
        throw ParseError("rational: bad number '" + text + "'");
      digits.push_back('.');
    } else {
      digits.push_back(s[i]);
      seen_digit = true;
    }
  }
  if (!seen_digit) throw ParseError("rational: bad number '" + text + "'");
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw ParseError("rational: bad number '" + text + "'");
    try {
      exp10 = std::stol(s.substr(i + 1));
    } catch (const std::exception&) {
      throw ParseError("rational: bad exponent in '" + text + "'");
    }
  }
  auto dot = digits.find('.');
  long frac_len = 0;
  if (dot != std::string::npos) {
    frac_len = static_cast<long>(digits.size() - dot - 1);
    digits.erase(dot, 1);
  }
  if (digits.empty()) digits = "0";
  mpz_class mant;
  if (mant.set_str(digits, 10) != 0)
    throw ParseError("rational: bad number '" + text + "'");
  if (neg) mant = -mant;
  long net = exp10 - frac_len;
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(net < 0 ? -net : net));
  mpq_class q = net >= 0 ? mpq_class(mant * pow10) : mpq_class(mant, pow10);
  q.canonicalize();
  return Rational(q);
}

}  // namespace topt
