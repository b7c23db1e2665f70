#pragma once

#include <charconv>
#include <cstdint>
#include <string>

#include "topt/rational.hpp"

namespace topt {

/// Coefficient-field adapter. Arithmetic goes through the native
/// operators of F; this trait supplies the constants, conversions and
/// rendering the generic polynomial code needs.
template <class F>
struct FieldOps;

template <>
struct FieldOps<double> {
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  // Exact zero only: solver tolerances live in the solvers, not here.
  static bool is_zero(double a) { return a == 0.0; }
  static bool is_negative(double a) { return a < 0.0; }
  static double from_ratio(std::int64_t num, std::int64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static double from_double(double d) { return d; }
  static double to_double(double a) { return a; }
  static double abs(double a) { return a < 0 ? -a : a; }
  static std::string str(double a) {  // shortest round-trip form
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), a);
    return std::string(buf, res.ptr);
  }
};

template <>
struct FieldOps<Rational> {
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static bool is_zero(const Rational& a) { return a.is_zero(); }
  static bool is_negative(const Rational& a) { return a.sign() < 0; }
  static Rational from_ratio(std::int64_t num, std::int64_t den) {
    return Rational(static_cast<long>(num), static_cast<long>(den));
  }
  static Rational from_double(double d) { return Rational::from_double(d); }
  static double to_double(const Rational& a) { return a.to_double(); }
  static Rational abs(const Rational& a) { return a.sign() < 0 ? -a : a; }
  static std::string str(const Rational& a) { return a.str(); }
};

}  // namespace topt
