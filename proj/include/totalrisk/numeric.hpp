#pragma once

// Scalar support shared by every module: the exact rational type, per-mode
// traits, text conversion, and certified comparisons involving e^x.

#include <gmpxx.h>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace totalrisk {

using Rational = mpq_class;

template <class S>
struct Arith;

template <>
struct Arith<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";
  static Rational default_tol() { return Rational(0); }
  // Slack allowed when checking that probabilities sum to one.
  static Rational sum_slack() { return Rational(0); }
};

template <>
struct Arith<double> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
  static double default_tol() { return 1e-10; }
  static double sum_slack() { return 1e-12; }
};

/// Parses "a/b", integers and decimal/scientific literals ("0.25", "1e-3").
/// Decimal text is converted exactly.
Rational parse_rational(std::string_view text);

/// The rational whose decimal expansion is the shortest round-trip text of x,
/// so 0.1 maps to 1/10 rather than to the binary value of the double.
Rational rational_from_double(double x);

template <class S>
S parse_scalar(std::string_view text);

template <class S>
S scalar_from_double(double x);

double to_double(const Rational& x);
inline double to_double(double x) { return x; }

std::string format_scalar(const Rational& x);
/// 17 significant digits, fixed across platforms.
std::string format_scalar(double x);

inline Rational abs_value(const Rational& x) { return abs(x); }
inline double abs_value(double x) { return x < 0 ? -x : x; }

// ---------------------------------------------------------------------------
// Certified exponentials.

struct Interval {
  Rational lo;
  Rational hi;
};

/// Dyadic enclosure lo <= e^x <= hi with relative width about 2^-bits.
Interval exp_enclosure(const Rational& x, unsigned bits);

/// coef * e^exponent
template <class S>
struct ExpTerm {
  S coef;
  S exponent;
};

/// Sign of sum_i coef_i * e^{exponent_i}. The rational overload is certified:
/// terms are grouped by exact exponent and the remaining sum is enclosed at
/// increasing precision until its sign is decided. Distinct rational
/// exponents give linearly independent exponentials, so a nonzero grouped sum
/// is always decided eventually.
int sign_of_exp_sum(std::span<const ExpTerm<Rational>> terms);
int sign_of_exp_sum(std::span<const ExpTerm<double>> terms);

/// Floating evaluation of the same sum (for reporting margins).
double eval_exp_sum(std::span<const ExpTerm<Rational>> terms);
double eval_exp_sum(std::span<const ExpTerm<double>> terms);

/// a <= e^x + tol, decided without rounding doubt in exact mode.
template <class S>
bool leq_exp(const S& a, const S& x, const S& tol) {
  const ExpTerm<S> terms[] = {{S(1), x}, {S(tol - a), S(0)}};
  return sign_of_exp_sum(std::span<const ExpTerm<S>>(terms)) >= 0;
}

/// Sign of a - e^x.
template <class S>
int compare_with_exp(const S& a, const S& x) {
  const ExpTerm<S> terms[] = {{S(a), S(0)}, {S(-1), x}};
  return sign_of_exp_sum(std::span<const ExpTerm<S>>(terms));
}

}  // namespace totalrisk
