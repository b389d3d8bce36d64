#include "totalrisk/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "totalrisk/error.hpp"

namespace totalrisk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ProbSumViolation: return "ProbSumViolation";
    case ErrorCode::OrphanNode: return "OrphanNode";
    case ErrorCode::NonUniformDepth: return "NonUniformDepth";
    case ErrorCode::ZeroBranch: return "ZeroBranch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::InvalidFiltration: return "InvalidFiltration";
    case ErrorCode::InvalidRandomTime: return "InvalidRandomTime";
    case ErrorCode::InvalidProcess: return "InvalidProcess";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::NegativeSupport: return "NegativeSupport";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::ZeroTail: return "ZeroTail";
    case ErrorCode::InvalidTable: return "InvalidTable";
    case ErrorCode::CalibrationInfeasible: return "CalibrationInfeasible";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidDensity: return "InvalidDensity";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

mpz_class pow10(unsigned long k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
  return r;
}

Rational parse_decimal(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = s.substr(e + 1);
    s = s.substr(0, e);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (!all_digits(exp_text) || exp_text.size() > 6) {
      throw Error(ErrorCode::ParseError, "bad exponent in number '" + std::string(text) + "'");
    }
    exponent = std::stol(std::string(exp_text));
    if (exp_negative) exponent = -exponent;
  }
  std::string digits;
  std::string_view int_part = s;
  std::string_view frac_part;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    int_part = s.substr(0, dot);
    frac_part = s.substr(dot + 1);
  }
  if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !all_digits(int_part)) ||
      (!frac_part.empty() && !all_digits(frac_part))) {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");
  }
  digits.append(int_part);
  digits.append(frac_part);
  exponent -= static_cast<long>(frac_part.size());
  mpz_class mantissa(digits.empty() ? std::string("0") : digits, 10);
  Rational r;
  if (exponent >= 0) {
    r = Rational(mantissa * pow10(static_cast<unsigned long>(exponent)));
  } else {
    r = Rational(mantissa, pow10(static_cast<unsigned long>(-exponent)));
    r.canonicalize();
  }
  return negative ? Rational(-r) : r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_decimal(text);
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, "non-finite number");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return parse_decimal(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

template <>
Rational parse_scalar<Rational>(std::string_view text) {
  return parse_rational(text);
}

template <>
double parse_scalar<double>(std::string_view text) {
  return to_double(parse_rational(text));
}

template <>
Rational scalar_from_double<Rational>(double x) {
  return rational_from_double(x);
}

template <>
double scalar_from_double<double>(double x) {
  return x;
}

double to_double(const Rational& x) { return mpq_get_d(x.get_mpq_t()); }

std::string format_scalar(const Rational& x) { return x.get_str(); }

std::string format_scalar(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Fixed-point enclosures. A value v is carried as an integer pair (lo, hi)
// with lo / 2^w <= v <= hi / 2^w.

namespace {

struct Fixed {
  mpz_class lo;
  mpz_class hi;
};

mpz_class floor_scaled(const Rational& q, unsigned w) {
  mpz_class n = q.get_num() << w;
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), n.get_mpz_t(), q.get_den_mpz_t());
  return r;
}

mpz_class ceil_scaled(const Rational& q, unsigned w) {
  mpz_class n = q.get_num() << w;
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), n.get_mpz_t(), q.get_den_mpz_t());
  return r;
}

mpz_class ceil_shift(const mpz_class& v, unsigned w) {
  mpz_class r;
  mpz_cdiv_q_2exp(r.get_mpz_t(), v.get_mpz_t(), w);
  return r;
}

mpz_class floor_shift(const mpz_class& v, unsigned w) {
  mpz_class r;
  mpz_fdiv_q_2exp(r.get_mpz_t(), v.get_mpz_t(), w);
  return r;
}

// Taylor sum of e^(F/2^w) for 0 <= F <= 2^w; each term rounded in the
// direction of the bound being built.
mpz_class taylor_scaled(const mpz_class& f, unsigned w, bool upper) {
  const mpz_class one = mpz_class(1) << w;
  mpz_class sum = one;
  mpz_class term = one;
  for (unsigned long k = 1;; ++k) {
    mpz_class prod = term * f;
    mpz_class denom = mpz_class(k) << w;
    mpz_class next;
    if (upper) {
      mpz_cdiv_q(next.get_mpz_t(), prod.get_mpz_t(), denom.get_mpz_t());
    } else {
      mpz_fdiv_q(next.get_mpz_t(), prod.get_mpz_t(), denom.get_mpz_t());
    }
    if (next == 0) break;
    sum += next;
    term = next;
    if (term <= 1) {
      // Tail after a term t is at most 2t for arguments in [0, 1].
      if (upper) sum += 2 * term + 1;
      break;
    }
  }
  return sum;
}

Fixed exp_unit(const Rational& f, unsigned w) {
  return {taylor_scaled(floor_scaled(f, w), w, false), taylor_scaled(ceil_scaled(f, w), w, true)};
}

Fixed multiply(const Fixed& a, const Fixed& b, unsigned w) {
  return {floor_shift(a.lo * b.lo, w), ceil_shift(a.hi * b.hi, w)};
}

unsigned bit_length(const mpz_class& n) {
  return n == 0 ? 0u : static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2));
}

}  // namespace

Interval exp_enclosure(const Rational& x, unsigned bits) {
  if (x == 0) return {Rational(1), Rational(1)};
  const bool negative = sgn(x) < 0;
  const Rational y = negative ? Rational(-x) : x;
  mpz_class whole;
  mpz_fdiv_q(whole.get_mpz_t(), y.get_num_mpz_t(), y.get_den_mpz_t());
  const Rational frac = y - Rational(whole);
  const unsigned w = bits + 2 * bit_length(whole) + 16;

  Fixed result = exp_unit(frac, w);
  if (whole > 0) {
    Fixed base = exp_unit(Rational(1), w);
    Fixed power{mpz_class(1) << w, mpz_class(1) << w};
    mpz_class e = whole;
    while (e > 0) {
      if (mpz_odd_p(e.get_mpz_t())) power = multiply(power, base, w);
      e >>= 1;
      if (e > 0) base = multiply(base, base, w);
    }
    result = multiply(result, power, w);
  }
  const mpz_class scale = mpz_class(1) << w;
  Rational lo(result.lo, scale);
  Rational hi(result.hi, scale);
  lo.canonicalize();
  hi.canonicalize();
  if (negative) return {Rational(1 / hi), Rational(1 / lo)};
  return {lo, hi};
}

namespace {

constexpr unsigned kStartBits = 64;
constexpr unsigned kMaxBits = 1u << 15;

std::vector<ExpTerm<Rational>> group_terms(std::span<const ExpTerm<Rational>> terms) {
  std::map<Rational, Rational> by_exponent;
  for (const auto& t : terms) {
    if (t.coef == 0) continue;
    by_exponent[t.exponent] += t.coef;
  }
  std::vector<ExpTerm<Rational>> out;
  for (auto& [exponent, coef] : by_exponent) {
    if (coef != 0) out.push_back({coef, exponent});
  }
  return out;
}

}  // namespace

int sign_of_exp_sum(std::span<const ExpTerm<Rational>> terms) {
  auto grouped = group_terms(terms);
  if (grouped.empty()) return 0;
  if (grouped.size() == 1) return sgn(grouped.front().coef);
  // Factor out the smallest exponent (map order keeps it first).
  const Rational base = grouped.front().exponent;
  bool all_positive = true;
  bool all_negative = true;
  for (const auto& t : grouped) {
    all_positive = all_positive && sgn(t.coef) > 0;
    all_negative = all_negative && sgn(t.coef) < 0;
  }
  if (all_positive) return 1;
  if (all_negative) return -1;
  for (unsigned bits = kStartBits; bits <= kMaxBits; bits *= 2) {
    Rational lo = 0;
    Rational hi = 0;
    for (const auto& t : grouped) {
      const Interval e = exp_enclosure(Rational(t.exponent - base), bits);
      if (sgn(t.coef) > 0) {
        lo += t.coef * e.lo;
        hi += t.coef * e.hi;
      } else {
        lo += t.coef * e.hi;
        hi += t.coef * e.lo;
      }
    }
    if (sgn(lo) > 0) return 1;
    if (sgn(hi) < 0) return -1;
  }
  throw Error(ErrorCode::PrecisionExhausted, "could not decide the sign of an exponential sum");
}

int sign_of_exp_sum(std::span<const ExpTerm<double>> terms) {
  const double v = eval_exp_sum(terms);
  return (v > 0) - (v < 0);
}

double eval_exp_sum(std::span<const ExpTerm<Rational>> terms) {
  double s = 0;
  for (const auto& t : terms) s += to_double(t.coef) * std::exp(to_double(t.exponent));
  return s;
}

double eval_exp_sum(std::span<const ExpTerm<double>> terms) {
  double s = 0;
  for (const auto& t : terms) s += t.coef * std::exp(t.exponent);
  return s;
}

}  // namespace totalrisk
