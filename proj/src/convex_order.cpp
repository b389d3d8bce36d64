#include "totalrisk/convex_order.hpp"

#include <cmath>
#include <set>

#include "totalrisk/error.hpp"

namespace totalrisk {

template <class S>
S shortfall(const Distribution<S>& dist, const S& lambda) {
  S total = 0;
  for (const auto& a : dist.atoms()) {
    if (a.value > lambda) total += a.prob * (a.value - lambda);
  }
  return total;
}

namespace {

template <class S>
std::string exact_text(const S& x) {
  return Arith<S>::exact ? format_scalar(x) : std::string();
}

template <class S>
MeanCheck mean_check(const S& mean, const S& target, const S& tol) {
  return {to_double(mean), to_double(target), abs_value(S(mean - target)) <= tol};
}

// Point checkpoint at a rational lambda against e^{-lambda}.
template <class S>
Checkpoint exponential_checkpoint(const Distribution<S>& dist, const S& lambda, const S& tol) {
  Checkpoint c;
  const S value = shortfall(dist, lambda);
  c.lambda = to_double(lambda);
  c.lambda_text = exact_text(lambda);
  c.shortfall = to_double(value);
  c.reference = std::exp(-c.lambda);
  c.margin = c.reference - c.shortfall;
  c.ok = leq_exp<S>(value, S(-lambda), tol);
  return c;
}

}  // namespace

template <class S>
ShortfallReport convex_order_leq(const Distribution<S>& y, const Distribution<S>& x, const S& tol) {
  ShortfallReport report;
  report.mean_check = mean_check(y.mean(), x.mean(), tol);
  std::set<S> lambdas;
  for (const auto& a : y.atoms()) lambdas.insert(a.value);
  for (const auto& a : x.atoms()) lambdas.insert(a.value);

  std::optional<S> worst_lambda;
  S worst_margin = 0;
  for (const S& lambda : lambdas) {
    const S sy = shortfall(y, lambda);
    const S sx = shortfall(x, lambda);
    const S margin = sx - sy;
    Checkpoint c;
    c.lambda = to_double(lambda);
    c.lambda_text = exact_text(lambda);
    c.shortfall = to_double(sy);
    c.reference = to_double(sx);
    c.margin = to_double(margin);
    c.ok = margin >= -tol;
    if (!c.ok && (!worst_lambda || margin < worst_margin)) {
      worst_lambda = lambda;
      worst_margin = margin;
    }
    report.checkpoints.push_back(std::move(c));
  }
  report.holds = report.mean_check.pass && !worst_lambda;
  if (worst_lambda) {
    report.witness = OrderWitness{OrderWitness::Kind::Shortfall, to_double(*worst_lambda),
                                  exact_text(*worst_lambda), to_double(worst_margin)};
  } else if (!report.mean_check.pass) {
    report.witness = OrderWitness{OrderWitness::Kind::Mean, std::nullopt, "",
                                  report.mean_check.target - report.mean_check.mean};
  }
  return report;
}

template <class S>
ShortfallReport convex_order_vs_exponential(const Distribution<S>& dist, const S& tol) {
  if (dist.min_value() < 0) {
    throw Error(ErrorCode::NegativeSupport, "support value " + format_scalar(dist.min_value()) + " is negative");
  }
  ShortfallReport report;
  report.mean_check = mean_check(dist.mean(), S(1), tol);

  std::vector<S> breaks{S(0)};
  for (const auto& a : dist.atoms()) {
    if (a.value > breaks.back()) breaks.push_back(a.value);
  }

  for (std::size_t i = 0; i < breaks.size(); ++i) {
    Checkpoint point = exponential_checkpoint(dist, breaks[i], tol);
    const bool point_failed = !point.ok;
    report.checkpoints.push_back(std::move(point));
    if (point_failed && !report.witness) {
      const auto& c = report.checkpoints.back();
      report.witness = OrderWitness{OrderWitness::Kind::Shortfall, c.lambda, c.lambda_text, c.margin};
    }
    if (i + 1 == breaks.size()) break;  // beyond the support the shortfall is 0

    // On (breaks[i], breaks[i+1]) the shortfall is a - c * lambda.
    S c = 0;
    S a = 0;
    for (const auto& atom : dist.atoms()) {
      if (atom.value > breaks[i]) {
        c += atom.prob;
        a += atom.prob * atom.value;
      }
    }
    // Critical point lambda* = -ln c lies inside iff e^{-right} < c < e^{-left}.
    const bool inside = compare_with_exp<S>(c, S(-breaks[i])) < 0 && compare_with_exp<S>(c, S(-breaks[i + 1])) > 0;
    if (!inside) continue;

    Checkpoint critical;
    critical.interior = true;
    critical.lambda = -std::log(to_double(c));
    critical.shortfall = to_double(a) - to_double(c) * critical.lambda;
    critical.reference = to_double(c);
    critical.margin = critical.reference - critical.shortfall;
    // margin >= -tol  <=>  c <= exp(1 - (a - tol) / c)
    critical.ok = leq_exp<S>(c, S(1 - (a - tol) / c), S(0));
    const bool critical_failed = !critical.ok;
    report.checkpoints.push_back(critical);
    if (critical_failed && !report.witness) {
      // Prefer an exact rational witness: the midpoint, else a rational next to lambda*.
      const S mid = (breaks[i] + breaks[i + 1]) / 2;
      Checkpoint at_mid = exponential_checkpoint(dist, mid, tol);
      if (!at_mid.ok) {
        report.witness = OrderWitness{OrderWitness::Kind::Shortfall, at_mid.lambda, at_mid.lambda_text, at_mid.margin};
      } else {
        const S near = scalar_from_double<S>(critical.lambda);
        Checkpoint at_near = exponential_checkpoint(dist, near, tol);
        if (!at_near.ok && near > breaks[i] && near < breaks[i + 1]) {
          report.witness =
              OrderWitness{OrderWitness::Kind::Shortfall, at_near.lambda, at_near.lambda_text, at_near.margin};
        } else {
          report.witness = OrderWitness{OrderWitness::Kind::Shortfall, critical.lambda, "", critical.margin};
        }
      }
    }
  }

  report.holds = report.mean_check.pass && !report.witness;
  if (!report.mean_check.pass && !report.witness) {
    report.witness = OrderWitness{OrderWitness::Kind::Mean, std::nullopt, "",
                                  report.mean_check.target - report.mean_check.mean};
  }
  return report;
}

double exp_tail_bound(double lambda) { return std::exp(1 - lambda); }

template <class S>
TailReport check_tail(const Distribution<S>& dist, const S& lambda, const S& tol) {
  TailReport r;
  const S tail = dist.tail(lambda);
  r.lambda = to_double(lambda);
  r.lambda_text = format_scalar(lambda);
  r.tail = to_double(tail);
  r.tail_text = format_scalar(tail);
  r.bound = exp_tail_bound(r.lambda);
  r.holds = leq_exp<S>(tail, S(1 - lambda), tol);
  return r;
}

#define TOTALRISK_INSTANTIATE(S)                                                                       \
  template S shortfall<S>(const Distribution<S>&, const S&);                                           \
  template ShortfallReport convex_order_leq<S>(const Distribution<S>&, const Distribution<S>&, const S&); \
  template ShortfallReport convex_order_vs_exponential<S>(const Distribution<S>&, const S&);           \
  template TailReport check_tail<S>(const Distribution<S>&, const S&, const S&);

TOTALRISK_INSTANTIATE(Rational)
TOTALRISK_INSTANTIATE(double)

#undef TOTALRISK_INSTANTIATE

}  // namespace totalrisk
