#pragma once

// Convex-order decisions between finite laws and against the mean-one
// exponential, through the shortfall curve lambda -> E(X - lambda)^+.

#include <optional>
#include <string>
#include <vector>

#include "totalrisk/distribution.hpp"

namespace totalrisk {

/// sum_i p_i (v_i - lambda)^+
template <class S>
S shortfall(const Distribution<S>& dist, const S& lambda);

struct Checkpoint {
  double lambda = 0;
  std::string lambda_text;  // exact value when it is rational, else empty
  double shortfall = 0;
  double reference = 0;
  double margin = 0;  // reference - shortfall
  bool interior = false;  // a per-piece critical point rather than a breakpoint
  bool ok = true;         // decided exactly in rational mode
};

struct OrderWitness {
  enum class Kind { Mean, Shortfall };
  Kind kind = Kind::Shortfall;
  std::optional<double> lambda;
  std::string lambda_text;
  double margin = 0;
};

struct MeanCheck {
  double mean = 0;
  double target = 0;
  bool pass = false;
};

struct ShortfallReport {
  std::vector<Checkpoint> checkpoints;
  MeanCheck mean_check;
  bool holds = false;
  std::optional<OrderWitness> witness;  // present iff !holds
};

/// y precedes x in convex order: equal means and shortfall_y <= shortfall_x + tol
/// on the union of both supports.
template <class S>
ShortfallReport convex_order_leq(const Distribution<S>& y, const Distribution<S>& x, const S& tol);

/// dist precedes Exp(1) in convex order. Checked at every breakpoint and at
/// the critical point of each linear piece where e^{-lambda} - shortfall is
/// minimal. Throws NegativeSupport for negative support values.
template <class S>
ShortfallReport convex_order_vs_exponential(const Distribution<S>& dist, const S& tol);

/// e^{1 - lambda}
double exp_tail_bound(double lambda);

struct TailReport {
  std::string lambda_text;
  double lambda = 0;
  std::string tail_text;
  double tail = 0;   // P(X > lambda)
  double bound = 0;  // e^{1 - lambda}
  bool holds = false;
};

template <class S>
TailReport check_tail(const Distribution<S>& dist, const S& lambda, const S& tol);

}  // namespace totalrisk
