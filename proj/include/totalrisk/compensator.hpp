#pragma once

// Optional projections, discrete compensators (dual previsible projections)
// and the checks built on them.

#include <optional>
#include <vector>

#include "totalrisk/report.hpp"
#include "totalrisk/tree.hpp"

namespace totalrisk {

/// Per-leaf nondecreasing path A(leaf, 0..T) with A(leaf, 0) = 0 and
/// A(leaf, T) = 1.
template <class S>
class RawIncreasingProcess {
 public:
  explicit RawIncreasingProcess(std::vector<std::vector<S>> paths);

  /// A(leaf, n) = 1{Z(leaf) <= n}; Z must be finite and at most `horizon`.
  static RawIncreasingProcess from_random_time(const RandomTime& z, int horizon);

  int horizon() const { return horizon_; }
  int num_leaves() const { return static_cast<int>(paths_.size()); }
  const S& at(int leaf, int step) const { return paths_[leaf][step]; }
  const std::vector<S>& path(int leaf) const { return paths_[leaf]; }

 private:
  std::vector<std::vector<S>> paths_;
  int horizon_ = 0;
};

/// `optional` is E(A_n | F_n); `compensator` holds A^p_n on the atoms of
/// F_{n-1} (F_0 for n = 0), i.e. it is previsible by construction.
template <class S>
struct ProjectionPair {
  AdaptedProcess<S> optional;
  AdaptedProcess<S> compensator;

  /// A^p_T restricted to the leaves: the total risk.
  std::vector<S> terminal(const ProbTree<S>& tree) const;
};

template <class S>
ProjectionPair<S> project(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                          const RawIncreasingProcess<S>& a);

template <class S>
struct TotalRisk {
  std::vector<S> per_leaf;
  Distribution<S> law;
};

/// Y = sum_{n<T} P(Z = n+1 | F_n), plus P(Z = inf | F_T) when
/// `include_infinity_term` is set.
template <class S>
TotalRisk<S> total_risk(const ProbTree<S>& tree, const FiltrationSpec& filtration, const RandomTime& z,
                        bool include_infinity_term = true);

/// M_n = exp(A^p_n) (1 - oA_n), kept as coefficient and exponent so exact
/// mode never rounds.
template <class S>
AdaptedProcess<ExpTerm<S>> supermartingale_M(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                                             const RawIncreasingProcess<S>& a);

/// E(M_{n+1} | v) <= M_n(v) + tol at every atom v of every step n < T.
template <class S>
CheckReport check_supermartingale(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                                  const AdaptedProcess<ExpTerm<S>>& m, const S& tol);

template <class S>
CheckReport check_supermartingale(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                                  const AdaptedProcess<S>& m, const S& tol);

/// A^p - oA has conditional increments equal to zero (within tol).
template <class S>
CheckReport check_projection_martingale(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                                        const ProjectionPair<S>& pair, const S& tol);

template <class S>
struct StoppedBound {
  S lambda;
  double lhs = 0;   // e^{-lambda}
  S rhs;            // E[(1 - oA_tau) + (oA_tau - oA_{tau-1}) w]
  S plus_part;      // E(A^p_T - lambda)^+
  bool holds = false;          // rhs <= e^{-lambda} + tol
  bool identity_holds = false; // rhs == plus_part (within tol)
  std::vector<std::optional<int>> tau;  // per leaf; nullopt means never
};

/// Evaluates the stopped inequality at tau = min{n : A^p_n >= lambda}.
template <class S>
StoppedBound<S> stopped_bound(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                              const RawIncreasingProcess<S>& a, const S& lambda, const S& tol);

}  // namespace totalrisk
