#pragma once

// Application models built on probability trees: life insurance premiums,
// pivotal-bond conditional sums, and the adapted-sum tail inequality.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "totalrisk/compensator.hpp"
#include "totalrisk/convex_order.hpp"
#include "totalrisk/tree.hpp"

namespace totalrisk {

// ---------------------------------------------------------------------------
// Insurance

template <class S>
struct MortalityTable {
  std::vector<S> q;  // q[n-1] = P(lifespan = n years)

  /// EmptyTable, InvalidTable (negative entries or sum != 1), ZeroTail.
  void validate() const;
  int years() const { return static_cast<int>(q.size()); }
};

/// h_n = q_n / sum_{k >= n} q_k; h_N = 1.
template <class S>
std::vector<S> mortality_hazard(const MortalityTable<S>& table);

template <class S>
struct SignalSpec {
  enum class Kind { None, Oracle, HealthChain };
  Kind kind = Kind::None;
  // Health chain: initial state law, row-stochastic transition matrix, and
  // positive relative death risk per state.
  std::vector<S> initial;
  std::vector<std::vector<S>> transition;
  std::vector<S> risk;
};

template <class S>
struct InsuranceModel {
  ProbTree<S> tree;
  FiltrationSpec filtration;
  RandomTime z;
  std::vector<S> hazard;
  // Health chain only: death probability in year n for each state, d[n-1][s].
  std::vector<std::vector<S>> death_prob;
};

/// Throws CalibrationInfeasible when the health chain cannot reproduce q.
template <class S>
InsuranceModel<S> build_insurance_model(const MortalityTable<S>& table, const SignalSpec<S>& signal);

// ---------------------------------------------------------------------------
// Pivotal bonds

template <class S>
struct EdgeAlphabet {
  std::vector<int> values;
  std::vector<S> probs;
};

struct PivotalRule {
  enum class Kind {
    All,             // S = every edge
    ValueIn,         // S = {e : X(e) in values}
    ThresholdPivot,  // edges pivotal for 1{#{X(e) = 1} >= threshold}
    ParallelSeries,  // edges pivotal for s-t connection through `paths`
                     // disjoint series paths of `length` edges (X = 1 open)
  };
  Kind kind = Kind::All;
  std::vector<int> values{1};
  int threshold = 0;
  int paths = 0;
  int length = 0;

  /// Bitmask of the edges in S for a full value vector (edge-indexed).
  std::uint32_t evaluate(const std::vector<int>& sample) const;
  std::string name() const;
};

template <class S>
struct PivotalModel {
  int m = 0;
  int K = 0;
  std::vector<EdgeAlphabet<S>> alphabet;  // per edge
  PivotalRule rule;
  std::vector<int> order;  // order[j] = edge revealed at step j+1
  std::uint64_t budget = std::uint64_t(1) << 20;

  void validate() const;
  /// Number of joint value vectors; EnumerationTooLarge above the budget.
  std::uint64_t state_count() const;
};

template <class S>
struct PivotalTerms {
  std::vector<S> terms;  // terms[j-1] = P(e(j) in S | X(e(1)), ..., X(e(j-1)))
  S w;
  S w_prime;  // W 1{|S| <= K}
  int set_size = 0;
};

/// Direct enumeration over the unrevealed coordinates for one sample
/// (edge-indexed values).
template <class S>
PivotalTerms<S> pivotal_W(const PivotalModel<S>& model, const std::vector<int>& sample);

template <class S>
struct Scenario2Report {
  S prob_small_set;  // P(|S| <= K)
  bool chain_holds = true;  // W' <= sum Y'_j <= sum Y_j on every sample
  int samples = 0;
  int first_link_violations = 0;   // W' > sum Y'_j
  int second_link_violations = 0;  // sum Y'_j > sum Y_j
  std::optional<int> first_violating_leaf;
  std::vector<ShortfallReport> per_index;  // Y_j versus Exp(1)
  bool each_y_dominated = true;
  ShortfallReport scaled_sum;  // (sum Y_j) / K versus Exp(1)
  std::vector<TailReport> tails;  // P(W' > lambda K) <= e^{1 - lambda}
  bool tails_hold = true;
  bool holds = false;
};

template <class S>
struct RevealModel {
  ProbTree<S> tree;
  FiltrationSpec filtration;
  std::vector<std::vector<int>> samples;  // per leaf, edge-indexed values
  std::vector<std::uint32_t> sets;        // per leaf, S as a bitmask
};

/// Tree whose level j reveals X(e(1)), ..., X(e(j)).
template <class S>
RevealModel<S> build_reveal_model(const PivotalModel<S>& model);

template <class S>
Scenario2Report<S> verify_scenario2_chain(const PivotalModel<S>& model, const std::vector<S>& lambdas,
                                          const S& tol);

// ---------------------------------------------------------------------------
// Adapted sums

template <class S>
struct KestenInstance {
  ProbTree<S> tree;
  FiltrationSpec filtration;
  std::vector<std::vector<S>> u;  // per leaf, U_1..U_N (N = horizon)
  S r;
  S t;

  /// U_k >= 0, U_k constant on level(k) atoms, r, t > 0.
  void validate() const;
};

template <class S>
struct KestenReport {
  S probability;  // P[sum E(U_k | F_{k-1}) >= R, sum U_k <= T]
  double bound = 0;  // e^{1 - R/T}
  bool holds = false;
  // Rescaled route: A_n = min(sum_{k<=n} U_k, T) / T, padded to 1 at an extra
  // fully informed step; its total risk is compared with the same bound.
  S rescaled_tail;  // P(A^p_inf > R/T)
  bool rescaled_holds = false;
  bool routes_agree = false;
};

template <class S>
KestenReport<S> kesten_check(const KestenInstance<S>& instance, const S& tol);

}  // namespace totalrisk
