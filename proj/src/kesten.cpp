#include <algorithm>
#include <cmath>
#include <string>

#include "totalrisk/scenarios.hpp"

namespace totalrisk {

template <class S>
void KestenInstance<S>::validate() const {
  filtration.validate(tree.depth());
  const int n_steps = filtration.horizon();
  const int leaves = tree.num_leaves();
  if (static_cast<int>(u.size()) != leaves) {
    throw Error(ErrorCode::DimensionMismatch, "U must list one path per leaf");
  }
  for (const auto& path : u) {
    if (static_cast<int>(path.size()) != n_steps) {
      throw Error(ErrorCode::DimensionMismatch, "each U path needs " + std::to_string(n_steps) + " increments");
    }
    for (const auto& v : path) {
      if (v < 0) throw Error(ErrorCode::InvalidProcess, "increments must be nonnegative");
    }
  }
  for (int k = 1; k <= n_steps; ++k) {
    const int level = filtration.level(k);
    std::vector<int> first(tree.level_size(level), -1);
    for (int l = 0; l < leaves; ++l) {
      int& f = first[tree.atom_of(l, level)];
      if (f < 0) {
        f = l;
      } else if (u[l][k - 1] != u[f][k - 1]) {
        throw Error(ErrorCode::InvalidProcess, "U_" + std::to_string(k) + " is not adapted");
      }
    }
  }
  if (!(r > 0) || !(t > 0)) throw Error(ErrorCode::InvalidModel, "R and T must be positive");
}

template <class S>
KestenReport<S> kesten_check(const KestenInstance<S>& instance, const S& tol) {
  instance.validate();
  const auto& tree = instance.tree;
  const auto& filt = instance.filtration;
  const int n_steps = filt.horizon();
  const int leaves = tree.num_leaves();

  std::vector<S> compensated(leaves, S(0)), total(leaves, S(0));
  std::vector<S> column(leaves);
  for (int k = 1; k <= n_steps; ++k) {
    for (int l = 0; l < leaves; ++l) column[l] = instance.u[l][k - 1];
    const int level = filt.level(k - 1);
    const auto ce = conditional_expectation<S>(tree, column, level);
    for (int l = 0; l < leaves; ++l) {
      compensated[l] += ce[tree.atom_of(l, level)];
      total[l] += column[l];
    }
  }

  KestenReport<S> report;
  report.probability = 0;
  for (int l = 0; l < leaves; ++l) {
    if (compensated[l] >= instance.r && total[l] <= instance.t) report.probability += tree.leaf_prob(l);
  }
  const S ratio = instance.r / instance.t;
  report.bound = std::exp(1 - to_double(ratio));
  report.holds = leq_exp<S>(report.probability, S(1 - ratio), tol);

  // A_n = min(S_n, T) / T for n <= N, then 1 at a final fully informed step.
  std::vector<std::vector<S>> paths(leaves, std::vector<S>(n_steps + 2));
  for (int l = 0; l < leaves; ++l) {
    S partial = 0;
    paths[l][0] = 0;
    for (int k = 1; k <= n_steps; ++k) {
      partial += instance.u[l][k - 1];
      paths[l][k] = std::min(partial, instance.t) / instance.t;
    }
    paths[l][n_steps + 1] = 1;
  }
  FiltrationSpec extended = filt;
  extended.levels.push_back(tree.depth());
  const auto pair = project(tree, extended, RawIncreasingProcess<S>(std::move(paths)));
  const auto risk = leaf_distribution<S>(tree, pair.terminal(tree));
  const auto tail = check_tail(risk, ratio, tol);
  report.rescaled_tail = risk.tail(ratio);
  report.rescaled_holds = tail.holds;
  report.routes_agree = report.holds == report.rescaled_holds;
  return report;
}

#define TOTALRISK_INSTANTIATE(S)  \
  template struct KestenInstance<S>; \
  template KestenReport<S> kesten_check<S>(const KestenInstance<S>&, const S&);

TOTALRISK_INSTANTIATE(Rational)
TOTALRISK_INSTANTIATE(double)

#undef TOTALRISK_INSTANTIATE

}  // namespace totalrisk
