#include "totalrisk/compensator.hpp"

#include <algorithm>
#include <cmath>

namespace totalrisk {

template <class S>
RawIncreasingProcess<S>::RawIncreasingProcess(std::vector<std::vector<S>> paths) : paths_(std::move(paths)) {
  if (paths_.empty()) throw Error(ErrorCode::InvalidProcess, "process has no paths");
  horizon_ = static_cast<int>(paths_.front().size()) - 1;
  if (horizon_ < 1) throw Error(ErrorCode::InvalidProcess, "process needs at least two time points");
  const S slack = Arith<S>::sum_slack();
  for (std::size_t leaf = 0; leaf < paths_.size(); ++leaf) {
    const auto& p = paths_[leaf];
    const std::string where = "path " + std::to_string(leaf);
    if (static_cast<int>(p.size()) != horizon_ + 1) {
      throw Error(ErrorCode::InvalidProcess, where + " has a different length");
    }
    if (p.front() != 0) throw Error(ErrorCode::InvalidProcess, where + " does not start at 0");
    for (int n = 1; n <= horizon_; ++n) {
      if (p[n] < p[n - 1]) throw Error(ErrorCode::InvalidProcess, where + " decreases");
    }
    if (abs_value(S(p.back() - 1)) > slack) {
      throw Error(ErrorCode::InvalidProcess, where + " ends at " + format_scalar(p.back()) + ", not 1");
    }
  }
}

template <class S>
RawIncreasingProcess<S> RawIncreasingProcess<S>::from_random_time(const RandomTime& z, int horizon) {
  std::vector<std::vector<S>> paths;
  paths.reserve(z.values.size());
  for (auto value : z.values) {
    if (value == RandomTime::kInfinity || value > horizon) {
      throw Error(ErrorCode::HorizonTooShort, "random time exceeds the horizon " + std::to_string(horizon));
    }
    std::vector<S> p(horizon + 1, S(0));
    for (int n = static_cast<int>(value); n <= horizon; ++n) p[n] = 1;
    paths.push_back(std::move(p));
  }
  return RawIncreasingProcess(std::move(paths));
}

namespace {

template <class S>
std::vector<S> leaves_to_atoms(const ProbTree<S>& tree, const std::vector<S>& leaf_values, int level) {
  std::vector<S> out(tree.level_size(level));
  for (int a = 0; a < tree.level_size(level); ++a) out[a] = leaf_values[tree.atom(level, a).leaf_begin];
  return out;
}

template <class S>
void check_dimensions(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                      const RawIncreasingProcess<S>& a) {
  filtration.validate(tree.depth());
  if (a.num_leaves() != tree.num_leaves()) {
    throw Error(ErrorCode::DimensionMismatch, "process has " + std::to_string(a.num_leaves()) +
                                                  " paths, tree has " + std::to_string(tree.num_leaves()) +
                                                  " leaves");
  }
  if (a.horizon() != filtration.horizon()) {
    throw Error(ErrorCode::DimensionMismatch, "process horizon " + std::to_string(a.horizon()) +
                                                  " differs from filtration horizon " +
                                                  std::to_string(filtration.horizon()));
  }
}

// Level of the atom partition on which the step-n compensator is constant.
int previsible_level(const FiltrationSpec& f, int step) { return f.level(std::max(step - 1, 0)); }

}  // namespace

template <class S>
std::vector<S> ProjectionPair<S>::terminal(const ProbTree<S>& tree) const {
  const int t = compensator.horizon();
  std::vector<S> out(tree.num_leaves());
  for (int l = 0; l < tree.num_leaves(); ++l) out[l] = compensator.at_leaf(tree, t, l);
  return out;
}

template <class S>
ProjectionPair<S> project(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                          const RawIncreasingProcess<S>& a) {
  check_dimensions(tree, filtration, a);
  const int horizon = filtration.horizon();
  const int leaves = tree.num_leaves();

  ProjectionPair<S> pair;
  pair.optional.step_level = filtration.levels;
  for (int n = 0; n <= horizon; ++n) pair.compensator.step_level.push_back(previsible_level(filtration, n));

  std::vector<S> current(leaves);
  std::vector<S> increment(leaves);
  std::vector<S> running(leaves, S(0));
  for (int n = 0; n <= horizon; ++n) {
    for (int l = 0; l < leaves; ++l) current[l] = a.at(l, n);
    pair.optional.values.push_back(conditional_expectation<S>(tree, current, filtration.level(n)));
    if (n == 0) {
      pair.compensator.values.emplace_back(tree.level_size(filtration.level(0)), S(0));
      continue;
    }
    const int level = filtration.level(n - 1);
    for (int l = 0; l < leaves; ++l) increment[l] = a.at(l, n) - a.at(l, n - 1);
    const auto step = conditional_expectation<S>(tree, increment, level);
    for (int l = 0; l < leaves; ++l) running[l] += step[tree.atom_of(l, level)];
    pair.compensator.values.push_back(leaves_to_atoms(tree, running, level));
  }
  return pair;
}

template <class S>
TotalRisk<S> total_risk(const ProbTree<S>& tree, const FiltrationSpec& filtration, const RandomTime& z,
                        bool include_infinity_term) {
  filtration.validate(tree.depth());
  z.validate(tree.num_leaves());
  const int horizon = filtration.horizon();
  const int leaves = tree.num_leaves();
  for (int l = 0; l < leaves; ++l) {
    if (z.finite(l) && z.values[l] > horizon) {
      throw Error(ErrorCode::HorizonTooShort, "leaf '" + tree.leaf(l).id + "' has Z = " +
                                                  std::to_string(z.values[l]) + " beyond horizon " +
                                                  std::to_string(horizon));
    }
  }

  TotalRisk<S> out;
  out.per_leaf.assign(leaves, S(0));
  std::vector<S> indicator(leaves);
  auto accumulate = [&](int level) {
    const auto ce = conditional_expectation<S>(tree, indicator, level);
    for (int l = 0; l < leaves; ++l) out.per_leaf[l] += ce[tree.atom_of(l, level)];
  };
  for (int n = 0; n < horizon; ++n) {
    bool any = false;
    for (int l = 0; l < leaves; ++l) {
      const bool hit = z.values[l] == n + 1;
      indicator[l] = hit ? 1 : 0;
      any = any || hit;
    }
    if (any) accumulate(filtration.level(n));
  }
  if (include_infinity_term) {
    bool any = false;
    for (int l = 0; l < leaves; ++l) {
      indicator[l] = z.finite(l) ? 0 : 1;
      any = any || !z.finite(l);
    }
    if (any) accumulate(filtration.level(horizon));
  }
  out.law = leaf_distribution<S>(tree, out.per_leaf);
  return out;
}

template <class S>
AdaptedProcess<ExpTerm<S>> supermartingale_M(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                                             const RawIncreasingProcess<S>& a) {
  const auto pair = project(tree, filtration, a);
  AdaptedProcess<ExpTerm<S>> m;
  m.step_level = filtration.levels;
  for (int n = 0; n <= filtration.horizon(); ++n) {
    const int level = filtration.level(n);
    std::vector<ExpTerm<S>> row(tree.level_size(level));
    for (int v = 0; v < tree.level_size(level); ++v) {
      const int leaf = tree.atom(level, v).leaf_begin;
      row[v] = {S(1 - pair.optional.at(n, v)), pair.compensator.at_leaf(tree, n, leaf)};
    }
    m.values.push_back(std::move(row));
  }
  return m;
}

template <class S>
CheckReport check_supermartingale(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                                  const AdaptedProcess<ExpTerm<S>>& m, const S& tol) {
  filtration.validate(tree.depth());
  const int horizon = filtration.horizon();
  if (m.horizon() != horizon) throw Error(ErrorCode::DimensionMismatch, "process horizon differs");
  for (int n = 0; n <= horizon; ++n) {
    if (m.step_level[n] > filtration.level(n)) {
      throw Error(ErrorCode::InvalidProcess, "process is not adapted at step " + std::to_string(n));
    }
  }

  CheckReport report;
  report.check = "supermartingale";
  std::vector<ExpTerm<S>> terms;
  for (int n = 0; n < horizon; ++n) {
    const int level = filtration.level(n);
    const int next_level = std::max(m.step_level[n + 1], level);
    for (int v = 0; v < tree.level_size(level); ++v) {
      const auto& atom = tree.atom(level, v);
      const auto& now = m.at_leaf(tree, n, atom.leaf_begin);
      terms.clear();
      terms.push_back(now);
      const int first = tree.atom_of(atom.leaf_begin, next_level);
      const int last = tree.atom_of(atom.leaf_end - 1, next_level);
      double expected = 0;
      for (int u = first; u <= last; ++u) {
        const auto& child = tree.atom(next_level, u);
        const auto& next = m.at_leaf(tree, n + 1, child.leaf_begin);
        const S weight = child.path_prob / atom.path_prob;
        terms.push_back({S(-weight * next.coef), next.exponent});
        expected += to_double(weight) * to_double(next.coef) * std::exp(to_double(next.exponent));
      }
      const double current = to_double(now.coef) * std::exp(to_double(now.exponent));
      // The displayed margin follows the certified sign.
      const int sign = sign_of_exp_sum(std::span<const ExpTerm<S>>(terms));
      double margin = current - expected;
      if (sign == 0) margin = 0;
      if (sign > 0) margin = std::max(margin, 0.0);
      ++report.checked;
      report.worst_margin = std::min(report.worst_margin, margin);
      bool violated = sign < 0;
      if (violated && tol != 0) {
        terms.push_back({tol, S(0)});
        violated = sign_of_exp_sum(std::span<const ExpTerm<S>>(terms)) < 0;
      }
      if (violated) {
        ++report.violations;
        if (!report.witness) report.witness = CheckWitness{n, atom.id, expected, current};
      }
    }
  }
  report.holds = report.violations == 0;
  return report;
}

template <class S>
CheckReport check_supermartingale(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                                  const AdaptedProcess<S>& m, const S& tol) {
  AdaptedProcess<ExpTerm<S>> scaled;
  scaled.step_level = m.step_level;
  for (const auto& row : m.values) {
    std::vector<ExpTerm<S>> out;
    out.reserve(row.size());
    for (const auto& v : row) out.push_back({v, S(0)});
    scaled.values.push_back(std::move(out));
  }
  return check_supermartingale(tree, filtration, scaled, tol);
}

template <class S>
CheckReport check_projection_martingale(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                                        const ProjectionPair<S>& pair, const S& tol) {
  filtration.validate(tree.depth());
  const int horizon = filtration.horizon();
  const int leaves = tree.num_leaves();
  CheckReport report;
  report.check = "projection_martingale";
  auto difference_at = [&](int n) {
    std::vector<S> d(leaves);
    for (int l = 0; l < leaves; ++l) d[l] = pair.compensator.at_leaf(tree, n, l) - pair.optional.at_leaf(tree, n, l);
    return d;
  };
  std::vector<S> current = difference_at(0);
  for (int n = 0; n < horizon; ++n) {
    std::vector<S> next = difference_at(n + 1);
    const int level = filtration.level(n);
    const auto expected_next = conditional_expectation<S>(tree, next, level);
    for (int v = 0; v < tree.level_size(level); ++v) {
      const auto& atom = tree.atom(level, v);
      const S drift = expected_next[v] - current[atom.leaf_begin];
      const S size = abs_value(drift);
      ++report.checked;
      report.worst_margin = std::min(report.worst_margin, -to_double(size));
      if (size > tol) {
        ++report.violations;
        if (!report.witness) {
          report.witness = CheckWitness{n, atom.id, to_double(expected_next[v]), to_double(current[atom.leaf_begin])};
        }
      }
    }
    current = std::move(next);
  }
  report.holds = report.violations == 0;
  return report;
}

template <class S>
StoppedBound<S> stopped_bound(const ProbTree<S>& tree, const FiltrationSpec& filtration,
                              const RawIncreasingProcess<S>& a, const S& lambda, const S& tol) {
  if (!(lambda > 0)) throw Error(ErrorCode::NonPositiveLambda, "lambda must be positive");
  const auto pair = project(tree, filtration, a);
  const int horizon = filtration.horizon();

  StoppedBound<S> out;
  out.lambda = lambda;
  out.lhs = std::exp(-to_double(lambda));
  out.rhs = 0;
  out.plus_part = 0;
  out.tau.assign(tree.num_leaves(), std::nullopt);
  for (int l = 0; l < tree.num_leaves(); ++l) {
    const S& p = tree.leaf_prob(l);
    const S& terminal = pair.compensator.at_leaf(tree, horizon, l);
    if (terminal > lambda) out.plus_part += p * (terminal - lambda);

    std::optional<int> tau;
    for (int n = 0; n <= horizon; ++n) {
      if (pair.compensator.at_leaf(tree, n, l) >= lambda) {
        tau = n;
        break;
      }
    }
    out.tau[l] = tau;
    if (!tau) continue;  // X = 0 when tau is infinite
    const int t = *tau;
    const S oa_now = pair.optional.at_leaf(tree, t, l);
    const S oa_before = t > 0 ? pair.optional.at_leaf(tree, t - 1, l) : S(0);
    const S ap_now = pair.compensator.at_leaf(tree, t, l);
    const S ap_before = t > 0 ? pair.compensator.at_leaf(tree, t - 1, l) : S(0);
    S value = 1 - oa_now;
    if (ap_now != ap_before) value += (oa_now - oa_before) * (ap_now - lambda) / (ap_now - ap_before);
    out.rhs += p * value;
  }
  out.holds = leq_exp<S>(out.rhs, S(-lambda), tol);
  out.identity_holds = abs_value(S(out.rhs - out.plus_part)) <= tol;
  return out;
}

#define TOTALRISK_INSTANTIATE(S)                                                                          \
  template class RawIncreasingProcess<S>;                                                                 \
  template struct ProjectionPair<S>;                                                                      \
  template ProjectionPair<S> project<S>(const ProbTree<S>&, const FiltrationSpec&,                        \
                                        const RawIncreasingProcess<S>&);                                  \
  template TotalRisk<S> total_risk<S>(const ProbTree<S>&, const FiltrationSpec&, const RandomTime&, bool); \
  template AdaptedProcess<ExpTerm<S>> supermartingale_M<S>(const ProbTree<S>&, const FiltrationSpec&,     \
                                                           const RawIncreasingProcess<S>&);               \
  template CheckReport check_supermartingale<S>(const ProbTree<S>&, const FiltrationSpec&,                \
                                                const AdaptedProcess<ExpTerm<S>>&, const S&);             \
  template CheckReport check_supermartingale<S>(const ProbTree<S>&, const FiltrationSpec&,                \
                                                const AdaptedProcess<S>&, const S&);                      \
  template CheckReport check_projection_martingale<S>(const ProbTree<S>&, const FiltrationSpec&,          \
                                                      const ProjectionPair<S>&, const S&);                \
  template StoppedBound<S> stopped_bound<S>(const ProbTree<S>&, const FiltrationSpec&,                    \
                                            const RawIncreasingProcess<S>&, const S&, const S&);

TOTALRISK_INSTANTIATE(Rational)
TOTALRISK_INSTANTIATE(double)

#undef TOTALRISK_INSTANTIATE

}  // namespace totalrisk
