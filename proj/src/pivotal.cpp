#include <algorithm>
#include <bit>
#include <string>

#include "totalrisk/scenarios.hpp"

namespace totalrisk {

namespace {

int count_ones(const std::vector<int>& x) { return static_cast<int>(std::count(x.begin(), x.end(), 1)); }

bool connected(const PivotalRule& rule, const std::vector<int>& x) {
  for (int p = 0; p < rule.paths; ++p) {
    bool open = true;
    for (int i = 0; i < rule.length && open; ++i) open = x[p * rule.length + i] == 1;
    if (open) return true;
  }
  return false;
}

// Edges whose flip (1 <-> not 1) changes the boolean outcome.
template <class F>
std::uint32_t pivotal_edges(const std::vector<int>& sample, F outcome) {
  std::vector<int> x = sample;
  const bool base = outcome(x);
  std::uint32_t mask = 0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    const int saved = x[e];
    x[e] = saved == 1 ? 0 : 1;
    if (outcome(x) != base) mask |= std::uint32_t(1) << e;
    x[e] = saved;
  }
  return mask;
}

}  // namespace

std::uint32_t PivotalRule::evaluate(const std::vector<int>& sample) const {
  const int m = static_cast<int>(sample.size());
  switch (kind) {
    case Kind::All:
      return m == 32 ? ~std::uint32_t(0) : (std::uint32_t(1) << m) - 1;
    case Kind::ValueIn: {
      std::uint32_t mask = 0;
      for (int e = 0; e < m; ++e) {
        if (std::find(values.begin(), values.end(), sample[e]) != values.end()) mask |= std::uint32_t(1) << e;
      }
      return mask;
    }
    case Kind::ThresholdPivot: {
      const int t = threshold > 0 ? threshold : m / 2 + 1;
      return pivotal_edges(sample, [t](const std::vector<int>& x) { return count_ones(x) >= t; });
    }
    case Kind::ParallelSeries:
      return pivotal_edges(sample, [this](const std::vector<int>& x) { return connected(*this, x); });
  }
  return 0;
}

std::string PivotalRule::name() const {
  switch (kind) {
    case Kind::All: return "all";
    case Kind::ValueIn: return "value-in";
    case Kind::ThresholdPivot: return "threshold-pivot";
    case Kind::ParallelSeries: return "parallel-series";
  }
  return "unknown";
}

template <class S>
void PivotalModel<S>::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidModel, what); };
  if (m < 1 || m > 32) fail("edge count must lie in [1, 32]");
  if (K < 1) fail("K must be positive");
  if (static_cast<int>(alphabet.size()) != m) fail("one alphabet per edge is required");
  for (const auto& a : alphabet) {
    if (a.values.empty() || a.values.size() != a.probs.size()) fail("alphabet values and probabilities disagree");
    S total = 0;
    for (const auto& p : a.probs) {
      if (!(p > 0)) fail("alphabet probabilities must be positive");
      total += p;
    }
    if (abs_value(S(total - 1)) > Arith<S>::sum_slack()) fail("alphabet probabilities must sum to 1");
    auto sorted = a.values;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("repeated alphabet value");
  }
  if (static_cast<int>(order.size()) != m) fail("order must list every edge once");
  std::vector<bool> seen(m, false);
  for (int e : order) {
    if (e < 0 || e >= m || seen[e]) fail("order must be a permutation of the edges");
    seen[e] = true;
  }
  if (rule.kind == PivotalRule::Kind::ParallelSeries && (rule.paths < 1 || rule.length < 1 || rule.paths * rule.length != m)) {
    fail("parallel-series rule needs paths * length = m");
  }
  if (rule.kind == PivotalRule::Kind::ThresholdPivot && (rule.threshold < 0 || rule.threshold > m)) {
    fail("threshold out of range");
  }
}

template <class S>
std::uint64_t PivotalModel<S>::state_count() const {
  std::uint64_t count = 1;
  for (const auto& a : alphabet) {
    count *= a.values.size();
    if (count > budget) {
      throw Error(ErrorCode::EnumerationTooLarge,
                  "joint value space exceeds the budget of " + std::to_string(budget) + " states");
    }
  }
  return count;
}

template <class S>
PivotalTerms<S> pivotal_W(const PivotalModel<S>& model, const std::vector<int>& sample) {
  model.validate();
  model.state_count();
  if (static_cast<int>(sample.size()) != model.m) throw Error(ErrorCode::InvalidModel, "sample has the wrong length");
  for (int e = 0; e < model.m; ++e) {
    const auto& v = model.alphabet[e].values;
    if (std::find(v.begin(), v.end(), sample[e]) == v.end()) {
      throw Error(ErrorCode::InvalidModel, "sample value outside the alphabet of edge " + std::to_string(e));
    }
  }

  PivotalTerms<S> out;
  out.w = 0;
  std::vector<int> x = sample;
  std::vector<std::size_t> digit(model.m);
  for (int j = 0; j < model.m; ++j) {
    // Coordinates order[j..m-1] are unrevealed; enumerate them with an odometer.
    const int target = model.order[j];
    std::fill(digit.begin(), digit.end(), 0);
    S term = 0;
    while (true) {
      S weight = 1;
      for (int i = j; i < model.m; ++i) {
        const int e = model.order[i];
        x[e] = model.alphabet[e].values[digit[i]];
        weight *= model.alphabet[e].probs[digit[i]];
      }
      if (model.rule.evaluate(x) >> target & 1u) term += weight;
      int i = model.m - 1;
      for (; i >= j; --i) {
        if (++digit[i] < model.alphabet[model.order[i]].values.size()) break;
        digit[i] = 0;
      }
      if (i < j) break;
    }
    out.terms.push_back(term);
    out.w += term;
    x[target] = sample[target];
    for (int i = j + 1; i < model.m; ++i) x[model.order[i]] = sample[model.order[i]];
  }
  out.set_size = std::popcount(model.rule.evaluate(sample));
  out.w_prime = out.set_size <= model.K ? out.w : S(0);
  return out;
}

template <class S>
RevealModel<S> build_reveal_model(const PivotalModel<S>& model) {
  model.validate();
  model.state_count();
  TreeBuilder<S> b("x");
  struct Partial {
    int handle;
    std::vector<int> values;  // edge-indexed; unrevealed entries are unused
  };
  std::vector<Partial> frontier{{0, std::vector<int>(model.m, 0)}};
  for (int j = 0; j < model.m; ++j) {
    const int e = model.order[j];
    const auto& a = model.alphabet[e];
    std::vector<Partial> next;
    next.reserve(frontier.size() * a.values.size());
    for (const auto& node : frontier) {
      for (std::size_t k = 0; k < a.values.size(); ++k) {
        Partial child{0, node.values};
        child.values[e] = a.values[k];
        child.handle = b.add_child(node.handle, b.id_of(node.handle) + "." + std::to_string(a.values[k]), a.probs[k]);
        next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  RevealModel<S> out{b.build(), FiltrationSpec::shifted(model.m, model.m), {}, {}};
  out.samples.resize(out.tree.num_leaves());
  out.sets.resize(out.tree.num_leaves());
  for (auto& node : frontier) {
    const int leaf = *out.tree.find_leaf(b.id_of(node.handle));
    out.sets[leaf] = model.rule.evaluate(node.values);
    out.samples[leaf] = std::move(node.values);
  }
  return out;
}

template <class S>
Scenario2Report<S> verify_scenario2_chain(const PivotalModel<S>& model, const std::vector<S>& lambdas,
                                          const S& tol) {
  const RevealModel<S> rm = build_reveal_model(model);
  const auto& tree = rm.tree;
  const int leaves = tree.num_leaves();
  const int m = model.m;
  Scenario2Report<S> report;
  report.samples = leaves;

  // position[e] = 1-based reveal step of edge e.
  std::vector<int> position(m);
  for (int j = 0; j < m; ++j) position[model.order[j]] = j + 1;

  // W through conditional expectations of the membership indicators.
  std::vector<S> w(leaves, S(0));
  for (int j = 0; j < m; ++j) {
    std::vector<S> member(leaves);
    for (int l = 0; l < leaves; ++l) member[l] = (rm.sets[l] >> model.order[j] & 1u) ? S(1) : S(0);
    const auto ce = conditional_expectation<S>(tree, member, j);
    for (int l = 0; l < leaves; ++l) w[l] += ce[tree.atom_of(l, j)];
  }
  std::vector<S> w_prime(leaves);
  report.prob_small_set = 0;
  for (int l = 0; l < leaves; ++l) {
    const bool small = std::popcount(rm.sets[l]) <= model.K;
    w_prime[l] = small ? w[l] : S(0);
    if (small) report.prob_small_set += tree.leaf_prob(l);
  }

  // Z_j = reveal step of the j-th pivotal edge in reveal order.
  std::vector<S> sum_y(leaves, S(0)), sum_y_prime(leaves, S(0));
  for (int j = 1; j <= model.K; ++j) {
    RandomTime z;
    z.values.resize(leaves);
    for (int l = 0; l < leaves; ++l) {
      std::vector<int> steps;
      for (int e = 0; e < m; ++e) {
        if (rm.sets[l] >> e & 1u) steps.push_back(position[e]);
      }
      std::sort(steps.begin(), steps.end());
      z.values[l] = j <= static_cast<int>(steps.size()) ? steps[j - 1] : RandomTime::kInfinity;
    }
    const auto y = total_risk(tree, rm.filtration, z, true);
    const auto y_prime = total_risk(tree, rm.filtration, z, false);
    for (int l = 0; l < leaves; ++l) {
      sum_y[l] += y.per_leaf[l];
      sum_y_prime[l] += y_prime.per_leaf[l];
    }
    report.per_index.push_back(convex_order_vs_exponential(y.law, tol));
    report.each_y_dominated = report.each_y_dominated && report.per_index.back().holds;
  }

  for (int l = 0; l < leaves; ++l) {
    const bool first = w_prime[l] <= sum_y_prime[l] + tol;
    const bool second = sum_y_prime[l] <= sum_y[l] + tol;
    if (!first) ++report.first_link_violations;
    if (!second) ++report.second_link_violations;
    if ((!first || !second) && !report.first_violating_leaf) report.first_violating_leaf = l;
  }
  report.chain_holds = report.first_link_violations == 0 && report.second_link_violations == 0;

  const S k = model.K;
  std::vector<S> scaled(leaves);
  for (int l = 0; l < leaves; ++l) scaled[l] = sum_y[l] / k;
  report.scaled_sum = convex_order_vs_exponential(leaf_distribution<S>(tree, scaled), tol);

  for (int l = 0; l < leaves; ++l) scaled[l] = w_prime[l] / k;
  const auto w_law = leaf_distribution<S>(tree, scaled);
  for (const auto& lambda : lambdas) {
    report.tails.push_back(check_tail(w_law, lambda, tol));
    report.tails_hold = report.tails_hold && report.tails.back().holds;
  }
  report.holds = report.chain_holds && report.each_y_dominated && report.scaled_sum.holds && report.tails_hold;
  return report;
}

#define TOTALRISK_INSTANTIATE(S)                                                                       \
  template struct PivotalModel<S>;                                                                     \
  template PivotalTerms<S> pivotal_W<S>(const PivotalModel<S>&, const std::vector<int>&);              \
  template RevealModel<S> build_reveal_model<S>(const PivotalModel<S>&);                                \
  template Scenario2Report<S> verify_scenario2_chain<S>(const PivotalModel<S>&, const std::vector<S>&, \
                                                        const S&);

TOTALRISK_INSTANTIATE(Rational)
TOTALRISK_INSTANTIATE(double)

#undef TOTALRISK_INSTANTIATE

}  // namespace totalrisk
