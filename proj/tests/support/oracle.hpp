#pragma once

// Brute-force reference computations. They work on a bare parent-pointer
// tree and recompute every conditional probability by summing over leaves,
// sharing no code with the library beyond the rational type.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "totalrisk/numeric.hpp"
#include "totalrisk/tree.hpp"

namespace oracle {

using totalrisk::Rational;
inline constexpr std::int64_t kInf = totalrisk::RandomTime::kInfinity;

struct Tree {
  std::vector<std::string> id;
  std::vector<int> parent;  // -1 for the root
  std::vector<Rational> prob;
  std::vector<int> depth;
  int D = 0;

  int add(int par, Rational p) {
    const int k = static_cast<int>(id.size());
    id.push_back("n" + std::to_string(k));
    parent.push_back(par);
    prob.push_back(std::move(p));
    depth.push_back(par < 0 ? 0 : depth[par] + 1);
    if (depth.back() > D) D = depth.back();
    return k;
  }

  std::vector<int> leaves() const {
    std::vector<int> out;
    for (int k = 0; k < static_cast<int>(id.size()); ++k) {
      if (depth[k] == D) out.push_back(k);
    }
    return out;
  }

  Rational path_prob(int node) const {
    Rational p = 1;
    for (int k = node; k >= 0; k = parent[k]) p *= prob[k];
    return p;
  }

  int ancestor(int node, int level) const {
    int k = node;
    while (depth[k] > level) k = parent[k];
    return k;
  }

  template <class S>
  std::vector<totalrisk::NodeSpec<S>> specs() const {
    std::vector<totalrisk::NodeSpec<S>> out;
    for (std::size_t k = 0; k < id.size(); ++k) {
      totalrisk::NodeSpec<S> s;
      s.id = id[k];
      if (parent[k] >= 0) s.parent = id[parent[k]];
      if constexpr (std::is_same_v<S, Rational>) {
        s.prob = prob[k];
      } else {
        s.prob = totalrisk::to_double(prob[k]);
      }
      out.push_back(std::move(s));
    }
    return out;
  }
};

/// E(f | level-`level` atom of `leaf`) by summation over all leaves.
inline Rational cond_exp(const Tree& t, int leaf, int level, const std::function<Rational(int)>& f) {
  const auto all = t.leaves();
  const int anc = t.ancestor(leaf, level);
  Rational num = 0, den = 0;
  for (int w : all) {
    if (t.ancestor(w, level) != anc) continue;
    const Rational p = t.path_prob(w);
    num += p * f(w);
    den += p;
  }
  return num / den;
}

/// Y(leaf) = sum_{n<T} P(Z = n+1 | F_n) [+ P(Z = inf | F_T)], keyed by node.
inline std::map<int, Rational> total_risk(const Tree& t, const std::vector<int>& levels,
                                          const std::map<int, std::int64_t>& z, bool include_inf = true) {
  const int T = static_cast<int>(levels.size()) - 1;
  std::map<int, Rational> y;
  for (int leaf : t.leaves()) {
    Rational sum = 0;
    for (int n = 0; n < T; ++n) {
      sum += cond_exp(t, leaf, levels[n], [&](int w) { return Rational(z.at(w) == n + 1 ? 1 : 0); });
    }
    if (include_inf) sum += cond_exp(t, leaf, levels[T], [&](int w) { return Rational(z.at(w) == kInf ? 1 : 0); });
    y[leaf] = sum;
  }
  return y;
}

struct Projection {
  std::map<int, std::vector<Rational>> optional;     // per leaf, steps 0..T
  std::map<int, std::vector<Rational>> compensator;  // per leaf, steps 0..T
};

inline Projection project(const Tree& t, const std::vector<int>& levels, const std::map<int, std::vector<Rational>>& a) {
  const int T = static_cast<int>(levels.size()) - 1;
  Projection out;
  for (int leaf : t.leaves()) {
    std::vector<Rational> o(T + 1), c(T + 1);
    c[0] = 0;
    for (int n = 0; n <= T; ++n) {
      o[n] = cond_exp(t, leaf, levels[n], [&](int w) { return a.at(w)[n]; });
      if (n > 0) {
        c[n] = c[n - 1] + cond_exp(t, leaf, levels[n - 1], [&](int w) { return Rational(a.at(w)[n] - a.at(w)[n - 1]); });
      }
    }
    out.optional[leaf] = std::move(o);
    out.compensator[leaf] = std::move(c);
  }
  return out;
}

/// sum p (v - lambda)^+ over (value, prob) pairs.
template <class V>
V shortfall(const std::vector<std::pair<V, V>>& pairs, const V& lambda) {
  V s = 0;
  for (const auto& [v, p] : pairs) {
    if (v > lambda) s += p * (v - lambda);
  }
  return s;
}

/// Convex order against Exp(1) judged on a dense uniform lambda grid over
/// [0, max support] plus the mean condition.
inline bool dense_grid_verdict(const std::vector<std::pair<double, double>>& pairs, int points, double tol) {
  double mean = 0, top = 0;
  for (const auto& [v, p] : pairs) {
    mean += v * p;
    top = std::max(top, v);
  }
  if (std::abs(mean - 1) > tol) return false;
  for (int i = 0; i < points; ++i) {
    const double lambda = top * i / (points - 1);
    if (shortfall(pairs, lambda) > std::exp(-lambda) + tol) return false;
  }
  return true;
}

}  // namespace oracle
