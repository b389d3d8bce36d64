#include <string>

#include "totalrisk/scenarios.hpp"

namespace totalrisk {

template <class S>
void MortalityTable<S>::validate() const {
  if (q.empty()) throw Error(ErrorCode::EmptyTable, "mortality table is empty");
  S total = 0;
  for (const auto& v : q) {
    if (v < 0) throw Error(ErrorCode::InvalidTable, "negative entry " + format_scalar(v));
    total += v;
  }
  if (abs_value(S(total - 1)) > Arith<S>::sum_slack()) {
    throw Error(ErrorCode::InvalidTable, "entries sum to " + format_scalar(total));
  }
  if (q.back() == 0) {
    throw Error(ErrorCode::ZeroTail, "tail mass vanishes before year " + std::to_string(q.size()));
  }
}

template <class S>
std::vector<S> mortality_hazard(const MortalityTable<S>& table) {
  table.validate();
  const int n = table.years();
  std::vector<S> hazard(n);
  S tail = 0;
  for (int k = n - 1; k >= 0; --k) {
    tail += table.q[k];
    hazard[k] = table.q[k] / tail;
  }
  hazard[n - 1] = 1;
  return hazard;
}

namespace {

// Extends a node that has just died by a frozen chain down to `depth`;
// returns the leaf id.
template <class S>
std::string freeze(TreeBuilder<S>& b, int handle, int level, int depth) {
  const std::string base = b.id_of(handle);
  while (level < depth) {
    ++level;
    handle = b.add_child(handle, base + "@" + std::to_string(level), S(1));
  }
  return b.id_of(handle);
}

template <class S>
InsuranceModel<S> finish(const TreeBuilder<S>& b, FiltrationSpec filtration,
                         const std::vector<std::pair<std::string, int>>& deaths, std::vector<S> hazard) {
  InsuranceModel<S> model{b.build(), std::move(filtration), {}, std::move(hazard), {}};
  model.z.values.assign(model.tree.num_leaves(), RandomTime::kInfinity);
  for (const auto& [leaf_id, year] : deaths) model.z.values[*model.tree.find_leaf(leaf_id)] = year;
  return model;
}

template <class S>
InsuranceModel<S> natural_model(const MortalityTable<S>& table, std::vector<S> hazard) {
  const int years = table.years();
  TreeBuilder<S> b("alive0");
  std::vector<std::pair<std::string, int>> deaths;
  int alive = 0;
  for (int n = 1; n <= years; ++n) {
    const S& h = hazard[n - 1];
    if (h > 0) {
      const int dead = b.add_child(alive, "dead" + std::to_string(n), h);
      deaths.emplace_back(freeze(b, dead, n, years), n);
    }
    if (h < 1) alive = b.add_child(alive, "alive" + std::to_string(n), S(1 - h));
  }
  return finish(b, FiltrationSpec::shifted(years, years), deaths, std::move(hazard));
}

template <class S>
InsuranceModel<S> oracle_model(const MortalityTable<S>& table, std::vector<S> hazard) {
  const int years = table.years();
  TreeBuilder<S> b("root");
  std::vector<std::pair<std::string, int>> deaths;
  for (int n = 1; n <= years; ++n) {
    if (table.q[n - 1] > 0) {
      deaths.emplace_back(b.id_of(b.add_child(0, "z" + std::to_string(n), table.q[n - 1])), n);
    }
  }
  return finish(b, FiltrationSpec::full(years, 1), deaths, std::move(hazard));
}

template <class S>
void validate_signal(const SignalSpec<S>& signal) {
  const std::size_t k = signal.initial.size();
  auto is_law = [](const std::vector<S>& row) {
    S total = 0;
    for (const auto& v : row) {
      if (v < 0) return false;
      total += v;
    }
    return abs_value(S(total - 1)) <= Arith<S>::sum_slack();
  };
  if (k == 0 || !is_law(signal.initial)) {
    throw Error(ErrorCode::InvalidModel, "health chain initial law is not a probability vector");
  }
  if (signal.transition.size() != k || signal.risk.size() != k) {
    throw Error(ErrorCode::InvalidModel, "health chain dimensions disagree");
  }
  for (const auto& row : signal.transition) {
    if (row.size() != k || !is_law(row)) {
      throw Error(ErrorCode::InvalidModel, "health chain transition rows must be probability vectors");
    }
  }
  for (const auto& r : signal.risk) {
    if (!(r > 0)) throw Error(ErrorCode::InvalidModel, "relative risks must be positive");
  }
}

// Forward hazard matching: d_n(s) = c_n r_s with c_n chosen so that the
// survivors' state mix reproduces h_n exactly.
template <class S>
std::vector<std::vector<S>> calibrate(const SignalSpec<S>& signal, const std::vector<S>& hazard) {
  const std::size_t k = signal.initial.size();
  std::vector<S> mix = signal.initial;
  std::vector<std::vector<S>> death(hazard.size(), std::vector<S>(k));
  for (std::size_t n = 0; n < hazard.size(); ++n) {
    const S& h = hazard[n];
    if (h == 1) {
      for (auto& d : death[n]) d = 1;
      continue;
    }
    S weighted = 0;
    for (std::size_t s = 0; s < k; ++s) weighted += mix[s] * signal.risk[s];
    const S scale = h / weighted;
    for (std::size_t s = 0; s < k; ++s) {
      death[n][s] = scale * signal.risk[s];
      if (death[n][s] > 1) {
        if (mix[s] > 0) {
          throw Error(ErrorCode::CalibrationInfeasible,
                      "year " + std::to_string(n + 1) + " needs death probability " +
                          format_scalar(death[n][s]) + " in state " + std::to_string(s));
        }
        death[n][s] = 1;
      }
    }
    std::vector<S> next(k, S(0));
    for (std::size_t s = 0; s < k; ++s) {
      const S survive = mix[s] * (1 - death[n][s]);
      for (std::size_t t = 0; t < k; ++t) next[t] += survive * signal.transition[s][t];
    }
    for (auto& v : next) v /= (1 - h);
    mix = std::move(next);
  }
  return death;
}

template <class S>
InsuranceModel<S> health_chain_model(const MortalityTable<S>& table, const SignalSpec<S>& signal,
                                     std::vector<S> hazard) {
  validate_signal(signal);
  const int years = table.years();
  const int depth = years + 1;
  auto death = calibrate(signal, hazard);

  struct Alive {
    int handle;
    std::size_t state;
    std::string history;
  };
  TreeBuilder<S> b("start");
  std::vector<std::pair<std::string, int>> deaths;
  std::vector<Alive> frontier;
  for (std::size_t s = 0; s < signal.initial.size(); ++s) {
    if (signal.initial[s] > 0) {
      const std::string hist = std::to_string(s);
      frontier.push_back({b.add_child(0, "a" + hist, signal.initial[s]), s, hist});
    }
  }
  for (int n = 1; n <= years; ++n) {
    std::vector<Alive> next;
    for (const auto& node : frontier) {
      const S& d = death[n - 1][node.state];
      if (d > 0) {
        const int dead = b.add_child(node.handle, "d" + std::to_string(n) + "_" + node.history, d);
        deaths.emplace_back(freeze(b, dead, n + 1, depth), n);
      }
      if (d < 1) {
        for (std::size_t t = 0; t < signal.initial.size(); ++t) {
          const S p = (1 - d) * signal.transition[node.state][t];
          if (p > 0) {
            const std::string hist = node.history + "." + std::to_string(t);
            next.push_back({b.add_child(node.handle, "a" + hist, p), t, hist});
          }
        }
      }
    }
    frontier = std::move(next);
  }
  auto model = finish(b, FiltrationSpec::shifted(years, depth, 1), deaths, std::move(hazard));
  model.death_prob = std::move(death);
  return model;
}

}  // namespace

template <class S>
InsuranceModel<S> build_insurance_model(const MortalityTable<S>& table, const SignalSpec<S>& signal) {
  auto hazard = mortality_hazard(table);
  switch (signal.kind) {
    case SignalSpec<S>::Kind::None: return natural_model(table, std::move(hazard));
    case SignalSpec<S>::Kind::Oracle: return oracle_model(table, std::move(hazard));
    case SignalSpec<S>::Kind::HealthChain: return health_chain_model(table, signal, std::move(hazard));
  }
  throw Error(ErrorCode::InvalidModel, "unknown signal kind");
}

#define TOTALRISK_INSTANTIATE(S)                                                        \
  template struct MortalityTable<S>;                                                    \
  template std::vector<S> mortality_hazard<S>(const MortalityTable<S>&);                \
  template InsuranceModel<S> build_insurance_model<S>(const MortalityTable<S>&, const SignalSpec<S>&);

TOTALRISK_INSTANTIATE(Rational)
TOTALRISK_INSTANTIATE(double)

#undef TOTALRISK_INSTANTIATE

}  // namespace totalrisk
