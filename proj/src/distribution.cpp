#include "totalrisk/distribution.hpp"

#include <algorithm>

#include "totalrisk/error.hpp"

namespace totalrisk {

template <class S>
Distribution<S> Distribution<S>::from_pairs(std::vector<std::pair<S, S>> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::InvalidDistribution, "empty support");
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Distribution d;
  S total = 0;
  for (auto& [value, prob] : pairs) {
    if (prob < 0) {
      throw Error(ErrorCode::InvalidDistribution, "negative probability " + format_scalar(prob));
    }
    total += prob;
    if (!d.atoms_.empty() && d.atoms_.back().value == value) {
      d.atoms_.back().prob += prob;
    } else {
      d.atoms_.push_back({value, prob});
    }
  }
  if (abs_value(S(total - 1)) > Arith<S>::sum_slack()) {
    throw Error(ErrorCode::InvalidDistribution, "probabilities sum to " + format_scalar(total));
  }
  std::erase_if(d.atoms_, [](const Atom& a) { return a.prob == 0; });
  if (d.atoms_.empty()) throw Error(ErrorCode::InvalidDistribution, "no positive mass");
  return d;
}

template <class S>
Distribution<S> Distribution<S>::point_mass(const S& value) {
  Distribution d;
  d.atoms_.push_back({value, S(1)});
  return d;
}

template <class S>
S Distribution<S>::mean() const {
  S m = 0;
  for (const auto& a : atoms_) m += a.prob * a.value;
  return m;
}

template <class S>
S Distribution<S>::variance() const {
  const S m = mean();
  S v = 0;
  for (const auto& a : atoms_) {
    const S d = a.value - m;
    v += a.prob * d * d;
  }
  return v;
}

template <class S>
S Distribution<S>::tail(const S& t) const {
  S p = 0;
  for (const auto& a : atoms_) {
    if (a.value > t) p += a.prob;
  }
  return p;
}

template class Distribution<Rational>;
template class Distribution<double>;

}  // namespace totalrisk
