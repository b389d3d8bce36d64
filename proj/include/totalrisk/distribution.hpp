#pragma once

#include <utility>
#include <vector>

#include "totalrisk/numeric.hpp"

namespace totalrisk {

/// Finite-support law with strictly increasing support values.
template <class S>
class Distribution {
 public:
  struct Atom {
    S value;
    S prob;
  };

  Distribution() = default;

  /// Merges repeated values, sorts, and checks that the weights are a
  /// probability vector (exactly in rational mode, within 1e-12 otherwise).
  static Distribution from_pairs(std::vector<std::pair<S, S>> pairs);

  static Distribution point_mass(const S& value);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  const S& min_value() const { return atoms_.front().value; }
  const S& max_value() const { return atoms_.back().value; }

  S mean() const;
  S variance() const;
  /// P(X > t)
  S tail(const S& t) const;

 private:
  std::vector<Atom> atoms_;
};

extern template class Distribution<Rational>;
extern template class Distribution<double>;

}  // namespace totalrisk
