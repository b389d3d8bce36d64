#pragma once

#include <limits>
#include <optional>
#include <string>

namespace totalrisk {

struct CheckWitness {
  int step = 0;
  std::string atom;  // node id of the offending atom
  double lhs = 0;
  double rhs = 0;
};

/// Outcome of a pathwise/atomwise check. `holds` is decided exactly in
/// rational mode; `worst_margin` is a floating summary for display.
struct CheckReport {
  std::string check;
  bool holds = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<CheckWitness> witness;
  int checked = 0;
  int violations = 0;
};

}  // namespace totalrisk
