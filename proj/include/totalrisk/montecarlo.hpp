#pragma once

// Continuous-time natural-filtration risk R = -ln(1 - F(Z)) by simulation,
// goodness of fit against Exp(1), and the discretized comb-tree total risk.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "totalrisk/distribution.hpp"
#include "totalrisk/scenarios.hpp"

namespace totalrisk {

struct DensitySpec {
  enum class Family { Exponential, Uniform, Weibull };
  Family family = Family::Exponential;
  double rate = 1;   // exponential
  double shape = 1;  // weibull
  double scale = 1;  // weibull

  static DensitySpec exponential(double rate);
  static DensitySpec uniform();
  static DensitySpec weibull(double shape, double scale);

  /// Throws InvalidDensity for nonpositive or non-finite parameters.
  void validate() const;
  std::string name() const;
  double cdf(double t) const;
  double survival(double t) const;
  /// H(t) = -ln(1 - F(t)), in closed form per family.
  double cumulative_hazard(double t) const;
  /// F^{-1}(u) for u in (0, 1).
  double quantile(double u) const;
};

/// Name of the versioned generator: mt19937_64 per substream, seeded from
/// (seed, substream index) through std::seed_seq, with kBlockSize draws per
/// substream.
inline constexpr const char* kGeneratorName = "totalrisk-mt64-v1";
inline constexpr std::size_t kBlockSize = 65536;

/// Worker count from TOTALRISK_THREADS, else the hardware concurrency.
unsigned worker_count();

struct SampleBatch {
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;
  DensitySpec density;
  std::vector<double> z;       // lifetimes
  std::vector<double> values;  // R = H(Z)

  std::size_t size() const { return values.size(); }
  double mean() const;
  double variance() const;  // unbiased
};

/// Output is identical for every worker count.
SampleBatch sample_natural_risk(const DensitySpec& density, std::size_t n, std::uint64_t seed,
                                unsigned workers = 0);

/// sup |ECDF - (1 - e^{-x})| over the step edges. EmptyBatch on no data.
double ks_statistic(std::span<const double> values);
inline double ks_statistic(const SampleBatch& batch) { return ks_statistic(batch.values); }

struct ShortfallEstimate {
  double lambda = 0;
  double empirical = 0;
  double halfwidth = 0;  // 3 s / sqrt(N)
  double reference = 0;  // e^{-lambda}
  bool within() const { return empirical <= reference + halfwidth; }
};

std::vector<ShortfallEstimate> empirical_shortfall(std::span<const double> values, std::span<const double> lambdas);

struct EcdfPoint {
  double x = 0;
  double ecdf = 0;
  double exp_cdf = 0;
};

/// At most `max_points` evenly spaced order statistics.
std::vector<EcdfPoint> ecdf_table(std::span<const double> values, std::size_t max_points);

// ---------------------------------------------------------------------------
// Discretization on the mesh h.

inline constexpr double kTailFold = 1e-9;

/// q_n = F(nh) - F((n-1)h), the last bin absorbing a tail of mass <= 1e-9.
/// MeshTooCoarse below two bins.
MortalityTable<double> discretize_bins(const DensitySpec& density, double mesh);

/// Comb tree with natural filtration; EnumerationTooLarge when the tree
/// would exceed `node_budget` nodes.
InsuranceModel<double> discretize_density(const DensitySpec& density, double mesh,
                                          std::size_t node_budget = std::size_t(1) << 21);

/// Law of the discrete total risk under the natural filtration without
/// building the tree: death in bin n carries h_1 + ... + h_n.
Distribution<double> natural_risk_law(const MortalityTable<double>& bins);

struct ConvergenceRow {
  double mesh = 0;
  int bins = 0;
  std::vector<double> lambdas;
  std::vector<double> gaps;  // |e^{-lambda} - E(Y - lambda)^+|
  bool tree_checked = false;
  double tree_discrepancy = 0;  // max shortfall difference, tree versus closed form
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool monotone = true;  // gaps nonincreasing row to row at every lambda
  double finest_gap = 0;
  bool holds = false;    // monotone and finest_gap < threshold
};

ConvergenceReport discretization_convergence(const DensitySpec& density, const std::vector<double>& meshes,
                                             const std::vector<double>& lambdas, double threshold = 0.01,
                                             std::size_t node_budget = std::size_t(1) << 21);

}  // namespace totalrisk
