#include "totalrisk/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

#include "totalrisk/compensator.hpp"
#include "totalrisk/convex_order.hpp"
#include "totalrisk/error.hpp"

namespace totalrisk {

DensitySpec DensitySpec::exponential(double rate) {
  DensitySpec d;
  d.family = Family::Exponential;
  d.rate = rate;
  return d;
}

DensitySpec DensitySpec::uniform() {
  DensitySpec d;
  d.family = Family::Uniform;
  return d;
}

DensitySpec DensitySpec::weibull(double shape, double scale) {
  DensitySpec d;
  d.family = Family::Weibull;
  d.shape = shape;
  d.scale = scale;
  return d;
}

void DensitySpec::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0; };
  if (family == Family::Exponential && !positive(rate)) {
    throw Error(ErrorCode::InvalidDensity, "exponential rate must be positive");
  }
  if (family == Family::Weibull && (!positive(shape) || !positive(scale))) {
    throw Error(ErrorCode::InvalidDensity, "weibull shape and scale must be positive");
  }
}

std::string DensitySpec::name() const {
  switch (family) {
    case Family::Exponential: return "exponential";
    case Family::Uniform: return "uniform";
    case Family::Weibull: return "weibull";
  }
  return "unknown";
}

double DensitySpec::survival(double t) const {
  if (t <= 0) return 1;
  switch (family) {
    case Family::Exponential: return std::exp(-rate * t);
    case Family::Uniform: return t >= 1 ? 0 : 1 - t;
    case Family::Weibull: return std::exp(-std::pow(t / scale, shape));
  }
  return 0;
}

double DensitySpec::cdf(double t) const { return 1 - survival(t); }

double DensitySpec::cumulative_hazard(double t) const {
  if (t <= 0) return 0;
  switch (family) {
    case Family::Exponential: return rate * t;
    case Family::Uniform: return -std::log1p(-t);
    case Family::Weibull: return std::pow(t / scale, shape);
  }
  return 0;
}

double DensitySpec::quantile(double u) const {
  const double e = -std::log1p(-u);
  switch (family) {
    case Family::Exponential: return e / rate;
    case Family::Uniform: return u;
    case Family::Weibull: return scale * std::pow(e, 1 / shape);
  }
  return 0;
}

unsigned worker_count() {
  if (const char* env = std::getenv("TOTALRISK_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double SampleBatch::mean() const {
  double total = 0;
  for (double v : values) total += v;
  return values.empty() ? 0 : total / static_cast<double>(values.size());
}

double SampleBatch::variance() const {
  if (values.size() < 2) return 0;
  const double mu = mean();
  double total = 0;
  for (double v : values) total += (v - mu) * (v - mu);
  return total / static_cast<double>(values.size() - 1);
}

SampleBatch sample_natural_risk(const DensitySpec& density, std::size_t n, std::uint64_t seed, unsigned workers) {
  density.validate();
  if (n == 0) throw Error(ErrorCode::EmptyBatch, "sample size must be at least 1");
  SampleBatch batch;
  batch.seed = seed;
  batch.density = density;
  batch.z.resize(n);
  batch.values.resize(n);

  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t b; (b = next.fetch_add(1)) < blocks;) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
      std::mt19937_64 gen(seq);
      const std::size_t end = std::min(n, (b + 1) * kBlockSize);
      for (std::size_t i = b * kBlockSize; i < end; ++i) {
        // Midpoint of a 53-bit dyadic cell: never 0 or 1.
        const double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1p-53;
        batch.z[i] = density.quantile(u);
        batch.values[i] = density.cumulative_hazard(batch.z[i]);
      }
    }
  };
  const unsigned count = std::min<std::size_t>(workers ? workers : worker_count(), blocks);
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < count; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return batch;
}

double ks_statistic(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyBatch, "empty batch");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = x[i] <= 0 ? 0 : -std::expm1(-x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

std::vector<ShortfallEstimate> empirical_shortfall(std::span<const double> values, std::span<const double> lambdas) {
  if (values.empty()) throw Error(ErrorCode::EmptyBatch, "empty batch");
  const double n = static_cast<double>(values.size());
  std::vector<ShortfallEstimate> out;
  for (double lambda : lambdas) {
    double total = 0;
    for (double v : values) total += std::max(v - lambda, 0.0);
    const double mean = total / n;
    double ss = 0;
    for (double v : values) {
      const double d = std::max(v - lambda, 0.0) - mean;
      ss += d * d;
    }
    const double s = values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0;
    out.push_back({lambda, mean, 3 * s / std::sqrt(n), std::exp(-lambda)});
  }
  return out;
}

std::vector<EcdfPoint> ecdf_table(std::span<const double> values, std::size_t max_points) {
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  std::vector<EcdfPoint> out;
  if (x.empty() || max_points == 0) return out;
  const std::size_t stride = std::max<std::size_t>(1, x.size() / max_points);
  for (std::size_t i = stride - 1; i < x.size(); i += stride) {
    out.push_back({x[i], static_cast<double>(i + 1) / static_cast<double>(x.size()), -std::expm1(-x[i])});
  }
  return out;
}

MortalityTable<double> discretize_bins(const DensitySpec& density, double mesh) {
  density.validate();
  if (!(mesh > 0) || !std::isfinite(mesh)) throw Error(ErrorCode::MeshTooCoarse, "mesh must be positive");
  constexpr std::size_t kMaxBins = std::size_t(1) << 26;
  std::vector<double> surv{1.0};
  while (surv.back() > kTailFold) {
    if (surv.size() > kMaxBins) throw Error(ErrorCode::EnumerationTooLarge, "mesh needs too many bins");
    surv.push_back(density.survival(static_cast<double>(surv.size()) * mesh));
  }
  const std::size_t bins = surv.size() - 1;
  if (bins < 2) {
    throw Error(ErrorCode::MeshTooCoarse, "mesh " + format_scalar(mesh) + " yields fewer than two bins");
  }
  MortalityTable<double> table;
  table.q.resize(bins);
  for (std::size_t n = 1; n < bins; ++n) table.q[n - 1] = surv[n - 1] - surv[n];
  table.q[bins - 1] = surv[bins - 1];
  return table;
}

InsuranceModel<double> discretize_density(const DensitySpec& density, double mesh, std::size_t node_budget) {
  const auto table = discretize_bins(density, mesh);
  const std::size_t n = table.q.size();
  const std::size_t nodes = n * (n + 1) / 2 + n + 1;
  if (nodes > node_budget) {
    throw Error(ErrorCode::EnumerationTooLarge,
                "comb tree needs " + std::to_string(nodes) + " nodes, budget " + std::to_string(node_budget));
  }
  return build_insurance_model(table, SignalSpec<double>{});
}

Distribution<double> natural_risk_law(const MortalityTable<double>& bins) {
  const auto hazard = mortality_hazard(bins);
  std::vector<std::pair<double, double>> pairs;
  double cumulative = 0;
  for (std::size_t n = 0; n < hazard.size(); ++n) {
    cumulative += hazard[n];
    if (bins.q[n] > 0) pairs.emplace_back(cumulative, bins.q[n]);
  }
  return Distribution<double>::from_pairs(std::move(pairs));
}

ConvergenceReport discretization_convergence(const DensitySpec& density, const std::vector<double>& meshes,
                                             const std::vector<double>& lambdas, double threshold,
                                             std::size_t node_budget) {
  ConvergenceReport report;
  for (double mesh : meshes) {
    ConvergenceRow row;
    row.mesh = mesh;
    row.lambdas = lambdas;
    const auto bins = discretize_bins(density, mesh);
    row.bins = bins.years();
    const auto law = natural_risk_law(bins);
    for (double lambda : lambdas) row.gaps.push_back(std::abs(std::exp(-lambda) - shortfall(law, lambda)));

    const std::size_t n = bins.q.size();
    if (n * (n + 1) / 2 + n + 1 <= node_budget) {
      const auto model = discretize_density(density, mesh, node_budget);
      const auto tree_law = total_risk(model.tree, model.filtration, model.z).law;
      row.tree_checked = true;
      for (double lambda : lambdas) {
        row.tree_discrepancy = std::max(row.tree_discrepancy, std::abs(shortfall(tree_law, lambda) - shortfall(law, lambda)));
      }
    }
    if (!report.rows.empty()) {
      const auto& prev = report.rows.back().gaps;
      for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (row.gaps[i] > prev[i]) report.monotone = false;
      }
    }
    report.rows.push_back(std::move(row));
  }
  if (!report.rows.empty()) {
    const auto& g = report.rows.back().gaps;
    report.finest_gap = g.empty() ? 0 : *std::max_element(g.begin(), g.end());
  }
  report.holds = report.monotone && report.finest_gap < threshold;
  return report;
}

}  // namespace totalrisk
