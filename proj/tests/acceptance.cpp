// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"
#include "totalrisk/cli.hpp"
#include "totalrisk/compensator.hpp"
#include "totalrisk/convex_order.hpp"
#include "totalrisk/error.hpp"
#include "totalrisk/montecarlo.hpp"
#include "totalrisk/scenarios.hpp"

using namespace totalrisk;
using R = Rational;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs a criterion body, turning an escaping exception into a failure line.
void criterion(int id, const char* title, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [pass, detail] = body();
    report(id, title, pass, detail);
  } catch (const std::exception& e) {
    report(id, title, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Tree shapes: child counts per internal node, breadth first.

void all_shapes(int depth, int max_branch, std::vector<std::vector<int>>& out) {
  std::vector<int> counts;
  std::function<void(int, int)> level = [&](int d, int width) {
    if (d == depth) {
      out.push_back(counts);
      return;
    }
    // choose counts for `width` nodes at depth d
    std::function<void(int, int)> node = [&](int i, int next_width) {
      if (i == width) {
        level(d + 1, next_width);
        return;
      }
      for (int k = 1; k <= max_branch; ++k) {
        counts.push_back(k);
        node(i + 1, next_width + k);
        counts.pop_back();
      }
    };
    node(0, 0);
  };
  level(0, 1);
}

std::vector<int> random_shape(gen::Rng& rng, int depth, int max_branch) {
  std::vector<int> counts;
  int width = 1;
  for (int d = 0; d < depth; ++d) {
    int next = 0;
    for (int i = 0; i < width; ++i) {
      counts.push_back(gen::uniform_int(rng, 1, max_branch));
      next += counts.back();
    }
    width = next;
  }
  return counts;
}

oracle::Tree tree_of_shape(gen::Rng& rng, const std::vector<int>& counts) {
  oracle::Tree t;
  t.add(-1, R(1));
  std::vector<int> frontier{0};
  std::size_t c = 0;
  while (c < counts.size()) {
    std::vector<int> next;
    for (int node : frontier) {
      const auto probs = gen::branch_probs(rng, counts[c]);
      for (int k = 0; k < counts[c]; ++k) next.push_back(t.add(node, probs[k]));
      ++c;
    }
    frontier = std::move(next);
  }
  return t;
}

// Structured Z assignments: all at the first step, all at infinity, by leaf
// index, reversed, plus two random draws.
std::vector<std::map<int, std::int64_t>> z_sample(gen::Rng& rng, const oracle::Tree& t, int T) {
  const auto leaves = t.leaves();
  std::vector<std::map<int, std::int64_t>> out(4);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    out[0][leaves[i]] = 1;
    out[1][leaves[i]] = oracle::kInf;
    const int cyc = static_cast<int>(i % (T + 1));
    out[2][leaves[i]] = cyc == T ? oracle::kInf : cyc + 1;
    out[3][leaves[i]] = T - static_cast<int>(i % T);
  }
  out.push_back(gen::random_z(rng, t, T, true));
  out.push_back(gen::random_z(rng, t, T, false));
  return out;
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> exhaustive_suite() {
  const auto start = Clock::now();
  gen::Rng rng(1001);
  std::vector<std::vector<int>> shapes1, shapes2;
  all_shapes(1, 3, shapes1);
  all_shapes(2, 3, shapes2);
  std::vector<std::pair<int, std::vector<int>>> shapes;
  for (auto& s : shapes1) shapes.emplace_back(1, s);
  for (auto& s : shapes2) shapes.emplace_back(2, s);
  for (int i = 0; i < 50; ++i) shapes.emplace_back(3, random_shape(rng, 3, 3));

  long cases = 0, mean_fail = 0, order_fail = 0, oracle_fail = 0;
  for (const auto& [depth, shape] : shapes) {
    const auto t = tree_of_shape(rng, shape);
    const auto b = fixtures::build<R>(t);
    const int T = depth;
    for (const auto& levels : gen::all_levels(T, depth)) {
      const FiltrationSpec f(levels);
      for (const auto& zmap : z_sample(rng, t, T)) {
        ++cases;
        const auto z = fixtures::make_z(b, zmap);
        const auto y = total_risk(b.tree, f, z);
        if (y.law.mean() != 1) ++mean_fail;
        if (!convex_order_vs_exponential(y.law, R(0)).holds) ++order_fail;
        const auto ref = oracle::total_risk(t, levels, zmap);
        for (int l = 0; l < b.tree.num_leaves(); ++l) {
          if (y.per_leaf[l] != ref.at(b.node_of_leaf[l])) {
            ++oracle_fail;
            break;
          }
        }
      }
    }
  }
  const double secs = seconds_since(start);
  const bool pass = cases >= 10000 && mean_fail == 0 && order_fail == 0 && oracle_fail == 0 && secs <= 120;
  return {pass, fmt("%ld cases over %zu trees, mean!=1: %ld, order failures: %ld, oracle mismatches: %ld, %.1f s",
                    cases, shapes.size(), mean_fail, order_fail, oracle_fail, secs)};
}

std::pair<bool, std::string> fixture() {
  const auto tree = fixtures::two_point_tree<R>();
  const auto z = fixtures::two_point_z(tree);
  const auto f = FiltrationSpec::shifted(2, 2);
  const auto y = total_risk(tree, f, z);
  bool law_ok = y.law.size() == 2 && y.law.atoms()[0].value == R(1, 2) && y.law.atoms()[0].prob == R(1, 2) &&
                y.law.atoms()[1].value == R(3, 2) && y.law.atoms()[1].prob == R(1, 2);
  const R sf = shortfall(y.law, R(1, 2));
  const bool sf_ok = sf == R(1, 2) && leq_exp(sf, R(-1, 2), R(0));
  const auto sb = stopped_bound(tree, f, RawIncreasingProcess<R>::from_random_time(z, 2), R(1), R(0));
  const bool sb_ok = sb.rhs == R(1, 4) && sb.plus_part == R(1, 4) && shortfall(y.law, R(1)) == R(1, 4) && sb.holds &&
                     leq_exp(sb.rhs, R(-1), R(0));
  return {law_ok && sf_ok && sb_ok,
          fmt("law {1/2: 1/2, 3/2: 1/2} %s, E(Y-1/2)+ = %s, stopped rhs = %s, E(Y-1)+ = %s", law_ok ? "exact" : "WRONG",
              format_scalar(sf).c_str(), format_scalar(sb.rhs).c_str(), format_scalar(sb.plus_part).c_str())};
}

std::pair<bool, std::string> lemma_and_martingale() {
  const auto start = Clock::now();
  gen::Rng rng(1003);
  int super_fail = 0, mart_fail = 0;
  double worst_super = INFINITY, worst_mart = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    const int depth = gen::uniform_int(rng, 1, 3);
    const auto t = gen::random_tree(rng, depth, 3);
    const auto b = fixtures::build<R>(t);
    const int T = gen::uniform_int(rng, 1, 3);
    const FiltrationSpec f(gen::random_levels(rng, T, depth));
    const auto a = fixtures::make_a(b, gen::random_a(rng, t, T));
    const auto sm = check_supermartingale(b.tree, f, supermartingale_M(b.tree, f, a), R(0));
    const auto mg = check_projection_martingale(b.tree, f, project(b.tree, f, a), R(0));
    if (!sm.holds) ++super_fail;
    if (!mg.holds) ++mart_fail;
    worst_super = std::min(worst_super, sm.worst_margin);
    worst_mart = std::min(worst_mart, mg.worst_margin);
  }
  const double secs = seconds_since(start);
  const bool pass = super_fail == 0 && mart_fail == 0 && worst_super >= 0 && worst_mart == 0 && secs <= 60;
  return {pass, fmt("1000 cases, supermartingale failures %d (worst margin %.3g), martingale failures %d "
                    "(worst drift %.3g), %.1f s",
                    super_fail, worst_super, mart_fail, std::abs(worst_mart), secs)};
}

std::pair<bool, std::string> extremes() {
  gen::Rng rng(1004);
  int bad = 0;
  for (int iter = 0; iter < 100; ++iter) {
    const int depth = gen::uniform_int(rng, 1, 3);
    const auto t = gen::random_tree(rng, depth, 3);
    const auto b = fixtures::build<R>(t);
    const int T = gen::uniform_int(rng, 1, 4);
    const auto z = fixtures::make_z(b, gen::random_z(rng, t, T, true));
    for (const auto& f : {FiltrationSpec::trivial(T), FiltrationSpec::full(T, depth)}) {
      const auto y = total_risk(b.tree, f, z);
      if (y.law.size() != 1 || y.law.atoms()[0].value != 1) ++bad;
    }
  }
  return {bad == 0, fmt("100 (tree, Z) pairs under trivial and full information, %d not a point mass at 1", bad)};
}

std::pair<bool, std::string> monte_carlo() {
  const DensitySpec families[] = {DensitySpec::exponential(1), DensitySpec::uniform(), DensitySpec::weibull(1.5, 1)};
  const std::size_t N = 1000000;
  const double lambdas[] = {0.25, 0.5, 1, 2, 4};
  bool pass = true;
  double worst_mean = 0, worst_ks = 0, slowest = 0;
  std::string failed;
  for (const auto& d : families) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto start = Clock::now();
      const auto batch = sample_natural_risk(d, N, seed);
      const double mean_err = std::abs(batch.mean() - 1);
      const double ks = ks_statistic(batch);
      bool ok = mean_err <= 0.004 && ks <= 0.00163;
      for (const auto& e : empirical_shortfall(batch.values, lambdas)) ok = ok && e.within();
      const double secs = seconds_since(start);
      ok = ok && secs <= 30;
      worst_mean = std::max(worst_mean, mean_err);
      worst_ks = std::max(worst_ks, ks);
      slowest = std::max(slowest, secs);
      if (!ok) {
        pass = false;
        failed += " " + d.name() + "/seed" + std::to_string(seed);
      }
    }
  }
  return {pass, fmt("15 batches of 1e6, max |mean-1| = %.5f, max KS = %.6f, slowest batch %.2f s%s%s", worst_mean,
                    worst_ks, slowest, failed.empty() ? "" : ", failed:", failed.c_str())};
}

std::pair<bool, std::string> convergence() {
  const DensitySpec families[] = {DensitySpec::exponential(1), DensitySpec::uniform(), DensitySpec::weibull(1.5, 1)};
  bool pass = true;
  std::string detail;
  for (const auto& d : families) {
    const auto rep = discretization_convergence(d, {1.0 / 4, 1.0 / 16, 1.0 / 64, 1.0 / 256}, {0.5, 1, 2});
    pass = pass && rep.holds;
    bool tree_ok = true;
    for (const auto& row : rep.rows) tree_ok = tree_ok && (!row.tree_checked || row.tree_discrepancy < 1e-9);
    pass = pass && tree_ok;
    detail += fmt("%s%s: monotone %s, finest gap %.5f", detail.empty() ? "" : "; ", d.name().c_str(),
                  rep.monotone ? "yes" : "no", rep.finest_gap);
  }
  return {pass, detail};
}

std::pair<bool, std::string> pivotal() {
  const std::vector<R> lambdas{R(1), R(3, 2), R(2), R(3)};
  auto bern = [](const R& p) { return EdgeAlphabet<R>{{0, 1}, {1 - p, p}}; };

  PivotalModel<R> majority;
  majority.m = 6;
  majority.K = 4;
  majority.alphabet.assign(6, bern(R(1, 2)));
  majority.rule.kind = PivotalRule::Kind::ThresholdPivot;
  majority.order = {0, 1, 2, 3, 4, 5};

  PivotalModel<R> series;
  series.m = 9;
  series.K = 3;
  series.alphabet.assign(9, bern(R(2, 3)));
  series.rule.kind = PivotalRule::Kind::ParallelSeries;
  series.rule.paths = 3;
  series.rule.length = 3;
  series.order = {0, 3, 6, 1, 4, 7, 2, 5, 8};

  PivotalModel<R> valued;
  valued.m = 8;
  valued.K = 8;
  valued.alphabet.assign(8, EdgeAlphabet<R>{{0, 1, 2}, {R(1, 2), R(1, 3), R(1, 6)}});
  valued.rule.kind = PivotalRule::Kind::ValueIn;
  valued.rule.values = {2};
  valued.order = {7, 6, 5, 4, 3, 2, 1, 0};

  bool pass = true;
  std::string detail;
  for (const auto* model : {&majority, &series, &valued}) {
    const auto rep = verify_scenario2_chain(*model, lambdas, R(0));
    pass = pass && rep.chain_holds && rep.each_y_dominated && rep.tails_hold;
    double worst_tail = 0;
    for (const auto& t : rep.tails) worst_tail = std::max(worst_tail, t.tail / t.bound);
    detail += fmt("%s%s m=%d K=%d: %d samples, chain %s, Y_j %s, max tail/bound %.3f", detail.empty() ? "" : "; ",
                  model->rule.name().c_str(), model->m, model->K, rep.samples, rep.chain_holds ? "ok" : "BROKEN",
                  rep.each_y_dominated ? "ok" : "FAIL", worst_tail);
  }
  return {pass, detail};
}

KestenInstance<R> random_kesten(gen::Rng& rng) {
  const int depth = gen::uniform_int(rng, 2, 4);
  const auto t = gen::random_tree(rng, depth, depth <= 3 ? 3 : 2);
  const auto b = fixtures::build<R>(t);
  const R T = std::vector<R>{R(1), R(2), R(1, 2)}[gen::uniform_int(rng, 0, 2)];
  // Half the fleet draws rare large jumps: the first child of every node
  // carries no increment, its siblings a large one.
  const bool jumpy = gen::uniform_int(rng, 0, 1) == 1;
  std::vector<R> node_u(t.id.size());
  for (std::size_t k = 1; k < node_u.size(); ++k) {
    const bool first_child = t.parent[k - 1] != t.parent[k];
    if (jumpy) {
      node_u[k] = first_child ? R(0) : T * gen::q(gen::uniform_int(rng, 2, 4), 4);
    } else {
      node_u[k] = T * gen::q(gen::uniform_int(rng, 0, 4), 4);
    }
  }
  std::vector<std::vector<R>> u;
  for (int node : b.node_of_leaf) {
    std::vector<R> path(depth);
    for (int k = 1; k <= depth; ++k) path[k - 1] = node_u[t.ancestor(node, k)];
    u.push_back(std::move(path));
  }
  const R ratio = gen::q(gen::uniform_int(rng, 9, 16), 8);
  return {b.tree, FiltrationSpec::shifted(depth, depth), std::move(u), ratio * T, T};
}

std::pair<bool, std::string> kesten() {
  gen::Rng rng(1008);
  int violations = 0, nonempty = 0;
  double worst = 0;
  for (int iter = 0; iter < 500; ++iter) {
    const auto inst = random_kesten(rng);
    const auto rep = kesten_check(inst, R(0));
    if (!rep.holds) ++violations;
    if (rep.probability > 0) ++nonempty;
    worst = std::max(worst, to_double(rep.probability) / rep.bound);
  }
  // R <= T: the bound is at least one.
  int vacuous_bad = 0;
  for (int iter = 0; iter < 50; ++iter) {
    auto inst = random_kesten(rng);
    inst.r = inst.t * gen::q(gen::uniform_int(rng, 1, 4), 4);
    const auto rep = kesten_check(inst, R(0));
    if (!(rep.bound >= 1) || !rep.holds) ++vacuous_bad;
  }
  // Deterministic increments whose compensated sum stays below R.
  int empty_bad = 0;
  for (int iter = 0; iter < 50; ++iter) {
    auto inst = random_kesten(rng);
    const int N = inst.filtration.horizon();
    for (auto& path : inst.u) path.assign(N, inst.t / N);
    const auto rep = kesten_check(inst, R(0));
    if (rep.probability != 0 || !rep.holds) ++empty_bad;
  }
  const bool pass = violations == 0 && vacuous_bad == 0 && empty_bad == 0;
  return {pass, fmt("500 instances (%d with a nonempty event), %d violations, max probability/bound %.3f; "
                    "vacuous regime %d bad, empty-event regime %d bad",
                    nonempty, violations, worst, vacuous_bad, empty_bad)};
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "totalrisk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::pair<bool, std::string> negative_controls() {
  const auto spread = Distribution<R>::from_pairs({{R(0), R(9, 10)}, {R(10), R(1, 10)}});
  const auto r = convex_order_vs_exponential(spread, R(0));
  const bool witness_ok = !r.holds && r.witness && r.witness->lambda_text == "5";

  gen::Rng rng(1009);
  int accepted_wrong_mean = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    auto pairs = gen::random_mean_one(rng, 4, 4);
    const R scale = std::vector<R>{R(1, 2), R(999, 1000), R(1001, 1000), R(2)}[iter % 4];
    for (auto& [v, p] : pairs) v *= scale;
    if (convex_order_vs_exponential(Distribution<R>::from_pairs(pairs), R(0)).holds) ++accepted_wrong_mean;
  }

  const std::string dir = TOTALRISK_TEST_DATA;
  const int c0 = run_cli({"order-exp", "--input", dir + "/point_mass.json"});
  const int c1 = run_cli({"order-exp", "--input", dir + "/spread.json"});
  const int c2 = run_cli({"risk", "--input", dir + "/malformed.json"});
  const bool cli_ok = c0 == kExitHolds && c1 == kExitViolation && c2 == kExitInputError;
  return {witness_ok && accepted_wrong_mean == 0 && cli_ok,
          fmt("spread law rejected at lambda %s, wrong-mean laws accepted %d/1000, CLI exits %d/%d/%d",
              r.witness ? r.witness->lambda_text.c_str() : "none", accepted_wrong_mean, c0, c1, c2)};
}

}  // namespace

int main() {
  criterion(1, "exhaustive exact oracle suite", exhaustive_suite);
  criterion(2, "two-point fixture", fixture);
  criterion(3, "supermartingale and martingale checks", lemma_and_martingale);
  criterion(4, "trivial and full information", extremes);
  criterion(5, "natural-filtration Monte Carlo", monte_carlo);
  criterion(6, "discretization convergence", convergence);
  criterion(7, "pivotal-bond chain", pivotal);
  criterion(8, "adapted-sum tail bound", kesten);
  criterion(9, "negative controls and exit codes", negative_controls);
  return failures == 0 ? 0 : 1;
}
