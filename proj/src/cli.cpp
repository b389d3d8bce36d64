#include "totalrisk/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "totalrisk/compensator.hpp"
#include "totalrisk/convex_order.hpp"
#include "totalrisk/io.hpp"
#include "totalrisk/montecarlo.hpp"
#include "totalrisk/scenarios.hpp"

namespace totalrisk {

namespace {

struct Output {
  std::string text;
  int code = kExitHolds;
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

template <class S>
Json number(const S& x) {
  if constexpr (Arith<S>::exact) {
    return format_scalar(x);
  } else {
    return x;
  }
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <class S>
Json distribution_json(const Distribution<S>& d) {
  Json out = Json::array();
  for (const auto& a : d.atoms()) out.push_back({number(a.value), number(a.prob)});
  return out;
}

template <class S>
std::string distribution_csv(const Distribution<S>& d) {
  std::string out = "value,probability\n";
  for (const auto& a : d.atoms()) out += format_scalar(a.value) + "," + format_scalar(a.prob) + "\n";
  return out;
}

double report_margin(const ShortfallReport& r) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& c : r.checkpoints) worst = std::min(worst, c.margin);
  if (!r.mean_check.pass) worst = std::min(worst, -std::abs(r.mean_check.mean - r.mean_check.target));
  return worst;
}

Json witness_json(const std::optional<OrderWitness>& w) {
  if (!w) return nullptr;
  Json out{{"kind", w->kind == OrderWitness::Kind::Mean ? "mean" : "shortfall"}, {"margin", w->margin}};
  out["lambda"] = w->lambda ? Json(*w->lambda) : Json(nullptr);
  if (!w->lambda_text.empty()) out["lambda_text"] = w->lambda_text;
  return out;
}

Json shortfall_json(const std::string& check, const ShortfallReport& r) {
  Json points = Json::array();
  for (const auto& c : r.checkpoints) {
    Json p{{"lambda", c.lambda}, {"shortfall", c.shortfall}, {"reference", c.reference},
           {"margin", c.margin}, {"interior", c.interior}, {"ok", c.ok}};
    if (!c.lambda_text.empty()) p["lambda_text"] = c.lambda_text;
    points.push_back(std::move(p));
  }
  return {{"check", check},
          {"holds", r.holds},
          {"worst_margin", finite_or_null(report_margin(r))},
          {"witness", witness_json(r.witness)},
          {"mean_check", {{"mean", r.mean_check.mean}, {"target", r.mean_check.target}, {"pass", r.mean_check.pass}}},
          {"checkpoints", std::move(points)}};
}

std::string shortfall_csv(const ShortfallReport& r) {
  std::string out = "lambda,shortfall,reference,margin,interior,ok\n";
  for (const auto& c : r.checkpoints) {
    out += (c.lambda_text.empty() ? format_scalar(c.lambda) : c.lambda_text) + "," + format_scalar(c.shortfall) + "," +
           format_scalar(c.reference) + "," + format_scalar(c.margin) + "," + (c.interior ? "1" : "0") + "," +
           (c.ok ? "1" : "0") + "\n";
  }
  return out;
}

Json check_json(const CheckReport& r) {
  Json out{{"check", r.check},
           {"holds", r.holds},
           {"worst_margin", finite_or_null(r.worst_margin)},
           {"checked", r.checked},
           {"violations", r.violations}};
  if (r.witness) {
    out["witness"] = {{"step", r.witness->step}, {"atom", r.witness->atom}, {"lhs", r.witness->lhs},
                      {"rhs", r.witness->rhs}};
  } else {
    out["witness"] = nullptr;
  }
  return out;
}

Json tail_json(const TailReport& t) {
  return {{"lambda", t.lambda}, {"lambda_text", t.lambda_text}, {"tail", t.tail},
          {"tail_text", t.tail_text}, {"bound", t.bound}, {"holds", t.holds}};
}

template <class S>
std::vector<S> lambdas_or(const RunConfig& cfg, std::vector<std::string> fallback) {
  const auto& texts = cfg.lambdas.empty() ? fallback : cfg.lambdas;
  std::vector<S> out;
  for (const auto& t : texts) out.push_back(parse_scalar<S>(t));
  return out;
}

struct Context {
  const RunConfig& cfg;
  std::vector<Json> docs;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

bool csv(const Context& ctx) { return ctx.cfg.format == "csv"; }

void json_only(const Context& ctx) {
  if (csv(ctx)) config_error("'" + ctx.cfg.command + "' has no CSV output");
}

template <class S>
RawIncreasingProcess<S> process_from(const TreeInput<S>& input) {
  if (input.a) return *input.a;
  if (input.z) return RawIncreasingProcess<S>::from_random_time(*input.z, input.filtration.horizon());
  config_error("input needs an 'A' process or a 'Z' time");
}

template <class S>
Output cmd_validate(const Context& ctx, const S&) {
  json_only(ctx);
  const Json& doc = ctx.docs.at(0);
  const auto document = read_tree_document<S>(doc);
  const auto report = validate_tree<S>(document.nodes, document.declared_depth);
  Json out{{"check", "validate"}, {"holds", report.ok}, {"worst_margin", nullptr}};
  if (report.ok) {
    read_tree_input<S>(doc);  // filtration, Z and A must also be well formed
    out["witness"] = nullptr;
  } else {
    out["witness"] = {{"error", std::string(to_string(*report.error))}, {"node", report.node_id},
                      {"message", report.message}};
  }
  return {dump(out), report.ok ? kExitHolds : kExitInputError};
}

template <class S>
Output cmd_risk(const Context& ctx, const S& tol) {
  const Json& doc = ctx.docs.at(0);
  const auto input = read_tree_input<S>(doc);
  if (!input.z) config_error("'risk' needs a 'Z' time");
  const bool include = doc.value("include_infinity", true);
  const auto risk = total_risk(input.tree, input.filtration, *input.z, include);
  const auto order = convex_order_vs_exponential(risk.law, tol);
  const int code = order.holds ? kExitHolds : kExitViolation;
  if (csv(ctx)) return {distribution_csv(risk.law), code};
  Json per_leaf = Json::object();
  for (int l = 0; l < input.tree.num_leaves(); ++l) per_leaf[input.tree.leaf(l).id] = number(risk.per_leaf[l]);
  Json out = shortfall_json("total_risk", order);
  out["mean"] = number(risk.law.mean());
  out["variance"] = number(risk.law.variance());
  out["distribution"] = distribution_json(risk.law);
  out["per_leaf"] = std::move(per_leaf);
  return {dump(out), code};
}

template <class S>
Json atom_values(const ProbTree<S>& tree, const AdaptedProcess<S>& p, int step) {
  Json out = Json::object();
  const int level = p.step_level[step];
  for (int a = 0; a < tree.level_size(level); ++a) out[tree.atom(level, a).id] = number(p.at(step, a));
  return out;
}

template <class S>
Output cmd_project(const Context& ctx, const S& tol) {
  const auto input = read_tree_input<S>(ctx.docs.at(0));
  const auto a = process_from(input);
  const auto pair = project(input.tree, input.filtration, a);
  const auto check = check_projection_martingale(input.tree, input.filtration, pair, tol);
  const int code = check.holds ? kExitHolds : kExitViolation;
  if (csv(ctx)) {
    std::string text = "step,process,atom,value\n";
    for (int n = 0; n <= input.filtration.horizon(); ++n) {
      for (const auto* which : {&pair.optional, &pair.compensator}) {
        const int level = which->step_level[n];
        for (int k = 0; k < input.tree.level_size(level); ++k) {
          text += std::to_string(n) + "," + (which == &pair.optional ? "optional" : "compensator") + "," +
                  input.tree.atom(level, k).id + "," + format_scalar(which->at(n, k)) + "\n";
        }
      }
    }
    return {text, code};
  }
  Json steps = Json::array();
  for (int n = 0; n <= input.filtration.horizon(); ++n) {
    steps.push_back({{"step", n},
                     {"optional", atom_values(input.tree, pair.optional, n)},
                     {"compensator", atom_values(input.tree, pair.compensator, n)}});
  }
  Json out = check_json(check);
  out["steps"] = std::move(steps);
  out["terminal"] = distribution_json(leaf_distribution<S>(input.tree, pair.terminal(input.tree)));
  return {dump(out), code};
}

template <class S>
Output cmd_supermartingale(const Context& ctx, const S& tol) {
  json_only(ctx);
  const auto input = read_tree_input<S>(ctx.docs.at(0));
  const auto a = process_from(input);
  const auto m = supermartingale_M(input.tree, input.filtration, a);
  const auto super = check_supermartingale(input.tree, input.filtration, m, tol);
  const auto mart = check_projection_martingale(input.tree, input.filtration, project(input.tree, input.filtration, a), tol);
  Json values = Json::array();
  for (int n = 0; n <= m.horizon(); ++n) {
    Json atoms = Json::object();
    const int level = m.step_level[n];
    for (int k = 0; k < input.tree.level_size(level); ++k) {
      const auto& t = m.at(n, k);
      atoms[input.tree.atom(level, k).id] = {{"coef", number(t.coef)}, {"exponent", number(t.exponent)},
                                             {"value", to_double(t.coef) * std::exp(to_double(t.exponent))}};
    }
    values.push_back(std::move(atoms));
  }
  Json out = check_json(super);
  out["holds"] = super.holds && mart.holds;
  out["martingale"] = check_json(mart);
  out["M"] = std::move(values);
  return {dump(out), super.holds && mart.holds ? kExitHolds : kExitViolation};
}

template <class S>
Output cmd_stopped(const Context& ctx, const S& tol) {
  json_only(ctx);
  const auto input = read_tree_input<S>(ctx.docs.at(0));
  const auto a = process_from(input);
  Json rows = Json::array();
  bool holds = true;
  double worst = std::numeric_limits<double>::infinity();
  Json witness = nullptr;
  for (const auto& lambda : lambdas_or<S>(ctx.cfg, {"1"})) {
    const auto b = stopped_bound(input.tree, input.filtration, a, lambda, tol);
    const double margin = b.lhs - to_double(b.rhs);
    worst = std::min(worst, margin);
    const bool ok = b.holds && b.identity_holds;
    if (!ok && witness.is_null()) witness = {{"lambda", to_double(lambda)}, {"lhs", b.lhs}, {"rhs", to_double(b.rhs)}};
    holds = holds && ok;
    rows.push_back({{"lambda", number(lambda)},
                    {"lhs", b.lhs},
                    {"rhs", number(b.rhs)},
                    {"plus_part", number(b.plus_part)},
                    {"holds", b.holds},
                    {"identity_holds", b.identity_holds}});
  }
  Json out{{"check", "stopped_bound"}, {"holds", holds}, {"worst_margin", finite_or_null(worst)},
           {"witness", witness}, {"lambdas", std::move(rows)}};
  return {dump(out), holds ? kExitHolds : kExitViolation};
}

template <class S>
Output cmd_order_exp(const Context& ctx, const S& tol) {
  const auto dist = read_distribution<S>(ctx.docs.at(0));
  const auto r = convex_order_vs_exponential(dist, tol);
  const int code = r.holds ? kExitHolds : kExitViolation;
  if (csv(ctx)) return {shortfall_csv(r), code};
  return {dump(shortfall_json("convex_order_exp", r)), code};
}

template <class S>
Output cmd_order(const Context& ctx, const S& tol) {
  if (ctx.docs.size() != 2) config_error("'order' needs two --input distributions (y, then x)");
  const auto y = read_distribution<S>(ctx.docs[0]);
  const auto x = read_distribution<S>(ctx.docs[1]);
  const auto r = convex_order_leq(y, x, tol);
  const int code = r.holds ? kExitHolds : kExitViolation;
  if (csv(ctx)) return {shortfall_csv(r), code};
  return {dump(shortfall_json("convex_order", r)), code};
}

template <class S>
Output cmd_insurance(const Context& ctx, const S& tol) {
  const auto input = read_mortality<S>(ctx.docs.at(0));
  const auto model = build_insurance_model(input.table, input.signal);
  const auto risk = total_risk(model.tree, model.filtration, model.z);
  const auto order = convex_order_vs_exponential(risk.law, tol);

  // Calibration: the leaf law of Z reproduces q.
  std::vector<S> z_law(input.table.years(), S(0));
  for (int l = 0; l < model.tree.num_leaves(); ++l) z_law[model.z.values[l] - 1] += model.tree.leaf_prob(l);
  bool calibrated = true;
  for (int n = 0; n < input.table.years(); ++n) {
    calibrated = calibrated && abs_value(S(z_law[n] - input.table.q[n])) <= Arith<S>::sum_slack();
  }
  const bool holds = order.holds && calibrated;
  const int code = holds ? kExitHolds : kExitViolation;
  if (csv(ctx)) return {distribution_csv(risk.law), code};

  Json out = shortfall_json("insurance", order);
  out["holds"] = holds;
  out["calibrated"] = calibrated;
  Json hazard = Json::array();
  for (const auto& h : model.hazard) hazard.push_back(number(h));
  out["hazard"] = std::move(hazard);
  out["mean"] = number(risk.law.mean());
  out["variance"] = number(risk.law.variance());
  out["distribution"] = distribution_json(risk.law);
  if (!model.death_prob.empty()) {
    Json death = Json::array();
    for (const auto& row : model.death_prob) {
      Json r = Json::array();
      for (const auto& d : row) r.push_back(number(d));
      death.push_back(std::move(r));
    }
    out["death_prob"] = std::move(death);
  }
  return {dump(out), code};
}

template <class S>
Output cmd_pivotal(const Context& ctx, const S& tol) {
  json_only(ctx);
  const auto model = read_pivotal<S>(ctx.docs.at(0));
  const auto lambdas = lambdas_or<S>(ctx.cfg, {"1", "3/2", "2", "3"});
  const auto r = verify_scenario2_chain(model, lambdas, tol);
  Json per_index = Json::array();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < r.per_index.size(); ++j) {
    per_index.push_back(shortfall_json("Y_" + std::to_string(j + 1), r.per_index[j]));
    worst = std::min(worst, report_margin(r.per_index[j]));
  }
  Json tails = Json::array();
  Json witness = nullptr;
  for (const auto& t : r.tails) {
    tails.push_back(tail_json(t));
    worst = std::min(worst, t.bound - t.tail);
    if (!t.holds && witness.is_null()) witness = {{"kind", "tail"}, {"lambda", t.lambda}, {"tail", t.tail}};
  }
  if (r.first_violating_leaf && witness.is_null()) {
    witness = {{"kind", "chain"}, {"leaf", *r.first_violating_leaf}};
  }
  if (witness.is_null()) {
    for (std::size_t j = 0; j < r.per_index.size(); ++j) {
      if (!r.per_index[j].holds) {
        witness = {{"kind", "order"}, {"index", j + 1}, {"order", witness_json(r.per_index[j].witness)}};
        break;
      }
    }
  }
  Json out{{"check", "scenario_pivotal"},
           {"holds", r.holds},
           {"worst_margin", finite_or_null(worst)},
           {"witness", witness},
           {"rule", model.rule.name()},
           {"samples", r.samples},
           {"prob_small_set", number(r.prob_small_set)},
           {"chain_holds", r.chain_holds},
           {"first_link_violations", r.first_link_violations},
           {"second_link_violations", r.second_link_violations},
           {"each_y_dominated", r.each_y_dominated},
           {"per_index", std::move(per_index)},
           {"scaled_sum", shortfall_json("scaled_sum", r.scaled_sum)},
           {"tails", std::move(tails)},
           {"tails_hold", r.tails_hold}};
  return {dump(out), r.holds ? kExitHolds : kExitViolation};
}

template <class S>
Output cmd_kesten(const Context& ctx, const S& tol) {
  json_only(ctx);
  const auto instance = read_kesten<S>(ctx.docs.at(0));
  const auto r = kesten_check(instance, tol);
  const bool holds = r.holds && r.routes_agree;
  Json out{{"check", "kesten"},
           {"holds", holds},
           {"worst_margin", r.bound - to_double(r.probability)},
           {"witness", holds ? Json(nullptr) : Json{{"probability", to_double(r.probability)}, {"bound", r.bound}}},
           {"probability", number(r.probability)},
           {"bound", r.bound},
           {"direct_holds", r.holds},
           {"rescaled_tail", number(r.rescaled_tail)},
           {"rescaled_holds", r.rescaled_holds},
           {"routes_agree", r.routes_agree}};
  return {dump(out), holds ? kExitHolds : kExitViolation};
}

DensitySpec density_from(const Context& ctx) {
  return ctx.docs.empty() ? DensitySpec::exponential(1) : read_density(ctx.docs[0]);
}

Json density_json(const DensitySpec& d) {
  Json out{{"family", d.name()}};
  if (d.family == DensitySpec::Family::Exponential) out["rate"] = d.rate;
  if (d.family == DensitySpec::Family::Weibull) {
    out["shape"] = d.shape;
    out["scale"] = d.scale;
  }
  return out;
}

Output cmd_mc_natural(const Context& ctx) {
  const auto density = density_from(ctx);
  if (ctx.cfg.samples < 1) config_error("--samples must be at least 1");
  const auto batch = sample_natural_risk(density, ctx.cfg.samples, ctx.cfg.seed);
  const auto lambdas = lambdas_or<double>(ctx.cfg, {"0.25", "0.5", "1", "2", "4"});
  const auto curve = empirical_shortfall(batch.values, lambdas);
  const double n = static_cast<double>(batch.size());
  const double mean = batch.mean();
  const double ks = ks_statistic(batch);
  const double mean_band = 4 / std::sqrt(n);
  const double ks_bound = 1.63 / std::sqrt(n);
  bool holds = std::abs(mean - 1) <= mean_band && ks <= ks_bound;
  double worst = std::numeric_limits<double>::infinity();
  Json witness = nullptr;
  Json rows = Json::array();
  for (const auto& c : curve) {
    worst = std::min(worst, c.reference + c.halfwidth - c.empirical);
    if (!c.within() && witness.is_null()) witness = {{"kind", "shortfall"}, {"lambda", c.lambda}};
    holds = holds && c.within();
    rows.push_back({{"lambda", c.lambda}, {"empirical", c.empirical}, {"halfwidth", c.halfwidth},
                    {"reference", c.reference}});
  }
  if (witness.is_null() && !holds) witness = {{"kind", std::abs(mean - 1) > mean_band ? "mean" : "ks"}};
  if (ctx.cfg.ecdf_out) {
    std::ofstream f(*ctx.cfg.ecdf_out);
    if (!f) config_error("cannot write '" + *ctx.cfg.ecdf_out + "'");
    f << "x,ecdf,exp_cdf\n";
    for (const auto& p : ecdf_table(batch.values, 1000)) {
      f << format_scalar(p.x) << "," << format_scalar(p.ecdf) << "," << format_scalar(p.exp_cdf) << "\n";
    }
  }
  const int code = holds ? kExitHolds : kExitViolation;
  if (csv(ctx)) {
    std::string text = "lambda,empirical,halfwidth,reference\n";
    for (const auto& c : curve) {
      text += format_scalar(c.lambda) + "," + format_scalar(c.empirical) + "," + format_scalar(c.halfwidth) + "," +
              format_scalar(c.reference) + "\n";
    }
    return {text, code};
  }
  Json out{{"check", "natural_risk"},
           {"holds", holds},
           {"worst_margin", finite_or_null(worst)},
           {"witness", witness},
           {"batch", {{"seed", batch.seed}, {"N", batch.size()}, {"generator", batch.generator},
                      {"density", density_json(density)}}},
           {"mean", mean},
           {"mean_band", mean_band},
           {"variance", batch.variance()},
           {"ks", ks},
           {"ks_bound", ks_bound},
           {"shortfall", std::move(rows)}};
  return {dump(out), code};
}

Output cmd_mc_converge(const Context& ctx) {
  const auto density = density_from(ctx);
  std::vector<double> meshes;
  for (const auto& t : ctx.cfg.meshes.empty() ? std::vector<std::string>{"1/4", "1/16", "1/64", "1/256"}
                                              : ctx.cfg.meshes) {
    meshes.push_back(parse_scalar<double>(t));
  }
  const auto lambdas = lambdas_or<double>(ctx.cfg, {"0.5", "1", "2"});
  const auto r = discretization_convergence(density, meshes, lambdas);
  const int code = r.holds ? kExitHolds : kExitViolation;
  if (csv(ctx)) {
    std::string text = "mesh,bins,lambda,gap\n";
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.lambdas.size(); ++i) {
        text += format_scalar(row.mesh) + "," + std::to_string(row.bins) + "," + format_scalar(row.lambdas[i]) + "," +
                format_scalar(row.gaps[i]) + "\n";
      }
    }
    return {text, code};
  }
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json j{{"mesh", row.mesh}, {"bins", row.bins}, {"lambdas", row.lambdas}, {"gaps", row.gaps},
           {"tree_checked", row.tree_checked}};
    if (row.tree_checked) j["tree_discrepancy"] = row.tree_discrepancy;
    rows.push_back(std::move(j));
  }
  Json out{{"check", "discretization"},
           {"holds", r.holds},
           {"worst_margin", 0.01 - r.finest_gap},
           {"witness", r.holds ? Json(nullptr) : Json{{"monotone", r.monotone}, {"finest_gap", r.finest_gap}}},
           {"density", density_json(density)},
           {"monotone", r.monotone},
           {"finest_gap", r.finest_gap},
           {"rows", std::move(rows)}};
  return {dump(out), code};
}

template <class S>
Output dispatch(const Context& ctx) {
  S tol = Arith<S>::default_tol();
  if (ctx.cfg.tol) {
    tol = parse_scalar<S>(*ctx.cfg.tol);
    if (tol < 0) config_error("--tol must be nonnegative");
  }
  const std::string& c = ctx.cfg.command;
  auto need_input = [&] {
    if (ctx.docs.empty()) config_error("'" + c + "' needs --input");
  };
  if (c == "validate") return need_input(), cmd_validate(ctx, tol);
  if (c == "risk") return need_input(), cmd_risk(ctx, tol);
  if (c == "project") return need_input(), cmd_project(ctx, tol);
  if (c == "supermartingale") return need_input(), cmd_supermartingale(ctx, tol);
  if (c == "stopped-bound") return need_input(), cmd_stopped(ctx, tol);
  if (c == "order-exp") return need_input(), cmd_order_exp(ctx, tol);
  if (c == "order") return need_input(), cmd_order(ctx, tol);
  if (c == "scenario-insurance") return need_input(), cmd_insurance(ctx, tol);
  if (c == "scenario-pivotal") return need_input(), cmd_pivotal(ctx, tol);
  if (c == "scenario-kesten") return need_input(), cmd_kesten(ctx, tol);
  config_error("unknown subcommand '" + c + "'");
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.format != "json" && cfg.format != "csv") config_error("--format must be json or csv");
    Context ctx{cfg, {}};
    for (const auto& path : cfg.inputs) ctx.docs.push_back(load_json_file(path));

    Output result;
    if (cfg.command == "mc-natural") {
      result = cmd_mc_natural(ctx);
    } else if (cfg.command == "mc-converge") {
      result = cmd_mc_converge(ctx);
    } else {
      bool exact = cfg.exact;
      for (const auto& d : ctx.docs) exact = exact || document_wants_exact(d);
      result = exact ? dispatch<Rational>(ctx) : dispatch<double>(ctx);
    }

    if (cfg.out) {
      std::ofstream f(*cfg.out, std::ios::binary);
      if (!f) config_error("cannot write '" + *cfg.out + "'");
      f << result.text;
    } else {
      out << result.text;
    }
    return result.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const Json::exception& e) {
    err << "error: SchemaError: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitInputError;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Total risk on finite filtered probability spaces"};
  app.require_subcommand(1, 1);
  RunConfig cfg;
  std::string tol;
  std::string ecdf;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"validate", "check tree invariants"},
      {"risk", "total risk law and its order against Exp(1)"},
      {"project", "optional projection and compensator"},
      {"supermartingale", "check exp(A^p)(1 - oA) and the martingale A^p - oA"},
      {"order-exp", "convex order of a distribution against Exp(1)"},
      {"order", "convex order between two distributions"},
      {"stopped-bound", "stopped inequality at tau = min{n : A^p_n >= lambda}"},
      {"scenario-insurance", "premium totals for a mortality table"},
      {"scenario-pivotal", "pivotal-bond chain and tail bound"},
      {"scenario-kesten", "tail bound for adapted sums"},
      {"mc-natural", "Monte Carlo of the natural-filtration risk"},
      {"mc-converge", "discretization convergence to Exp(1)"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--input", cfg.inputs, "input JSON document")->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.out, "output path");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--exact", cfg.exact, "exact rational arithmetic");
    sub->add_option("--tol", tol, "tolerance");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--samples", cfg.samples, "Monte Carlo sample size");
    sub->add_option("--lambda", cfg.lambdas, "lambda value (repeatable)");
    sub->add_option("--mesh", cfg.meshes, "mesh width (repeatable)");
    sub->add_option("--ecdf-out", ecdf, "CSV path for the empirical CDF");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitHolds;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (!tol.empty()) cfg.tol = tol;
  if (!ecdf.empty()) cfg.ecdf_out = ecdf;
  return run(cfg, out, err);
}

}  // namespace totalrisk
