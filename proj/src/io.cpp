#include "totalrisk/io.hpp"

#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "totalrisk/error.hpp"

namespace totalrisk {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) schema(std::string("missing field '") + key + "'");
  return doc.at(key);
}

int read_int(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) schema(what + " must be an integer");
  return j.get<int>();
}

template <class S>
std::vector<S> read_scalars(const Json& j, const std::string& what) {
  if (!j.is_array()) schema(what + " must be an array");
  std::vector<S> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(read_scalar<S>(v, what));
  return out;
}

bool has_string_number(const Json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    return !s.empty() && (std::isdigit(static_cast<unsigned char>(s.front())) || s.front() == '-' ||
                          s.front() == '+' || s.front() == '.');
  }
  if (j.is_array()) {
    for (const auto& v : j) {
      if (has_string_number(v)) return true;
    }
  }
  if (j.is_object()) {
    for (const auto& [key, v] : j.items()) {
      // Ids and names are strings by nature.
      if (key == "id" || key == "parent" || key == "name" || key == "family" || key == "kind" ||
          key == "filtration") {
        continue;
      }
      if (key == "Z") {
        for (const auto& [leaf, z] : v.items()) {
          (void)leaf;
          if (z.is_string() && z != "inf" && z != "infinity") return true;
        }
        continue;
      }
      if (has_string_number(v)) return true;
    }
  }
  return false;
}

}  // namespace

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str());
}

bool document_wants_exact(const Json& doc) {
  if (doc.is_object() && doc.contains("exact") && doc["exact"].is_boolean() && doc["exact"].get<bool>()) {
    return true;
  }
  return has_string_number(doc);
}

template <class S>
S read_scalar(const Json& j, const std::string& what) {
  if (j.is_string()) return parse_scalar<S>(j.get_ref<const std::string&>());
  if (j.is_number()) return scalar_from_double<S>(j.get<double>());
  schema(what + " must be a number or a numeric string");
}

template <class S>
TreeDocument<S> read_tree_document(const Json& doc) {
  TreeDocument<S> out;
  const Json& nodes = require(doc, "nodes");
  if (!nodes.is_array() || nodes.empty()) schema("'nodes' must be a nonempty array");
  for (const auto& n : nodes) {
    NodeSpec<S> spec;
    const Json& id = require(n, "id");
    if (!id.is_string()) schema("node ids must be strings");
    spec.id = id.get<std::string>();
    if (n.contains("parent") && !n["parent"].is_null()) {
      if (!n["parent"].is_string()) schema("node parents must be strings or null");
      spec.parent = n["parent"].get<std::string>();
    }
    const char* key = n.contains("p") ? "p" : (n.contains("prob") ? "prob" : nullptr);
    if (key) {
      spec.prob = read_scalar<S>(n[key], "node probability");
    } else if (spec.parent) {
      schema("node '" + spec.id + "' lacks a branch probability");
    }
    out.nodes.push_back(std::move(spec));
  }
  if (doc.contains("depth")) out.declared_depth = read_int(doc["depth"], "'depth'");
  return out;
}

FiltrationSpec read_filtration(const Json& doc, int depth) {
  std::optional<int> horizon;
  if (doc.contains("horizon")) horizon = read_int(doc["horizon"], "'horizon'");
  FiltrationSpec f;
  if (doc.contains("levels")) {
    if (!doc["levels"].is_array()) schema("'levels' must be an array");
    for (const auto& l : doc["levels"]) f.levels.push_back(read_int(l, "filtration level"));
    if (horizon && *horizon != f.horizon()) schema("'levels' must list horizon + 1 entries");
  } else {
    const int t = horizon.value_or(depth);
    const std::string kind = doc.contains("filtration") ? doc["filtration"].get<std::string>() : "natural";
    if (kind == "natural") {
      f = FiltrationSpec::shifted(t, depth);
    } else if (kind == "trivial") {
      f = FiltrationSpec::trivial(t);
    } else if (kind == "full") {
      f = FiltrationSpec::full(t, depth);
    } else {
      schema("unknown filtration '" + kind + "'");
    }
  }
  f.validate(depth);
  return f;
}

template <class S>
TreeInput<S> read_tree_input(const Json& doc) {
  const auto document = read_tree_document<S>(doc);
  ProbTree<S> tree(document.nodes, document.declared_depth);
  FiltrationSpec filtration = read_filtration(doc, tree.depth());
  TreeInput<S> out{std::move(tree), std::move(filtration), std::nullopt, std::nullopt};
  const int leaves = out.tree.num_leaves();
  auto leaf_index = [&](const std::string& id) {
    const auto leaf = out.tree.find_leaf(id);
    if (!leaf) schema("'" + id + "' is not a leaf");
    return *leaf;
  };
  if (doc.contains("Z")) {
    const Json& zdoc = doc["Z"];
    if (!zdoc.is_object()) schema("'Z' must map leaf ids to times");
    RandomTime z;
    z.values.assign(leaves, 0);
    std::vector<bool> seen(leaves, false);
    for (const auto& [id, v] : zdoc.items()) {
      const int leaf = leaf_index(id);
      seen[leaf] = true;
      if (v.is_string() && (v == "inf" || v == "infinity")) {
        z.values[leaf] = RandomTime::kInfinity;
      } else if (v.is_number_integer()) {
        z.values[leaf] = v.template get<std::int64_t>();
      } else {
        schema("Z values must be positive integers or \"inf\"");
      }
    }
    for (int l = 0; l < leaves; ++l) {
      if (!seen[l]) schema("leaf '" + out.tree.leaf(l).id + "' has no Z value");
    }
    z.validate(leaves);
    out.z = std::move(z);
  }
  if (doc.contains("A")) {
    const Json& adoc = doc["A"];
    if (!adoc.is_object()) schema("'A' must map leaf ids to paths");
    std::vector<std::vector<S>> paths(leaves);
    std::vector<bool> seen(leaves, false);
    for (const auto& [id, v] : adoc.items()) {
      const int leaf = leaf_index(id);
      seen[leaf] = true;
      paths[leaf] = read_scalars<S>(v, "A path");
    }
    for (int l = 0; l < leaves; ++l) {
      if (!seen[l]) schema("leaf '" + out.tree.leaf(l).id + "' has no A path");
    }
    out.a.emplace(std::move(paths));
  }
  return out;
}

template <class S>
Distribution<S> read_distribution(const Json& doc) {
  const Json& support = require(doc, "support");
  if (!support.is_array() || support.empty()) schema("'support' must be a nonempty array");
  std::vector<std::pair<S, S>> pairs;
  for (const auto& entry : support) {
    if (!entry.is_array() || entry.size() != 2) schema("support entries are [value, probability] pairs");
    pairs.emplace_back(read_scalar<S>(entry[0], "support value"), read_scalar<S>(entry[1], "support probability"));
  }
  return Distribution<S>::from_pairs(std::move(pairs));
}

template <class S>
MortalityInput<S> read_mortality(const Json& doc) {
  MortalityInput<S> out;
  out.table.q = read_scalars<S>(require(doc, "q"), "'q'");
  if (doc.contains("signal")) {
    const Json& s = doc["signal"];
    const std::string kind = s.is_string() ? s.get<std::string>() : require(s, "kind").get<std::string>();
    if (kind == "none") {
      out.signal.kind = SignalSpec<S>::Kind::None;
    } else if (kind == "oracle") {
      out.signal.kind = SignalSpec<S>::Kind::Oracle;
    } else if (kind == "health-chain") {
      out.signal.kind = SignalSpec<S>::Kind::HealthChain;
      out.signal.initial = read_scalars<S>(require(s, "initial"), "'initial'");
      const Json& rows = require(s, "transition");
      if (!rows.is_array()) schema("'transition' must be an array of rows");
      for (const auto& row : rows) out.signal.transition.push_back(read_scalars<S>(row, "transition row"));
      out.signal.risk = read_scalars<S>(require(s, "risk"), "'risk'");
    } else {
      schema("unknown signal '" + kind + "'");
    }
  }
  return out;
}

template <class S>
PivotalModel<S> read_pivotal(const Json& doc) {
  PivotalModel<S> model;
  model.m = read_int(require(doc, "m"), "'m'");
  model.K = read_int(require(doc, "K"), "'K'");
  if (model.m < 1 || model.m > 32) schema("'m' must lie in [1, 32]");

  auto read_alphabet = [](const Json& a) {
    EdgeAlphabet<S> out;
    const Json& values = require(a, "values");
    if (!values.is_array()) schema("alphabet values must be an array");
    for (const auto& v : values) out.values.push_back(read_int(v, "alphabet value"));
    out.probs = read_scalars<S>(require(a, "probs"), "alphabet probabilities");
    return out;
  };
  const Json& alphabet = require(doc, "alphabet");
  if (alphabet.is_array()) {
    for (const auto& a : alphabet) model.alphabet.push_back(read_alphabet(a));
  } else {
    model.alphabet.assign(model.m, read_alphabet(alphabet));
  }

  const Json& rule = require(doc, "rule");
  const std::string name = rule.is_string() ? rule.get<std::string>() : require(rule, "name").get<std::string>();
  if (name == "all") {
    model.rule.kind = PivotalRule::Kind::All;
  } else if (name == "value-in") {
    model.rule.kind = PivotalRule::Kind::ValueIn;
    if (rule.is_object() && rule.contains("values")) {
      model.rule.values.clear();
      for (const auto& v : rule["values"]) model.rule.values.push_back(read_int(v, "rule value"));
    }
  } else if (name == "threshold-pivot" || name == "majority") {
    model.rule.kind = PivotalRule::Kind::ThresholdPivot;
    if (rule.is_object() && rule.contains("threshold")) model.rule.threshold = read_int(rule["threshold"], "'threshold'");
  } else if (name == "parallel-series") {
    model.rule.kind = PivotalRule::Kind::ParallelSeries;
    model.rule.paths = read_int(require(rule, "paths"), "'paths'");
    model.rule.length = read_int(require(rule, "length"), "'length'");
  } else {
    schema("unknown rule '" + name + "'");
  }

  if (doc.contains("order")) {
    for (const auto& e : doc["order"]) model.order.push_back(read_int(e, "order entry"));
  } else {
    model.order.resize(model.m);
    std::iota(model.order.begin(), model.order.end(), 0);
  }
  if (doc.contains("budget")) model.budget = doc["budget"].get<std::uint64_t>();
  model.validate();
  return model;
}

template <class S>
KestenInstance<S> read_kesten(const Json& doc) {
  auto input = read_tree_input<S>(require(doc, "tree"));
  const int leaves = input.tree.num_leaves();
  const Json& udoc = require(doc, "U");
  if (!udoc.is_object()) schema("'U' must map leaf ids to increments");
  std::vector<std::vector<S>> u(leaves);
  std::vector<bool> seen(leaves, false);
  for (const auto& [id, v] : udoc.items()) {
    const auto leaf = input.tree.find_leaf(id);
    if (!leaf) schema("'" + id + "' is not a leaf");
    seen[*leaf] = true;
    u[*leaf] = read_scalars<S>(v, "U path");
  }
  for (int l = 0; l < leaves; ++l) {
    if (!seen[l]) schema("leaf '" + input.tree.leaf(l).id + "' has no U path");
  }
  KestenInstance<S> instance{std::move(input.tree), std::move(input.filtration), std::move(u),
                             read_scalar<S>(require(doc, "R"), "'R'"), read_scalar<S>(require(doc, "T"), "'T'")};
  instance.validate();
  return instance;
}

DensitySpec read_density(const Json& doc) {
  const std::string family = require(doc, "family").get<std::string>();
  auto number = [&](const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    return read_scalar<double>(doc[key], std::string("'") + key + "'");
  };
  DensitySpec d;
  if (family == "exponential") {
    d = DensitySpec::exponential(number("rate", 1));
  } else if (family == "uniform") {
    d = DensitySpec::uniform();
  } else if (family == "weibull") {
    d = DensitySpec::weibull(number("shape", 1), number("scale", 1));
  } else {
    schema("unknown density family '" + family + "'");
  }
  d.validate();
  return d;
}

#define TOTALRISK_INSTANTIATE(S)                                          \
  template S read_scalar<S>(const Json&, const std::string&);             \
  template TreeDocument<S> read_tree_document<S>(const Json&);            \
  template TreeInput<S> read_tree_input<S>(const Json&);                  \
  template Distribution<S> read_distribution<S>(const Json&);             \
  template MortalityInput<S> read_mortality<S>(const Json&);              \
  template PivotalModel<S> read_pivotal<S>(const Json&);                  \
  template KestenInstance<S> read_kesten<S>(const Json&);

TOTALRISK_INSTANTIATE(Rational)
TOTALRISK_INSTANTIATE(double)

#undef TOTALRISK_INSTANTIATE

}  // namespace totalrisk
