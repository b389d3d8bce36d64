#pragma once

// JSON input documents for trees, distributions, scenarios and densities.
// Numbers may be JSON numbers or strings ("1/3", "0.25"). A document is read
// exactly when asked to or when it carries "exact": true or any string
// number; JSON numbers are then taken at their shortest decimal text.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "totalrisk/montecarlo.hpp"
#include "totalrisk/scenarios.hpp"
#include "totalrisk/tree.hpp"

namespace totalrisk {

using Json = nlohmann::json;

/// ParseError on unreadable files or malformed JSON.
Json load_json_file(const std::string& path);
Json parse_json_text(const std::string& text);

/// True if the document requests exact arithmetic or uses string numbers.
bool document_wants_exact(const Json& doc);

template <class S>
S read_scalar(const Json& j, const std::string& what);

template <class S>
struct TreeDocument {
  std::vector<NodeSpec<S>> nodes;
  std::optional<int> declared_depth;
};

/// Node list only, for validation without construction.
template <class S>
TreeDocument<S> read_tree_document(const Json& doc);

template <class S>
struct TreeInput {
  ProbTree<S> tree;
  FiltrationSpec filtration;
  std::optional<RandomTime> z;
  std::optional<RawIncreasingProcess<S>> a;
};

/// "levels" wins over "filtration" ("natural" default, "trivial", "full");
/// the horizon defaults to the depth.
template <class S>
TreeInput<S> read_tree_input(const Json& doc);

/// Filtration part of a tree document for an existing tree.
FiltrationSpec read_filtration(const Json& doc, int depth);

template <class S>
Distribution<S> read_distribution(const Json& doc);

template <class S>
struct MortalityInput {
  MortalityTable<S> table;
  SignalSpec<S> signal;
};

template <class S>
MortalityInput<S> read_mortality(const Json& doc);

template <class S>
PivotalModel<S> read_pivotal(const Json& doc);

template <class S>
KestenInstance<S> read_kesten(const Json& doc);

/// {"family": "exponential", "rate": r} | {"family": "uniform"} |
/// {"family": "weibull", "shape": k, "scale": s}
DensitySpec read_density(const Json& doc);

}  // namespace totalrisk
