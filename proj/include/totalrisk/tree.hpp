#pragma once

// Finite filtered probability spaces: a probability tree of uniform depth
// whose level-l nodes are the atoms of the information available at that
// level, plus a level map selecting which tree level is known at each step.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "totalrisk/distribution.hpp"
#include "totalrisk/error.hpp"
#include "totalrisk/numeric.hpp"

namespace totalrisk {

template <class S>
struct NodeSpec {
  std::string id;
  std::optional<std::string> parent;  // none for the root
  S prob = S(1);                      // branch probability; ignored for the root
};

struct ValidationReport {
  bool ok = true;
  std::optional<ErrorCode> error;
  std::string node_id;
  std::string message;
};

/// Checks the tree invariants and reports the first violation found.
/// `declared_depth`, when present, must equal the common leaf depth.
template <class S>
ValidationReport validate_tree(std::span<const NodeSpec<S>> nodes,
                               std::optional<int> declared_depth = std::nullopt);

template <class S>
class ProbTree {
 public:
  struct Node {
    std::string id;
    int parent = -1;
    int depth = 0;
    S prob;       // conditional branch probability
    S path_prob;  // probability of the atom
    int leaf_begin = 0;
    int leaf_end = 0;
    int child_begin = 0;
    int child_end = 0;
  };

  /// Throws Error carrying the first violated invariant.
  explicit ProbTree(std::span<const NodeSpec<S>> nodes,
                    std::optional<int> declared_depth = std::nullopt);

  int depth() const { return depth_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_leaves() const { return level_size(depth_); }

  /// Nodes are stored breadth-first, so each level is a contiguous block and
  /// the descendants of a node at any deeper level are contiguous too.
  int level_begin(int level) const { return level_begin_[level]; }
  int level_size(int level) const { return level_begin_[level + 1] - level_begin_[level]; }

  const Node& node(int index) const { return nodes_[index]; }
  const Node& atom(int level, int atom) const { return nodes_[level_begin_[level] + atom]; }
  const Node& leaf(int leaf) const { return atom(depth_, leaf); }
  const S& leaf_prob(int leaf) const { return atom(depth_, leaf).path_prob; }

  /// Index (within its level) of the level-`level` ancestor of a leaf.
  int atom_of(int leaf, int level) const { return ancestors_[level][leaf]; }

  std::optional<int> find(const std::string& id) const;
  std::optional<int> find_leaf(const std::string& id) const;

 private:
  std::vector<Node> nodes_;
  std::vector<int> level_begin_;
  std::vector<std::vector<int>> ancestors_;
  std::unordered_map<std::string, int> index_;
  int depth_ = 0;
};

/// Incremental construction for programmatic models.
template <class S>
class TreeBuilder {
 public:
  explicit TreeBuilder(std::string root_id = "root");
  /// Returns the handle of the new node.
  int add_child(int parent, std::string id, S prob);
  const std::string& id_of(int handle) const { return specs_[handle].id; }
  ProbTree<S> build() const;

 private:
  std::vector<NodeSpec<S>> specs_;
};

/// Step n sees the atom partition of tree level levels[n]; horizon T is
/// levels.size() - 1.
struct FiltrationSpec {
  std::vector<int> levels;

  int horizon() const { return static_cast<int>(levels.size()) - 1; }
  int level(int step) const { return levels[step]; }

  /// Throws InvalidFiltration unless the map is nondecreasing, within [0, depth]
  /// and T >= 1.
  void validate(int depth) const;

  static FiltrationSpec trivial(int horizon);
  static FiltrationSpec full(int horizon, int depth);
  /// level(n) = min(n + offset, depth), clamped at 0.
  static FiltrationSpec shifted(int horizon, int depth, int offset = 0);
};

/// Per-leaf value of a random positive integer time (not necessarily a
/// stopping time), or kInfinity.
struct RandomTime {
  static constexpr std::int64_t kInfinity = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> values;

  bool finite(int leaf) const { return values[leaf] != kInfinity; }
  /// Throws InvalidRandomTime if the size is wrong or a value is not positive.
  void validate(int num_leaves) const;
};

/// Step-indexed process, constant on the atoms of `step_level[n]` at step n.
template <class V>
struct AdaptedProcess {
  std::vector<int> step_level;
  std::vector<std::vector<V>> values;

  int horizon() const { return static_cast<int>(values.size()) - 1; }
  const V& at(int step, int atom) const { return values[step][atom]; }

  template <class S>
  const V& at_leaf(const ProbTree<S>& tree, int step, int leaf) const {
    return values[step][tree.atom_of(leaf, step_level[step])];
  }
};

/// E(x | level-`level` atoms), one value per atom; exact in rational mode.
template <class S>
std::vector<S> conditional_expectation(const ProbTree<S>& tree, std::span<const S> x, int level);

/// Broadcasts per-atom values at `level` back to the leaves.
template <class S>
std::vector<S> expand_to_leaves(const ProbTree<S>& tree, std::span<const S> atom_values, int level);

/// Law of a leaf-valued function under the leaf probabilities.
template <class S>
Distribution<S> leaf_distribution(const ProbTree<S>& tree, std::span<const S> x);

}  // namespace totalrisk
