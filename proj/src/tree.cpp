#include "totalrisk/tree.hpp"

#include <algorithm>
#include <deque>

namespace totalrisk {

namespace {

ValidationReport failure(ErrorCode code, std::string node_id, std::string message) {
  ValidationReport r;
  r.ok = false;
  r.error = code;
  r.node_id = std::move(node_id);
  r.message = std::move(message);
  return r;
}

// Children lists by input index, preserving input order.
template <class S>
struct Structure {
  std::vector<std::vector<int>> children;
  std::vector<int> bfs_order;
  std::vector<int> depth;
  int root = -1;
};

template <class S>
ValidationReport analyse(std::span<const NodeSpec<S>> nodes, std::optional<int> declared_depth,
                         Structure<S>& st) {
  if (nodes.empty()) return failure(ErrorCode::OrphanNode, "", "tree has no nodes");
  std::unordered_map<std::string, int> index;
  index.reserve(nodes.size() * 2);
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (!index.emplace(nodes[i].id, i).second) {
      return failure(ErrorCode::DuplicateId, nodes[i].id, "duplicate node id");
    }
  }
  st.children.assign(nodes.size(), {});
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    const auto& n = nodes[i];
    if (!n.parent) {
      if (st.root >= 0) return failure(ErrorCode::OrphanNode, n.id, "second node without a parent");
      st.root = i;
      continue;
    }
    auto it = index.find(*n.parent);
    if (it == index.end() || it->second == i) {
      return failure(ErrorCode::OrphanNode, n.id, "parent '" + *n.parent + "' does not exist");
    }
    st.children[it->second].push_back(i);
  }
  if (st.root < 0) return failure(ErrorCode::OrphanNode, nodes.front().id, "no root node");

  st.depth.assign(nodes.size(), -1);
  st.bfs_order.reserve(nodes.size());
  std::deque<int> queue{st.root};
  st.depth[st.root] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    st.bfs_order.push_back(v);
    for (int c : st.children[v]) {
      st.depth[c] = st.depth[v] + 1;
      queue.push_back(c);
    }
  }
  if (st.bfs_order.size() != nodes.size()) {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      if (st.depth[i] < 0) return failure(ErrorCode::OrphanNode, nodes[i].id, "not reachable from the root");
    }
  }

  for (int v : st.bfs_order) {
    if (v != st.root && !(nodes[v].prob > 0)) {
      return failure(ErrorCode::ZeroBranch, nodes[v].id,
                     "branch probability " + format_scalar(nodes[v].prob) + " is not positive");
    }
  }

  int max_depth = 0;
  for (int v : st.bfs_order) max_depth = std::max(max_depth, st.depth[v]);
  const int depth = declared_depth.value_or(max_depth);
  for (int v : st.bfs_order) {
    if (st.children[v].empty() && st.depth[v] != depth) {
      return failure(ErrorCode::NonUniformDepth, nodes[v].id,
                     "leaf at depth " + std::to_string(st.depth[v]) + ", expected " +
                         std::to_string(depth));
    }
  }
  if (max_depth != depth) {
    return failure(ErrorCode::NonUniformDepth, nodes[st.root].id,
                   "declared depth " + std::to_string(depth) + " but tree reaches " +
                       std::to_string(max_depth));
  }

  for (int v : st.bfs_order) {
    if (st.children[v].empty()) continue;
    S total = 0;
    for (int c : st.children[v]) total += nodes[c].prob;
    if (abs_value(S(total - 1)) > Arith<S>::sum_slack()) {
      return failure(ErrorCode::ProbSumViolation, nodes[v].id,
                     "children probabilities sum to " + format_scalar(total));
    }
  }
  return {};
}

}  // namespace

template <class S>
ValidationReport validate_tree(std::span<const NodeSpec<S>> nodes, std::optional<int> declared_depth) {
  Structure<S> st;
  return analyse(nodes, declared_depth, st);
}

template <class S>
ProbTree<S>::ProbTree(std::span<const NodeSpec<S>> specs, std::optional<int> declared_depth) {
  Structure<S> st;
  const ValidationReport report = analyse(specs, declared_depth, st);
  if (!report.ok) {
    throw Error(*report.error, "node '" + report.node_id + "': " + report.message);
  }

  const int n = static_cast<int>(specs.size());
  std::vector<int> position(n);
  for (int i = 0; i < n; ++i) position[st.bfs_order[i]] = i;

  nodes_.resize(n);
  depth_ = 0;
  for (int i = 0; i < n; ++i) {
    const int src = st.bfs_order[i];
    Node& node = nodes_[i];
    node.id = specs[src].id;
    node.depth = st.depth[src];
    depth_ = std::max(depth_, node.depth);
    node.parent = -1;
    node.prob = 1;
    node.path_prob = 1;
  }

  // Parents and children in BFS positions.
  for (int i = 0; i < n; ++i) {
    const int src = st.bfs_order[i];
    const auto& kids = st.children[src];
    nodes_[i].child_begin = kids.empty() ? 0 : position[kids.front()];
    nodes_[i].child_end = kids.empty() ? 0 : position[kids.back()] + 1;
    for (int c : kids) {
      Node& child = nodes_[position[c]];
      child.parent = i;
      child.prob = specs[c].prob;
    }
  }
  for (int i = 1; i < n; ++i) nodes_[i].path_prob = nodes_[nodes_[i].parent].path_prob * nodes_[i].prob;

  level_begin_.assign(depth_ + 2, n);
  for (int i = n - 1; i >= 0; --i) level_begin_[nodes_[i].depth] = i;
  level_begin_[depth_ + 1] = n;

  for (int i = n - 1; i >= 0; --i) {
    Node& node = nodes_[i];
    if (node.depth == depth_) {
      node.leaf_begin = i - level_begin_[depth_];
      node.leaf_end = node.leaf_begin + 1;
    } else {
      node.leaf_begin = nodes_[node.child_begin].leaf_begin;
      node.leaf_end = nodes_[node.child_end - 1].leaf_end;
    }
  }

  const int leaves = num_leaves();
  ancestors_.assign(depth_ + 1, std::vector<int>(leaves));
  for (int level = 0; level <= depth_; ++level) {
    for (int a = 0; a < level_size(level); ++a) {
      const Node& node = atom(level, a);
      for (int l = node.leaf_begin; l < node.leaf_end; ++l) ancestors_[level][l] = a;
    }
  }

  index_.reserve(n * 2);
  for (int i = 0; i < n; ++i) index_.emplace(nodes_[i].id, i);
}

template <class S>
std::optional<int> ProbTree<S>::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

template <class S>
std::optional<int> ProbTree<S>::find_leaf(const std::string& id) const {
  auto i = find(id);
  if (!i || nodes_[*i].depth != depth_) return std::nullopt;
  return *i - level_begin_[depth_];
}

template <class S>
TreeBuilder<S>::TreeBuilder(std::string root_id) {
  specs_.push_back({std::move(root_id), std::nullopt, S(1)});
}

template <class S>
int TreeBuilder<S>::add_child(int parent, std::string id, S prob) {
  specs_.push_back({std::move(id), specs_.at(parent).id, std::move(prob)});
  return static_cast<int>(specs_.size()) - 1;
}

template <class S>
ProbTree<S> TreeBuilder<S>::build() const {
  return ProbTree<S>(std::span<const NodeSpec<S>>(specs_));
}

void FiltrationSpec::validate(int depth) const {
  if (levels.size() < 2) throw Error(ErrorCode::InvalidFiltration, "horizon must be at least 1");
  for (std::size_t n = 0; n < levels.size(); ++n) {
    if (levels[n] < 0 || levels[n] > depth) {
      throw Error(ErrorCode::InvalidFiltration,
                  "level " + std::to_string(levels[n]) + " at step " + std::to_string(n) +
                      " outside [0, " + std::to_string(depth) + "]");
    }
    if (n > 0 && levels[n] < levels[n - 1]) {
      throw Error(ErrorCode::InvalidFiltration, "level map decreases at step " + std::to_string(n));
    }
  }
}

FiltrationSpec FiltrationSpec::trivial(int horizon) { return {std::vector<int>(horizon + 1, 0)}; }

FiltrationSpec FiltrationSpec::full(int horizon, int depth) {
  return {std::vector<int>(horizon + 1, depth)};
}

FiltrationSpec FiltrationSpec::shifted(int horizon, int depth, int offset) {
  FiltrationSpec f;
  for (int n = 0; n <= horizon; ++n) f.levels.push_back(std::clamp(n + offset, 0, depth));
  return f;
}

void RandomTime::validate(int num_leaves) const {
  if (static_cast<int>(values.size()) != num_leaves) {
    throw Error(ErrorCode::InvalidRandomTime, "random time defined on " + std::to_string(values.size()) +
                                                  " leaves, tree has " + std::to_string(num_leaves));
  }
  for (auto v : values) {
    if (v < 1) throw Error(ErrorCode::InvalidRandomTime, "random time must be a positive integer");
  }
}

template <class S>
std::vector<S> conditional_expectation(const ProbTree<S>& tree, std::span<const S> x, int level) {
  if (level < 0 || level > tree.depth()) {
    throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(level) + " outside [0, " +
                                                std::to_string(tree.depth()) + "]");
  }
  if (static_cast<int>(x.size()) != tree.num_leaves()) {
    throw Error(ErrorCode::DimensionMismatch, "leaf function has wrong size");
  }
  std::vector<S> out(tree.level_size(level));
  for (int a = 0; a < tree.level_size(level); ++a) {
    const auto& node = tree.atom(level, a);
    if (level == tree.depth()) {
      out[a] = x[node.leaf_begin];
      continue;
    }
    S acc = 0;
    for (int l = node.leaf_begin; l < node.leaf_end; ++l) acc += tree.leaf_prob(l) * x[l];
    out[a] = acc / node.path_prob;
  }
  return out;
}

template <class S>
std::vector<S> expand_to_leaves(const ProbTree<S>& tree, std::span<const S> atom_values, int level) {
  std::vector<S> out(tree.num_leaves());
  for (int l = 0; l < tree.num_leaves(); ++l) out[l] = atom_values[tree.atom_of(l, level)];
  return out;
}

template <class S>
Distribution<S> leaf_distribution(const ProbTree<S>& tree, std::span<const S> x) {
  if (static_cast<int>(x.size()) != tree.num_leaves()) {
    throw Error(ErrorCode::DimensionMismatch, "leaf function has wrong size");
  }
  std::vector<std::pair<S, S>> pairs;
  pairs.reserve(x.size());
  for (int l = 0; l < tree.num_leaves(); ++l) pairs.emplace_back(x[l], tree.leaf_prob(l));
  return Distribution<S>::from_pairs(std::move(pairs));
}

#define TOTALRISK_INSTANTIATE(S)                                                                   \
  template ValidationReport validate_tree<S>(std::span<const NodeSpec<S>>, std::optional<int>);    \
  template class ProbTree<S>;                                                                      \
  template class TreeBuilder<S>;                                                                   \
  template std::vector<S> conditional_expectation<S>(const ProbTree<S>&, std::span<const S>, int); \
  template std::vector<S> expand_to_leaves<S>(const ProbTree<S>&, std::span<const S>, int);        \
  template Distribution<S> leaf_distribution<S>(const ProbTree<S>&, std::span<const S>);

TOTALRISK_INSTANTIATE(Rational)
TOTALRISK_INSTANTIATE(double)

#undef TOTALRISK_INSTANTIATE

}  // namespace totalrisk
