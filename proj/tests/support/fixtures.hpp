#pragma once

#include <map>
#include <vector>

#include "oracle.hpp"
#include "totalrisk/compensator.hpp"
#include "totalrisk/tree.hpp"

namespace fixtures {

using totalrisk::Rational;

template <class S>
struct Built {
  totalrisk::ProbTree<S> tree;
  std::vector<int> node_of_leaf;  // library leaf index -> oracle node
};

template <class S>
Built<S> build(const oracle::Tree& t) {
  const auto specs = t.specs<S>();
  Built<S> b{totalrisk::ProbTree<S>(specs), {}};
  b.node_of_leaf.resize(b.tree.num_leaves());
  for (int l = 0; l < b.tree.num_leaves(); ++l) {
    const auto& id = b.tree.leaf(l).id;
    b.node_of_leaf[l] = std::stoi(id.substr(1));
  }
  return b;
}

template <class S>
totalrisk::RandomTime make_z(const Built<S>& b, const std::map<int, std::int64_t>& z) {
  totalrisk::RandomTime out;
  for (int node : b.node_of_leaf) out.values.push_back(z.at(node));
  return out;
}

inline totalrisk::RawIncreasingProcess<Rational> make_a(const Built<Rational>& b,
                                                        const std::map<int, std::vector<Rational>>& a) {
  std::vector<std::vector<Rational>> paths;
  for (int node : b.node_of_leaf) paths.push_back(a.at(node));
  return totalrisk::RawIncreasingProcess<Rational>(std::move(paths));
}

/// Z uniform on {1, 2} under the natural filtration: the root splits into
/// death in year one (then frozen) and survival followed by certain death.
template <class S>
totalrisk::ProbTree<S> two_point_tree() {
  totalrisk::TreeBuilder<S> b("root");
  const int d1 = b.add_child(0, "dead1", S(1) / 2);
  const int a1 = b.add_child(0, "alive1", S(1) / 2);
  b.add_child(d1, "dead1@2", S(1));
  b.add_child(a1, "dead2", S(1));
  return b.build();
}

template <class S>
totalrisk::RandomTime two_point_z(const totalrisk::ProbTree<S>& tree) {
  totalrisk::RandomTime z;
  z.values.resize(2);
  z.values[*tree.find_leaf("dead1@2")] = 1;
  z.values[*tree.find_leaf("dead2")] = 2;
  return z;
}

}  // namespace fixtures
