#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/gen.hpp"
#include "totalrisk/error.hpp"
#include "totalrisk/tree.hpp"

using namespace totalrisk;
using R = Rational;

namespace {

std::vector<NodeSpec<R>> specs(std::initializer_list<std::tuple<const char*, const char*, R>> rows) {
  std::vector<NodeSpec<R>> out;
  for (const auto& [id, parent, p] : rows) {
    NodeSpec<R> s;
    s.id = id;
    if (parent) s.parent = parent;
    s.prob = p;
    out.push_back(s);
  }
  return out;
}

ErrorCode error_of(const std::vector<NodeSpec<R>>& nodes, std::optional<int> depth = std::nullopt) {
  const auto r = validate_tree<R>(nodes, depth);
  EXPECT_FALSE(r.ok);
  return r.error.value_or(ErrorCode::ParseError);
}

}  // namespace

TEST(ValidateTree, MinimalTreeIsValid) {
  const auto r = validate_tree<R>(specs({{"r", nullptr, 1}, {"a", "r", R(1, 2)}, {"b", "r", R(1, 2)}}));
  EXPECT_TRUE(r.ok);
}

TEST(ValidateTree, ProbabilitySumViolationNamesParent) {
  const auto nodes = specs({{"r", nullptr, 1}, {"a", "r", R(3, 5)}, {"b", "r", R(1, 2)}});
  const auto r = validate_tree<R>(nodes);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(*r.error, ErrorCode::ProbSumViolation);
  EXPECT_EQ(r.node_id, "r");
}

TEST(ValidateTree, FloatModeSumSlack) {
  std::vector<NodeSpec<double>> nodes(3);
  nodes[0].id = "r";
  nodes[1] = {"a", std::string("r"), 0.6};
  nodes[2] = {"b", std::string("r"), 0.5};
  EXPECT_EQ(*validate_tree<double>(nodes).error, ErrorCode::ProbSumViolation);
  nodes[2].prob = 0.4 + 5e-13;
  EXPECT_TRUE(validate_tree<double>(nodes).ok);
}

TEST(ValidateTree, StructuralErrors) {
  // second root
  EXPECT_EQ(error_of(specs({{"r", nullptr, 1}, {"s", nullptr, 1}})), ErrorCode::OrphanNode);
  // unknown parent
  EXPECT_EQ(error_of(specs({{"r", nullptr, 1}, {"a", "zz", 1}})), ErrorCode::OrphanNode);
  // a cycle detached from the root
  EXPECT_EQ(error_of(specs({{"r", nullptr, 1}, {"a", "b", 1}, {"b", "a", 1}})), ErrorCode::OrphanNode);
  EXPECT_EQ(error_of(specs({{"r", nullptr, 1}, {"a", "r", 0}, {"b", "r", 1}})), ErrorCode::ZeroBranch);
  EXPECT_EQ(error_of(specs({{"r", nullptr, 1}, {"a", "r", R(1, 2)}, {"b", "r", R(1, 2)}, {"c", "a", 1}})),
            ErrorCode::NonUniformDepth);
  EXPECT_EQ(error_of(specs({{"r", nullptr, 1}, {"a", "r", R(1, 2)}, {"a", "r", R(1, 2)}})), ErrorCode::DuplicateId);
  EXPECT_EQ(error_of(specs({{"r", nullptr, 1}, {"a", "r", 1}}), 2), ErrorCode::NonUniformDepth);
}

TEST(ProbTree, ConstructorThrowsFirstViolation) {
  try {
    ProbTree<R> t(specs({{"r", nullptr, 1}, {"a", "r", R(3, 5)}, {"b", "r", R(1, 2)}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProbSumViolation);
  }
}

TEST(ProbTree, BreadthFirstLayoutAndAncestors) {
  gen::Rng rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    const auto t = gen::random_tree(rng, gen::uniform_int(rng, 1, 4), 3);
    const auto b = fixtures::build<R>(t);
    const auto& tree = b.tree;
    R total = 0;
    for (int l = 0; l < tree.num_leaves(); ++l) {
      total += tree.leaf_prob(l);
      EXPECT_EQ(tree.leaf_prob(l), t.path_prob(b.node_of_leaf[l]));
      for (int level = 0; level <= tree.depth(); ++level) {
        const auto& anc = tree.atom(level, tree.atom_of(l, level));
        EXPECT_EQ(anc.id, t.id[t.ancestor(b.node_of_leaf[l], level)]);
        EXPECT_GE(l, anc.leaf_begin);
        EXPECT_LT(l, anc.leaf_end);
      }
    }
    EXPECT_EQ(total, 1);
  }
}

TEST(ConditionalExpectation, MatchesBruteForceAndTower) {
  gen::Rng rng(12);
  for (int iter = 0; iter < 150; ++iter) {
    const auto t = gen::random_tree(rng, gen::uniform_int(rng, 1, 3), 3);
    const auto b = fixtures::build<R>(t);
    const int leaves = b.tree.num_leaves();
    std::vector<R> x(leaves);
    for (auto& v : x) v = gen::q(gen::uniform_int(rng, -6, 6), gen::uniform_int(rng, 1, 4));
    for (int level = 0; level <= t.D; ++level) {
      const auto ce = conditional_expectation<R>(b.tree, x, level);
      for (int l = 0; l < leaves; ++l) {
        const R ref = oracle::cond_exp(t, b.node_of_leaf[l], level, [&](int w) {
          for (int k = 0; k < leaves; ++k) {
            if (b.node_of_leaf[k] == w) return x[k];
          }
          return R(0);
        });
        EXPECT_EQ(ce[b.tree.atom_of(l, level)], ref);
      }
      // tower: E(E(x | n) | m) = E(x | m)
      const auto fine = expand_to_leaves<R>(b.tree, ce, level);
      for (int m = 0; m <= level; ++m) {
        EXPECT_EQ(conditional_expectation<R>(b.tree, fine, m), conditional_expectation<R>(b.tree, x, m));
      }
      EXPECT_EQ(leaf_distribution<R>(b.tree, fine).mean(), leaf_distribution<R>(b.tree, x).mean());
    }
  }
}

TEST(ConditionalExpectation, ExtremesAndExample) {
  // uniform depth-2 binary tree, x = (0, 1, 2, 3), level 1 -> (1/2, 5/2)
  TreeBuilder<R> builder("r");
  const int a = builder.add_child(0, "a", R(1, 2));
  const int b = builder.add_child(0, "b", R(1, 2));
  builder.add_child(a, "a0", R(1, 2));
  builder.add_child(a, "a1", R(1, 2));
  builder.add_child(b, "b0", R(1, 2));
  builder.add_child(b, "b1", R(1, 2));
  const auto tree = builder.build();
  std::vector<R> x(4);
  const char* ids[] = {"a0", "a1", "b0", "b1"};
  for (int k = 0; k < 4; ++k) x[*tree.find_leaf(ids[k])] = k;
  const auto ce = conditional_expectation<R>(tree, x, 1);
  EXPECT_EQ(ce[tree.atom_of(*tree.find_leaf("a0"), 1)], R(1, 2));
  EXPECT_EQ(ce[tree.atom_of(*tree.find_leaf("b1"), 1)], R(5, 2));
  EXPECT_EQ(conditional_expectation<R>(tree, x, 2), x);
  EXPECT_EQ(conditional_expectation<R>(tree, x, 0), std::vector<R>{R(3, 2)});
  EXPECT_THROW(conditional_expectation<R>(tree, x, 3), Error);
}

TEST(LeafDistribution, MergesValues) {
  TreeBuilder<R> builder("r");
  builder.add_child(0, "a", R(1, 3));
  builder.add_child(0, "b", R(2, 3));
  const auto tree = builder.build();
  const std::vector<R> ones{R(1), R(1)};
  const auto d = leaf_distribution<R>(tree, ones);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.atoms()[0].prob, 1);
  const std::vector<R> split{R(0), R(1)};
  EXPECT_EQ(leaf_distribution<R>(tree, split).size(), 2u);
}

TEST(FiltrationSpec, ValidationAndFactories) {
  EXPECT_NO_THROW(FiltrationSpec({0, 1, 1, 2}).validate(2));
  EXPECT_THROW(FiltrationSpec({0, 2, 1}).validate(2), Error);
  EXPECT_THROW(FiltrationSpec({0, 3}).validate(2), Error);
  EXPECT_THROW(FiltrationSpec({0}).validate(2), Error);
  EXPECT_EQ(FiltrationSpec::shifted(3, 2).levels, (std::vector<int>{0, 1, 2, 2}));
  EXPECT_EQ(FiltrationSpec::shifted(2, 3, 1).levels, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(FiltrationSpec::trivial(2).levels, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(FiltrationSpec::full(2, 4).levels, (std::vector<int>{4, 4, 4}));
}

TEST(RandomTime, Validation) {
  RandomTime z{{1, RandomTime::kInfinity}};
  EXPECT_NO_THROW(z.validate(2));
  EXPECT_THROW(z.validate(3), Error);
  RandomTime bad{{0, 1}};
  EXPECT_THROW(bad.validate(2), Error);
}
