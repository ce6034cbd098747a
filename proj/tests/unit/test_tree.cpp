#include <gtest/gtest.h>

#include <regex>

#include "minleaf/error.hpp"
#include "minleaf/tree.hpp"
#include "support.hpp"

using namespace minleaf;
using minleaf::support::make_dataset;

namespace {

ShallowTree xor_tree() {
  const auto l = ShallowTree::branch(1, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1));
  const auto r = ShallowTree::branch(1, 0.5, ShallowTree::leaf(1), ShallowTree::leaf(0));
  return ShallowTree::branch(0, 0.5, l, r);
}

Dataset xor_data() { return make_dataset({{0.1, 0.1}, {0.9, 0.9}, {0.1, 0.9}, {0.9, 0.1}}, {0, 0, 1, 1}); }

// Independent leaf accuracy: evaluate every leaf's comparisons by hand.
double brute_leaf_accuracy(const ShallowTree& t, const Dataset& ds) {
  double worst = 2.0;
  for (NodeId leaf : t.leaf_ids()) {
    std::size_t count = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.num_samples(); ++i) {
      if (t.route(ds.row(i)) != leaf) continue;
      ++count;
      correct += ds.label(i) == t.node(leaf).label ? 1 : 0;
    }
    if (count) worst = std::min(worst, static_cast<double>(correct) / static_cast<double>(count));
  }
  return worst;
}

std::size_t count(const std::string& text, const std::string& pattern) {
  const std::regex re(pattern);
  return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), {}));
}

}  // namespace

TEST(Route, BoundaryGoesRight) {
  const auto t = ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1));
  const double a[] = {0.4};
  const double b[] = {0.5};
  const double c[] = {0.6};
  EXPECT_EQ(t.predict(a), 0);
  EXPECT_EQ(t.predict(b), 1);
  EXPECT_EQ(t.predict(c), 1);
}

TEST(Route, DepthTwoMatchesBothComparisons) {
  const auto t = xor_tree();
  for (double x0 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (double x1 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double x[] = {x0, x1};
      const bool left0 = x0 < 0.5;
      const bool left1 = x1 < 0.5;
      const int expected = left0 == left1 ? 0 : 1;
      EXPECT_EQ(t.predict(x), expected) << x0 << "," << x1;
      const NodeId leaf = t.route(x);
      EXPECT_TRUE(t.node(leaf).is_leaf());
    }
  }
}

TEST(Tree, ShapeQueries) {
  const auto t = xor_tree();
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(t.num_leaves(), 4u);
  EXPECT_EQ(t.size(), 7u);
  EXPECT_EQ(ShallowTree::leaf(1).depth(), 0);
  const auto sub = t.subtree(t.node(t.root()).right);
  EXPECT_EQ(sub, ShallowTree::branch(1, 0.5, ShallowTree::leaf(1), ShallowTree::leaf(0)));
}

TEST(Tree, JsonRoundTrip) {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const auto t = support::random_tree(rng, 4, 3, 3);
    EXPECT_EQ(ShallowTree::from_json(t.to_json()), t);
  }
  EXPECT_EQ(ShallowTree::leaf(2).to_json(), R"({"leaf":{"class":2}})");
  EXPECT_THROW(ShallowTree::from_json("{\"branch\":{}}"), ParseError);
  EXPECT_THROW(ShallowTree::from_json("not json"), ParseError);
}

TEST(LeafAccuracy, Examples) {
  const auto aaab = make_dataset({{0.1}, {0.2}, {0.3}, {0.4}}, {0, 0, 0, 1});
  EXPECT_DOUBLE_EQ(leaf_accuracy(ShallowTree::leaf(0), aaab).leaf_accuracy, 0.75);

  // Leaves with accuracies 0.9 and 0.6.
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({0.1});
    labels.push_back(i < 9 ? 0 : 1);
  }
  for (int i = 0; i < 10; ++i) {
    rows.push_back({0.9});
    labels.push_back(i < 6 ? 1 : 0);
  }
  const auto ds = make_dataset(rows, labels);
  const auto t = ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1));
  const auto st = leaf_accuracy(t, ds);
  EXPECT_DOUBLE_EQ(st.leaf_accuracy, 0.6);
  EXPECT_DOUBLE_EQ(st.model_accuracy, 0.75);
}

TEST(LeafAccuracy, EmptyLeavesAreExcluded) {
  const auto ds = make_dataset({{0.6}, {0.7}, {0.8}}, {1, 1, 0});
  const auto t = ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1));
  const auto st = leaf_accuracy(t, ds);
  EXPECT_DOUBLE_EQ(st.leaf_accuracy, 2.0 / 3.0);
  ASSERT_EQ(st.leaves.size(), 2u);
  EXPECT_EQ(st.leaves[0].count, 0u);
}

TEST(LeafAccuracy, MatchesBruteForce) {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const auto ds = support::random_dataset(rng, 25, 3, 3, 6);
    const auto t = support::random_tree(rng, 3, 3, 3);
    EXPECT_DOUBLE_EQ(leaf_accuracy(t, ds).leaf_accuracy, brute_leaf_accuracy(t, ds));
  }
}

TEST(ModelAccuracy, Examples) {
  EXPECT_DOUBLE_EQ(model_accuracy(xor_tree(), xor_data()), 1.0);
  const auto aabb = make_dataset({{0.1}, {0.2}, {0.3}, {0.4}}, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(model_accuracy(ShallowTree::leaf(0), aabb), 0.5);
  const auto t = ShallowTree::branch(0, 0.25, ShallowTree::leaf(0), ShallowTree::leaf(1));
  EXPECT_DOUBLE_EQ(model_accuracy(t, aabb), 1.0);
}

TEST(Reduce, Examples) {
  const auto ds = xor_data();
  const auto all_a = ShallowTree::branch(0, 0.5, ShallowTree::branch(1, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(0)),
                                         ShallowTree::branch(1, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(0)));
  EXPECT_EQ(reduce_tree(all_a, ds), ShallowTree::leaf(0));

  const auto all_right = ShallowTree::branch(0, 0.0, ShallowTree::leaf(0), ShallowTree::leaf(1));
  EXPECT_EQ(reduce_tree(all_right, ds), ShallowTree::leaf(1));

  const auto fixed = ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1));
  EXPECT_EQ(reduce_tree(fixed, ds), fixed);
  EXPECT_EQ(reduce_tree(xor_tree(), ds), xor_tree());
}

TEST(Reduce, PromotesSiblingSubtree) {
  const auto ds = xor_data();
  const auto inner = ShallowTree::branch(1, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1));
  const auto t = ShallowTree::branch(0, 2.0, inner, ShallowTree::leaf(1));
  EXPECT_EQ(reduce_tree(t, ds), inner);
}

TEST(Reduce, Invariants) {
  Rng rng(6);
  for (int rep = 0; rep < 200; ++rep) {
    const auto ds = support::random_dataset(rng, 30, 3, 2, 5);
    const auto t = support::random_tree(rng, 3, static_cast<int>(uniform_int(rng, 1, 4)), 2);
    const auto r = reduce_tree(t, ds);
    const auto before = leaf_accuracy(t, ds);
    const auto after = leaf_accuracy(r, ds);
    EXPECT_EQ(after.model_accuracy, before.model_accuracy);
    EXPECT_GE(after.leaf_accuracy, before.leaf_accuracy);
    EXPECT_EQ(reduce_tree(r, ds), r);
    EXPECT_LE(r.num_leaves(), t.num_leaves());
    for (const auto& l : after.leaves) EXPECT_GT(l.count, 0u);
    for (std::size_t i = 0; i < ds.num_samples(); ++i) EXPECT_EQ(r.predict(ds.row(i)), t.predict(ds.row(i)));
  }
}

TEST(Topology, DepthOne) {
  const auto topo = TreeTopology::complete(1);
  EXPECT_EQ(topo.num_branches, 1u);
  EXPECT_EQ(topo.num_leaves, 2u);
  EXPECT_EQ(topo.left_ancestors[0], (std::vector<std::size_t>{0}));
  EXPECT_TRUE(topo.right_ancestors[0].empty());
  EXPECT_TRUE(topo.left_ancestors[1].empty());
  EXPECT_EQ(topo.right_ancestors[1], (std::vector<std::size_t>{0}));
}

TEST(Topology, AncestorsCoverEveryLevel) {
  for (int d = 1; d <= 4; ++d) {
    const auto topo = TreeTopology::complete(d);
    EXPECT_EQ(topo.num_leaves, std::size_t{1} << d);
    for (std::size_t t = 0; t < topo.num_leaves; ++t) {
      EXPECT_EQ(topo.left_ancestors[t].size() + topo.right_ancestors[t].size(), static_cast<std::size_t>(d));
    }
  }
}

TEST(SplitThreshold, MidpointOrUpper) {
  EXPECT_DOUBLE_EQ(split_threshold(0.0, 1.0), 0.5);
  const double lo = 1.0;
  const double hi = std::nextafter(1.0, 2.0);
  EXPECT_EQ(split_threshold(lo, hi), hi);
}

TEST(Dot, SingleLeaf) {
  const auto ds = xor_data();
  const auto t = ShallowTree::leaf(0);
  const auto dot = export_dot(t, ds, leaf_accuracy(t, ds));
  EXPECT_EQ(count(dot, R"(\n  n\d+ \[label)"), 1u);
  EXPECT_EQ(count(dot, "->"), 0u);
}

TEST(Dot, DepthOneHasThreeNodesTwoEdges) {
  const auto ds = xor_data();
  const auto t = ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1));
  const auto dot = export_dot(t, ds, leaf_accuracy(t, ds));
  EXPECT_EQ(count(dot, R"(\n  n\d+ \[label)"), 3u);
  EXPECT_EQ(count(dot, "->"), 2u);
}

TEST(Dot, Golden) {
  const auto train = xor_data();
  const auto test = make_dataset({{0.2, 0.2}, {0.8, 0.3}, {0.7, 0.7}}, {0, 0, 0});
  const auto t = xor_tree();
  const auto test_stats = leaf_accuracy(t, test);
  const auto dot = export_dot(t, train, leaf_accuracy(t, train), &test_stats);
  EXPECT_EQ(dot, support::golden("xor_d2.dot", dot));
}
