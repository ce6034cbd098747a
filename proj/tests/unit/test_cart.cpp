#include <gtest/gtest.h>

#include <json.hpp>

#include "minleaf/cart.hpp"
#include "minleaf/error.hpp"
#include "support.hpp"

using namespace minleaf;
using minleaf::support::make_dataset;

namespace {

Dataset separable() { return make_dataset({{0.1}, {0.2}, {0.8}, {0.9}}, {0, 0, 1, 1}); }

int depth_of(const ShallowTree& t) { return t.depth(); }

std::size_t min_leaf_count(const ShallowTree& t, const Dataset& ds) {
  std::size_t m = ds.num_samples();
  for (const auto& l : leaf_accuracy(t, ds).leaves) m = std::min(m, l.count);
  return m;
}

}  // namespace

TEST(Cart, SeparableSplitsAtMidpoint) {
  CartConfig cfg;
  cfg.min_samples_leaf = 1;
  const auto t = cart_train(separable(), cfg);
  EXPECT_EQ(t, ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1)));
}

TEST(Cart, HugeAlphaCollapses) {
  CartConfig cfg;
  cfg.min_samples_leaf = 1;
  cfg.ccp_alpha = 1e9;
  EXPECT_EQ(cart_train(separable(), cfg).num_leaves(), 1u);
}

TEST(Cart, PureDataIsOneLeaf) {
  CartConfig cfg;
  cfg.min_samples_leaf = 1;
  const auto ds = make_dataset({{0.1}, {0.5}, {0.9}}, {1, 1, 1});
  EXPECT_EQ(cart_train(ds, cfg), ShallowTree::leaf(1));
}

TEST(Cart, ValidatesConfig) {
  CartConfig cfg;
  cfg.max_depth = 0;
  EXPECT_THROW(cfg.validate(), ModelError);
  cfg = {};
  cfg.min_samples_leaf = 0;
  EXPECT_THROW(cfg.validate(), ModelError);
  cfg = {};
  cfg.ccp_alpha = -1;
  EXPECT_THROW(cfg.validate(), ModelError);
}

TEST(Cart, RespectsDepthAndLeafSize) {
  Rng rng(8);
  for (int rep = 0; rep < 40; ++rep) {
    const auto ds = support::structured_dataset(rng, 120, 4, 0.2);
    CartConfig cfg;
    cfg.max_depth = static_cast<int>(uniform_int(rng, 1, 4));
    cfg.min_samples_leaf = static_cast<int>(uniform_int(rng, 1, 20));
    cfg.min_samples_split = static_cast<int>(uniform_int(rng, 2, 40));
    cfg.max_leaf_nodes = static_cast<int>(uniform_int(rng, 1, 8));
    if (cfg.max_leaf_nodes == 1) cfg.max_leaf_nodes = 0;
    const auto t = cart_train(ds, cfg);
    EXPECT_LE(depth_of(t), cfg.max_depth);
    EXPECT_GE(min_leaf_count(t, ds), static_cast<std::size_t>(cfg.min_samples_leaf));
    if (cfg.max_leaf_nodes > 0) EXPECT_LE(t.num_leaves(), static_cast<std::size_t>(cfg.max_leaf_nodes));
  }
}

TEST(Cart, LargerAlphaNeverGrowsTree) {
  Rng rng(12);
  const auto ds = support::structured_dataset(rng, 200, 3, 0.25);
  CartConfig cfg;
  cfg.min_samples_leaf = 3;
  std::size_t previous = 1000;
  for (double alpha : {0.0, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.3}) {
    cfg.ccp_alpha = alpha;
    const auto leaves = cart_train(ds, cfg).num_leaves();
    EXPECT_LE(leaves, previous) << alpha;
    previous = leaves;
  }
}

// Reference trees from scikit-learn's DecisionTreeClassifier (no pruning):
// identical training predictions and root split.
TEST(Cart, MatchesReferenceImplementation) {
  const auto doc = nlohmann::json::parse(support::read_file(std::string(MINLEAF_GOLDEN_DIR) + "/cart_reference.json"));
  int checked = 0;
  for (const auto& c : doc.at("cases")) {
    const auto rows = c.at("X").get<std::vector<std::vector<double>>>();
    const auto labels = c.at("y").get<std::vector<int>>();
    const auto ds = make_dataset(rows, labels);
    CartConfig cfg;
    cfg.max_depth = c.at("max_depth").get<int>();
    cfg.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    const auto t = cart_train(ds, cfg);
    ASSERT_FALSE(t.node(0).is_leaf());
    EXPECT_EQ(t.node(0).feature, c.at("root_feature").get<int>());
    EXPECT_NEAR(t.node(0).threshold, c.at("root_threshold").get<double>(), 1e-6);
    const auto expected = c.at("predictions").get<std::vector<int>>();
    for (std::size_t i = 0; i < ds.num_samples(); ++i) EXPECT_EQ(t.predict(ds.row(i)), expected[i]) << "case " << checked << " row " << i;
    ++checked;
  }
  EXPECT_EQ(checked, 16);
}

TEST(CartSearch, SingleIterationIsItsRefit) {
  Rng rng(5);
  const auto ds = support::structured_dataset(rng, 150, 3, 0.1);
  CartConfig fixed;
  fixed.max_depth = 3;
  fixed.min_samples_leaf = 5;
  const auto r = cart_search(ds, fixed, 1, 5, 42);
  EXPECT_EQ(r.tree, cart_train(ds, r.config));
  EXPECT_EQ(r.config.max_depth, 3);
  EXPECT_EQ(r.config.min_samples_leaf, 5);
}

TEST(CartSearch, Deterministic) {
  Rng rng(5);
  const auto ds = support::structured_dataset(rng, 150, 3, 0.1);
  CartConfig fixed;
  fixed.max_depth = 3;
  fixed.min_samples_leaf = 5;
  const auto a = cart_search(ds, fixed, 20, 5, 7);
  const auto b = cart_search(ds, fixed, 20, 5, 7);
  EXPECT_EQ(a.config.to_json(), b.config.to_json());
  EXPECT_EQ(a.tree, b.tree);
  EXPECT_DOUBLE_EQ(a.cv_accuracy, b.cv_accuracy);
}

TEST(CartSearch, SampledRanges) {
  Rng rng(5);
  const auto ds = support::structured_dataset(rng, 100, 2, 0.1);
  CartConfig fixed;
  fixed.max_depth = 2;
  fixed.min_samples_leaf = 1;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = cart_search(ds, fixed, 3, 3, seed);
    EXPECT_GE(r.config.min_samples_split, 2);
    EXPECT_LE(r.config.min_samples_split, 100);
    EXPECT_GE(r.config.max_leaf_nodes, 2);
    EXPECT_LE(r.config.max_leaf_nodes, 16);
    EXPECT_GE(r.config.min_impurity_decrease, 0.0);
    EXPECT_LE(r.config.min_impurity_decrease, 0.2);
    EXPECT_GE(r.config.ccp_alpha, 0.0);
    EXPECT_LE(r.config.ccp_alpha, 0.3);
  }
}

TEST(CartSearch, SeparableCvIsPerfect) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({i / 19.0});
    labels.push_back(i < 10 ? 0 : 1);
  }
  const auto ds = make_dataset(rows, labels);
  CartConfig fixed;
  fixed.max_depth = 1;
  fixed.min_samples_leaf = 1;
  CartConfig permissive = fixed;
  permissive.min_samples_split = 2;
  permissive.max_leaf_nodes = 2;
  EXPECT_EQ(model_accuracy(cart_train(ds, permissive), ds), 1.0);
  const auto r = cart_search(ds, fixed, 30, 5, 3);
  // A held-out point next to the boundary can land on the wrong side of a
  // fold's midpoint, so perfect CV is not guaranteed.
  if (r.tree.num_leaves() == 2) EXPECT_GE(r.cv_accuracy, 0.9);
  EXPECT_GE(r.cv_accuracy, 0.5);
}

TEST(CartSearch, SmallClassFallsBackToHoldout) {
  const auto ds = make_dataset({{0.1}, {0.2}, {0.3}, {0.4}, {0.5}, {0.6}, {0.7}, {0.9}}, {0, 0, 0, 0, 0, 0, 1, 1});
  CartConfig fixed;
  fixed.max_depth = 1;
  fixed.min_samples_leaf = 1;
  const auto r = cart_search(ds, fixed, 5, 5, 1);
  EXPECT_TRUE(r.holdout_fallback);
}
