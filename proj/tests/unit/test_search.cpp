#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "minleaf/cart.hpp"
#include "minleaf/error.hpp"
#include "minleaf/search.hpp"
#include "support.hpp"

using namespace minleaf;
using minleaf::support::make_dataset;

namespace {

SearchConfig config(int depth, std::size_t n_min, Objective obj = Objective::leaf_accuracy) {
  SearchConfig c;
  c.depth = depth;
  c.n_min = n_min;
  c.objective = obj;
  c.time_budget = 600;
  return c;
}

Dataset xor_data() { return make_dataset({{0.1, 0.1}, {0.9, 0.9}, {0.1, 0.9}, {0.9, 0.1}}, {0, 0, 1, 1}); }

// Depth-1 optimum by direct enumeration of every candidate threshold and
// both leaf labels, independent of the library's recursion.
double depth_one_optimum(const Dataset& ds, std::size_t n_min, Objective obj) {
  auto score = [&](const std::vector<std::size_t>& rows, double& value, bool& ok) {
    // majority-labelled leaf
    if (rows.empty()) return;
    std::vector<std::size_t> counts(static_cast<std::size_t>(ds.num_classes()));
    for (auto r : rows) ++counts[static_cast<std::size_t>(ds.label(r))];
    const auto best = *std::max_element(counts.begin(), counts.end());
    if (rows.size() < n_min) ok = false;
    if (obj == Objective::leaf_accuracy) {
      value = std::min(value, static_cast<double>(best) / static_cast<double>(rows.size()));
    } else {
      value += static_cast<double>(best);
    }
  };
  auto evaluate = [&](const std::vector<std::size_t>& left, const std::vector<std::size_t>& right) {
    double v = obj == Objective::leaf_accuracy ? 1.0 : 0.0;
    bool ok = true;
    score(left, v, ok);
    score(right, v, ok);
    return ok ? v : -INFINITY;
  };
  std::vector<std::size_t> all(ds.num_samples());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  double best = evaluate(all, {});
  for (std::size_t j = 0; j < ds.num_features(); ++j) {
    for (std::size_t i = 0; i < ds.num_samples(); ++i) {
      const double b = ds.value(i, j);
      std::vector<std::size_t> l;
      std::vector<std::size_t> r;
      for (std::size_t s = 0; s < ds.num_samples(); ++s) (ds.value(s, j) < b ? l : r).push_back(s);
      best = std::max(best, evaluate(l, r));
    }
  }
  return best;
}

}  // namespace

TEST(Candidates, Examples) {
  const auto a = candidate_splits(make_dataset({{0}, {0.5}, {1}}, {0, 1, 0}));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], (std::vector<double>{0.25, 0.75}));
  EXPECT_TRUE(candidate_splits(make_dataset({{0.3}, {0.3}}, {0, 1}))[0].empty());
  EXPECT_EQ(candidate_splits(make_dataset({{0}, {0}, {1}}, {0, 1, 0}))[0], (std::vector<double>{0.5}));
}

TEST(TreeObjective, NminViolationIsMinusInfinity) {
  const auto ds = make_dataset({{0.1}, {0.2}, {0.8}, {0.9}}, {0, 0, 0, 1});
  const auto t = ShallowTree::branch(0, 0.85, ShallowTree::leaf(0), ShallowTree::leaf(1));
  EXPECT_EQ(tree_objective(t, ds, 2, Objective::leaf_accuracy), -INFINITY);
  EXPECT_DOUBLE_EQ(tree_objective(t, ds, 1, Objective::leaf_accuracy), 1.0);
  EXPECT_DOUBLE_EQ(tree_objective(t, ds, 1, Objective::misclassification), 4.0);
}

TEST(BruteForce, Examples) {
  const auto line = make_dataset({{0}, {0.3}, {0.6}, {1}}, {0, 0, 1, 1});
  const auto a = brute_force_optimal(line, config(1, 1));
  EXPECT_DOUBLE_EQ(a.objective_value, 1.0);
  ASSERT_FALSE(a.tree.node(0).is_leaf());
  EXPECT_NEAR(a.tree.node(0).threshold, 0.45, 1e-12);

  const auto aaab = make_dataset({{0.1}, {0.2}, {0.3}, {0.4}}, {0, 0, 0, 1});
  EXPECT_DOUBLE_EQ(brute_force_optimal(aaab, config(1, 2)).objective_value, 0.75);

  EXPECT_DOUBLE_EQ(brute_force_optimal(xor_data(), config(2, 1)).objective_value, 1.0);
}

TEST(BruteForce, TreeCountAndCap) {
  EXPECT_DOUBLE_EQ(brute_force_tree_count(5, 0), 1.0);
  EXPECT_DOUBLE_EQ(brute_force_tree_count(5, 1), 6.0);
  EXPECT_DOUBLE_EQ(brute_force_tree_count(5, 2), 1.0 + 5.0 * 36.0);
  Rng rng(1);
  const auto big = support::random_dataset(rng, 200, 5, 2, 100);
  EXPECT_THROW(brute_force_optimal(big, config(3, 1)), ModelError);
}

TEST(BruteForce, DepthOneMatchesDirectEnumeration) {
  Rng rng(17);
  for (int rep = 0; rep < 60; ++rep) {
    const auto ds = support::random_dataset(rng, static_cast<std::size_t>(uniform_int(rng, 2, 25)),
                                            static_cast<std::size_t>(uniform_int(rng, 1, 3)), 2 + rep % 2, 6);
    const auto n_min = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    if (ds.num_samples() < n_min) continue;
    for (auto obj : {Objective::leaf_accuracy, Objective::misclassification}) {
      EXPECT_NEAR(brute_force_optimal(ds, config(1, n_min, obj)).objective_value, depth_one_optimum(ds, n_min, obj),
                  1e-12)
          << rep;
    }
  }
}

TEST(Solve, Examples) {
  const auto line = make_dataset({{0}, {0.3}, {0.6}, {1}}, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(solve(line, config(1, 1)).objective_value, 1.0);
  const auto aaab = make_dataset({{0.1}, {0.2}, {0.3}, {0.4}}, {0, 0, 0, 1});
  const auto r = solve(aaab, config(1, 2));
  EXPECT_DOUBLE_EQ(r.objective_value, 0.75);
  EXPECT_TRUE(r.proven_optimal);
  const auto x = solve(xor_data(), config(2, 1));
  EXPECT_DOUBLE_EQ(x.objective_value, 1.0);
  EXPECT_DOUBLE_EQ(leaf_accuracy(x.tree, xor_data()).leaf_accuracy, 1.0);
}

TEST(Solve, ReportedValueMatchesTree) {
  Rng rng(23);
  for (int rep = 0; rep < 40; ++rep) {
    const auto ds = support::random_dataset(rng, 30, 3, 2, 6);
    for (auto obj : {Objective::leaf_accuracy, Objective::misclassification}) {
      const auto r = solve(ds, config(2, 2, obj));
      EXPECT_NEAR(r.objective_value, tree_objective(r.tree, ds, 2, obj), 1e-12);
      EXPECT_LE(r.tree.depth(), 2);
      EXPECT_TRUE(r.proven_optimal);
      EXPECT_NEAR(r.best_bound, r.objective_value, 1e-12);
    }
  }
}

TEST(Solve, MatchesBruteForceOnSmallInstances) {
  Rng rng(29);
  for (int rep = 0; rep < 40; ++rep) {
    const auto ds = support::random_dataset(rng, static_cast<std::size_t>(uniform_int(rng, 4, 20)),
                                            static_cast<std::size_t>(uniform_int(rng, 1, 3)), 2, 5);
    const int depth = static_cast<int>(uniform_int(rng, 1, 2));
    const std::size_t n_min = rep % 2 ? 3 : 1;
    if (ds.num_samples() < n_min) continue;
    for (auto obj : {Objective::leaf_accuracy, Objective::misclassification}) {
      const auto oracle = brute_force_optimal(ds, config(depth, n_min, obj));
      for (auto strategy : {Strategy::direct, Strategy::warmstarted, Strategy::gradual}) {
        auto cfg = config(depth, n_min, obj);
        cfg.strategy = strategy;
        EXPECT_NEAR(solve(ds, cfg).objective_value, oracle.objective_value, 1e-9) << rep;
      }
    }
  }
}

TEST(Solve, OptimalWarmstartNeedsNoImprovement) {
  const auto ds = xor_data();
  const auto best = brute_force_optimal(ds, config(2, 1));
  const auto r = solve(ds, config(2, 1), best.tree);
  EXPECT_TRUE(r.proven_optimal);
  EXPECT_EQ(r.incumbent_updates, 0u);
  EXPECT_DOUBLE_EQ(r.objective_value, 1.0);
  EXPECT_DOUBLE_EQ(r.initial_value, 1.0);
}

TEST(Solve, TinyBudgetReturnsWarmstart) {
  Rng rng(3);
  const auto ds = support::structured_dataset(rng, 3000, 8, 0.3);
  CartConfig cc;
  cc.max_depth = 4;
  cc.min_samples_leaf = 5;
  const auto warm = cart_train(ds, cc);
  auto cfg = config(4, 5);
  cfg.time_budget = 1e-9;
  const auto r = solve(ds, cfg, warm);
  EXPECT_FALSE(r.proven_optimal);
  EXPECT_GE(r.objective_value, tree_objective(warm, ds, 5, Objective::leaf_accuracy));
  // The start is the better of the warmstart and the majority leaf.
  const double leaf = tree_objective(ShallowTree::leaf(0), ds, 5, Objective::leaf_accuracy);
  const double warm_value = tree_objective(warm, ds, 5, Objective::leaf_accuracy);
  EXPECT_DOUBLE_EQ(r.initial_value, std::max({leaf, warm_value, tree_objective(ShallowTree::leaf(1), ds, 5,
                                                                              Objective::leaf_accuracy)}));
  EXPECT_GE(r.best_bound, r.objective_value);
}

TEST(Solve, NodeLimitIsReproducible) {
  Rng rng(4);
  const auto ds = support::structured_dataset(rng, 400, 5, 0.2);
  auto cfg = config(3, 10);
  cfg.node_limit = 200;
  const auto a = solve(ds, cfg);
  const auto b = solve(ds, cfg);
  EXPECT_EQ(a.tree, b.tree);
  EXPECT_EQ(a.nodes_explored, b.nodes_explored);
  EXPECT_FALSE(a.proven_optimal);
}

TEST(Solve, NeverWorseThanCart) {
  Rng rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = support::structured_dataset(rng, 150, 3, 0.25);
    CartConfig cc;
    cc.max_depth = 2;
    cc.min_samples_leaf = 10;
    const auto cart = cart_train(ds, cc);
    const auto r = solve(ds, config(2, 10));
    EXPECT_GE(r.objective_value, leaf_accuracy(cart, ds).leaf_accuracy - 1e-12);
  }
}

TEST(Solve, TraceIsMonotone) {
  Rng rng(43);
  const auto ds = support::structured_dataset(rng, 300, 4, 0.2);
  const auto r = solve(ds, config(3, 10));
  ASSERT_FALSE(r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_GE(r.trace[i].incumbent, r.trace[i - 1].incumbent);
    EXPECT_GE(r.trace[i].elapsed, r.trace[i - 1].elapsed);
  }
  EXPECT_DOUBLE_EQ(r.trace.back().incumbent, r.objective_value);
}

TEST(Solve, Errors) {
  const auto ds = xor_data();
  EXPECT_THROW(solve(ds, config(0, 1)), ModelError);
  EXPECT_THROW(solve(ds, config(1, 5)), ModelError);
  auto cfg = config(1, 1);
  cfg.time_budget = 0;
  EXPECT_THROW(solve(ds, cfg), ModelError);
  const auto deep = ShallowTree::branch(0, 0.5, ShallowTree::branch(1, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1)),
                                        ShallowTree::leaf(1));
  EXPECT_THROW(solve(ds, config(1, 1), deep), ModelError);
  EXPECT_THROW(parse_strategy("fastest"), ModelError);
}
