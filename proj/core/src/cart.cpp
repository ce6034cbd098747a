#include "minleaf/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include <json.hpp>

#include "minleaf/error.hpp"
#include "minleaf/random.hpp"

namespace minleaf {

void CartConfig::validate() const {
  if (max_depth < 1) throw ModelError("CART max_depth must be at least 1");
  if (min_samples_leaf < 1) throw ModelError("CART min_samples_leaf must be at least 1");
  if (min_samples_split < 2) throw ModelError("CART min_samples_split must be at least 2");
  if (max_leaf_nodes != 0 && max_leaf_nodes < 2) throw ModelError("CART max_leaf_nodes must be 0 or at least 2");
  if (!(min_impurity_decrease >= 0.0)) throw ModelError("CART min_impurity_decrease must be non-negative");
  if (!(ccp_alpha >= 0.0)) throw ModelError("CART ccp_alpha must be non-negative");
}

std::string CartConfig::to_json() const {
  return nlohmann::json{{"max_depth", max_depth},
                        {"min_samples_leaf", min_samples_leaf},
                        {"min_samples_split", min_samples_split},
                        {"max_leaf_nodes", max_leaf_nodes},
                        {"min_impurity_decrease", min_impurity_decrease},
                        {"ccp_alpha", ccp_alpha}}
      .dump();
}

namespace {

constexpr double kTieTolerance = 1e-12;

double gini(std::span<const std::size_t> counts, std::size_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += f * f;
  }
  return 1.0 - sum_sq;
}

int majority(std::span<const std::size_t> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct GrowNode {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> counts;
  int depth = 0;
  double impurity = 0.0;
  // Filled when split.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
};

struct SplitChoice {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double improvement = -std::numeric_limits<double>::infinity();
};

class CartBuilder {
 public:
  CartBuilder(const Dataset& train, const CartConfig& cfg) : train_(train), cfg_(cfg) {}

  ShallowTree build() {
    GrowNode root;
    root.rows.resize(train_.num_samples());
    std::iota(root.rows.begin(), root.rows.end(), std::size_t{0});
    root.counts = counts_of(root.rows);
    root.impurity = gini(root.counts, root.rows.size());
    nodes_.push_back(std::move(root));
    grow();
    prune();
    return to_tree(0);
  }

 private:
  std::vector<std::size_t> counts_of(const std::vector<std::size_t>& rows) const {
    std::vector<std::size_t> c(static_cast<std::size_t>(train_.num_classes()), 0);
    for (std::size_t r : rows) ++c[static_cast<std::size_t>(train_.label(r))];
    return c;
  }

  SplitChoice best_split(const GrowNode& node) const {
    SplitChoice best;
    const std::size_t m = node.rows.size();
    const auto msl = static_cast<std::size_t>(cfg_.min_samples_leaf);
    if (node.depth >= cfg_.max_depth || m < static_cast<std::size_t>(cfg_.min_samples_split) || m < 2 * msl ||
        node.impurity <= kTieTolerance) {
      return best;
    }
    const double total_n = static_cast<double>(train_.num_samples());
    const auto k = static_cast<std::size_t>(train_.num_classes());
    std::vector<std::size_t> order = node.rows;
    std::vector<std::size_t> left(k);
    std::vector<std::size_t> right(k);
    for (std::size_t f = 0; f < train_.num_features(); ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return train_.value(a, f) < train_.value(b, f); });
      std::fill(left.begin(), left.end(), 0);
      right = node.counts;
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const int y = train_.label(order[i]);
        ++left[static_cast<std::size_t>(y)];
        --right[static_cast<std::size_t>(y)];
        const double v = train_.value(order[i], f);
        const double w = train_.value(order[i + 1], f);
        if (v == w) continue;
        const std::size_t ml = i + 1;
        const std::size_t mr = m - ml;
        if (ml < msl || mr < msl) continue;
        const double child = (static_cast<double>(ml) * gini(left, ml) + static_cast<double>(mr) * gini(right, mr)) /
                             static_cast<double>(m);
        const double improvement = static_cast<double>(m) / total_n * (node.impurity - child);
        if (!best.valid || improvement > best.improvement + kTieTolerance) {
          best = SplitChoice{true, static_cast<int>(f), split_threshold(v, w), improvement};
        }
      }
    }
    if (best.valid && best.improvement + kTieTolerance < cfg_.min_impurity_decrease) best.valid = false;
    return best;
  }

  void split(std::size_t id, const SplitChoice& s) {
    GrowNode l;
    GrowNode r;
    for (std::size_t row : nodes_[id].rows) {
      (train_.value(row, static_cast<std::size_t>(s.feature)) < s.threshold ? l.rows : r.rows).push_back(row);
    }
    for (GrowNode* c : {&l, &r}) {
      c->counts = counts_of(c->rows);
      c->depth = nodes_[id].depth + 1;
      c->impurity = gini(c->counts, c->rows.size());
    }
    nodes_[id].feature = s.feature;
    nodes_[id].threshold = s.threshold;
    nodes_[id].left = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(l));
    nodes_[id].right = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(r));
  }

  void grow() {
    // Best-first: the frontier is ordered by improvement, ties by creation order.
    struct Entry {
      double improvement;
      std::size_t id;
      SplitChoice choice;
    };
    auto worse = [](const Entry& a, const Entry& b) {
      if (a.improvement != b.improvement) return a.improvement < b.improvement;
      return a.id > b.id;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> frontier(worse);
    auto consider = [&](std::size_t id) {
      const SplitChoice s = best_split(nodes_[id]);
      if (s.valid) frontier.push(Entry{s.improvement, id, s});
    };
    consider(0);
    std::size_t leaves = 1;
    const auto budget = cfg_.max_leaf_nodes > 0 ? static_cast<std::size_t>(cfg_.max_leaf_nodes)
                                                : std::numeric_limits<std::size_t>::max();
    while (!frontier.empty() && leaves < budget) {
      const Entry e = frontier.top();
      frontier.pop();
      split(e.id, e.choice);
      ++leaves;
      consider(static_cast<std::size_t>(nodes_[e.id].left));
      consider(static_cast<std::size_t>(nodes_[e.id].right));
    }
  }

  // Misclassification risk of node `id` when it is turned into a leaf.
  double leaf_risk(std::size_t id) const {
    const auto& n = nodes_[id];
    const std::size_t best = *std::max_element(n.counts.begin(), n.counts.end());
    return static_cast<double>(n.rows.size() - best) / static_cast<double>(train_.num_samples());
  }

  // Returns (subtree risk, leaf count).
  std::pair<double, std::size_t> subtree_risk(std::size_t id) const {
    const auto& n = nodes_[id];
    if (n.left < 0) return {leaf_risk(id), 1};
    const auto [rl, cl] = subtree_risk(static_cast<std::size_t>(n.left));
    const auto [rr, cr] = subtree_risk(static_cast<std::size_t>(n.right));
    return {rl + rr, cl + cr};
  }

  // Weakest-link pruning. With misclassification risk a split can have zero
  // effective alpha, so alpha = 0 leaves the tree untouched and a positive
  // alpha prunes every link whose effective alpha is <= alpha.
  void prune() {
    if (cfg_.ccp_alpha <= 0.0) return;
    while (true) {
      double weakest = std::numeric_limits<double>::infinity();
      std::size_t weakest_id = 0;
      for (std::size_t id = 0; id < nodes_.size(); ++id) {
        if (nodes_[id].left < 0 || !reachable(id)) continue;
        const auto [risk, leaves] = subtree_risk(id);
        const double g = (leaf_risk(id) - risk) / static_cast<double>(leaves - 1);
        if (g < weakest - kTieTolerance) {
          weakest = g;
          weakest_id = id;
        }
      }
      if (!std::isfinite(weakest) || weakest > cfg_.ccp_alpha) return;
      nodes_[weakest_id].left = -1;
      nodes_[weakest_id].right = -1;
    }
  }

  bool reachable(std::size_t id) const {
    // Nodes are only ever appended below their parent, so walk from the root.
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      if (cur == id) return true;
      if (nodes_[cur].left >= 0) {
        stack.push_back(static_cast<std::size_t>(nodes_[cur].left));
        stack.push_back(static_cast<std::size_t>(nodes_[cur].right));
      }
    }
    return false;
  }

  ShallowTree to_tree(std::size_t id) const {
    const auto& n = nodes_[id];
    if (n.left < 0) return ShallowTree::leaf(majority(n.counts));
    return ShallowTree::branch(n.feature, n.threshold, to_tree(static_cast<std::size_t>(n.left)),
                               to_tree(static_cast<std::size_t>(n.right)));
  }

  const Dataset& train_;
  const CartConfig& cfg_;
  std::vector<GrowNode> nodes_;
};

double holdout_accuracy(const Dataset& train, const CartConfig& cfg, std::span<const std::size_t> fit_rows,
                        std::span<const std::size_t> eval_rows) {
  const ShallowTree tree = cart_train(train.subset(fit_rows), cfg);
  std::size_t correct = 0;
  for (std::size_t r : eval_rows) {
    if (tree.predict(train.row(r)) == train.label(r)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(eval_rows.size());
}

}  // namespace

ShallowTree cart_train(const Dataset& train, const CartConfig& cfg) {
  cfg.validate();
  return CartBuilder(train, cfg).build();
}

CartSearchResult cart_search(const Dataset& train, const CartConfig& fixed, int iterations, int folds,
                             std::uint64_t seed) {
  if (iterations < 1) throw ModelError("cart_search needs at least one iteration");
  fixed.validate();
  Rng rng(seed);
  const auto counts = train.class_counts();
  const bool can_cv =
      folds >= 2 && std::all_of(counts.begin(), counts.end(),
                                [&](std::size_t c) { return c == 0 || c >= static_cast<std::size_t>(folds); });

  // Evaluation splits: (fit rows, eval rows) pairs.
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> splits;
  if (can_cv) {
    const auto fold_rows = stratified_folds(train.labels(), train.num_classes(), folds, derive_seed(seed, 1));
    for (std::size_t f = 0; f < fold_rows.size(); ++f) {
      std::vector<std::size_t> fit;
      for (std::size_t g = 0; g < fold_rows.size(); ++g) {
        if (g != f) fit.insert(fit.end(), fold_rows[g].begin(), fold_rows[g].end());
      }
      std::sort(fit.begin(), fit.end());
      splits.emplace_back(std::move(fit), fold_rows[f]);
    }
  } else {
    std::vector<std::size_t> order(train.num_samples());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng split_rng(derive_seed(seed, 1));
    shuffle(std::span<std::size_t>(order), split_rng);
    const std::size_t cut = std::max<std::size_t>(1, order.size() * 4 / 5);
    std::vector<std::size_t> fit(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<std::size_t> eval(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
    if (eval.empty()) eval = fit;
    splits.emplace_back(std::move(fit), std::move(eval));
  }

  CartSearchResult result{ShallowTree::leaf(0), fixed, -1.0, !can_cv};
  for (int it = 0; it < iterations; ++it) {
    CartConfig cfg = fixed;
    cfg.min_samples_split = static_cast<int>(uniform_int(rng, 2, 100));
    cfg.max_leaf_nodes = static_cast<int>(uniform_int(rng, 2, 16));
    cfg.min_impurity_decrease = uniform_real(rng, 0.0, 0.2);
    cfg.ccp_alpha = uniform_real(rng, 0.0, 0.3);
    double total = 0.0;
    for (const auto& [fit, eval] : splits) total += holdout_accuracy(train, cfg, fit, eval);
    const double mean = total / static_cast<double>(splits.size());
    if (mean > result.cv_accuracy) {
      result.cv_accuracy = mean;
      result.config = cfg;
    }
  }
  result.tree = cart_train(train, result.config);
  return result;
}

}  // namespace minleaf
