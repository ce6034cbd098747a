#pragma once

#include <cstdint>
#include <string>

#include "minleaf/data.hpp"
#include "minleaf/tree.hpp"

namespace minleaf {

/// Greedy CART hyperparameters. Zero max_leaf_nodes means unbounded.
struct CartConfig {
  int max_depth = 4;
  int min_samples_leaf = 50;
  int min_samples_split = 2;
  int max_leaf_nodes = 0;
  double min_impurity_decrease = 0.0;
  double ccp_alpha = 0.0;

  void validate() const;
  std::string to_json() const;
};

/// Gini CART grown best-first (which equals depth-first growth when the leaf
/// budget is unbounded), then weakest-link pruned with misclassification risk.
/// Thresholds are midpoints of consecutive distinct values; ties between equal
/// impurity decreases go to the lowest (feature, threshold).
ShallowTree cart_train(const Dataset& train, const CartConfig& cfg);

struct CartSearchResult {
  ShallowTree tree;
  CartConfig config;
  double cv_accuracy = 0.0;
  /// True when some class has fewer samples than folds and a single
  /// 80/20 holdout was used instead of k-fold cross-validation.
  bool holdout_fallback = false;
};

/// Random search over the CART hyperparameter distributions (min_samples_split
/// U{2..100}, max_leaf_nodes U{2..16}, min_impurity_decrease U[0,0.2],
/// ccp_alpha U[0,0.3]); max_depth and min_samples_leaf are taken from `fixed`.
/// Selects the best mean stratified-CV accuracy (first found on ties) and refits
/// on the full training set.
CartSearchResult cart_search(const Dataset& train, const CartConfig& fixed, int iterations = 100, int folds = 5,
                             std::uint64_t seed = 0);

}  // namespace minleaf
