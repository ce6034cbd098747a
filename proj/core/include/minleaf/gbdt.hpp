#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "minleaf/data.hpp"
#include "minleaf/random.hpp"

namespace minleaf {

/// Second-order boosting hyperparameters (logistic loss).
struct GbdtConfig {
  int n_trees = 100;
  int max_depth = 6;
  double min_child_weight = 1.0;
  double learning_rate = 0.3;
  double subsample = 1.0;
  double colsample_by_tree = 1.0;
  double colsample_by_level = 1.0;
  double gamma = 1e-8;
  double alpha = 1e-8;
  double lambda = 1.0;

  void validate() const;  ///< throws ModelError
  std::string to_json() const;
  static GbdtConfig from_json(const std::string& text);
  bool operator==(const GbdtConfig&) const = default;
};

/// Draws a configuration from the hyperparameter search space: n_trees
/// U{10..500}, max_depth U{1..7}, min_child_weight log-uniform integer
/// [1,100], learning_rate U[1e-5,0.7], the three sampling rates U[0.5,1],
/// gamma log-U[1e-8,7], alpha log-U[1e-8,100], lambda log-U[1,4].
GbdtConfig sample_gbdt_config(Rng& rng);

struct RegNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;

  bool operator==(const RegNode&) const = default;
};

/// Regression tree with real leaf weights; x[feature] < threshold goes left.
struct RegTree {
  std::vector<RegNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  bool operator==(const RegTree&) const = default;
};

/// Binary models hold one ensemble for class 1; K > 2 holds one
/// one-vs-rest ensemble per class.
struct GbdtModel {
  int num_classes = 2;
  GbdtConfig config;
  std::vector<double> base_score;
  std::vector<std::vector<RegTree>> trees;

  /// Per-ensemble probability of the positive side.
  std::vector<double> predict_proba(std::span<const double> x) const;
  /// Argmax class; ties go to the lowest index.
  int predict(std::span<const double> x) const;
  double accuracy(const Dataset& ds) const;

  std::string to_json() const;
  static GbdtModel from_json(const std::string& text);
  bool operator==(const GbdtModel&) const = default;
};

/// Exact greedy, level-wise tree growth with L1/L2-regularized Newton leaf
/// weights. When `loss_trace` is given it receives the mean training log-loss
/// (summed over one-vs-rest ensembles) before the first tree and after each.
GbdtModel gbdt_train(const Dataset& data, const GbdtConfig& cfg, std::uint64_t seed,
                     std::vector<double>* loss_trace = nullptr);

}  // namespace minleaf
