#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minleaf/data.hpp"

namespace minleaf {

using NodeId = int;

/// One node of a ShallowTree. A node is a leaf iff it has no children.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  NodeId left = -1;
  NodeId right = -1;
  int label = 0;

  bool is_leaf() const noexcept { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Axis-aligned binary classification tree stored as a node arena, root at 0.
///
/// A sample goes left at a branch iff x[feature] < threshold; values equal to
/// the threshold go right.
class ShallowTree {
 public:
  static ShallowTree leaf(int label);
  static ShallowTree branch(int feature, double threshold, const ShallowTree& left, const ShallowTree& right);

  NodeId root() const noexcept { return 0; }
  const TreeNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const TreeNode> nodes() const noexcept { return nodes_; }

  /// Longest root-to-leaf edge count; 0 for a single leaf.
  int depth() const;
  std::size_t num_leaves() const;
  /// Leaf ids in left-to-right order.
  std::vector<NodeId> leaf_ids() const;

  /// Subtree rooted at `id`, re-indexed from 0.
  ShallowTree subtree(NodeId id) const;

  NodeId route(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return node(route(x)).label; }

  /// Structural equality (same shape, features, thresholds, labels).
  bool operator==(const ShallowTree&) const = default;

  /// {"branch":{"feature":j,"threshold":b,"left":...,"right":...}} / {"leaf":{"class":k}}
  std::string to_json() const;
  static ShallowTree from_json(const std::string& text);

 private:
  std::vector<TreeNode> nodes_;
};

/// Threshold separating two consecutive distinct values lo < hi: their
/// midpoint, or hi when the midpoint rounds down onto lo.
double split_threshold(double lo, double hi);

/// Complete binary tree of depth d in heap layout, as used by the MIO model.
/// Branch m (0-based) has children 2m+1 and 2m+2; leaves are numbered
/// 0..2^d-1 left to right.
struct TreeTopology {
  int depth = 0;
  std::size_t num_branches = 0;
  std::size_t num_leaves = 0;
  /// For each leaf, the branches whose left subtree contains it.
  std::vector<std::vector<std::size_t>> left_ancestors;
  /// For each leaf, the branches whose right subtree contains it.
  std::vector<std::vector<std::size_t>> right_ancestors;

  static TreeTopology complete(int depth);
};

struct LeafStat {
  NodeId leaf = -1;
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct LeafStats {
  std::vector<LeafStat> leaves;  // every leaf, left-to-right, including empty ones
  double leaf_accuracy = 0.0;    // min over non-empty leaves
  double model_accuracy = 0.0;

  const LeafStat* find(NodeId leaf) const;
};

/// Per-leaf statistics plus the tree's leaf accuracy (minimum accuracy over
/// leaves that receive at least one sample) and model accuracy.
LeafStats leaf_accuracy(const ShallowTree& tree, const Dataset& ds);

double model_accuracy(const ShallowTree& tree, const Dataset& ds);

/// Removes subtrees that receive no training samples (promoting the sibling)
/// and merges sibling leaves predicting the same class, bottom-up to a fixpoint.
ShallowTree reduce_tree(const ShallowTree& tree, const Dataset& train);

/// Graphviz rendering. Leaves show the class, the bold test accuracy (when
/// test statistics are given) and the training accuracy.
std::string export_dot(const ShallowTree& tree, const Dataset& train_schema, const LeafStats& train_stats,
                       const LeafStats* test_stats = nullptr);

}  // namespace minleaf
