#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "minleaf/data.hpp"
#include "minleaf/mio.hpp"
#include "minleaf/tree.hpp"

namespace minleaf {

enum class Strategy { direct, warmstarted, gradual };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);

struct SearchConfig {
  int depth = 4;
  std::size_t n_min = 50;
  Objective objective = Objective::leaf_accuracy;
  Strategy strategy = Strategy::warmstarted;
  double time_budget = 60.0;  ///< seconds
  std::uint64_t seed = 0;
  /// Optional cap on explored nodes (0 = none); unlike the time budget it
  /// makes interrupted runs reproducible.
  std::size_t node_limit = 0;

  void validate() const;  ///< throws ModelError
};

/// One sample of the anytime trajectory.
struct ProgressPoint {
  double elapsed = 0.0;
  double incumbent = 0.0;
  double bound = 0.0;
};

struct SearchResult {
  ShallowTree tree = ShallowTree::leaf(0);
  /// Minimum leaf accuracy, or the number of correctly classified samples for
  /// the misclassification objective.
  double objective_value = 0.0;
  bool proven_optimal = false;
  double best_bound = 0.0;
  std::size_t nodes_explored = 0;
  double elapsed = 0.0;
  /// Value of the starting incumbent (warmstart tree or single leaf).
  double initial_value = 0.0;
  std::size_t incumbent_updates = 0;
  std::vector<ProgressPoint> trace;
};

/// Per feature, the midpoints between consecutive distinct training values.
std::vector<std::vector<double>> candidate_splits(const Dataset& train);

/// Objective value of an arbitrary tree: -inf when a non-empty leaf holds
/// fewer than n_min samples.
double tree_objective(const ShallowTree& tree, const Dataset& train, std::size_t n_min, Objective objective);

/// Upper limit on the number of trees brute_force_optimal may enumerate.
inline constexpr double kBruteForceCap = 1e7;

/// Number of distinct trees of depth <= d over `candidates` global splits
/// (leaf, or a split with two subtrees of depth <= d-1).
double brute_force_tree_count(std::size_t candidates, int depth);

/// Exhaustive optimum over all trees built from candidate_splits, including
/// splits that send every sample one way. Throws ModelError above the cap.
SearchResult brute_force_optimal(const Dataset& train, const SearchConfig& cfg);

/// Depth-first branch-and-bound. Every node is a majority-class leaf or a
/// split at a midpoint of its own samples; subsets are memoized per depth.
/// Returns the incumbent when the time budget runs out. Throws ModelError
/// when the data has fewer than n_min samples.
SearchResult solve(const Dataset& train, const SearchConfig& cfg, const std::optional<ShallowTree>& warmstart = {});

}  // namespace minleaf
