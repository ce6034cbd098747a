#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>

#include "minleaf/data.hpp"
#include "minleaf/gbdt.hpp"
#include "minleaf/tree.hpp"

namespace minleaf {

struct MajorityExtender {
  int label = 0;
  bool operator==(const MajorityExtender&) const = default;
};

/// One boosting round with a depth-5 tree, for leaves too small to tune.
struct SingleTreeExtender {
  GbdtModel model;
  bool operator==(const SingleTreeExtender&) const = default;
};

/// Ensemble chosen by random search with cross-validation on the leaf's samples.
struct GbdtExtender {
  GbdtModel model;
  double cv_accuracy = 0.0;
  bool operator==(const GbdtExtender&) const = default;
};

using Extender = std::variant<MajorityExtender, SingleTreeExtender, GbdtExtender>;

std::string extender_kind(const Extender& e);
int extender_predict(const Extender& e, std::span<const double> x);

/// A shallow tree whose leaves delegate prediction to per-leaf models.
struct HybridTree {
  ShallowTree shallow = ShallowTree::leaf(0);
  std::map<NodeId, Extender> extenders;  ///< keyed by shallow-tree leaf id

  int predict(std::span<const double> x) const;
  std::string to_json() const;
  static HybridTree from_json(const std::string& text);
  bool operator==(const HybridTree&) const = default;
};

/// The configuration used for the single-tree extender.
GbdtConfig single_tree_config();

/// Builds one extender per leaf of `shallow` from the training samples routed
/// to it. Pure leaves keep the majority class; leaves where a present class
/// has fewer than 3 samples get a single depth-5 tree; other leaves get the
/// best of `iterations` random configurations under `folds`-fold stratified
/// cross-validation, refit on the whole leaf. An extender that scores below
/// the leaf's majority rate on its training samples is replaced by the
/// majority class. Throws ModelError when a leaf receives no samples.
HybridTree extend_tree(const ShallowTree& shallow, const Dataset& train, int iterations = 50, int folds = 3,
                       std::uint64_t seed = 0);

int predict_hybrid(const HybridTree& h, std::span<const double> x);
double hybrid_accuracy(const HybridTree& h, const Dataset& ds);
/// Fraction of samples on which the shallow tree and the hybrid agree.
double agreement_rate(const HybridTree& h, const Dataset& ds);

}  // namespace minleaf
