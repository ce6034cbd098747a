#include "minleaf/boost.hpp"

#include <json.hpp>

#include "minleaf/error.hpp"
#include "minleaf/random.hpp"

namespace minleaf {

using json = nlohmann::json;

std::string extender_kind(const Extender& e) {
  switch (e.index()) {
    case 0: return "majority";
    case 1: return "single_tree";
    default: return "gbdt";
  }
}

int extender_predict(const Extender& e, std::span<const double> x) {
  if (const auto* m = std::get_if<MajorityExtender>(&e)) return m->label;
  if (const auto* s = std::get_if<SingleTreeExtender>(&e)) return s->model.predict(x);
  return std::get<GbdtExtender>(e).model.predict(x);
}

int HybridTree::predict(std::span<const double> x) const {
  const NodeId leaf = shallow.route(x);
  const auto it = extenders.find(leaf);
  if (it == extenders.end()) return shallow.node(leaf).label;
  return extender_predict(it->second, x);
}

std::string HybridTree::to_json() const {
  json list = json::array();
  for (const auto& [leaf, e] : extenders) {
    json item{{"leaf", leaf}, {"kind", extender_kind(e)}};
    if (const auto* m = std::get_if<MajorityExtender>(&e)) {
      item["class"] = m->label;
    } else if (const auto* s = std::get_if<SingleTreeExtender>(&e)) {
      item["model"] = json::parse(s->model.to_json());
    } else {
      const auto& g = std::get<GbdtExtender>(e);
      item["model"] = json::parse(g.model.to_json());
      item["cv_accuracy"] = g.cv_accuracy;
    }
    list.push_back(std::move(item));
  }
  return json{{"shallow", json::parse(shallow.to_json())}, {"extenders", std::move(list)}}.dump();
}

HybridTree HybridTree::from_json(const std::string& text) {
  HybridTree h;
  try {
    const json j = json::parse(text);
    h.shallow = ShallowTree::from_json(j.at("shallow").dump());
    for (const auto& item : j.at("extenders")) {
      const auto leaf = item.at("leaf").get<NodeId>();
      if (leaf < 0 || static_cast<std::size_t>(leaf) >= h.shallow.size() || !h.shallow.node(leaf).is_leaf()) {
        throw ParseError("extender attached to a node that is not a leaf");
      }
      const auto kind = item.at("kind").get<std::string>();
      if (kind == "majority") {
        h.extenders[leaf] = MajorityExtender{item.at("class").get<int>()};
      } else if (kind == "single_tree") {
        h.extenders[leaf] = SingleTreeExtender{GbdtModel::from_json(item.at("model").dump())};
      } else if (kind == "gbdt") {
        h.extenders[leaf] = GbdtExtender{GbdtModel::from_json(item.at("model").dump()), item.value("cv_accuracy", 0.0)};
      } else {
        throw ParseError("unknown extender kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid hybrid tree JSON: ") + e.what());
  }
  for (NodeId leaf : h.shallow.leaf_ids()) {
    if (!h.extenders.contains(leaf)) throw ParseError("leaf " + std::to_string(leaf) + " has no extender");
  }
  return h;
}

GbdtConfig single_tree_config() {
  GbdtConfig c;
  c.n_trees = 1;
  c.max_depth = 5;
  return c;
}

namespace {

double accuracy_on(const Extender& e, const Dataset& ds) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    if (extender_predict(e, ds.row(i)) == ds.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.num_samples());
}

double cross_validate(const Dataset& leaf, const GbdtConfig& cfg, int folds, std::uint64_t seed) {
  const auto parts = stratified_folds(leaf.labels(), leaf.num_classes(), folds, seed);
  double total = 0.0;
  int used = 0;
  for (std::size_t f = 0; f < parts.size(); ++f) {
    if (parts[f].empty()) continue;
    std::vector<std::size_t> fit;
    for (std::size_t g = 0; g < parts.size(); ++g) {
      if (g != f) fit.insert(fit.end(), parts[g].begin(), parts[g].end());
    }
    std::sort(fit.begin(), fit.end());
    const GbdtModel model = gbdt_train(leaf.subset(fit), cfg, seed);
    total += model.accuracy(leaf.subset(parts[f]));
    ++used;
  }
  return used ? total / used : 0.0;
}

Extender extend_leaf(const Dataset& leaf, int leaf_label, int iterations, int folds, std::uint64_t seed) {
  const auto counts = leaf.class_counts();
  const auto n = leaf.num_samples();

  // Majority class, ties resolved towards the shallow tree's own label.
  int majority = leaf_label;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > counts[static_cast<std::size_t>(majority)]) majority = static_cast<int>(k);
  }
  const double majority_rate = static_cast<double>(counts[static_cast<std::size_t>(majority)]) / static_cast<double>(n);

  if (counts[static_cast<std::size_t>(leaf_label)] == n) return MajorityExtender{leaf_label};

  Extender chosen = MajorityExtender{majority};
  bool small = false;
  for (std::size_t c : counts) small = small || (c > 0 && c < 3);
  if (small) {
    chosen = SingleTreeExtender{gbdt_train(leaf, single_tree_config(), seed)};
  } else {
    Rng rng(seed);
    GbdtConfig best_cfg;
    double best_score = -1.0;
    for (int it = 0; it < iterations; ++it) {
      const GbdtConfig cfg = sample_gbdt_config(rng);
      const double score = cross_validate(leaf, cfg, folds, derive_seed(seed, static_cast<std::uint64_t>(it)));
      if (score > best_score) {
        best_score = score;
        best_cfg = cfg;
      }
    }
    if (best_score >= 0.0) chosen = GbdtExtender{gbdt_train(leaf, best_cfg, seed), best_score};
  }
  if (accuracy_on(chosen, leaf) < majority_rate) return MajorityExtender{majority};
  return chosen;
}

}  // namespace

HybridTree extend_tree(const ShallowTree& shallow, const Dataset& train, int iterations, int folds, std::uint64_t seed) {
  if (iterations < 1) throw ModelError("extension needs at least one search iteration");
  if (folds < 2) throw ModelError("extension needs at least two cross-validation folds");
  std::map<NodeId, std::vector<std::size_t>> rows;
  for (NodeId leaf : shallow.leaf_ids()) rows[leaf];
  for (std::size_t i = 0; i < train.num_samples(); ++i) rows[shallow.route(train.row(i))].push_back(i);

  HybridTree h;
  h.shallow = shallow;
  for (const auto& [leaf, members] : rows) {
    if (members.empty()) {
      throw ModelError("leaf " + std::to_string(leaf) + " receives no training samples; reduce the tree first");
    }
    h.extenders[leaf] = extend_leaf(train.subset(members), shallow.node(leaf).label, iterations, folds,
                                    derive_seed(seed, static_cast<std::uint64_t>(leaf)));
  }
  return h;
}

int predict_hybrid(const HybridTree& h, std::span<const double> x) { return h.predict(x); }

double hybrid_accuracy(const HybridTree& h, const Dataset& ds) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    if (h.predict(ds.row(i)) == ds.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.num_samples());
}

double agreement_rate(const HybridTree& h, const Dataset& ds) {
  if (ds.num_samples() == 0) throw DataError("agreement rate needs at least one sample");
  std::size_t same = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    if (h.predict(ds.row(i)) == h.shallow.predict(ds.row(i))) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(ds.num_samples());
}

}  // namespace minleaf
