#include "minleaf/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <json.hpp>

#include "minleaf/error.hpp"
#include "minleaf/tree.hpp"

namespace minleaf {

using json = nlohmann::json;

void GbdtConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ModelError(std::string("invalid boosting configuration: ") + what);
  };
  require(n_trees >= 1, "n_trees must be at least 1");
  require(max_depth >= 1, "max_depth must be at least 1");
  require(std::isfinite(min_child_weight) && min_child_weight >= 0.0, "min_child_weight must be non-negative");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be positive");
  require(subsample > 0.0 && subsample <= 1.0, "subsample must lie in (0,1]");
  require(colsample_by_tree > 0.0 && colsample_by_tree <= 1.0, "colsample_by_tree must lie in (0,1]");
  require(colsample_by_level > 0.0 && colsample_by_level <= 1.0, "colsample_by_level must lie in (0,1]");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be non-negative");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be non-negative");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be non-negative");
}

namespace {

json config_json(const GbdtConfig& c) {
  return json{{"n_trees", c.n_trees},
              {"max_depth", c.max_depth},
              {"min_child_weight", c.min_child_weight},
              {"learning_rate", c.learning_rate},
              {"subsample", c.subsample},
              {"colsample_by_tree", c.colsample_by_tree},
              {"colsample_by_level", c.colsample_by_level},
              {"gamma", c.gamma},
              {"alpha", c.alpha},
              {"lambda", c.lambda}};
}

GbdtConfig config_from(const json& j) {
  GbdtConfig c;
  c.n_trees = j.at("n_trees").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_child_weight = j.at("min_child_weight").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.subsample = j.at("subsample").get<double>();
  c.colsample_by_tree = j.at("colsample_by_tree").get<double>();
  c.colsample_by_level = j.at("colsample_by_level").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.validate();
  return c;
}

}  // namespace

std::string GbdtConfig::to_json() const { return config_json(*this).dump(); }

GbdtConfig GbdtConfig::from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid boosting configuration JSON: ") + e.what());
  }
}

GbdtConfig sample_gbdt_config(Rng& rng) {
  GbdtConfig c;
  c.n_trees = static_cast<int>(uniform_int(rng, 10, 500));
  c.max_depth = static_cast<int>(uniform_int(rng, 1, 7));
  c.min_child_weight = std::min(100.0, std::floor(log_uniform(rng, 1.0, 101.0)));
  c.learning_rate = uniform_real(rng, 1e-5, 0.7);
  c.subsample = uniform_real(rng, 0.5, 1.0);
  c.colsample_by_tree = uniform_real(rng, 0.5, 1.0);
  c.colsample_by_level = uniform_real(rng, 0.5, 1.0);
  c.gamma = log_uniform(rng, 1e-8, 7.0);
  c.alpha = log_uniform(rng, 1e-8, 100.0);
  c.lambda = log_uniform(rng, 1.0, 4.0);
  return c;
}

double RegTree::predict(std::span<const double> x) const {
  int id = 0;
  while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    id = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(id)].weight;
}

int RegTree::depth() const {
  std::function<int(int)> rec = [&](int id) -> int {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    return n.feature < 0 ? 0 : 1 + std::max(rec(n.left), rec(n.right));
  };
  return rec(0);
}

namespace {

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

double softplus(double m) { return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m)); }

// Soft-thresholding of a gradient sum by the L1 penalty.
double shrink(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

std::vector<std::size_t> sample_columns(Rng& rng, const std::vector<std::size_t>& pool, double fraction) {
  if (fraction >= 1.0) return pool;
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * static_cast<double>(pool.size()))));
  std::vector<std::size_t> out = pool;
  shuffle(std::span<std::size_t>(out), rng);
  out.resize(std::min(k, out.size()));
  std::sort(out.begin(), out.end());
  return out;
}

// One logistic ensemble for a 0/1 target.
class Booster {
 public:
  Booster(const Dataset& ds, std::vector<double> target, const GbdtConfig& cfg, std::uint64_t seed,
          const std::vector<std::vector<std::uint32_t>>& order)
      : ds_(ds), y_(std::move(target)), cfg_(cfg), rng_(seed), order_(order), margin_(y_.size()) {
    const double mean = std::accumulate(y_.begin(), y_.end(), 0.0) / static_cast<double>(y_.size());
    const double prior = std::clamp(mean, 1e-7, 1.0 - 1e-7);
    base_ = std::log(prior / (1.0 - prior));
    std::fill(margin_.begin(), margin_.end(), base_);
  }

  double base() const { return base_; }
  std::vector<RegTree>& trees() { return trees_; }

  double loss() const {
    double total = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) total += softplus(margin_[i]) - y_[i] * margin_[i];
    return total / static_cast<double>(y_.size());
  }

  void add_tree() {
    const std::size_t n = y_.size();
    std::vector<double> g(n);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin_[i]);
      g[i] = p - y_[i];
      h[i] = std::max(p * (1.0 - p), 1e-16);
    }
    std::vector<int> node_of(n, 0);
    if (cfg_.subsample < 1.0) {
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        node_of[i] = uniform01(rng_) < cfg_.subsample ? 0 : -1;
        any = any || node_of[i] == 0;
      }
      if (!any) node_of[uniform_index(rng_, n)] = 0;
    }
    std::vector<std::size_t> all(ds_.num_features());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto tree_cols = sample_columns(rng_, all, cfg_.colsample_by_tree);

    RegTree tree;
    std::vector<double> G{0.0};
    std::vector<double> H{0.0};
    for (std::size_t i = 0; i < n; ++i) {
      if (node_of[i] == 0) {
        G[0] += g[i];
        H[0] += h[i];
      }
    }
    tree.nodes.push_back(RegNode{.weight = leaf_weight(G[0], H[0])});
    std::vector<int> frontier{0};
    for (int level = 0; level < cfg_.max_depth && !frontier.empty(); ++level) {
      const auto cols = sample_columns(rng_, tree_cols, cfg_.colsample_by_level);
      std::vector<int> slot(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) slot[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

      struct Best {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
      };
      std::vector<Best> best(frontier.size());
      std::vector<double> gl(frontier.size());
      std::vector<double> hl(frontier.size());
      std::vector<double> last(frontier.size());
      std::vector<char> seen(frontier.size());
      for (std::size_t f : cols) {
        std::fill(gl.begin(), gl.end(), 0.0);
        std::fill(hl.begin(), hl.end(), 0.0);
        std::fill(seen.begin(), seen.end(), 0);
        for (std::uint32_t i : order_[f]) {
          const int node = node_of[i];
          if (node < 0 || slot[static_cast<std::size_t>(node)] < 0) continue;
          const auto s = static_cast<std::size_t>(slot[static_cast<std::size_t>(node)]);
          const double v = ds_.value(i, f);
          if (seen[s] && v != last[s]) {
            const double Gt = G[static_cast<std::size_t>(node)];
            const double Ht = H[static_cast<std::size_t>(node)];
            const double gr = Gt - gl[s];
            const double hr = Ht - hl[s];
            if (hl[s] >= cfg_.min_child_weight && hr >= cfg_.min_child_weight) {
              const double gain = 0.5 * (score(gl[s], hl[s]) + score(gr, hr) - score(Gt, Ht)) - cfg_.gamma;
              if (gain > best[s].gain) best[s] = Best{gain, static_cast<int>(f), split_threshold(last[s], v)};
            }
          }
          gl[s] += g[i];
          hl[s] += h[i];
          last[s] = v;
          seen[s] = 1;
        }
      }

      std::vector<int> next;
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (best[s].feature < 0) continue;
        const int id = frontier[s];
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(RegNode{});
        tree.nodes.push_back(RegNode{});
        G.resize(tree.nodes.size(), 0.0);
        H.resize(tree.nodes.size(), 0.0);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.left = left;
        node.right = left + 1;
        next.push_back(left);
        next.push_back(left + 1);
      }
      if (next.empty()) break;
      for (std::size_t i = 0; i < n; ++i) {
        const int id = node_of[i];
        if (id < 0) continue;
        const auto& node = tree.nodes[static_cast<std::size_t>(id)];
        if (node.feature < 0 || slot[static_cast<std::size_t>(id)] < 0) continue;
        const int child = ds_.value(i, static_cast<std::size_t>(node.feature)) < node.threshold ? node.left : node.right;
        node_of[i] = child;
        G[static_cast<std::size_t>(child)] += g[i];
        H[static_cast<std::size_t>(child)] += h[i];
      }
      for (int id : next) {
        tree.nodes[static_cast<std::size_t>(id)].weight =
            leaf_weight(G[static_cast<std::size_t>(id)], H[static_cast<std::size_t>(id)]);
      }
      frontier = std::move(next);
    }
    for (auto& node : tree.nodes) {
      if (node.feature < 0) {
        node.weight *= cfg_.learning_rate;
      } else {
        node.weight = 0.0;
      }
    }
    for (std::size_t i = 0; i < n; ++i) margin_[i] += tree.predict(ds_.row(i));
    trees_.push_back(std::move(tree));
  }

 private:
  double leaf_weight(double g, double h) const { return -shrink(g, cfg_.alpha) / (h + cfg_.lambda); }
  double score(double g, double h) const {
    const double t = shrink(g, cfg_.alpha);
    return t * t / (h + cfg_.lambda);
  }

  const Dataset& ds_;
  std::vector<double> y_;
  GbdtConfig cfg_;
  Rng rng_;
  const std::vector<std::vector<std::uint32_t>>& order_;
  std::vector<double> margin_;
  double base_ = 0.0;
  std::vector<RegTree> trees_;
};

}  // namespace

GbdtModel gbdt_train(const Dataset& data, const GbdtConfig& cfg, std::uint64_t seed, std::vector<double>* loss_trace) {
  cfg.validate();
  const std::size_t n = data.num_samples();
  const std::size_t p = data.num_features();
  std::vector<std::vector<std::uint32_t>> order(p);
  for (std::size_t f = 0; f < p; ++f) {
    order[f].resize(n);
    std::iota(order[f].begin(), order[f].end(), 0U);
    std::stable_sort(order[f].begin(), order[f].end(),
                     [&](std::uint32_t a, std::uint32_t b) { return data.value(a, f) < data.value(b, f); });
  }

  const int k = data.num_classes();
  const int ensembles = k == 2 ? 1 : k;
  std::vector<Booster> boosters;
  boosters.reserve(static_cast<std::size_t>(ensembles));
  for (int e = 0; e < ensembles; ++e) {
    const int positive = k == 2 ? 1 : e;
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = data.label(i) == positive ? 1.0 : 0.0;
    boosters.emplace_back(data, std::move(target), cfg, k == 2 ? seed : derive_seed(seed, static_cast<std::uint64_t>(e)),
                          order);
  }
  auto total_loss = [&] {
    double sum = 0.0;
    for (const auto& b : boosters) sum += b.loss();
    return sum;
  };
  if (loss_trace) {
    loss_trace->clear();
    loss_trace->push_back(total_loss());
  }
  for (int t = 0; t < cfg.n_trees; ++t) {
    for (auto& b : boosters) b.add_tree();
    if (loss_trace) loss_trace->push_back(total_loss());
  }

  GbdtModel model;
  model.num_classes = k;
  model.config = cfg;
  for (auto& b : boosters) {
    model.base_score.push_back(b.base());
    model.trees.push_back(std::move(b.trees()));
  }
  return model;
}

std::vector<double> GbdtModel::predict_proba(std::span<const double> x) const {
  std::vector<double> out;
  out.reserve(trees.size());
  for (std::size_t e = 0; e < trees.size(); ++e) {
    double m = base_score[e];
    for (const auto& t : trees[e]) m += t.predict(x);
    out.push_back(sigmoid(m));
  }
  return out;
}

int GbdtModel::predict(std::span<const double> x) const {
  const auto p = predict_proba(x);
  if (num_classes == 2) return p.front() > 0.5 ? 1 : 0;
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double GbdtModel::accuracy(const Dataset& ds) const {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    if (predict(ds.row(i)) == ds.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.num_samples());
}

std::string GbdtModel::to_json() const {
  json ensembles = json::array();
  for (std::size_t e = 0; e < trees.size(); ++e) {
    json list = json::array();
    for (const auto& t : trees[e]) {
      json nodes = json::array();
      for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.weight}));
      list.push_back(std::move(nodes));
    }
    ensembles.push_back(json{{"base_score", base_score[e]}, {"trees", std::move(list)}});
  }
  return json{{"num_classes", num_classes}, {"config", config_json(config)}, {"ensembles", std::move(ensembles)}}
      .dump();
}

GbdtModel GbdtModel::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    GbdtModel m;
    m.num_classes = j.at("num_classes").get<int>();
    m.config = config_from(j.at("config"));
    for (const auto& e : j.at("ensembles")) {
      m.base_score.push_back(e.at("base_score").get<double>());
      std::vector<RegTree> list;
      for (const auto& t : e.at("trees")) {
        RegTree tree;
        for (const auto& n : t) {
          tree.nodes.push_back(RegNode{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                       n.at(4).get<double>()});
        }
        const auto size = static_cast<int>(tree.nodes.size());
        for (const auto& n : tree.nodes) {
          if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
            throw ParseError("regression tree child index out of range");
          }
        }
        if (tree.nodes.empty()) throw ParseError("empty regression tree");
        list.push_back(std::move(tree));
      }
      m.trees.push_back(std::move(list));
    }
    const std::size_t expected = m.num_classes == 2 ? 1 : static_cast<std::size_t>(m.num_classes);
    if (m.trees.size() != expected) throw ParseError("ensemble count does not match num_classes");
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid boosting model JSON: ") + e.what());
  }
}

}  // namespace minleaf
