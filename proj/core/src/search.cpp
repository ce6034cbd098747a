#include "minleaf/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "minleaf/cart.hpp"
#include "minleaf/error.hpp"

namespace minleaf {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::direct: return "direct";
    case Strategy::warmstarted: return "warmstarted";
    case Strategy::gradual: return "gradual";
  }
  return "direct";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "direct") return Strategy::direct;
  if (text == "warmstarted" || text == "warmstart") return Strategy::warmstarted;
  if (text == "gradual") return Strategy::gradual;
  throw ModelError("unknown strategy '" + std::string(text) + "'");
}

void SearchConfig::validate() const {
  if (depth < 1) throw ModelError("search depth must be at least 1");
  if (n_min < 1) throw ModelError("N_min must be at least 1");
  if (!(time_budget > 0.0)) throw ModelError("time budget must be positive");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

struct Timeout {};

// Objective arithmetic shared by the oracle and the search.
struct Scoring {
  std::size_t n_min;
  bool min_objective;

  double identity() const { return min_objective ? kInf : 0.0; }
  double leaf(std::size_t correct, std::size_t count) const {
    if (count == 0) return identity();
    if (count < n_min) return -kInf;
    return min_objective ? static_cast<double>(correct) / static_cast<double>(count) : static_cast<double>(correct);
  }
  double combine(double a, double b) const { return min_objective ? std::min(a, b) : a + b; }
  double natural_max(std::size_t count) const { return min_objective ? 1.0 : static_cast<double>(count); }
};

// Majority class with ties to the lowest index.
std::pair<int, std::size_t> majority(const std::vector<std::size_t>& counts) {
  int best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return {best, counts[static_cast<std::size_t>(best)]};
}

}  // namespace

std::vector<std::vector<double>> candidate_splits(const Dataset& train) {
  std::vector<std::vector<double>> out(train.num_features());
  std::vector<double> values(train.num_samples());
  for (std::size_t j = 0; j < train.num_features(); ++j) {
    for (std::size_t i = 0; i < train.num_samples(); ++i) values[i] = train.value(i, j);
    std::sort(values.begin(), values.end());
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (values[i] != values[i - 1]) out[j].push_back(split_threshold(values[i - 1], values[i]));
    }
  }
  return out;
}

double tree_objective(const ShallowTree& tree, const Dataset& train, std::size_t n_min, Objective objective) {
  const Scoring score{n_min, objective == Objective::leaf_accuracy};
  const LeafStats stats = leaf_accuracy(tree, train);
  double value = score.identity();
  for (const auto& leaf : stats.leaves) value = score.combine(value, score.leaf(leaf.correct, leaf.count));
  return value;
}

double brute_force_tree_count(std::size_t candidates, int depth) {
  double count = 1.0;
  for (int k = 1; k <= depth; ++k) count = 1.0 + static_cast<double>(candidates) * count * count;
  return count;
}

SearchResult brute_force_optimal(const Dataset& train, const SearchConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  const auto cands = candidate_splits(train);
  std::size_t total = 0;
  for (const auto& c : cands) total += c.size();
  const double trees = brute_force_tree_count(total, cfg.depth);
  if (trees > kBruteForceCap) {
    throw ModelError("brute force would enumerate " + std::to_string(trees) + " trees, above the cap");
  }
  const Scoring score{cfg.n_min, cfg.objective == Objective::leaf_accuracy};
  const auto k = static_cast<std::size_t>(train.num_classes());
  std::size_t visited = 0;

  struct Best {
    double value;
    ShallowTree tree;
  };
  std::function<Best(const std::vector<std::size_t>&, int)> best = [&](const std::vector<std::size_t>& rows,
                                                                        int depth) -> Best {
    ++visited;
    if (rows.empty()) return {score.identity(), ShallowTree::leaf(0)};
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(train.label(r))];
    const auto [label, correct] = majority(counts);
    Best out{score.leaf(correct, rows.size()), ShallowTree::leaf(label)};
    if (depth == 0) return out;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t f = 0; f < cands.size(); ++f) {
      for (double threshold : cands[f]) {
        left.clear();
        right.clear();
        for (std::size_t r : rows) (train.value(r, f) < threshold ? left : right).push_back(r);
        const Best l = best(left, depth - 1);
        const Best rr = best(right, depth - 1);
        const double v = score.combine(l.value, rr.value);
        if (v > out.value) out = {v, ShallowTree::branch(static_cast<int>(f), threshold, l.tree, rr.tree)};
      }
    }
    return out;
  };

  std::vector<std::size_t> rows(train.num_samples());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Best b = best(rows, cfg.depth);
  SearchResult result;
  result.tree = std::move(b.tree);
  result.objective_value = b.value;
  result.best_bound = b.value;
  result.proven_optimal = true;
  result.nodes_explored = visited;
  result.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  result.initial_value = b.value;
  return result;
}

namespace {

// Rows of a subset, kept sorted by every feature.
struct Subset {
  std::vector<std::vector<std::uint32_t>> by_feature;
  std::size_t size() const { return by_feature.front().size(); }
};

struct Found {
  double value;
  ShallowTree tree;
};

struct MemoKey {
  std::vector<std::uint64_t> bits;
  int depth;
  bool operator==(const MemoKey&) const = default;
};

struct MemoHash {
  std::size_t operator()(const MemoKey& k) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(k.depth);
    for (std::uint64_t w : k.bits) {
      h ^= w + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      h *= 0xBF58476D1CE4E5B9ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

struct MemoEntry {
  double achieved = -kInf;
  std::optional<ShallowTree> tree;
  double upper = kInf;  // no tree on this subset scores above this
};

// Cap on memo storage, in 64-bit words of subset keys.
constexpr std::size_t kMemoWordLimit = std::size_t{1} << 24;

class Searcher {
 public:
  Searcher(const Dataset& train, const Scoring& score, Clock::time_point deadline, std::size_t node_limit)
      : node_limit_(node_limit),
        ds_(train),
        score_(score),
        k_(static_cast<std::size_t>(train.num_classes())),
        deadline_(deadline),
        side_(train.num_samples(), 0) {}

  std::function<void(double, const ShallowTree&)> on_improve;
  std::size_t nodes() const { return nodes_; }

  std::optional<Found> run(int depth, double lb) {
    const std::size_t p = ds_.num_features();
    buffers_.assign(static_cast<std::size_t>(depth) + 2, {});
    for (auto& [l, r] : buffers_) {
      l.by_feature.resize(p);
      r.by_feature.resize(p);
    }
    Subset root;
    root.by_feature.resize(p);
    for (std::size_t f = 0; f < p; ++f) {
      auto& list = root.by_feature[f];
      list.resize(ds_.num_samples());
      std::iota(list.begin(), list.end(), 0U);
      std::stable_sort(list.begin(), list.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return ds_.value(a, f) < ds_.value(b, f); });
    }
    return search(root, 0, depth, lb, score_.natural_max(ds_.num_samples()));
  }

 private:
  void tick() {
    if (node_limit_ && nodes_ >= node_limit_) throw Timeout{};
    if (ticks_++ % 256 == 0 && Clock::now() >= deadline_) throw Timeout{};
  }

  std::vector<std::size_t> class_counts(const Subset& s) const {
    std::vector<std::size_t> counts(k_, 0);
    for (std::uint32_t r : s.by_feature.front()) ++counts[static_cast<std::size_t>(ds_.label(r))];
    return counts;
  }

  void notify(int level, double value, const ShallowTree& tree) {
    if (level == 0 && on_improve) on_improve(value, tree);
  }

  // Best tree of depth <= 1 scoring above lb; stops once ub is reached.
  std::optional<Found> sweep(const Subset& s, int level, double lb, double ub) {
    const std::size_t m = s.size();
    const auto total = class_counts(s);
    const auto [leaf_label, leaf_correct] = majority(total);
    std::optional<Found> best;
    const double leaf_value = score_.leaf(leaf_correct, m);
    if (leaf_value > lb) {
      best = Found{leaf_value, ShallowTree::leaf(leaf_label)};
      lb = leaf_value;
      notify(level, lb, best->tree);
      if (lb >= ub) return best;
    }
    if (m < 2 * score_.n_min) return best;

    std::vector<std::size_t> left(k_);
    std::vector<std::size_t> right(k_);
    bool found_split = false;
    std::size_t best_f = 0;
    std::size_t best_idx = 0;
    int best_l = 0;
    int best_r = 0;
    for (std::size_t f = 0; f < s.by_feature.size() && lb < ub; ++f) {
      const auto& list = s.by_feature[f];
      std::fill(left.begin(), left.end(), 0);
      right = total;
      for (std::size_t idx = 0; idx + 1 < m; ++idx) {
        const auto y = static_cast<std::size_t>(ds_.label(list[idx]));
        ++left[y];
        --right[y];
        const std::size_t nl = idx + 1;
        if (nl < score_.n_min) continue;
        if (m - nl < score_.n_min) break;
        if (ds_.value(list[idx], f) == ds_.value(list[idx + 1], f)) continue;
        const auto [cl, ml] = majority(left);
        const auto [cr, mr] = majority(right);
        const double v = score_.combine(score_.leaf(ml, nl), score_.leaf(mr, m - nl));
        if (v > lb) {
          lb = v;
          found_split = true;
          best_f = f;
          best_idx = idx;
          best_l = cl;
          best_r = cr;
          if (lb >= ub) break;
        }
      }
    }
    if (found_split) {
      const auto& list = s.by_feature[best_f];
      const double threshold =
          split_threshold(ds_.value(list[best_idx], best_f), ds_.value(list[best_idx + 1], best_f));
      best = Found{lb, ShallowTree::branch(static_cast<int>(best_f), threshold, ShallowTree::leaf(best_l),
                                           ShallowTree::leaf(best_r))};
      notify(level, lb, best->tree);
    }
    return best;
  }

  struct Candidate {
    double impurity;
    std::size_t feature;
    std::size_t index;  // last position (in that feature's order) going left
  };

  // Feasible splits ordered by increasing weighted Gini impurity of the children.
  std::vector<Candidate> candidates(const Subset& s) const {
    const std::size_t m = s.size();
    const auto total = class_counts(s);
    std::vector<Candidate> out;
    std::vector<std::size_t> left(k_);
    for (std::size_t f = 0; f < s.by_feature.size(); ++f) {
      const auto& list = s.by_feature[f];
      std::fill(left.begin(), left.end(), 0);
      for (std::size_t idx = 0; idx + 1 < m; ++idx) {
        ++left[static_cast<std::size_t>(ds_.label(list[idx]))];
        const std::size_t nl = idx + 1;
        if (nl < score_.n_min) continue;
        if (m - nl < score_.n_min) break;
        if (ds_.value(list[idx], f) == ds_.value(list[idx + 1], f)) continue;
        double sl = 0.0;
        double sr = 0.0;
        for (std::size_t k = 0; k < k_; ++k) {
          const double a = static_cast<double>(left[k]);
          const double b = static_cast<double>(total[k] - left[k]);
          sl += a * a;
          sr += b * b;
        }
        const double impurity = static_cast<double>(m) - sl / static_cast<double>(nl) - sr / static_cast<double>(m - nl);
        out.push_back({impurity, f, idx});
      }
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.impurity < b.impurity; });
    return out;
  }

  void partition(const Subset& s, const Candidate& c, Subset& left, Subset& right) {
    const auto& list = s.by_feature[c.feature];
    for (std::size_t i = 0; i < list.size(); ++i) side_[list[i]] = i <= c.index ? 1 : 0;
    for (std::size_t f = 0; f < s.by_feature.size(); ++f) {
      auto& l = left.by_feature[f];
      auto& r = right.by_feature[f];
      l.clear();
      r.clear();
      for (std::uint32_t row : s.by_feature[f]) (side_[row] ? l : r).push_back(row);
    }
  }

  MemoKey key(const Subset& s, int depth) const {
    MemoKey k{std::vector<std::uint64_t>((ds_.num_samples() + 63) / 64, 0), depth};
    for (std::uint32_t r : s.by_feature.front()) k.bits[r / 64] |= std::uint64_t{1} << (r % 64);
    return k;
  }

  // Best tree of depth <= `depth` on s scoring above lb: either optimal or >= ub.
  std::optional<Found> search(const Subset& s, int level, int depth, double lb, double ub) {
    tick();
    ++nodes_;
    const std::size_t m = s.size();
    ub = std::min(ub, score_.natural_max(m));
    if (lb >= ub) return std::nullopt;
    if (depth == 1) return sweep(s, level, lb, ub);

    std::optional<Found> best;
    std::optional<MemoKey> memo_key;
    if (level > 0) {
      memo_key = key(s, depth);
      if (const auto it = memo_.find(*memo_key); it != memo_.end()) {
        const MemoEntry& e = it->second;
        if (e.upper <= lb) return std::nullopt;
        if (e.achieved > lb && (e.achieved >= ub || e.achieved >= e.upper)) return Found{e.achieved, *e.tree};
        ub = std::min(ub, e.upper);
        if (e.achieved > lb) {
          best = Found{e.achieved, *e.tree};
        }
      }
    }
    const double lb_in = lb;
    const double ub_in = ub;
    if (best) lb = best->value;

    const auto total = class_counts(s);
    const auto [leaf_label, leaf_correct] = majority(total);
    const double leaf_value = score_.leaf(leaf_correct, m);
    if (leaf_value > lb) {
      best = Found{leaf_value, ShallowTree::leaf(leaf_label)};
      lb = leaf_value;
      notify(level, lb, best->tree);
    }

    if (lb < ub && m >= 2 * score_.n_min) {
      auto& [left, right] = buffers_[static_cast<std::size_t>(level) + 1];
      for (const Candidate& c : candidates(s)) {
        if (lb >= ub) break;
        tick();
        partition(s, c, left, right);
        std::optional<Found> l;
        std::optional<Found> r;
        if (score_.min_objective) {
          l = search(left, level + 1, depth - 1, lb, ub);
          if (!l) continue;
          r = search(right, level + 1, depth - 1, lb, std::min(ub, l->value));
        } else {
          l = search(left, level + 1, depth - 1, lb - static_cast<double>(right.size()), static_cast<double>(left.size()));
          if (!l) continue;
          r = search(right, level + 1, depth - 1, lb - l->value, ub - l->value);
        }
        if (!r) continue;
        const double v = score_.combine(l->value, r->value);
        if (v <= lb) continue;
        const auto& list = s.by_feature[c.feature];
        const double threshold =
            split_threshold(ds_.value(list[c.index], c.feature), ds_.value(list[c.index + 1], c.feature));
        best = Found{v, ShallowTree::branch(static_cast<int>(c.feature), threshold, l->tree, r->tree)};
        lb = v;
        notify(level, lb, best->tree);
      }
    }

    if (memo_key && memo_words_ < kMemoWordLimit) {
      auto [it, fresh] = memo_.try_emplace(std::move(*memo_key));
      if (fresh) memo_words_ += it->first.bits.size() + 4;
      MemoEntry& e = it->second;
      if (!best || best->value <= lb_in) {
        e.upper = std::min(e.upper, lb_in);
      } else {
        if (best->value > e.achieved) {
          e.achieved = best->value;
          e.tree = best->tree;
        }
        if (best->value < ub_in) e.upper = std::min(e.upper, best->value);
      }
    }
    if (best && best->value > lb_in) return best;
    return std::nullopt;
  }

  std::size_t node_limit_;
  const Dataset& ds_;
  Scoring score_;
  std::size_t k_;
  Clock::time_point deadline_;
  std::vector<std::uint8_t> side_;
  std::vector<std::pair<Subset, Subset>> buffers_;
  std::unordered_map<MemoKey, MemoEntry, MemoHash> memo_;
  std::size_t memo_words_ = 0;
  std::size_t nodes_ = 0;
  std::size_t ticks_ = 0;
};

}  // namespace

SearchResult solve(const Dataset& train, const SearchConfig& cfg, const std::optional<ShallowTree>& warmstart) {
  cfg.validate();
  const auto start = Clock::now();
  const std::size_t n = train.num_samples();
  if (n < cfg.n_min) {
    throw ModelError("training set has " + std::to_string(n) + " samples, fewer than N_min = " +
                     std::to_string(cfg.n_min));
  }
  const Scoring score{cfg.n_min, cfg.objective == Objective::leaf_accuracy};
  const double top = score.natural_max(n);
  auto seconds = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  // Starting points: the majority leaf, and a supplied or CART warmstart.
  const auto [leaf_label, leaf_correct] = majority(train.class_counts());
  Found leaf{score.leaf(leaf_correct, n), ShallowTree::leaf(leaf_label)};
  std::optional<Found> seed;
  if (warmstart) {
    if (warmstart->depth() > cfg.depth) throw ModelError("warmstart tree is deeper than the search depth");
    seed = Found{tree_objective(*warmstart, train, cfg.n_min, cfg.objective), *warmstart};
  } else if (cfg.strategy == Strategy::warmstarted) {
    CartConfig cart;
    cart.max_depth = cfg.depth;
    cart.min_samples_leaf = static_cast<int>(cfg.n_min);
    const ShallowTree t = cart_train(train, cart);
    seed = Found{tree_objective(t, train, cfg.n_min, cfg.objective), t};
  }

  SearchResult result;
  Found incumbent = leaf;
  if (seed && seed->value >= leaf.value) incumbent = *seed;
  result.initial_value = incumbent.value;
  result.trace.push_back({seconds(), incumbent.value, top});

  std::vector<int> stages;
  if (cfg.strategy == Strategy::gradual) {
    for (int d = 1; d <= cfg.depth; ++d) stages.push_back(d);
  } else {
    stages.push_back(cfg.depth);
  }
  const double share_total = std::ldexp(1.0, static_cast<int>(stages.size())) - 1.0;
  double share = 0.0;
  bool complete = false;
  std::optional<Found> previous;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const int depth = stages[k];
    share += std::ldexp(1.0, static_cast<int>(k));
    const auto budget = std::chrono::duration<double>(cfg.time_budget * share / share_total);
    const auto deadline = start + std::chrono::duration_cast<Clock::duration>(budget);

    // Each stage starts from the previous stage's result or any fitting warmstart.
    Found stage_start = leaf;
    if (previous && previous->value >= stage_start.value) stage_start = *previous;
    if (seed && seed->tree.depth() <= depth && seed->value >= stage_start.value) stage_start = *seed;

    const std::size_t node_budget = cfg.node_limit ? cfg.node_limit - std::min(cfg.node_limit, result.nodes_explored) : 0;
    complete = false;
    if (cfg.node_limit && node_budget == 0) break;
    Searcher searcher(train, score, deadline, node_budget);
    searcher.on_improve = [&](double value, const ShallowTree& tree) {
      if (value <= stage_start.value) return;
      stage_start = Found{value, tree};
      if (value > incumbent.value) {
        incumbent = stage_start;
        ++result.incumbent_updates;
        result.trace.push_back({seconds(), incumbent.value, top});
      }
    };
    try {
      searcher.run(depth, stage_start.value);
      complete = true;
    } catch (const Timeout&) {
    }
    result.nodes_explored += searcher.nodes();
    if (stage_start.value > incumbent.value) incumbent = stage_start;
    previous = stage_start;
  }

  result.tree = incumbent.tree;
  result.objective_value = incumbent.value;
  result.proven_optimal = complete;
  result.best_bound = complete ? incumbent.value : top;
  result.elapsed = seconds();
  result.trace.push_back({result.elapsed, result.objective_value, result.best_bound});
  return result;
}

}  // namespace minleaf
