#include "minleaf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "minleaf/error.hpp"

namespace minleaf {

using json = nlohmann::json;

ShallowTree ShallowTree::leaf(int label) {
  ShallowTree t;
  t.nodes_.push_back(TreeNode{.label = label});
  return t;
}

ShallowTree ShallowTree::branch(int feature, double threshold, const ShallowTree& left, const ShallowTree& right) {
  ShallowTree t;
  t.nodes_.reserve(1 + left.size() + right.size());
  t.nodes_.push_back(TreeNode{.feature = feature, .threshold = threshold});
  auto append = [&t](const ShallowTree& sub) {
    const auto offset = static_cast<NodeId>(t.nodes_.size());
    for (TreeNode n : sub.nodes_) {
      if (!n.is_leaf()) {
        n.left += offset;
        n.right += offset;
      }
      t.nodes_.push_back(n);
    }
    return offset;
  };
  t.nodes_[0].left = append(left);
  t.nodes_[0].right = append(right);
  return t;
}

int ShallowTree::depth() const {
  std::function<int(NodeId)> rec = [&](NodeId id) -> int {
    const auto& n = node(id);
    return n.is_leaf() ? 0 : 1 + std::max(rec(n.left), rec(n.right));
  };
  return rec(root());
}

std::size_t ShallowTree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<NodeId> ShallowTree::leaf_ids() const {
  std::vector<NodeId> out;
  std::function<void(NodeId)> rec = [&](NodeId id) {
    const auto& n = node(id);
    if (n.is_leaf()) {
      out.push_back(id);
    } else {
      rec(n.left);
      rec(n.right);
    }
  };
  rec(root());
  return out;
}

ShallowTree ShallowTree::subtree(NodeId id) const {
  const auto& n = node(id);
  if (n.is_leaf()) return leaf(n.label);
  return branch(n.feature, n.threshold, subtree(n.left), subtree(n.right));
}

NodeId ShallowTree::route(std::span<const double> x) const {
  NodeId id = root();
  while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    id = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return id;
}

namespace {

json node_to_json(const ShallowTree& t, NodeId id) {
  const auto& n = t.node(id);
  if (n.is_leaf()) return json{{"leaf", {{"class", n.label}}}};
  return json{{"branch",
               {{"feature", n.feature},
                {"threshold", n.threshold},
                {"left", node_to_json(t, n.left)},
                {"right", node_to_json(t, n.right)}}}};
}

ShallowTree node_from_json(const json& j) {
  if (j.contains("leaf")) return ShallowTree::leaf(j.at("leaf").at("class").get<int>());
  if (j.contains("branch")) {
    const auto& b = j.at("branch");
    const int feature = b.at("feature").get<int>();
    if (feature < 0) throw ParseError("negative feature index in tree JSON");
    return ShallowTree::branch(feature, b.at("threshold").get<double>(), node_from_json(b.at("left")),
                               node_from_json(b.at("right")));
  }
  throw ParseError("tree JSON node must be {\"leaf\":...} or {\"branch\":...}");
}

}  // namespace

std::string ShallowTree::to_json() const { return node_to_json(*this, root()).dump(); }

ShallowTree ShallowTree::from_json(const std::string& text) {
  try {
    return node_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid tree JSON: ") + e.what());
  }
}

double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid > lo ? mid : hi;
}

TreeTopology TreeTopology::complete(int depth) {
  if (depth < 1) throw ModelError("tree topology depth must be at least 1");
  TreeTopology topo;
  topo.depth = depth;
  topo.num_leaves = std::size_t{1} << depth;
  topo.num_branches = topo.num_leaves - 1;
  topo.left_ancestors.resize(topo.num_leaves);
  topo.right_ancestors.resize(topo.num_leaves);
  for (std::size_t t = 0; t < topo.num_leaves; ++t) {
    // Heap index of the leaf is num_branches + t; walk up to the root.
    std::size_t h = topo.num_branches + t;
    while (h > 0) {
      const std::size_t parent = (h - 1) / 2;
      if (h == 2 * parent + 1) {
        topo.left_ancestors[t].push_back(parent);
      } else {
        topo.right_ancestors[t].push_back(parent);
      }
      h = parent;
    }
    std::reverse(topo.left_ancestors[t].begin(), topo.left_ancestors[t].end());
    std::reverse(topo.right_ancestors[t].begin(), topo.right_ancestors[t].end());
  }
  return topo;
}

const LeafStat* LeafStats::find(NodeId leaf) const {
  for (const auto& s : leaves) {
    if (s.leaf == leaf) return &s;
  }
  return nullptr;
}

LeafStats leaf_accuracy(const ShallowTree& tree, const Dataset& ds) {
  LeafStats stats;
  std::vector<std::size_t> slot(tree.size(), 0);
  for (NodeId id : tree.leaf_ids()) {
    slot[static_cast<std::size_t>(id)] = stats.leaves.size();
    stats.leaves.push_back(LeafStat{.leaf = id});
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    const NodeId id = tree.route(ds.row(i));
    auto& s = stats.leaves[slot[static_cast<std::size_t>(id)]];
    ++s.count;
    if (tree.node(id).label == ds.label(i)) {
      ++s.correct;
      ++correct;
    }
  }
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& s : stats.leaves) {
    if (s.count > 0) worst = std::min(worst, s.accuracy());
  }
  stats.leaf_accuracy = std::isfinite(worst) ? worst : 0.0;
  stats.model_accuracy = ds.num_samples() ? static_cast<double>(correct) / static_cast<double>(ds.num_samples()) : 0.0;
  return stats;
}

double model_accuracy(const ShallowTree& tree, const Dataset& ds) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    if (tree.predict(ds.row(i)) == ds.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.num_samples());
}

namespace {

// Returns nullopt when the subtree receives no samples.
std::optional<ShallowTree> reduce_node(const ShallowTree& tree, NodeId id, const Dataset& train,
                                       const std::vector<std::size_t>& rows) {
  if (rows.empty()) return std::nullopt;
  const auto& n = tree.node(id);
  if (n.is_leaf()) return ShallowTree::leaf(n.label);
  std::vector<std::size_t> left_rows;
  std::vector<std::size_t> right_rows;
  for (std::size_t r : rows) {
    (train.value(r, static_cast<std::size_t>(n.feature)) < n.threshold ? left_rows : right_rows).push_back(r);
  }
  auto left = reduce_node(tree, n.left, train, left_rows);
  auto right = reduce_node(tree, n.right, train, right_rows);
  if (!left) return right;
  if (!right) return left;
  const auto& l = left->node(0);
  const auto& r = right->node(0);
  if (l.is_leaf() && r.is_leaf() && l.label == r.label) return ShallowTree::leaf(l.label);
  return ShallowTree::branch(n.feature, n.threshold, *left, *right);
}

}  // namespace

ShallowTree reduce_tree(const ShallowTree& tree, const Dataset& train) {
  std::vector<std::size_t> rows(train.num_samples());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return *reduce_node(tree, tree.root(), train, rows);
}

namespace {

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::string export_dot(const ShallowTree& tree, const Dataset& train_schema, const LeafStats& train_stats,
                       const LeafStats* test_stats) {
  std::ostringstream out;
  out << "digraph tree {\n";
  out << "  node [shape=box, style=rounded, fontname=\"Helvetica\"];\n";
  out << "  edge [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    const auto& n = tree.node(id);
    if (!n.is_leaf()) {
      out << "  n" << i << " [label=<" << html_escape(train_schema.feature_name(static_cast<std::size_t>(n.feature)))
          << ">];\n";
      continue;
    }
    out << "  n" << i << " [label=<" << html_escape(train_schema.class_name(n.label));
    if (test_stats) {
      if (const auto* s = test_stats->find(id); s && s->count > 0) {
        out << "<br/><b>" << format("%.1f%%", 100.0 * s->accuracy()) << "</b>";
      } else {
        out << "<br/><b>-</b>";
      }
    }
    if (const auto* s = train_stats.find(id); s && s->count > 0) {
      out << "<br/>train " << format("%.1f%%", 100.0 * s->accuracy()) << " (n=" << s->count << ")";
    }
    out << ">, shape=ellipse];\n";
  }
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(static_cast<NodeId>(i));
    if (n.is_leaf()) continue;
    const std::string b = format("%.4f", n.threshold);
    out << "  n" << i << " -> n" << n.left << " [label=\"< " << b << "\"];\n";
    out << "  n" << i << " -> n" << n.right << " [label=\"≥ " << b << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace minleaf
