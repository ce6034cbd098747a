#include "minleaf/mio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "minleaf/error.hpp"

namespace minleaf {

std::string_view to_string(Objective objective) {
  return objective == Objective::leaf_accuracy ? "leaf_accuracy" : "misclassification";
}

Objective parse_objective(std::string_view text) {
  if (text == "leaf_accuracy" || text == "leaf-accuracy") return Objective::leaf_accuracy;
  if (text == "misclassification" || text == "oct") return Objective::misclassification;
  throw ModelError("unknown objective '" + std::string(text) + "'");
}

bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0;
  std::size_t j = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      std::size_t ie = i;
      std::size_t je = j;
      while (ie < a.size() && is_digit(a[ie])) ++ie;
      while (je < b.size() && is_digit(b[je])) ++je;
      // Strip leading zeros, then compare by length and lexicographically.
      std::size_t is = i;
      std::size_t js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      const auto da = a.substr(is, ie - is);
      const auto db = b.substr(js, je - js);
      if (da.size() != db.size()) return da.size() < db.size();
      if (da != db) return da < db;
      i = ie;
      j = je;
      continue;
    }
    if (a[i] != b[j]) return a[i] < b[j];
    ++i;
    ++j;
  }
  if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
  return a < b;
}

std::size_t MioModel::add_variable(std::string name, VarKind kind, double lower, double upper) {
  if (by_name_.contains(name)) throw ModelError("duplicate variable '" + name + "'");
  if (kind == VarKind::binary && (lower != 0.0 || upper != 1.0)) {
    throw ModelError("binary variable '" + name + "' must have bounds [0,1]");
  }
  const std::size_t index = variables_.size();
  by_name_.emplace(name, index);
  variables_.push_back(MioVariable{std::move(name), kind, lower, upper});
  return index;
}

void MioModel::add_constraint(LinearConstraint constraint) {
  if (constraint_ids_.contains(constraint.id)) throw ModelError("duplicate constraint id '" + constraint.id + "'");
  std::vector<std::size_t> seen;
  seen.reserve(constraint.terms.size());
  for (const Term& t : constraint.terms) {
    if (t.var >= variables_.size()) throw ModelError("constraint '" + constraint.id + "' references unknown variable");
    if (!std::isfinite(t.coef)) throw ModelError("constraint '" + constraint.id + "' has a non-finite coefficient");
    seen.push_back(t.var);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw ModelError("constraint '" + constraint.id + "' repeats a variable");
  }
  if (!std::isfinite(constraint.rhs)) throw ModelError("constraint '" + constraint.id + "' has a non-finite rhs");
  constraint_ids_.emplace(constraint.id, constraints_.size());
  constraints_.push_back(std::move(constraint));
}

void MioModel::set_objective(std::vector<Term> terms) {
  for (const Term& t : terms) {
    if (t.var >= variables_.size()) throw ModelError("objective references unknown variable");
  }
  objective_ = std::move(terms);
}

std::optional<std::size_t> MioModel::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t MioModel::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ModelError("model has no variable '" + std::string(name) + "'");
}

namespace {

using NamedTerms = std::map<std::string, double>;

NamedTerms named(const MioModel& m, const std::vector<Term>& terms) {
  NamedTerms out;
  for (const Term& t : terms) out[m.variables()[t.var].name] = t.coef;
  return out;
}

}  // namespace

bool structurally_equal(const MioModel& a, const MioModel& b) {
  if (!(a.metadata == b.metadata)) return false;
  if (a.variables_.size() != b.variables_.size() || a.constraints_.size() != b.constraints_.size()) return false;
  for (const auto& v : a.variables_) {
    const auto j = b.find(v.name);
    if (!j || !(b.variables_[*j] == v)) return false;
  }
  if (named(a, a.objective_) != named(b, b.objective_)) return false;
  for (const auto& c : a.constraints_) {
    const auto it = b.constraint_ids_.find(c.id);
    if (it == b.constraint_ids_.end()) return false;
    const auto& d = b.constraints_[it->second];
    if (c.sense != d.sense || c.rhs != d.rhs || named(a, c.terms) != named(b, d.terms)) return false;
  }
  return true;
}

namespace mio_names {
std::string z(std::size_t i, std::size_t t) { return "z_" + std::to_string(i) + "_" + std::to_string(t); }
std::string s(std::size_t i, std::size_t t) { return "s_" + std::to_string(i) + "_" + std::to_string(t); }
std::string S(std::size_t i, std::size_t t) { return "S_" + std::to_string(i) + "_" + std::to_string(t); }
std::string r(std::size_t t) { return "r_" + std::to_string(t); }
std::string l(std::size_t t) { return "l_" + std::to_string(t); }
std::string c(int k, std::size_t t) { return "c_" + std::to_string(k) + "_" + std::to_string(t); }
std::string a(std::size_t j, std::size_t m) { return "a_" + std::to_string(j) + "_" + std::to_string(m); }
std::string b(std::size_t m) { return "b_" + std::to_string(m); }
}  // namespace mio_names

namespace {

std::string id(std::string_view prefix, std::initializer_list<std::size_t> indices) {
  std::string out(prefix);
  for (std::size_t i : indices) {
    out.push_back('_');
    out += std::to_string(i);
  }
  return out;
}

}  // namespace

MioModel build_mio(const Dataset& train, const EpsilonVector& eps, int depth, std::size_t n_min, Objective objective) {
  namespace nm = mio_names;
  if (depth < 1) throw ModelError("model depth must be at least 1");
  const std::size_t n = train.num_samples();
  const std::size_t p = train.num_features();
  const int k_classes = train.num_classes();
  if (n_min < 1) throw ModelError("N_min must be at least 1");
  if (n_min > n) {
    throw ModelError("N_min = " + std::to_string(n_min) + " exceeds the number of samples (" + std::to_string(n) +
                     "); the model would be infeasible");
  }
  if (eps.eps.size() != p) throw ModelError("epsilon vector length does not match the number of features");

  const TreeTopology topo = TreeTopology::complete(depth);
  const std::size_t leaves = topo.num_leaves;
  const std::size_t branches = topo.num_branches;
  const bool accuracy = objective == Objective::leaf_accuracy;

  MioModel model;
  model.metadata = MioMetadata{n, p, k_classes, depth, n_min, objective};

  // Variable index tables.
  std::vector<std::size_t> z(n * leaves), s_acc, S(n * leaves), r, l(leaves);
  std::vector<std::size_t> c(static_cast<std::size_t>(k_classes) * leaves), a(p * branches), b(branches);
  std::size_t q = 0;
  if (accuracy) {
    q = model.add_variable(nm::Q, VarKind::continuous, 0.0, 1.0);
    s_acc.resize(n * leaves);
    r.resize(leaves);
  }
  for (std::size_t t = 0; t < leaves; ++t) {
    l[t] = model.add_variable(nm::l(t), VarKind::binary, 0.0, 1.0);
    if (accuracy) r[t] = model.add_variable(nm::r(t), VarKind::continuous, 0.0, 1.0);
    for (int k = 0; k < k_classes; ++k) {
      c[static_cast<std::size_t>(k) * leaves + t] = model.add_variable(nm::c(k, t), VarKind::binary, 0.0, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      z[i * leaves + t] = model.add_variable(nm::z(i, t), VarKind::binary, 0.0, 1.0);
      if (accuracy) {
        s_acc[i * leaves + t] = model.add_variable(nm::s(i, t), VarKind::continuous, 0.0, 1.0);
        S[i * leaves + t] = model.add_variable(nm::S(i, t), VarKind::continuous, 0.0, 1.0);
      } else {
        S[i * leaves + t] = model.add_variable(nm::S(i, t), VarKind::binary, 0.0, 1.0);
      }
    }
  }
  for (std::size_t m = 0; m < branches; ++m) {
    b[m] = model.add_variable(nm::b(m), VarKind::continuous, 0.0, 1.0);
    for (std::size_t j = 0; j < p; ++j) a[j * branches + m] = model.add_variable(nm::a(j, m), VarKind::binary, 0.0, 1.0);
  }
  auto Z = [&](std::size_t i, std::size_t t) { return z[i * leaves + t]; };
  auto C = [&](int k, std::size_t t) { return c[static_cast<std::size_t>(k) * leaves + t]; };
  auto A = [&](std::size_t j, std::size_t m) { return a[j * branches + m]; };

  if (accuracy) {
    model.set_objective({Term{q, 1.0}});
  } else {
    std::vector<Term> obj;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < leaves; ++t) obj.push_back(Term{S[i * leaves + t], 1.0});
    }
    model.set_objective(std::move(obj));
  }

  for (std::size_t t = 0; t < leaves; ++t) {
    if (accuracy) {
      // Q <= sum_i S_it + (1 - l_t)
      LinearConstraint qcap{id("qcap", {t}), {{q, 1.0}, {l[t], 1.0}}, Sense::le, 1.0};
      for (std::size_t i = 0; i < n; ++i) qcap.terms.push_back(Term{S[i * leaves + t], -1.0});
      model.add_constraint(std::move(qcap));
      // l_t = sum_i s_it
      LinearConstraint ssum{id("ssum", {t}), {{l[t], 1.0}}, Sense::eq, 0.0};
      for (std::size_t i = 0; i < n; ++i) ssum.terms.push_back(Term{s_acc[i * leaves + t], -1.0});
      model.add_constraint(std::move(ssum));
    }
    // l_t = sum_k c_kt
    LinearConstraint cls{id("cls", {t}), {{l[t], 1.0}}, Sense::eq, 0.0};
    for (int k = 0; k < k_classes; ++k) cls.terms.push_back(Term{C(k, t), -1.0});
    model.add_constraint(std::move(cls));
    // sum_i z_it >= N_min l_t
    LinearConstraint nmin{id("nmin", {t}), {{l[t], -static_cast<double>(n_min)}}, Sense::ge, 0.0};
    for (std::size_t i = 0; i < n; ++i) nmin.terms.push_back(Term{Z(i, t), 1.0});
    model.add_constraint(std::move(nmin));
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto x = train.row(i);
    const int y = train.label(i);
    LinearConstraint assign{id("assign", {i}), {}, Sense::eq, 1.0};
    for (std::size_t t = 0; t < leaves; ++t) assign.terms.push_back(Term{Z(i, t), 1.0});
    model.add_constraint(std::move(assign));

    for (std::size_t t = 0; t < leaves; ++t) {
      const std::size_t zi = Z(i, t);
      const std::size_t Si = S[i * leaves + t];
      if (accuracy) {
        const std::size_t si = s_acc[i * leaves + t];
        model.add_constraint({id("sz", {i, t}), {{si, 1.0}, {zi, -1.0}}, Sense::le, 0.0});
        model.add_constraint({id("rup", {i, t}), {{r[t], 1.0}, {si, -1.0}, {zi, 1.0}}, Sense::le, 1.0});
        model.add_constraint({id("rlo", {i, t}), {{r[t], 1.0}, {si, -1.0}, {zi, -1.0}}, Sense::ge, -1.0});
        model.add_constraint({id("Ss", {i, t}), {{Si, 1.0}, {si, -1.0}}, Sense::le, 0.0});
        model.add_constraint({id("Sc", {i, t}), {{Si, 1.0}, {C(y, t), -1.0}}, Sense::le, 0.0});
        model.add_constraint({id("Slo", {i, t}), {{Si, 1.0}, {si, -1.0}, {C(y, t), -1.0}}, Sense::ge, -1.0});
      } else {
        model.add_constraint({id("Sz", {i, t}), {{Si, 1.0}, {zi, -1.0}}, Sense::le, 0.0});
        model.add_constraint({id("Sc", {i, t}), {{Si, 1.0}, {C(y, t), -1.0}}, Sense::le, 0.0});
      }
      model.add_constraint({id("zl", {i, t}), {{zi, 1.0}, {l[t], -1.0}}, Sense::le, 0.0});

      // Right descents: a_m . x_i >= b_m - (1 - z_it)
      for (std::size_t m : topo.right_ancestors[t]) {
        LinearConstraint right{id("right", {i, t, m}), {}, Sense::ge, -1.0};
        for (std::size_t j = 0; j < p; ++j) {
          if (x[j] != 0.0) right.terms.push_back(Term{A(j, m), x[j]});
        }
        right.terms.push_back(Term{b[m], -1.0});
        right.terms.push_back(Term{zi, -1.0});
        model.add_constraint(std::move(right));
      }
      // Left descents: a_m . (x_i + eps) <= b_m + (1 + eps_max)(1 - z_it)
      for (std::size_t m : topo.left_ancestors[t]) {
        LinearConstraint left{id("left", {i, t, m}), {}, Sense::le, 1.0 + eps.eps_max};
        for (std::size_t j = 0; j < p; ++j) left.terms.push_back(Term{A(j, m), x[j] + eps.eps[j]});
        left.terms.push_back(Term{b[m], -1.0});
        left.terms.push_back(Term{zi, 1.0 + eps.eps_max});
        model.add_constraint(std::move(left));
      }
    }
  }

  for (std::size_t m = 0; m < branches; ++m) {
    LinearConstraint feat{id("feat", {m}), {}, Sense::eq, 1.0};
    for (std::size_t j = 0; j < p; ++j) feat.terms.push_back(Term{A(j, m), 1.0});
    model.add_constraint(std::move(feat));
  }
  return model;
}

FeasibilityReport check_feasible(const MioModel& model, const Assignment& assignment, const FeasibilityTolerance& tol) {
  const auto& vars = model.variables();
  std::vector<double> values(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto it = assignment.find(vars[v].name);
    if (it == assignment.end()) throw ModelError("assignment lacks variable '" + vars[v].name + "'");
    values[v] = it->second;
  }

  FeasibilityReport report;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const double x = values[v];
    if (!std::isfinite(x)) {
      report.violations.push_back({"bound:" + vars[v].name, -std::numeric_limits<double>::infinity()});
      continue;
    }
    if (x < vars[v].lower - tol.constraint) report.violations.push_back({"bound:" + vars[v].name, x - vars[v].lower});
    if (x > vars[v].upper + tol.constraint) report.violations.push_back({"bound:" + vars[v].name, vars[v].upper - x});
    if (vars[v].kind == VarKind::binary) {
      const double gap = std::min(std::abs(x), std::abs(x - 1.0));
      if (gap > tol.integrality) report.violations.push_back({"integrality:" + vars[v].name, -gap});
    }
  }
  for (const auto& c : model.constraints()) {
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += t.coef * values[t.var];
    double slack = 0.0;
    switch (c.sense) {
      case Sense::le: slack = c.rhs - lhs; break;
      case Sense::ge: slack = lhs - c.rhs; break;
      case Sense::eq: slack = -std::abs(lhs - c.rhs); break;
    }
    if (slack < -tol.constraint) report.violations.push_back({c.id, slack});
  }
  for (const Term& t : model.objective()) report.objective += t.coef * values[t.var];
  report.feasible = report.violations.empty();
  return report;
}

Assignment warmstart_from_tree(const MioModel& model, const ShallowTree& tree, const Dataset& train) {
  namespace nm = mio_names;
  const auto& meta = model.metadata;
  const int depth = meta.depth;
  if (train.num_samples() != meta.n || train.num_features() != meta.p || train.num_classes() != meta.k) {
    throw ModelError("training data does not match the model dimensions");
  }
  if (tree.depth() > depth) {
    throw ModelError("tree depth " + std::to_string(tree.depth()) + " exceeds model depth " + std::to_string(depth));
  }
  const TreeTopology topo = TreeTopology::complete(depth);
  const std::size_t n = meta.n;
  const std::size_t leaves = topo.num_leaves;
  const std::size_t branches = topo.num_branches;

  // Sorted distinct training values per feature, for moving thresholds onto data values.
  std::vector<std::vector<double>> distinct(meta.p);
  for (std::size_t j = 0; j < meta.p; ++j) {
    auto& v = distinct[j];
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(train.value(i, j));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  std::vector<std::size_t> feature(branches, 0);
  std::vector<double> threshold(branches, 0.0);
  std::vector<NodeId> leaf_source(leaves, -1);

  // Embeds tree node `id` (or nothing when id < 0) at heap position h.
  std::function<void(NodeId, std::size_t, int)> embed = [&](NodeId id, std::size_t h, int level) {
    if (level == depth) {
      leaf_source[h - branches] = id;
      return;
    }
    if (id < 0) {
      embed(-1, 2 * h + 1, level + 1);
      embed(-1, 2 * h + 2, level + 1);
      return;
    }
    const auto& node = tree.node(id);
    if (node.is_leaf()) {
      embed(-1, 2 * h + 1, level + 1);
      embed(id, 2 * h + 2, level + 1);
      return;
    }
    if (static_cast<std::size_t>(node.feature) >= meta.p) throw ModelError("tree uses a feature beyond the data width");
    const auto& values = distinct[static_cast<std::size_t>(node.feature)];
    const auto above = std::lower_bound(values.begin(), values.end(), node.threshold);
    if (above == values.end()) {
      // No training value reaches the right side: keep only the left subtree.
      embed(-1, 2 * h + 1, level + 1);
      embed(node.left, 2 * h + 2, level + 1);
      return;
    }
    feature[h] = static_cast<std::size_t>(node.feature);
    threshold[h] = *above;
    embed(node.left, 2 * h + 1, level + 1);
    embed(node.right, 2 * h + 2, level + 1);
  };
  embed(tree.root(), 0, 0);

  std::vector<std::size_t> leaf_of(n);
  std::vector<std::size_t> count(leaves, 0);
  std::vector<std::size_t> correct(leaves, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t h = 0;
    while (h < branches) h = train.value(i, feature[h]) < threshold[h] ? 2 * h + 1 : 2 * h + 2;
    const std::size_t t = h - branches;
    leaf_of[i] = t;
    ++count[t];
    if (tree.node(leaf_source[t]).label == train.label(i)) ++correct[t];
  }
  for (std::size_t t = 0; t < leaves; ++t) {
    if (count[t] > 0 && count[t] < meta.n_min) {
      throw ModelError("leaf " + std::to_string(t) + " (tree node " + std::to_string(leaf_source[t]) + ") holds " +
                       std::to_string(count[t]) + " samples, fewer than N_min = " + std::to_string(meta.n_min));
    }
  }

  Assignment out;
  out.reserve(model.variables().size());
  for (const auto& v : model.variables()) out.emplace(v.name, 0.0);
  for (std::size_t m = 0; m < branches; ++m) {
    out[nm::a(feature[m], m)] = 1.0;
    out[nm::b(m)] = threshold[m];
  }
  const bool accuracy = meta.objective == Objective::leaf_accuracy;
  double q = 1.0;
  for (std::size_t t = 0; t < leaves; ++t) {
    if (count[t] == 0) continue;
    out[nm::l(t)] = 1.0;
    out[nm::c(tree.node(leaf_source[t]).label, t)] = 1.0;
    if (accuracy) {
      out[nm::r(t)] = 1.0 / static_cast<double>(count[t]);
      q = std::min(q, static_cast<double>(correct[t]) / static_cast<double>(count[t]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = leaf_of[i];
    out[nm::z(i, t)] = 1.0;
    const bool hit = tree.node(leaf_source[t]).label == train.label(i);
    if (accuracy) {
      const double share = 1.0 / static_cast<double>(count[t]);
      out[nm::s(i, t)] = share;
      out[nm::S(i, t)] = hit ? share : 0.0;
    } else {
      out[nm::S(i, t)] = hit ? 1.0 : 0.0;
    }
  }
  if (accuracy) out[nm::Q] = q;
  return out;
}

ShallowTree extract_tree(const MioModel& model, const Assignment& assignment, const FeasibilityTolerance& tol) {
  namespace nm = mio_names;
  const auto report = check_feasible(model, assignment, tol);
  if (!report.feasible) {
    std::string msg = "cannot extract a tree from an infeasible assignment (" +
                      std::to_string(report.violations.size()) + " violations, first: " + report.violations.front().id +
                      ")";
    throw ModelError(msg);
  }
  const auto& meta = model.metadata;
  const TreeTopology topo = TreeTopology::complete(meta.depth);
  auto value = [&](const std::string& name) { return assignment.at(name); };
  std::function<ShallowTree(std::size_t, int)> build = [&](std::size_t h, int level) -> ShallowTree {
    if (level == meta.depth) {
      const std::size_t t = h - topo.num_branches;
      if (value(nm::l(t)) < 0.5) return ShallowTree::leaf(0);
      int best = 0;
      for (int k = 1; k < meta.k; ++k) {
        if (value(nm::c(k, t)) > value(nm::c(best, t))) best = k;
      }
      return ShallowTree::leaf(best);
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < meta.p; ++j) {
      if (value(nm::a(j, h)) > value(nm::a(best, h))) best = j;
    }
    return ShallowTree::branch(static_cast<int>(best), value(nm::b(h)), build(2 * h + 1, level + 1),
                               build(2 * h + 2, level + 1));
  };
  return build(0, 0);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Assignment parse_solution(std::istream& in, const MioModel* model, std::vector<std::string>* warnings) {
  Assignment out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream fields{std::string(line)};
    std::string name;
    std::string number;
    std::string extra;
    fields >> name >> number;
    if (name.empty() || number.empty() || (fields >> extra)) {
      throw ParseError("expected 'name value' in solution file", line_no);
    }
    double value = 0.0;
    const char* first = number.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, number.data() + number.size(), value);
    if (ec != std::errc() || ptr != number.data() + number.size()) {
      throw ParseError("malformed value '" + number + "' for '" + name + "'", line_no);
    }
    if (!out.emplace(name, value).second) throw ParseError("duplicate entry for '" + name + "'", line_no);
    if (model && warnings && !model->find(name)) {
      warnings->push_back("line " + std::to_string(line_no) + ": unknown variable '" + name + "'");
    }
  }
  return out;
}

Assignment load_solution(const std::filesystem::path& path, const MioModel* model, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open solution file '" + path.string() + "'");
  return parse_solution(in, model, warnings);
}

void write_solution(std::ostream& out, const Assignment& assignment) {
  std::vector<const std::pair<const std::string, double>*> entries;
  entries.reserve(assignment.size());
  for (const auto& e : assignment) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return natural_less(a->first, b->first); });
  for (const auto* e : entries) out << e->first << ' ' << shortest(e->second) << '\n';
}

}  // namespace minleaf
