#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "minleaf/boost.hpp"
#include "minleaf/cart.hpp"
#include "minleaf/csv.hpp"
#include "minleaf/data.hpp"
#include "minleaf/error.hpp"
#include "minleaf/eval.hpp"
#include "minleaf/mio.hpp"
#include "minleaf/search.hpp"
#include "minleaf/tree.hpp"

namespace minleaf::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

CLI::Validator parses_as(std::string (*probe)(const std::string&), const std::string& desc) {
  return CLI::Validator([probe](std::string& s) { return probe(s); }, desc);
}

std::string probe_objective(const std::string& s) {
  try {
    parse_objective(s);
    return {};
  } catch (const Error&) {
    return "unknown objective '" + s + "' (leaf-accuracy | oct)";
  }
}

std::string probe_strategy(const std::string& s) {
  try {
    parse_strategy(s);
    return {};
  } catch (const Error&) {
    return "unknown strategy '" + s + "' (direct | warmstarted | gradual)";
  }
}

std::string probe_encoding(const std::string& s) {
  return s == "ordinal" || s == "one-hot" ? std::string() : "unknown encoding '" + s + "' (ordinal | one-hot)";
}

// ---- data options shared by every subcommand -------------------------------

struct DataOpts {
  std::string label;
  std::string encoding = "ordinal";
};

void add_data_opts(CLI::App* app, DataOpts& d) {
  app->add_option("--label", d.label, "Label column: header name or 0-based index (default: last column)");
  app->add_option("--encoding", d.encoding, "Categorical encoding: ordinal | one-hot")
      ->capture_default_str()
      ->check(parses_as(probe_encoding, "ENCODING"));
}

Dataset load_dataset(const fs::path& path, const DataOpts& d) {
  const std::string text = read_text(path);
  std::istringstream head(text);
  const auto table = csv::parse(head);
  const std::size_t columns = table.header.size();
  LabelColumn label = columns ? columns - 1 : 0;
  if (!d.label.empty()) {
    const auto it = std::find(table.header.begin(), table.header.end(), d.label);
    if (it != table.header.end()) {
      label = d.label;
    } else {
      std::size_t index = 0;
      const auto [ptr, ec] = std::from_chars(d.label.data(), d.label.data() + d.label.size(), index);
      if (ec != std::errc() || ptr != d.label.data() + d.label.size()) {
        throw DataError("label column '" + d.label + "' not found in " + path.string());
      }
      label = index;
    }
  }
  std::istringstream in(text);
  return parse_csv(in, label, d.encoding == "one-hot" ? Encoding::one_hot : Encoding::ordinal);
}

ShallowTree load_tree(const fs::path& path, const Dataset& ds) {
  ShallowTree tree = ShallowTree::from_json(read_text(path));
  for (const auto& node : tree.nodes()) {
    if (!node.is_leaf() && (node.feature < 0 || static_cast<std::size_t>(node.feature) >= ds.num_features())) {
      throw DataError("tree uses feature " + std::to_string(node.feature) + " but the data has " +
                      std::to_string(ds.num_features()) + " features");
    }
    if (node.label < 0 || node.label >= ds.num_classes()) {
      throw DataError("tree predicts class " + std::to_string(node.label) + " but the data has " +
                      std::to_string(ds.num_classes()) + " classes");
    }
  }
  return tree;
}

struct Split {
  Dataset train;
  std::optional<Dataset> test;
};

// Everything is training data when the test fraction is 0.
Split maybe_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (test_fraction <= 0.0) return {ds, std::nullopt};
  auto s = split_dataset(ds, {seed, 1.0 - test_fraction, std::numeric_limits<std::size_t>::max()});
  return {std::move(s.train), std::move(s.test)};
}

void describe(std::ostream& out, const ShallowTree& tree, const Dataset& ds, NodeId id, int indent) {
  const auto& node = tree.node(id);
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (node.is_leaf()) {
    out << pad << "class " << ds.class_name(node.label) << "\n";
    return;
  }
  const std::string f = ds.feature_name(static_cast<std::size_t>(node.feature));
  out << pad << "if " << f << " < " << num(node.threshold) << ":\n";
  describe(out, tree, ds, node.left, indent + 1);
  out << pad << "else:\n";
  describe(out, tree, ds, node.right, indent + 1);
}

json stats_json(const ShallowTree& tree, const Dataset& ds) {
  const LeafStats st = leaf_accuracy(tree, ds);
  json leaves = json::array();
  for (const auto& l : st.leaves) leaves.push_back({{"leaf", l.leaf}, {"count", l.count}, {"correct", l.correct}});
  return {{"samples", ds.num_samples()},
          {"leaf_accuracy", st.leaf_accuracy},
          {"model_accuracy", st.model_accuracy},
          {"leaves", std::move(leaves)}};
}

// ---- config files ------------------------------------------------------------

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string> config_values(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') return {unquote(v)};
  std::vector<std::string> items;
  std::string current;
  char quote = 0;
  for (char c : v.substr(1, v.size() - 2)) {
    if (quote) {
      if (c == quote) quote = 0;
      current += c;
    } else if (c == '"' || c == '\'') {
      quote = c;
      current += c;
    } else if (c == ',') {
      items.push_back(unquote(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!trim(current).empty()) items.push_back(unquote(current));
  return items;
}

// key = value lines; a [section] header restricts the following keys to the
// subcommand of that name. Options given on the command line win.
void apply_config(CLI::App* app, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open '" + path.string() + "'");
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(strip_comment(line));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw CLI::ValidationError("--config", path.string() + ":" + std::to_string(lineno) + ": bad section header");
      }
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--config", path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    if (!section.empty() && section != app->get_name()) continue;
    std::string key = trim(text.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config" || key == "help") {
      throw CLI::ValidationError("--config", path.string() + ":" + std::to_string(lineno) + ": key '" + key +
                                                 "' is not allowed in a config file");
    }
    CLI::Option* opt = nullptr;
    try {
      opt = app->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw CLI::ValidationError("--config", path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key +
                                                 "' for " + app->get_name());
    }
    if (opt->count() > 0) continue;
    for (const auto& v : config_values(text.substr(eq + 1))) opt->add_result(v);
    opt->run_callback();
  }
}

// ---- subcommands -------------------------------------------------------------

struct Common {
  std::string data;
  DataOpts d;
  std::string config;
  std::size_t jobs = 1;
  std::string out = "minleaf_out";
};

struct TreeOpts {
  int depth = 4;
  std::size_t n_min = 50;
  std::string objective = "leaf-accuracy";
};

void add_tree_opts(CLI::App* app, TreeOpts& t, bool depth_required) {
  auto* depth = app->add_option("--depth", t.depth, "Maximum tree depth")->check(CLI::Range(1, 4));
  if (!depth_required) depth->capture_default_str();
  app->add_option("--nmin", t.n_min, "Minimum number of training samples in a non-empty leaf")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--objective", t.objective, "Objective: leaf-accuracy | oct")
      ->capture_default_str()
      ->check(parses_as(probe_objective, "OBJECTIVE"));
}

struct SearchOpts {
  std::string strategy = "warmstarted";
  double time = 60.0;
  std::size_t node_limit = 0;
  int cart_iterations = 100;
  int cart_folds = 5;
};

void add_search_opts(CLI::App* app, SearchOpts& s) {
  app->add_option("--strategy", s.strategy, "Exact search strategy: direct | warmstarted | gradual")
      ->capture_default_str()
      ->check(parses_as(probe_strategy, "STRATEGY"));
  app->add_option("--time", s.time, "Exact search time budget in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--node-limit", s.node_limit, "Cap on explored search nodes (0 = none)")->capture_default_str();
  app->add_option("--cart-iterations", s.cart_iterations, "CART random-search iterations")
      ->capture_default_str()
      ->check(CLI::Range(1, 100000));
  app->add_option("--cart-folds", s.cart_folds, "CART cross-validation folds")
      ->capture_default_str()
      ->check(CLI::Range(2, 100));
}

struct TrainOpts {
  std::string method = "exact";
  TreeOpts t;
  SearchOpts s;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
  std::string dot;
};

int cmd_train(const Common& c, const TrainOpts& o, std::ostream& out) {
  const Dataset ds = load_dataset(c.data, c.d);
  const auto split = maybe_split(ds, o.test_fraction, o.seed);
  const Dataset& train = split.train;
  if (train.num_samples() < o.t.n_min) {
    throw DataError("training set has " + std::to_string(train.num_samples()) + " samples, fewer than N_min = " +
                    std::to_string(o.t.n_min));
  }

  ShallowTree tree = ShallowTree::leaf(0);
  json detail;
  if (o.method == "cart") {
    CartConfig fixed_cfg;
    fixed_cfg.max_depth = o.t.depth;
    fixed_cfg.min_samples_leaf = static_cast<int>(o.t.n_min);
    const auto r = cart_search(train, fixed_cfg, o.s.cart_iterations, o.s.cart_folds, o.seed);
    tree = r.tree;
    detail = {{"cv_accuracy", r.cv_accuracy},
              {"holdout_fallback", r.holdout_fallback},
              {"config", json::parse(r.config.to_json())}};
  } else {
    SearchConfig cfg;
    cfg.depth = o.t.depth;
    cfg.n_min = o.t.n_min;
    cfg.objective = parse_objective(o.t.objective);
    cfg.strategy = parse_strategy(o.s.strategy);
    cfg.time_budget = o.s.time;
    cfg.seed = o.seed;
    cfg.node_limit = o.s.node_limit;
    const auto r = solve(train, cfg);
    tree = r.tree;
    detail = {{"objective_value", r.objective_value},
              {"initial_value", r.initial_value},
              {"proven_optimal", r.proven_optimal},
              {"best_bound", r.best_bound}};
    out << "search: objective " << num(r.objective_value) << (r.proven_optimal ? " (optimal)" : " (not proven)")
        << ", " << r.nodes_explored << " nodes, " << fixed(r.elapsed, 2) << " s\n";
  }
  const std::size_t leaves_before = tree.num_leaves();
  tree = reduce_tree(tree, train);

  const LeafStats train_stats = leaf_accuracy(tree, train);
  json metrics{{"method", o.method},
               {"depth", o.t.depth},
               {"n_min", o.t.n_min},
               {"objective", std::string(to_string(parse_objective(o.t.objective)))},
               {"seed", o.seed},
               {"leaves_before_reduction", leaves_before},
               {"leaves", tree.num_leaves()},
               {"train", stats_json(tree, train)},
               {"training", detail}};
  std::optional<LeafStats> test_stats;
  if (split.test) {
    test_stats = leaf_accuracy(tree, *split.test);
    metrics["test"] = stats_json(tree, *split.test);
  }

  const fs::path dir = c.out;
  write_text(dir / "tree.json", tree.to_json() + "\n");
  write_text(o.dot.empty() ? dir / "tree.dot" : fs::path(o.dot),
             export_dot(tree, train, train_stats, test_stats ? &*test_stats : nullptr));
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");

  out << "leaf accuracy (train): " << fixed(train_stats.leaf_accuracy) << "\n";
  out << "model accuracy (train): " << fixed(train_stats.model_accuracy) << "\n";
  if (test_stats) {
    out << "leaf accuracy (test): " << fixed(test_stats->leaf_accuracy) << "\n";
    out << "model accuracy (test): " << fixed(test_stats->model_accuracy) << "\n";
  }
  out << "leaves: " << tree.num_leaves() << " (before reduction " << leaves_before << ")\n";
  describe(out, tree, train, tree.root(), 0);
  out << "wrote " << (dir / "tree.json").string() << "\n";
  return 0;
}

struct ExtendOpts {
  std::string tree;
  int iterations = 50;
  int folds = 3;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
};

int cmd_extend(const Common& c, const ExtendOpts& o, std::ostream& out) {
  const Dataset ds = load_dataset(c.data, c.d);
  const auto split = maybe_split(ds, o.test_fraction, o.seed);
  const ShallowTree shallow = reduce_tree(load_tree(o.tree, ds), split.train);
  const HybridTree hybrid = extend_tree(shallow, split.train, o.iterations, o.folds, o.seed);

  json kinds = json::object();
  for (const auto& [leaf, e] : hybrid.extenders) kinds[std::to_string(leaf)] = extender_kind(e);
  json metrics{{"seed", o.seed},
               {"leaves", shallow.num_leaves()},
               {"extenders", kinds},
               {"train",
                {{"shallow_accuracy", model_accuracy(shallow, split.train)},
                 {"hybrid_accuracy", hybrid_accuracy(hybrid, split.train)},
                 {"agreement_rate", agreement_rate(hybrid, split.train)}}}};
  if (split.test) {
    metrics["test"] = {{"shallow_accuracy", model_accuracy(shallow, *split.test)},
                       {"hybrid_accuracy", hybrid_accuracy(hybrid, *split.test)},
                       {"agreement_rate", agreement_rate(hybrid, *split.test)}};
  }
  const fs::path dir = c.out;
  write_text(dir / "hybrid.json", hybrid.to_json() + "\n");
  write_text(dir / "hybrid_metrics.json", metrics.dump(2) + "\n");

  for (const auto& [leaf, e] : hybrid.extenders) out << "leaf " << leaf << ": " << extender_kind(e) << "\n";
  out << "shallow accuracy (train): " << fixed(metrics["train"]["shallow_accuracy"].get<double>()) << "\n";
  out << "hybrid accuracy (train): " << fixed(metrics["train"]["hybrid_accuracy"].get<double>()) << "\n";
  out << "agreement rate (train): " << fixed(metrics["train"]["agreement_rate"].get<double>()) << "\n";
  if (metrics.contains("test")) {
    out << "hybrid accuracy (test): " << fixed(metrics["test"]["hybrid_accuracy"].get<double>()) << "\n";
    out << "agreement rate (test): " << fixed(metrics["test"]["agreement_rate"].get<double>()) << "\n";
  }
  out << "wrote " << (dir / "hybrid.json").string() << "\n";
  return 0;
}

struct EvalOpts {
  std::vector<std::string> data;
  std::string methods = "cart,exact,hybrid-cart,hybrid-exact";
  std::string seeds = "0-2";
  TreeOpts t;
  SearchOpts s;
  double train_fraction = 0.8;
  std::size_t train_cap = 10'000;
  int extend_iterations = 50;
  int extend_folds = 3;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  auto to_u64 = [&](const std::string& s) {
    std::uint64_t v = 0;
    const std::string t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw CLI::ValidationError("--seeds", "bad seed '" + t + "'");
    }
    return v;
  };
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(to_u64(part));
      continue;
    }
    const auto lo = to_u64(part.substr(0, dash));
    const auto hi = to_u64(part.substr(dash + 1));
    if (hi < lo || hi - lo > 100000) throw CLI::ValidationError("--seeds", "bad seed range '" + part + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> methods;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      const Method m = parse_method(trim(part));
      if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    } catch (const Error&) {
      throw CLI::ValidationError("--methods", "unknown method '" + trim(part) + "'");
    }
  }
  if (methods.empty()) throw CLI::ValidationError("--methods", "no methods given");
  return methods;
}

int cmd_eval(const Common& c, const EvalOpts& o, std::ostream& out, std::ostream& err) {
  const auto methods = parse_methods(o.methods);
  const auto seeds = parse_seeds(o.seeds);
  std::vector<NamedDataset> datasets;
  for (const auto& path : o.data) {
    std::string name = fs::path(path).stem().string();
    for (const auto& d : datasets) {
      if (d.name == name) throw DataError("two datasets are named '" + name + "'");
    }
    datasets.push_back({name, load_dataset(path, c.d)});
  }
  EvalConfig cfg;
  cfg.depth = o.t.depth;
  cfg.n_min = o.t.n_min;
  cfg.objective = parse_objective(o.t.objective);
  cfg.strategy = parse_strategy(o.s.strategy);
  cfg.time_budget = o.s.time;
  cfg.node_limit = o.s.node_limit;
  cfg.train_fraction = o.train_fraction;
  cfg.train_cap = o.train_cap;
  cfg.cart_iterations = o.s.cart_iterations;
  cfg.cart_folds = o.s.cart_folds;
  cfg.extend_iterations = o.extend_iterations;
  cfg.extend_folds = o.extend_folds;
  cfg.jobs = c.jobs;

  const EvalReport report = run_experiment(datasets, methods, seeds, cfg);
  emit_report(report, c.out);

  out << std::left << std::setw(20) << "dataset" << std::setw(14) << "method" << std::setw(12) << "test A_L"
      << std::setw(12) << "test acc" << "test hybrid\n";
  for (const auto& row : report.aggregate) {
    auto mean = [&](const char* key) {
      const auto it = row.metrics.find(key);
      return it == row.metrics.end() ? std::string("-") : fixed(it->second.mean);
    };
    out << std::left << std::setw(20) << row.dataset << std::setw(14) << to_string(row.method) << std::setw(12)
        << mean("test_leaf_accuracy") << std::setw(12) << mean("test_model_accuracy") << mean("test_hybrid_accuracy")
        << "\n";
  }
  out << "wrote " << c.out << "/{raw,timings,aggregate,comparisons}.csv and summary.json\n";
  if (report.partial) {
    std::size_t failed = 0;
    for (const auto& r : report.raw) failed += r.ok ? 0 : 1;
    err << "error: " << failed << " run(s) failed; see raw.csv\n";
    return 1;
  }
  return 0;
}

struct ExportLpOpts {
  TreeOpts t;
  std::string tree;
};

int cmd_export_lp(const Common& c, const ExportLpOpts& o, std::ostream& out) {
  const Dataset ds = load_dataset(c.data, c.d);
  const auto objective = parse_objective(o.t.objective);
  const MioModel model = build_mio(ds, compute_epsilon(ds), o.t.depth, o.t.n_min, objective);
  ShallowTree start = ShallowTree::leaf(0);
  if (!o.tree.empty()) {
    start = load_tree(o.tree, ds);
  } else {
    CartConfig cfg;
    cfg.max_depth = o.t.depth;
    cfg.min_samples_leaf = static_cast<int>(o.t.n_min);
    start = cart_train(ds, cfg);
  }
  const Assignment warm = warmstart_from_tree(model, start, ds);
  const auto report = check_feasible(model, warm);
  if (!report.feasible) {
    throw ModelError("warmstart assignment violates " + report.violations.front().id);
  }
  const fs::path dir = c.out;
  write_text(dir / "model.lp", emit_lp(model));
  std::ostringstream sol;
  sol << "# warmstart from " << (o.tree.empty() ? "default CART" : o.tree) << ", objective " << num(report.objective)
      << "\n";
  write_solution(sol, warm);
  write_text(dir / "model.sol", sol.str());
  out << "variables: " << model.variables().size() << ", constraints: " << model.constraints().size() << "\n";
  out << "warmstart objective: " << num(report.objective) << "\n";
  out << "wrote " << (dir / "model.lp").string() << " and " << (dir / "model.sol").string() << "\n";
  return 0;
}

struct CheckOpts {
  TreeOpts t;
  std::string solution;
  double tol = 1e-6;
  std::size_t show = 10;
};

int cmd_check(const Common& c, const CheckOpts& o, std::ostream& out, std::ostream& err) {
  const Dataset ds = load_dataset(c.data, c.d);
  const auto objective = parse_objective(o.t.objective);
  const MioModel model = build_mio(ds, compute_epsilon(ds), o.t.depth, o.t.n_min, objective);
  std::vector<std::string> warnings;
  const Assignment a = load_solution(o.solution, &model, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  const FeasibilityTolerance tol{o.tol, o.tol};
  const auto report = check_feasible(model, a, tol);
  const std::string label = objective == Objective::leaf_accuracy ? "Q" : "objective";
  if (!report.feasible) {
    out << "infeasible, " << label << "=" << num(report.objective) << ", " << report.violations.size()
        << " violation(s)\n";
    for (std::size_t i = 0; i < std::min(o.show, report.violations.size()); ++i) {
      out << "  " << report.violations[i].id << " by " << num(report.violations[i].slack) << "\n";
    }
    if (report.violations.size() > o.show) out << "  ...\n";
    return 1;
  }
  out << "feasible, " << label << "=" << num(report.objective) << "\n";
  const ShallowTree tree = reduce_tree(extract_tree(model, a, {o.tol, std::max(o.tol, 1e-4)}), ds);
  const LeafStats st = leaf_accuracy(tree, ds);
  out << "leaf accuracy: " << num(st.leaf_accuracy) << ", model accuracy: " << num(st.model_accuracy) << "\n";
  describe(out, tree, ds, tree.root(), 0);
  out << tree.to_json() << "\n";
  return 0;
}

struct ExportDotOpts {
  std::string tree;
  std::string test_data;
  std::string dot;
};

int cmd_export_dot(const Common& c, const ExportDotOpts& o, std::ostream& out) {
  const Dataset train = load_dataset(c.data, c.d);
  const ShallowTree tree = load_tree(o.tree, train);
  const LeafStats train_stats = leaf_accuracy(tree, train);
  std::optional<LeafStats> test_stats;
  if (!o.test_data.empty()) {
    const Dataset test = load_dataset(o.test_data, c.d);
    if (test.num_features() != train.num_features()) {
      throw DataError("test data has " + std::to_string(test.num_features()) + " features, training data " +
                      std::to_string(train.num_features()));
    }
    test_stats = leaf_accuracy(tree, test);
  }
  const std::string dot = export_dot(tree, train, train_stats, test_stats ? &*test_stats : nullptr);
  if (o.dot.empty()) {
    out << dot;
  } else {
    write_text(o.dot, dot);
  }
  return 0;
}

std::size_t jobs_from_env() {
  const char* env = std::getenv("MINLEAF_JOBS");
  if (env == nullptr || *env == '\0') return 1;
  std::size_t v = 0;
  const std::string s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw CLI::ValidationError("MINLEAF_JOBS", "must be a positive integer, got '" + s + "'");
  }
  return v;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"minleaf: shallow decision trees that maximize the worst leaf accuracy"};
  app.name("minleaf");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  TrainOpts train;
  ExtendOpts extend;
  EvalOpts eval;
  ExportLpOpts export_lp;
  CheckOpts check;
  ExportDotOpts export_dot_opts;

  auto add_common = [&](CLI::App* sub, bool data_required, bool with_out) {
    if (data_required) {
      sub->add_option("--data", common.data, "Training data CSV (header row required)")
          ->required()
          ->check(CLI::ExistingFile);
    }
    add_data_opts(sub, common.d);
    sub->add_option("--config", common.config, "key = value file supplying defaults; flags win")
        ->check(CLI::ExistingFile);
    sub->add_option("--jobs", common.jobs, "Worker threads (default: $MINLEAF_JOBS or 1)")->check(CLI::PositiveNumber);
    if (with_out) sub->add_option("--out", common.out, "Output directory")->capture_default_str();
  };

  auto* t = app.add_subcommand("train", "Train a shallow tree (cart | exact) and write tree, DOT and metrics");
  add_common(t, true, true);
  t->add_option("--method", train.method, "Training method: cart | exact")
      ->capture_default_str()
      ->check(CLI::IsMember({"cart", "exact"}));
  add_tree_opts(t, train.t, false);
  add_search_opts(t, train.s);
  t->add_option("--seed", train.seed, "Seed for the split and CART search")->capture_default_str();
  t->add_option("--test-fraction", train.test_fraction, "Hold out this fraction as test data (0 = none)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.95));
  t->add_option("--dot", train.dot, "DOT output path (default: <out>/tree.dot)");

  auto* e = app.add_subcommand("extend", "Attach per-leaf extenders to a saved tree");
  add_common(e, true, true);
  e->add_option("--tree", extend.tree, "Tree JSON to extend")->required()->check(CLI::ExistingFile);
  e->add_option("--iterations", extend.iterations, "Random-search iterations per leaf")
      ->capture_default_str()
      ->check(CLI::Range(1, 100000));
  e->add_option("--folds", extend.folds, "Cross-validation folds per leaf")
      ->capture_default_str()
      ->check(CLI::Range(2, 100));
  e->add_option("--seed", extend.seed, "Seed for the split and the extender search")->capture_default_str();
  e->add_option("--test-fraction", extend.test_fraction, "Hold out this fraction as test data (0 = none)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.95));

  auto* v = app.add_subcommand("eval", "Run the method comparison over datasets and seeds");
  add_common(v, false, true);
  v->add_option("--data", eval.data, "Dataset CSV (repeatable)")->required()->check(CLI::ExistingFile);
  v->add_option("--methods", eval.methods, "Comma-separated: cart, exact, hybrid-cart, hybrid-exact")
      ->capture_default_str();
  v->add_option("--seeds", eval.seeds, "Seeds, e.g. 0-4 or 1,3,5")->capture_default_str();
  add_tree_opts(v, eval.t, false);
  add_search_opts(v, eval.s);
  v->add_option("--train-fraction", eval.train_fraction, "Training share of each split")
      ->capture_default_str()
      ->check(CLI::Range(0.05, 0.95));
  v->add_option("--train-cap", eval.train_cap, "Maximum training rows")->capture_default_str()->check(
      CLI::PositiveNumber);
  v->add_option("--extend-iterations", eval.extend_iterations, "Extender random-search iterations per leaf")
      ->capture_default_str()
      ->check(CLI::Range(1, 100000));
  v->add_option("--extend-folds", eval.extend_folds, "Extender cross-validation folds")
      ->capture_default_str()
      ->check(CLI::Range(2, 100));

  auto* x = app.add_subcommand("export-lp", "Write the tree-training model as an LP file plus a warmstart solution");
  add_common(x, true, true);
  add_tree_opts(x, export_lp.t, true);
  x->add_option("--tree", export_lp.tree, "Warmstart tree JSON (default: CART of the same depth and N_min)")
      ->check(CLI::ExistingFile);

  auto* k = app.add_subcommand("check", "Verify a solution file against the model rebuilt from the data");
  add_common(k, true, false);
  add_tree_opts(k, check.t, true);
  k->add_option("--solution", check.solution, "Solution file: one 'name value' pair per line")
      ->required()
      ->check(CLI::ExistingFile);
  k->add_option("--tol", check.tol, "Feasibility tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  k->add_option("--show", check.show, "Number of violations to list")->capture_default_str();

  auto* d = app.add_subcommand("export-dot", "Render a saved tree as Graphviz DOT");
  add_common(d, true, false);
  d->add_option("--tree", export_dot_opts.tree, "Tree JSON")->required()->check(CLI::ExistingFile);
  d->add_option("--test-data", export_dot_opts.test_data, "Test CSV for the bold leaf accuracies")
      ->check(CLI::ExistingFile);
  d->add_option("--dot", export_dot_opts.dot, "Output path (default: stdout)");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
    CLI::App* sub = app.get_subcommands().front();
    if (!common.config.empty()) apply_config(sub, common.config);
    if (sub->get_option("--jobs")->count() == 0) common.jobs = jobs_from_env();
    if ((sub == x || sub == k) && sub->get_option("--depth")->count() == 0) throw CLI::RequiredError("--depth");
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub == t) return cmd_train(common, train, out);
    if (sub == e) return cmd_extend(common, extend, out);
    if (sub == v) return cmd_eval(common, eval, out, err);
    if (sub == x) return cmd_export_lp(common, export_lp, out);
    if (sub == k) return cmd_check(common, check, out, err);
    return cmd_export_dot(common, export_dot_opts, out);
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace minleaf::cli
