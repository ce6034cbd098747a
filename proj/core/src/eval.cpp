#include "minleaf/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "minleaf/boost.hpp"
#include "minleaf/cart.hpp"
#include "minleaf/csv.hpp"
#include "minleaf/error.hpp"
#include "minleaf/stats.hpp"
#include "minleaf/tree.hpp"

namespace minleaf {

using json = nlohmann::json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::cart: return "cart";
    case Method::exact: return "exact";
    case Method::hybrid_cart: return "hybrid-cart";
    case Method::hybrid_exact: return "hybrid-exact";
  }
  return "cart";
}

Method parse_method(std::string_view text) {
  if (text == "cart") return Method::cart;
  if (text == "exact") return Method::exact;
  if (text == "hybrid-cart") return Method::hybrid_cart;
  if (text == "hybrid-exact") return Method::hybrid_exact;
  throw ModelError("unknown method '" + std::string(text) + "'");
}

bool is_hybrid(Method method) { return method == Method::hybrid_cart || method == Method::hybrid_exact; }

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

namespace {

struct ShallowResult {
  ShallowTree tree;  // unreduced
  double objective = 0.0;
  std::optional<bool> proven;
};

ShallowResult train_cart(const Dataset& train, const EvalConfig& cfg, std::uint64_t seed) {
  CartConfig fixed;
  fixed.max_depth = cfg.depth;
  fixed.min_samples_leaf = static_cast<int>(cfg.n_min);
  auto found = cart_search(train, fixed, cfg.cart_iterations, cfg.cart_folds, seed);
  return {found.tree, tree_objective(found.tree, train, cfg.n_min, cfg.objective), std::nullopt};
}

ShallowResult train_exact(const Dataset& train, const EvalConfig& cfg, std::uint64_t seed) {
  CartConfig warm;
  warm.max_depth = cfg.depth;
  warm.min_samples_leaf = static_cast<int>(cfg.n_min);
  const ShallowTree start = cart_train(train, warm);
  SearchConfig sc;
  sc.depth = cfg.depth;
  sc.n_min = cfg.n_min;
  sc.objective = cfg.objective;
  sc.strategy = cfg.strategy;
  sc.time_budget = cfg.time_budget;
  sc.node_limit = cfg.node_limit;
  sc.seed = seed;
  const auto r = solve(train, sc, start);
  return {r.tree, r.objective_value, r.proven_optimal};
}

using Clock = std::chrono::steady_clock;

// All methods for one (dataset, seed) cell; shallow trees are shared by the
// plain and hybrid variant of a method.
std::vector<RawRow> run_cell(const NamedDataset& ds, std::uint64_t seed, const std::vector<Method>& methods,
                             const EvalConfig& cfg) {
  std::vector<RawRow> rows;
  std::optional<TrainTestSplit> split;
  std::string split_error;
  try {
    split = split_dataset(ds.data, SplitSpec{seed, cfg.train_fraction, cfg.train_cap});
  } catch (const Error& e) {
    split_error = e.what();
  }
  std::map<Method, std::pair<ShallowResult, double>> shallow;  // base method -> (result, seconds)
  std::map<Method, std::string> shallow_error;

  for (Method m : methods) {
    RawRow row;
    row.dataset = ds.name;
    row.seed = seed;
    row.method = m;
    const auto started = Clock::now();
    try {
      if (!split) throw DataError(split_error);
      const Dataset& train = split->train;
      const Dataset& test = split->test;
      const Method base = m == Method::hybrid_cart ? Method::cart : m == Method::hybrid_exact ? Method::exact : m;
      double base_seconds = 0.0;
      if (!shallow.contains(base)) {
        if (shallow_error.contains(base)) throw Error(shallow_error[base]);
        const auto t0 = Clock::now();
        try {
          ShallowResult r = base == Method::cart ? train_cart(train, cfg, seed) : train_exact(train, cfg, seed);
          shallow.emplace(base, std::make_pair(std::move(r), std::chrono::duration<double>(Clock::now() - t0).count()));
        } catch (const Error& e) {
          shallow_error[base] = e.what();
          throw;
        }
        base_seconds = shallow.at(base).second;
      }
      const ShallowResult& sr = shallow.at(base).first;
      const ShallowTree reduced = reduce_tree(sr.tree, train);
      const LeafStats train_stats = leaf_accuracy(reduced, train);
      const LeafStats test_stats = leaf_accuracy(reduced, test);
      row.train_leaf_accuracy = train_stats.leaf_accuracy;
      row.test_leaf_accuracy = test_stats.leaf_accuracy;
      row.train_model_accuracy = train_stats.model_accuracy;
      row.test_model_accuracy = test_stats.model_accuracy;
      row.leaves_before = sr.tree.num_leaves();
      row.leaves_after = reduced.num_leaves();
      row.objective_value = sr.objective;
      row.proven_optimal = sr.proven;
      if (is_hybrid(m)) {
        const HybridTree h = extend_tree(reduced, train, cfg.extend_iterations, cfg.extend_folds, seed);
        row.train_hybrid_accuracy = hybrid_accuracy(h, train);
        row.test_hybrid_accuracy = hybrid_accuracy(h, test);
        row.agreement_rate = agreement_rate(h, test);
      }
      // Shared tree training is charged to every row that uses it.
      const double here = std::chrono::duration<double>(Clock::now() - started).count();
      row.wall_seconds = shallow.at(base).second + (here - base_seconds);
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
      row.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

EvalReport run_experiment(const std::vector<NamedDataset>& datasets, const std::vector<Method>& methods,
                          const std::vector<std::uint64_t>& seeds, const EvalConfig& cfg) {
  if (methods.empty()) throw ModelError("no methods to evaluate");
  if (datasets.empty()) throw DataError("no datasets to evaluate");
  EvalReport report;
  report.methods = methods;
  for (const auto& d : datasets) report.datasets.push_back(d.name);

  struct Cell {
    std::size_t dataset;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (std::uint64_t s : seeds) cells.push_back({d, s});
  }
  std::vector<std::vector<RawRow>> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      results[i] = run_cell(datasets[cells[i].dataset], cells[i].seed, methods, cfg);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, std::max<std::size_t>(1, cells.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& r : results) {
    for (auto& row : r) {
      report.partial = report.partial || !row.ok;
      report.raw.push_back(std::move(row));
    }
  }
  summarize(report);
  return report;
}

namespace {

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "train_leaf_accuracy",   "test_leaf_accuracy",   "train_model_accuracy", "test_model_accuracy",
      "train_hybrid_accuracy", "test_hybrid_accuracy", "agreement_rate",       "leaves_before",
      "leaves_after",          "objective_value"};
  return names;
}

std::optional<double> metric(const RawRow& r, const std::string& name) {
  if (name == "train_leaf_accuracy") return r.train_leaf_accuracy;
  if (name == "test_leaf_accuracy") return r.test_leaf_accuracy;
  if (name == "train_model_accuracy") return r.train_model_accuracy;
  if (name == "test_model_accuracy") return r.test_model_accuracy;
  if (name == "train_hybrid_accuracy") return r.train_hybrid_accuracy;
  if (name == "test_hybrid_accuracy") return r.test_hybrid_accuracy;
  if (name == "agreement_rate") return r.agreement_rate;
  if (name == "leaves_before") return static_cast<double>(r.leaves_before);
  if (name == "leaves_after") return static_cast<double>(r.leaves_after);
  if (name == "objective_value") return r.objective_value;
  return std::nullopt;
}

struct PairSpec {
  Method method;
  Method baseline;
  std::vector<std::string> metrics;
};

const std::vector<PairSpec>& pair_specs() {
  static const std::vector<PairSpec> specs{
      {Method::exact, Method::cart, {"test_leaf_accuracy", "train_leaf_accuracy", "test_model_accuracy"}},
      {Method::hybrid_exact, Method::hybrid_cart, {"test_hybrid_accuracy", "train_hybrid_accuracy"}}};
  return specs;
}

}  // namespace

void summarize(EvalReport& report) {
  report.aggregate.clear();
  report.comparisons.clear();
  report.tests.clear();
  report.mean_ranks.clear();
  const auto has = [&](Method m) {
    return std::find(report.methods.begin(), report.methods.end(), m) != report.methods.end();
  };

  // (dataset, method) -> aggregate row index
  std::map<std::pair<std::string, Method>, std::size_t> where;
  for (const auto& d : report.datasets) {
    for (Method m : report.methods) {
      AggregateRow a;
      a.dataset = d;
      a.method = m;
      for (const auto& name : metric_names()) {
        std::vector<double> values;
        for (const auto& r : report.raw) {
          if (r.ok && r.dataset == d && r.method == m) {
            if (auto v = metric(r, name)) values.push_back(*v);
          }
        }
        if (!values.empty()) a.metrics[name] = mean_std(values);
      }
      where[{d, m}] = report.aggregate.size();
      report.aggregate.push_back(std::move(a));
    }
  }

  // Ranks within metric groups: plain trees on leaf accuracy, hybrids on hybrid accuracy.
  struct RankGroup {
    std::string metric;
    std::vector<Method> members;
    std::optional<double> AggregateRow::*slot;
  };
  std::vector<RankGroup> groups;
  {
    RankGroup leaf{"test_leaf_accuracy", {}, &AggregateRow::rank_test_leaf_accuracy};
    RankGroup hyb{"test_hybrid_accuracy", {}, &AggregateRow::rank_test_hybrid_accuracy};
    for (Method m : report.methods) (is_hybrid(m) ? hyb : leaf).members.push_back(m);
    if (!leaf.members.empty()) groups.push_back(leaf);
    if (!hyb.members.empty()) groups.push_back(hyb);
  }
  for (const auto& g : groups) {
    std::map<Method, std::vector<double>> per_method;
    for (const auto& d : report.datasets) {
      std::vector<double> means;
      bool complete = true;
      for (Method m : g.members) {
        const auto& a = report.aggregate[where.at({d, m})];
        const auto it = a.metrics.find(g.metric);
        if (it == a.metrics.end()) {
          complete = false;
          break;
        }
        means.push_back(it->second.mean);
      }
      if (!complete) continue;
      const auto ranks = average_ranks(means, true);
      for (std::size_t i = 0; i < g.members.size(); ++i) {
        report.aggregate[where.at({d, g.members[i]})].*(g.slot) = ranks[i];
        per_method[g.members[i]].push_back(ranks[i]);
      }
    }
    for (const auto& [m, ranks] : per_method) {
      report.mean_ranks[g.metric][std::string(to_string(m))] = mean_std(ranks).mean;
    }
  }

  for (const auto& spec : pair_specs()) {
    if (!has(spec.method) || !has(spec.baseline)) continue;
    for (const auto& name : spec.metrics) {
      std::vector<double> diffs;
      for (const auto& d : report.datasets) {
        const auto& a = report.aggregate[where.at({d, spec.method})].metrics;
        const auto& b = report.aggregate[where.at({d, spec.baseline})].metrics;
        if (!a.contains(name) || !b.contains(name)) continue;
        Comparison c{d, name, spec.method, spec.baseline, a.at(name).mean, b.at(name).mean,
                     a.at(name).mean - b.at(name).mean};
        diffs.push_back(c.difference);
        report.comparisons.push_back(std::move(c));
      }
      PairedTest t;
      t.metric = name;
      t.method = spec.method;
      t.baseline = spec.baseline;
      if (report.datasets.size() >= 2) {
        t.unit = "dataset";
      } else {
        t.unit = "seed";
        diffs.clear();
        for (const auto& r : report.raw) {
          if (!r.ok || r.method != spec.method) continue;
          for (const auto& q : report.raw) {
            if (q.ok && q.method == spec.baseline && q.dataset == r.dataset && q.seed == r.seed) {
              const auto x = metric(r, name);
              const auto y = metric(q, name);
              if (x && y) diffs.push_back(*x - *y);
            }
          }
        }
      }
      for (double x : diffs) {
        if (x > 0) {
          ++t.wins;
        } else if (x < 0) {
          ++t.losses;
        } else {
          ++t.ties;
        }
      }
      if (t.wins + t.losses > 0) {
        t.sign_p = sign_test(t.wins, t.losses);
        const auto w = wilcoxon_signed_rank(diffs);
        t.wilcoxon_w = w.w;
        t.wilcoxon_p = w.p;
        t.wilcoxon_exact = w.exact;
      }
      report.tests.push_back(std::move(t));
    }
  }
}

namespace {

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void emit_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());

  {
    auto out = open_out(dir / "raw.csv");
    csv::write_row(out, {"dataset", "seed", "method", "status", "train_leaf_accuracy", "test_leaf_accuracy",
                         "train_model_accuracy", "test_model_accuracy", "train_hybrid_accuracy", "test_hybrid_accuracy",
                         "agreement_rate", "leaves_before", "leaves_after", "objective_value", "proven_optimal",
                         "error"});
    for (const auto& r : report.raw) {
      if (!r.ok) {
        csv::write_row(out, {r.dataset, std::to_string(r.seed), std::string(to_string(r.method)), "error", "", "", "",
                             "", "", "", "", "", "", "", "", r.error});
        continue;
      }
      csv::write_row(out, {r.dataset, std::to_string(r.seed), std::string(to_string(r.method)), "ok",
                           num(r.train_leaf_accuracy), num(r.test_leaf_accuracy), num(r.train_model_accuracy),
                           num(r.test_model_accuracy), opt(r.train_hybrid_accuracy), opt(r.test_hybrid_accuracy),
                           opt(r.agreement_rate), std::to_string(r.leaves_before), std::to_string(r.leaves_after),
                           num(r.objective_value),
                           r.proven_optimal ? (*r.proven_optimal ? "true" : "false") : "", ""});
    }
  }
  {
    auto out = open_out(dir / "timings.csv");
    csv::write_row(out, {"dataset", "seed", "method", "wall_seconds"});
    for (const auto& r : report.raw) {
      csv::write_row(out, {r.dataset, std::to_string(r.seed), std::string(to_string(r.method)), num(r.wall_seconds)});
    }
  }
  {
    auto out = open_out(dir / "aggregate.csv");
    std::vector<std::string> header{"dataset", "method", "runs"};
    for (const auto& m : metric_names()) {
      header.push_back(m + "_mean");
      header.push_back(m + "_std");
    }
    header.push_back("rank_test_leaf_accuracy");
    header.push_back("rank_test_hybrid_accuracy");
    csv::write_row(out, header);
    for (const auto& a : report.aggregate) {
      std::size_t runs = 0;
      for (const auto& r : report.raw) runs += (r.ok && r.dataset == a.dataset && r.method == a.method) ? 1 : 0;
      std::vector<std::string> row{a.dataset, std::string(to_string(a.method)), std::to_string(runs)};
      for (const auto& m : metric_names()) {
        const auto it = a.metrics.find(m);
        row.push_back(it == a.metrics.end() ? "" : num(it->second.mean));
        row.push_back(it == a.metrics.end() ? "" : num(it->second.std));
      }
      row.push_back(opt(a.rank_test_leaf_accuracy));
      row.push_back(opt(a.rank_test_hybrid_accuracy));
      csv::write_row(out, row);
    }
  }
  {
    auto out = open_out(dir / "comparisons.csv");
    csv::write_row(out, {"dataset", "metric", "method", "baseline", "method_mean", "baseline_mean", "difference"});
    for (const auto& c : report.comparisons) {
      csv::write_row(out, {c.dataset, c.metric, std::string(to_string(c.method)), std::string(to_string(c.baseline)),
                           num(c.method_mean), num(c.baseline_mean), num(c.difference)});
    }
  }
  {
    json tests = json::array();
    for (const auto& t : report.tests) {
      tests.push_back(json{{"metric", t.metric},
                           {"method", std::string(to_string(t.method))},
                           {"baseline", std::string(to_string(t.baseline))},
                           {"unit", t.unit},
                           {"wins", t.wins},
                           {"losses", t.losses},
                           {"ties", t.ties},
                           {"sign_test_p", opt_json(t.sign_p)},
                           {"wilcoxon_w", opt_json(t.wilcoxon_w)},
                           {"wilcoxon_p", opt_json(t.wilcoxon_p)},
                           {"wilcoxon_exact", t.wilcoxon_exact}});
    }
    json failures = json::array();
    for (const auto& r : report.raw) {
      if (!r.ok) failures.push_back(json{{"dataset", r.dataset}, {"seed", r.seed}, {"method", std::string(to_string(r.method))}, {"error", r.error}});
    }
    json summary{{"partial", report.partial},
                 {"datasets", report.datasets},
                 {"mean_ranks", report.mean_ranks},
                 {"tests", std::move(tests)},
                 {"failures", std::move(failures)}};
    json methods = json::array();
    for (Method m : report.methods) methods.push_back(std::string(to_string(m)));
    summary["methods"] = std::move(methods);
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
}

}  // namespace minleaf
