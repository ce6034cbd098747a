// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "minleaf/boost.hpp"
#include "minleaf/cart.hpp"
#include "minleaf/csv.hpp"
#include "minleaf/data.hpp"
#include "minleaf/eval.hpp"
#include "minleaf/gbdt.hpp"
#include "minleaf/mio.hpp"
#include "minleaf/search.hpp"
#include "minleaf/stats.hpp"
#include "support.hpp"

using namespace minleaf;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Instance {
  Dataset data;
  int depth;
  std::size_t n_min;
};

// Oracle suite: random grid data, n <= 40, p <= 3, two classes, depth <= 2.
std::vector<Instance> oracle_suite() {
  Rng rng(2024);
  std::vector<Instance> out;
  for (int i = 0; i < 200; ++i) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 6, 40));
    const auto p = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    const int levels = static_cast<int>(uniform_int(rng, 3, 8));
    const int depth = static_cast<int>(uniform_int(rng, 1, 2));
    const std::size_t n_min = i % 2 ? 3 : 1;
    Dataset ds = i % 4 < 2 ? support::random_dataset(rng, n, p, 2, levels) : support::structured_dataset(rng, n, p, 0.15);
    out.push_back({std::move(ds), depth, n_min});
  }
  return out;
}

SearchConfig search_config(const Instance& in, Objective obj) {
  SearchConfig c;
  c.depth = in.depth;
  c.n_min = in.n_min;
  c.objective = obj;
  c.time_budget = 60;
  return c;
}

// Trees found in criterion 1, reused by 2 and 4.
struct SolvedInstance {
  const Instance* instance;
  ShallowTree tree;
  double value;
};
std::vector<SolvedInstance> g_solved;

Outcome oracle_equivalence(const std::vector<Instance>& suite) {
  const auto start = Clock::now();
  std::size_t mismatches = 0;
  double worst = 0;
  for (const auto& in : suite) {
    for (auto obj : {Objective::leaf_accuracy, Objective::misclassification}) {
      const auto cfg = search_config(in, obj);
      const auto got = solve(in.data, cfg);
      const auto want = brute_force_optimal(in.data, cfg);
      const double diff = std::abs(got.objective_value - want.objective_value);
      worst = std::max(worst, diff);
      if (!(diff <= 1e-9)) ++mismatches;
      if (obj == Objective::leaf_accuracy) g_solved.push_back({&in, got.tree, got.objective_value});
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs <= 300,
          std::to_string(suite.size()) + " instances x 2 objectives, " + std::to_string(mismatches) +
              " mismatches, max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.1f s (limit 300)", secs)};
}

Outcome mio_cross_check() {
  std::size_t failures = 0;
  double worst = 0;
  for (const auto& s : g_solved) {
    const auto& in = *s.instance;
    const auto model = build_mio(in.data, compute_epsilon(in.data), in.depth, in.n_min, Objective::leaf_accuracy);
    const auto a = warmstart_from_tree(model, s.tree, in.data);
    const auto report = check_feasible(model, a);
    const double diff = std::abs(a.at(mio_names::Q) - leaf_accuracy(s.tree, in.data).leaf_accuracy);
    worst = std::max(worst, diff);
    if (!report.feasible || !(diff <= 1e-9)) ++failures;
  }
  return {failures == 0 && !g_solved.empty(), std::to_string(g_solved.size()) + " trees, " + std::to_string(failures) +
                                                  " failures, max |Q - A_L| " + fmt("%.3g", worst)};
}

Outcome reduction_invariants() {
  Rng rng(77);
  std::size_t failures = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto ds = support::random_dataset(rng, static_cast<std::size_t>(uniform_int(rng, 10, 60)), 3,
                                            static_cast<int>(uniform_int(rng, 2, 3)), 6);
    const auto t = support::random_tree(rng, 3, static_cast<int>(uniform_int(rng, 1, 4)), ds.num_classes());
    const auto r = reduce_tree(t, ds);
    const auto before = leaf_accuracy(t, ds);
    const auto after = leaf_accuracy(r, ds);
    const bool ok = after.model_accuracy == before.model_accuracy && after.leaf_accuracy >= before.leaf_accuracy &&
                    reduce_tree(r, ds) == r;
    if (!ok) ++failures;
  }
  return {failures == 0, "100 trees, " + std::to_string(failures) + " violations"};
}

Outcome dominance() {
  std::size_t worse = 0;
  std::size_t strict = 0;
  for (const auto& s : g_solved) {
    const auto& in = *s.instance;
    CartConfig cc;
    cc.max_depth = in.depth;
    cc.min_samples_leaf = static_cast<int>(in.n_min);
    const auto cart = reduce_tree(cart_train(in.data, cc), in.data);
    const double c = leaf_accuracy(cart, in.data).leaf_accuracy;
    const double e = leaf_accuracy(s.tree, in.data).leaf_accuracy;
    if (e < c - 1e-12) ++worse;
    if (e > c + 1e-12) ++strict;
  }
  const double share = g_solved.empty() ? 0.0 : static_cast<double>(strict) / static_cast<double>(g_solved.size());
  return {worse == 0 && share >= 0.30, std::to_string(worse) + " instances below CART, strict improvement on " +
                                           fmt("%.1f%% (need >= 30%%)", 100 * share)};
}

Outcome small_data_demo() {
  const auto start = Clock::now();
  const std::string path = std::string(MINLEAF_DATA_DIR) + "/compas_like.csv";
  std::ifstream file(path);
  if (!file) return {false, "cannot open " + path};
  auto ds = parse_csv(file, std::string("two_year_recid"), Encoding::ordinal);
  const bool shape = ds.num_samples() == 1000 && ds.num_features() == 11 && ds.num_classes() == 2;
  EvalConfig cfg;
  cfg.depth = 3;
  cfg.n_min = 25;
  cfg.time_budget = 60;
  const auto report = run_experiment({{"compas_like", std::move(ds)}},
                                     {Method::cart, Method::exact, Method::hybrid_cart, Method::hybrid_exact}, {0}, cfg);
  const double secs = seconds_since(start);
  double cart = NAN;
  double exact = NAN;
  bool hybrid_ok = true;
  std::string hybrid_detail;
  for (const auto& r : report.raw) {
    if (!r.ok) return {false, std::string(to_string(r.method)) + " failed: " + r.error};
    if (r.method == Method::cart) cart = r.train_leaf_accuracy;
    if (r.method == Method::exact) exact = r.train_leaf_accuracy;
    if (is_hybrid(r.method)) {
      hybrid_ok = hybrid_ok && r.train_hybrid_accuracy && *r.train_hybrid_accuracy >= r.train_model_accuracy;
      hybrid_detail += std::string(", ") + std::string(to_string(r.method)) +
                       fmt(" %.4f vs shallow %.4f", r.train_hybrid_accuracy.value_or(NAN), r.train_model_accuracy);
    }
  }
  return {shape && exact - cart > 0 && hybrid_ok && secs <= 180,
          fmt("train A_L exact %.4f vs cart %.4f", exact, cart) + hybrid_detail + fmt(", %.1f s (limit 180)", secs)};
}

Outcome lp_round_trip() {
  Rng rng(55);
  std::size_t failures = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto ds = support::random_dataset(rng, static_cast<std::size_t>(uniform_int(rng, 3, 15)),
                                            static_cast<std::size_t>(uniform_int(rng, 1, 3)),
                                            static_cast<int>(uniform_int(rng, 2, 3)), 5);
    const auto obj = rep % 3 == 0 ? Objective::misclassification : Objective::leaf_accuracy;
    const auto m = build_mio(ds, compute_epsilon(ds), static_cast<int>(uniform_int(rng, 1, 2)),
                             static_cast<std::size_t>(uniform_int(rng, 1, 2)), obj);
    const auto text = emit_lp(m);
    const auto back = parse_lp(text);
    if (!structurally_equal(m, back) || emit_lp(back) != text) ++failures;
  }
  const auto xor_data =
      support::make_dataset({{0.1, 0.1}, {0.9, 0.9}, {0.1, 0.9}, {0.9, 0.1}}, {0, 0, 1, 1});
  const auto golden = support::read_file(std::string(MINLEAF_GOLDEN_DIR) + "/xor_d1.lp");
  const bool match =
      !golden.empty() && emit_lp(build_mio(xor_data, compute_epsilon(xor_data), 1, 1, Objective::leaf_accuracy)) == golden;
  return {failures == 0 && match,
          "50 instances, " + std::to_string(failures) + " mismatches; depth-1 golden " + (match ? "matches" : "differs")};
}

double enumerate_wilcoxon(const std::vector<double>& d) {
  std::vector<double> nz;
  for (double x : d) {
    if (x != 0) nz.push_back(x);
  }
  std::vector<double> mag;
  for (double x : nz) mag.push_back(std::abs(x));
  const auto ranks = average_ranks(mag, false);
  double plus = 0;
  double minus = 0;
  for (std::size_t i = 0; i < nz.size(); ++i) (nz[i] > 0 ? plus : minus) += ranks[i];
  const double w = std::min(plus, minus);
  std::size_t extreme = 0;
  const std::size_t patterns = std::size_t{1} << nz.size();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < nz.size(); ++i) {
      if (mask >> i & 1) s += ranks[i];
    }
    if (s <= w + 1e-9) ++extreme;
  }
  return std::min(1.0, 2.0 * static_cast<double>(extreme) / static_cast<double>(patterns));
}

Outcome statistics() {
  const bool sign = sign_test(9, 1) == 0.021484375;
  double worst = 0;
  std::size_t cases = 0;
  for (std::size_t m = 1; m <= 8; ++m) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      std::vector<double> d;
      for (std::size_t i = 0; i < m; ++i) d.push_back(((mask >> i & 1) ? 1.0 : -1.0) * static_cast<double>(i + 1));
      worst = std::max(worst, std::abs(wilcoxon_signed_rank(d).p - enumerate_wilcoxon(d)));
      ++cases;
    }
  }
  Rng rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    const auto m = static_cast<std::size_t>(uniform_int(rng, 1, 12));
    std::vector<double> d;
    for (std::size_t i = 0; i < m; ++i) d.push_back(static_cast<double>(uniform_int(rng, -8, 8)) / 2.0);
    if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0; })) d.push_back(1.5);
    worst = std::max(worst, std::abs(wilcoxon_signed_rank(d).p - enumerate_wilcoxon(d)));
    ++cases;
  }
  return {sign && worst <= 1e-12, std::string("sign_test(9,1) ") + (sign ? "exact" : "wrong") + ", Wilcoxon " +
                                      std::to_string(cases) + " vectors, max |diff| " + fmt("%.3g", worst)};
}

Dataset gaussian_clusters(Rng& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  std::vector<double> x(2 * n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < 2; ++j) x[2 * i + j] = 4.0 * y[i] + normal(rng);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, x[2 * i + j]);
      hi = std::max(hi, x[2 * i + j]);
    }
    for (std::size_t i = 0; i < n; ++i) x[2 * i + j] = (x[2 * i + j] - lo) / (hi - lo);
  }
  return Dataset(2, std::move(x), std::move(y), 2);
}

Outcome gbdt_sanity() {
  Rng rng(31);
  std::size_t increases = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = rep % 2 ? support::structured_dataset(rng, 150, 4, 0.2) : support::random_dataset(rng, 120, 3, 2, 6);
    GbdtConfig cfg;
    cfg.n_trees = 50;
    cfg.max_depth = static_cast<int>(uniform_int(rng, 1, 6));
    cfg.learning_rate = uniform_real(rng, 0.01, 0.3);
    cfg.gamma = 1e-8;
    cfg.lambda = uniform_real(rng, 0.0, 4.0);
    cfg.min_child_weight = uniform_real(rng, 0.0, 5.0);
    std::vector<double> trace;
    gbdt_train(ds, cfg, static_cast<std::uint64_t>(rep), &trace);
    for (std::size_t t = 1; t < trace.size(); ++t) {
      if (trace[t] > trace[t - 1] + 1e-12) ++increases;
    }
  }
  const auto all = gaussian_clusters(rng, 500);
  const auto split = split_dataset(all, {0, 0.8, 10'000});
  const auto start = Clock::now();
  const auto model = gbdt_train(split.train, GbdtConfig{}, 0);
  const double acc = model.accuracy(split.test);
  const double secs = seconds_since(start);
  return {increases == 0 && acc >= 0.95 && secs <= 2.0,
          std::to_string(increases) + " loss increases over 20 runs; two clusters " +
              fmt("test accuracy %.4f in %.2f s", acc, secs)};
}

Outcome scale_check() {
  Rng rng(500);
  const auto ds = support::structured_dataset(rng, 500, 10, 0.2);
  CartConfig cc;
  cc.max_depth = 3;
  cc.min_samples_leaf = 25;
  const auto warm = cart_train(ds, cc);
  SearchConfig cfg;
  cfg.depth = 3;
  cfg.n_min = 25;
  cfg.time_budget = 60;
  const double warm_value = tree_objective(warm, ds, cfg.n_min, Objective::leaf_accuracy);
  const auto start = Clock::now();
  const auto r = solve(ds, cfg, warm);
  const double secs = seconds_since(start);
  const bool improved = r.objective_value > warm_value;
  return {(improved || r.proven_optimal) && secs <= 60.0 + 1.0,
          fmt("warmstart %.4f -> %.4f", warm_value, r.objective_value) +
              (r.proven_optimal ? " (optimal)" : " (not proven)") + fmt(" in %.1f s", secs)};
}

}  // namespace

int main() {
  const auto suite = oracle_suite();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle_equivalence", [&] { return oracle_equivalence(suite); }},
      {"mio_cross_validation", mio_cross_check},
      {"reduction_invariants", reduction_invariants},
      {"dominance_over_cart", dominance},
      {"small_data_demonstration", small_data_demo},
      {"lp_round_trip", lp_round_trip},
      {"statistics", statistics},
      {"gbdt_sanity", gbdt_sanity},
      {"scale_check", scale_check},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - static_cast<std::size_t>(failed) << "/"
            << criteria.size() << std::endl;
  return failed ? 1 : 0;
}
