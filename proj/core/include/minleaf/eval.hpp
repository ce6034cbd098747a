#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minleaf/data.hpp"
#include "minleaf/mio.hpp"
#include "minleaf/search.hpp"

namespace minleaf {

enum class Method { cart, exact, hybrid_cart, hybrid_exact };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);
bool is_hybrid(Method method);

struct NamedDataset {
  std::string name;
  Dataset data;
};

struct EvalConfig {
  int depth = 4;
  std::size_t n_min = 50;
  Objective objective = Objective::leaf_accuracy;
  Strategy strategy = Strategy::warmstarted;
  double time_budget = 60.0;
  std::size_t node_limit = 0;
  double train_fraction = 0.8;
  std::size_t train_cap = 10'000;
  int cart_iterations = 100;
  int cart_folds = 5;
  int extend_iterations = 50;
  int extend_folds = 3;
  std::size_t jobs = 1;
};

/// One (dataset, seed, method) run. Optional metrics are absent when they do
/// not apply (hybrid metrics for shallow methods) or the run failed.
struct RawRow {
  std::string dataset;
  std::uint64_t seed = 0;
  Method method = Method::cart;
  bool ok = true;
  std::string error;
  double train_leaf_accuracy = 0.0;
  double test_leaf_accuracy = 0.0;
  double train_model_accuracy = 0.0;
  double test_model_accuracy = 0.0;
  std::optional<double> train_hybrid_accuracy;
  std::optional<double> test_hybrid_accuracy;
  std::optional<double> agreement_rate;
  std::size_t leaves_before = 0;
  std::size_t leaves_after = 0;
  double objective_value = 0.0;
  std::optional<bool> proven_optimal;
  double wall_seconds = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation; 0 for a single value
  std::size_t count = 0;
};

MeanStd mean_std(const std::vector<double>& values);

/// Per (dataset, method) means over the successful seeds.
struct AggregateRow {
  std::string dataset;
  Method method = Method::cart;
  std::map<std::string, MeanStd> metrics;  ///< keyed by raw column name
  /// Rank among the methods sharing the metric on this dataset (1 = best).
  std::optional<double> rank_test_leaf_accuracy;
  std::optional<double> rank_test_hybrid_accuracy;
};

/// Mean of `method` minus mean of `baseline` for one metric on one dataset.
struct Comparison {
  std::string dataset;
  std::string metric;
  Method method = Method::exact;
  Method baseline = Method::cart;
  double method_mean = 0.0;
  double baseline_mean = 0.0;
  double difference = 0.0;
};

/// Paired test of `method` against `baseline`. Pairs are per-dataset means
/// when there are at least two datasets, otherwise per-seed values.
struct PairedTest {
  std::string metric;
  Method method = Method::exact;
  Method baseline = Method::cart;
  std::string unit;  ///< "dataset" or "seed"
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  std::optional<double> sign_p;
  std::optional<double> wilcoxon_w;
  std::optional<double> wilcoxon_p;
  bool wilcoxon_exact = false;
};

struct EvalReport {
  std::vector<std::string> datasets;
  std::vector<Method> methods;
  std::vector<RawRow> raw;
  std::vector<AggregateRow> aggregate;
  std::vector<Comparison> comparisons;
  std::vector<PairedTest> tests;
  std::map<std::string, std::map<std::string, double>> mean_ranks;  ///< metric -> method -> rank
  bool partial = false;  ///< some run failed
};

/// Splits every dataset once per seed, trains each method, reduces the tree,
/// extends it for hybrid methods and measures everything on both sides of the
/// split. Exact methods start from a default CART tree of the same depth and
/// N_min. Failures are recorded per row and the run continues.
EvalReport run_experiment(const std::vector<NamedDataset>& datasets, const std::vector<Method>& methods,
                          const std::vector<std::uint64_t>& seeds, const EvalConfig& cfg);

/// Rebuilds aggregates, comparisons, ranks and tests from report.raw.
void summarize(EvalReport& report);

/// Writes raw.csv, timings.csv, aggregate.csv, comparisons.csv and
/// summary.json into `dir` (created if missing). Throws DataError when the
/// directory cannot be written.
void emit_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace minleaf
