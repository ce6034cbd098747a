#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace minleaf {

/// Feature matrix (row-major, values in [0,1]) with integer class labels in [0, K).
///
/// Instances are immutable after construction; the constructor validates the
/// shape and value invariants and throws DataError on violation.
class Dataset {
 public:
  Dataset(std::size_t num_features, std::vector<double> features, std::vector<int> labels, int num_classes,
          std::vector<std::string> feature_names = {}, std::vector<std::string> class_names = {});

  std::size_t num_samples() const noexcept { return labels_.size(); }
  std::size_t num_features() const noexcept { return num_features_; }
  int num_classes() const noexcept { return num_classes_; }

  double value(std::size_t row, std::size_t feature) const { return features_[row * num_features_ + feature]; }
  std::span<const double> row(std::size_t row) const {
    return {features_.data() + row * num_features_, num_features_};
  }
  int label(std::size_t row) const { return labels_[row]; }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const double> features() const noexcept { return features_; }

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::string feature_name(std::size_t feature) const;
  std::string class_name(int label) const;

  /// Per-class sample counts, length K.
  std::vector<std::size_t> class_counts() const;

  /// New dataset made of the given rows (in that order); keeps K and names.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t num_features_;
  std::vector<double> features_;
  std::vector<int> labels_;
  int num_classes_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> class_names_;
};

enum class Encoding { ordinal, one_hot };

/// Label column chosen by header name or by 0-based index.
using LabelColumn = std::variant<std::string, std::size_t>;

/// Reads a CSV file (header row required), encodes categorical columns and
/// min-max normalizes every feature to [0,1]. Constant columns become all zeros.
/// Categories are ordered by first appearance; numeric labels are ordered
/// numerically, other labels by first appearance.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label, Encoding encoding = Encoding::ordinal);
Dataset parse_csv(std::istream& in, const LabelColumn& label, Encoding encoding = Encoding::ordinal);

/// Column-wise min-max normalization. Idempotent on normalized data.
Dataset min_max_normalize(const Dataset& ds);

/// Smallest positive gap between consecutive distinct values, per feature.
struct EpsilonVector {
  std::vector<double> eps;
  double eps_max = 0.0;
};

/// Constant features get eps = 1.
EpsilonVector compute_epsilon(const Dataset& ds);

struct SplitSpec {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::size_t train_cap = 10'000;
};

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Shuffles row indices with the seeded generator, takes the first
/// floor(fraction * n) as the training pool and the rest as the test set. The
/// training set is the first min(pool, cap) rows of the pool; capped-off rows
/// are dropped, so the test set stays at the complementary fraction.
TrainTestSplit split_dataset(const Dataset& ds, const SplitSpec& spec);

/// Assigns row indices to `folds` folds so every class is spread round-robin
/// over the folds after a seeded shuffle. Each fold lists its rows ascending.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int num_classes, int folds,
                                                       std::uint64_t seed);

}  // namespace minleaf
