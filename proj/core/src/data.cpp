#include "minleaf/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "minleaf/csv.hpp"
#include "minleaf/error.hpp"
#include "minleaf/random.hpp"

namespace minleaf {

Dataset::Dataset(std::size_t num_features, std::vector<double> features, std::vector<int> labels, int num_classes,
                 std::vector<std::string> feature_names, std::vector<std::string> class_names)
    : num_features_(num_features),
      features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      feature_names_(std::move(feature_names)),
      class_names_(std::move(class_names)) {
  if (num_features_ == 0) throw DataError("dataset needs at least one feature");
  if (labels_.empty()) throw DataError("dataset needs at least one sample");
  if (num_classes_ < 2) throw DataError("dataset needs at least two classes");
  if (features_.size() != labels_.size() * num_features_) throw DataError("feature matrix size does not match n*p");
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const double v = features_[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError("feature value out of [0,1] at row " + std::to_string(i / num_features_) + ", column " +
                      std::to_string(i % num_features_));
    }
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_) {
      throw DataError("label out of range at row " + std::to_string(i));
    }
  }
  if (!feature_names_.empty() && feature_names_.size() != num_features_) {
    throw DataError("feature name count does not match p");
  }
  if (!class_names_.empty() && class_names_.size() != static_cast<std::size_t>(num_classes_)) {
    throw DataError("class name count does not match K");
  }
}

std::string Dataset::feature_name(std::size_t feature) const {
  if (feature < feature_names_.size()) return feature_names_[feature];
  return "x" + std::to_string(feature);
}

std::string Dataset::class_name(int label) const {
  if (label >= 0 && static_cast<std::size_t>(label) < class_names_.size()) return class_names_[label];
  return std::to_string(label);
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes_, 0);
  for (int y : labels_) ++counts[y];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> features;
  features.reserve(rows.size() * num_features_);
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto x = row(r);
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(labels_[r]);
  }
  return Dataset(num_features_, std::move(features), std::move(labels), num_classes_, feature_names_, class_names_);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool is_missing(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "NA" || cell == "N/A" || cell == "NaN" || cell == "nan" || cell == "?" ||
         cell == "null" || cell == "NULL";
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string location(const csv::Table& table, std::size_t row, std::size_t column) {
  // Data rows are reported 1-based; the header is line 1 of the file.
  return "column '" + table.header[column] + "', row " + std::to_string(row + 1) + " (line " + std::to_string(row + 2) +
         ")";
}

std::size_t resolve_label(const csv::Table& table, const LabelColumn& label) {
  if (const auto* name = std::get_if<std::string>(&label)) {
    const auto it = std::find(table.header.begin(), table.header.end(), *name);
    if (it == table.header.end()) throw DataError("label column '" + *name + "' not found in header");
    return static_cast<std::size_t>(it - table.header.begin());
  }
  const auto index = std::get<std::size_t>(label);
  if (index >= table.header.size()) {
    throw DataError("label column index " + std::to_string(index) + " out of range (" +
                    std::to_string(table.header.size()) + " columns)");
  }
  return index;
}

// One raw (unnormalized) output column.
struct RawColumn {
  std::string name;
  std::vector<double> values;
};

}  // namespace

Dataset parse_csv(std::istream& in, const LabelColumn& label, Encoding encoding) {
  const csv::Table table = csv::parse(in);
  if (table.header.empty()) throw DataError("CSV input has no header row");
  if (table.rows.empty()) throw DataError("CSV input has no data rows");
  if (table.header.size() < 2) throw DataError("CSV input needs a label column and at least one feature column");
  const std::size_t label_col = resolve_label(table, label);
  const std::size_t n = table.rows.size();

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (is_missing(table.rows[r][c])) throw DataError("missing value at " + location(table, r, c));
    }
  }

  // Labels: numeric labels sort numerically, anything else keeps first-appearance order.
  std::vector<std::string> class_names;
  std::vector<int> labels(n);
  {
    bool numeric = true;
    for (std::size_t r = 0; r < n && numeric; ++r) numeric = parse_number(table.rows[r][label_col]).has_value();
    std::unordered_map<std::string, int> code;
    if (numeric) {
      std::map<double, std::string> distinct;
      for (std::size_t r = 0; r < n; ++r) {
        const auto& cell = table.rows[r][label_col];
        distinct.emplace(*parse_number(cell), std::string(trim(cell)));
      }
      for (const auto& [value, name] : distinct) class_names.push_back(name);
      for (std::size_t r = 0; r < n; ++r) {
        const double v = *parse_number(table.rows[r][label_col]);
        labels[r] = static_cast<int>(std::distance(distinct.begin(), distinct.find(v)));
      }
    } else {
      for (std::size_t r = 0; r < n; ++r) {
        const std::string cell(trim(table.rows[r][label_col]));
        const auto [it, inserted] = code.emplace(cell, static_cast<int>(class_names.size()));
        if (inserted) class_names.push_back(cell);
        labels[r] = it->second;
      }
    }
  }
  if (class_names.size() < 2) {
    throw DataError("label column '" + table.header[label_col] + "' has a single class");
  }

  std::vector<RawColumn> columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == label_col) continue;
    const bool categorical = !parse_number(table.rows[0][c]).has_value();
    if (!categorical) {
      RawColumn col{table.header[c], std::vector<double>(n)};
      for (std::size_t r = 0; r < n; ++r) {
        const auto v = parse_number(table.rows[r][c]);
        if (!v) throw DataError("non-numeric cell '" + table.rows[r][c] + "' at " + location(table, r, c));
        col.values[r] = *v;
      }
      columns.push_back(std::move(col));
      continue;
    }
    std::vector<std::string> categories;
    std::unordered_map<std::string, std::size_t> code;
    std::vector<std::size_t> codes(n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::string cell(trim(table.rows[r][c]));
      const auto [it, inserted] = code.emplace(cell, categories.size());
      if (inserted) categories.push_back(cell);
      codes[r] = it->second;
    }
    if (encoding == Encoding::ordinal) {
      RawColumn col{table.header[c], std::vector<double>(n)};
      for (std::size_t r = 0; r < n; ++r) col.values[r] = static_cast<double>(codes[r]);
      columns.push_back(std::move(col));
    } else {
      for (std::size_t k = 0; k < categories.size(); ++k) {
        RawColumn col{table.header[c] + "=" + categories[k], std::vector<double>(n)};
        for (std::size_t r = 0; r < n; ++r) col.values[r] = codes[r] == k ? 1.0 : 0.0;
        columns.push_back(std::move(col));
      }
    }
  }

  const std::size_t p = columns.size();
  std::vector<double> features(n * p);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) {
    const auto& values = columns[j].values;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double range = *hi - *lo;
    for (std::size_t r = 0; r < n; ++r) {
      features[r * p + j] = range > 0.0 ? std::clamp((values[r] - min) / range, 0.0, 1.0) : 0.0;
    }
    names.push_back(columns[j].name);
  }
  const auto k = static_cast<int>(class_names.size());
  return Dataset(p, std::move(features), std::move(labels), k, std::move(names),
                 std::move(class_names));
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label, Encoding encoding) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");
  return parse_csv(in, label, encoding);
}

Dataset min_max_normalize(const Dataset& ds) {
  const std::size_t n = ds.num_samples();
  const std::size_t p = ds.num_features();
  std::vector<double> features(ds.features().begin(), ds.features().end());
  for (std::size_t j = 0; j < p; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, ds.value(i, j));
      hi = std::max(hi, ds.value(i, j));
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      features[i * p + j] = range > 0.0 ? std::clamp((ds.value(i, j) - lo) / range, 0.0, 1.0) : 0.0;
    }
  }
  return Dataset(p, std::move(features), std::vector<int>(ds.labels().begin(), ds.labels().end()), ds.num_classes(),
                 ds.feature_names(), ds.class_names());
}

EpsilonVector compute_epsilon(const Dataset& ds) {
  EpsilonVector result;
  result.eps.assign(ds.num_features(), 1.0);
  std::vector<double> column(ds.num_samples());
  for (std::size_t j = 0; j < ds.num_features(); ++j) {
    for (std::size_t i = 0; i < ds.num_samples(); ++i) column[i] = ds.value(i, j);
    std::sort(column.begin(), column.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < column.size(); ++i) {
      if (column[i] != column[i - 1]) gap = std::min(gap, column[i] - column[i - 1]);
    }
    if (std::isfinite(gap)) result.eps[j] = gap;
  }
  result.eps_max = *std::max_element(result.eps.begin(), result.eps.end());
  return result;
}

TrainTestSplit split_dataset(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) throw DataError("train_fraction must lie in (0,1)");
  if (spec.train_cap < 1) throw DataError("train_cap must be at least 1");
  const std::size_t n = ds.num_samples();
  const auto pool = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  if (pool == 0 || pool >= n) {
    throw DataError("dataset with " + std::to_string(n) + " samples is too small for a non-empty train/test split");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  shuffle(std::span<std::size_t>(order), rng);

  TrainTestSplit split{ds, ds, {}, {}};
  const std::size_t train_size = std::min(pool, spec.train_cap);
  split.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
  split.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(pool), order.end());
  split.train = ds.subset(split.train_rows);
  split.test = ds.subset(split.test_rows);
  return split;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int num_classes, int folds,
                                                       std::uint64_t seed) {
  if (folds < 2) throw DataError("cross-validation needs at least two folds");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  std::size_t next = 0;
  for (auto& rows : by_class) {
    shuffle(std::span<std::size_t>(rows), rng);
    for (std::size_t r : rows) {
      out[next].push_back(r);
      next = (next + 1) % out.size();
    }
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

}  // namespace minleaf
