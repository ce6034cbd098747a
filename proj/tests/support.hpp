#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "minleaf/data.hpp"
#include "minleaf/random.hpp"
#include "minleaf/tree.hpp"

namespace minleaf::support {

/// Dataset from literal rows; values must already lie in [0,1].
inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                            int num_classes = 2) {
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return Dataset(rows.at(0).size(), std::move(flat), labels, num_classes);
}

/// Random data on a grid of `levels` values per feature so ties are common.
/// Every class is guaranteed at least one sample when n >= k.
inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t p, int k, int levels) {
  std::vector<double> x(n * p);
  for (auto& v : x) v = static_cast<double>(uniform_int(rng, 0, levels - 1)) / (levels - 1);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(uniform_int(rng, 0, k - 1));
  }
  return Dataset(p, std::move(x), std::move(y), k);
}

/// Random data whose label depends on the features plus label noise.
inline Dataset structured_dataset(Rng& rng, std::size_t n, std::size_t p, double noise) {
  std::vector<double> x(n * p);
  for (auto& v : x) v = uniform01(rng);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = &x[i * p];
    const bool a = r[0] + 0.5 * r[1 % p] > 0.7;
    const bool b = r[2 % p] < 0.4;
    int label = (a != b) ? 1 : 0;
    if (uniform01(rng) < noise) label = 1 - label;
    y[i] = label;
  }
  y[0] = 0;
  y[1] = 1;
  return Dataset(p, std::move(x), std::move(y), 2);
}

/// Random tree of exactly `depth` levels (each branch may still be a leaf
/// with probability leaf_prob below the root).
inline ShallowTree random_tree(Rng& rng, std::size_t p, int depth, int k, double leaf_prob = 0.2, bool top = true) {
  if (depth == 0 || (!top && uniform01(rng) < leaf_prob)) {
    return ShallowTree::leaf(static_cast<int>(uniform_int(rng, 0, k - 1)));
  }
  const int feature = static_cast<int>(uniform_int(rng, 0, static_cast<std::int64_t>(p) - 1));
  const double threshold = uniform01(rng);
  return ShallowTree::branch(feature, threshold, random_tree(rng, p, depth - 1, k, leaf_prob, false),
                             random_tree(rng, p, depth - 1, k, leaf_prob, false));
}

}  // namespace minleaf::support

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace minleaf::support {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Contents of tests/golden/<name>. With MINLEAF_UPDATE_GOLDEN=1 in the
/// environment the file is rewritten from `actual` first.
inline std::string golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(MINLEAF_GOLDEN_DIR) + "/" + name;
  if (const char* update = std::getenv("MINLEAF_UPDATE_GOLDEN"); update && std::string(update) == "1") {
    std::ofstream(path, std::ios::binary) << actual;
  }
  return read_file(path);
}

}  // namespace minleaf::support
