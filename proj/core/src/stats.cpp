#include "minleaf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "minleaf/error.hpp"

namespace minleaf {

double sign_test(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) throw DataError("sign test needs at least one non-tied comparison");
  const std::size_t k = std::max(wins, losses);
  if (n <= 60) {
    // C(n, i) for i = k..n fits in 64 bits up to n = 60.
    std::uint64_t tail = 0;
    std::uint64_t c = 1;  // C(n, n)
    for (std::size_t i = n; i >= k; --i) {
      tail += c;
      if (i == 0) break;
      c = c * i / (n - i + 1);  // C(n, i-1) = C(n, i) * i / (n - i + 1)
    }
    return std::min(1.0, std::ldexp(static_cast<double>(tail), 1 - static_cast<int>(n)));
  }
  // log-space tail sum.
  const double nn = static_cast<double>(n);
  std::vector<double> terms;
  for (std::size_t i = k; i <= n; ++i) {
    const double ii = static_cast<double>(i);
    terms.push_back(std::lgamma(nn + 1) - std::lgamma(ii + 1) - std::lgamma(nn - ii + 1) - nn * std::log(2.0));
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return std::min(1.0, 2.0 * std::exp(top + std::log(sum)));
}

std::vector<double> average_ranks(std::span<const double> values, bool higher_is_better) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_better ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences) {
  std::vector<double> d;
  for (double x : differences) {
    if (x != 0.0) d.push_back(x);
  }
  if (d.empty()) throw DataError("Wilcoxon test needs at least one non-zero difference");
  const std::size_t m = d.size();
  std::vector<double> magnitude(m);
  for (std::size_t i = 0; i < m; ++i) magnitude[i] = std::abs(d[i]);
  const auto ranks = average_ranks(magnitude, false);

  WilcoxonResult r;
  r.m = m;
  for (std::size_t i = 0; i < m; ++i) (d[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  r.w = std::min(r.w_plus, r.w_minus);

  if (m <= kWilcoxonExactLimit) {
    // Distribution of doubled W+ (mid-ranks become integers) over all 2^m sign patterns.
    std::vector<long> doubled(m);
    long total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      doubled[i] = std::lround(2.0 * ranks[i]);
      total += doubled[i];
    }
    std::vector<std::uint64_t> count(static_cast<std::size_t>(total) + 1, 0);
    count[0] = 1;
    long reach = 0;
    for (long v : doubled) {
      for (long s = reach; s >= 0; --s) count[static_cast<std::size_t>(s + v)] += count[static_cast<std::size_t>(s)];
      reach += v;
    }
    const long limit = std::lround(2.0 * r.w);
    std::uint64_t at_most = 0;
    for (long s = 0; s <= limit; ++s) at_most += count[static_cast<std::size_t>(s)];
    r.p = std::min(1.0, 2.0 * std::ldexp(static_cast<double>(at_most), -static_cast<int>(m)));
    r.exact = true;
    return r;
  }

  const double mm = static_cast<double>(m);
  const double mean = mm * (mm + 1.0) / 4.0;
  double variance = mm * (mm + 1.0) * (2.0 * mm + 1.0) / 24.0;
  std::vector<double> sorted = magnitude;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    variance -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  const double z = variance > 0.0 ? (r.w - mean) / std::sqrt(variance) : 0.0;
  r.p = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  r.exact = false;
  return r;
}

}  // namespace minleaf
