#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace minleaf {

/// Exact two-sided sign test: 2 * P(X >= max(wins, losses)) for
/// X ~ Binomial(wins + losses, 1/2), capped at 1. Ties must be dropped by the
/// caller. Throws DataError when wins + losses == 0.
double sign_test(std::size_t wins, std::size_t losses);

struct WilcoxonResult {
  double w = 0.0;        ///< min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;        ///< two-sided
  std::size_t m = 0;     ///< non-zero differences
  bool exact = false;
};

/// Largest number of non-zero differences handled by the exact distribution.
inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// Wilcoxon signed-rank test. Zero differences are dropped and tied
/// magnitudes get mid-ranks. Up to kWilcoxonExactLimit differences the
/// p-value is exact, 2 * P(W+ <= W) over all sign patterns; above it uses the
/// normal approximation with tie correction. Throws DataError when every
/// difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences);

/// Ranks 1..n with ties averaged; rank 1 goes to the largest value when
/// `higher_is_better`, otherwise to the smallest.
std::vector<double> average_ranks(std::span<const double> values, bool higher_is_better = true);

}  // namespace minleaf
