#pragma once

#include <cstddef>
#include <cstdint>

#include "minleaf/csv.hpp"

namespace minleaf::synth {

/// Recidivism-style tabular data: 11 mixed columns (numeric, binary and
/// categorical strings) and a binary "two_year_recid" label drawn from a noisy
/// logistic model, so no shallow tree separates the classes.
csv::Table compas_like(std::size_t rows, std::uint64_t seed);

/// Two Gaussian blobs in `features` dimensions; label "a" or "b".
csv::Table two_clusters(std::size_t rows, std::size_t features, double separation, std::uint64_t seed);

/// The four-point XOR layout on two features.
csv::Table xor_points();

}  // namespace minleaf::synth
