#include "synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include "minleaf/random.hpp"

namespace minleaf::synth {

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
  return std::string(buf, ptr);
}

double normal(Rng& rng) {
  // Box-Muller; the second variate is discarded to keep draws simple.
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  double prod = uniform01(rng);
  std::size_t k = 0;
  while (prod > limit) {
    prod *= uniform01(rng);
    ++k;
  }
  return k;
}

template <std::size_t N>
std::size_t pick(Rng& rng, const std::array<double, N>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < N; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return N - 1;
}

}  // namespace

csv::Table compas_like(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  csv::Table t;
  t.header = {"sex",          "age",           "age_cat",         "race",           "juv_fel_count", "juv_misd_count",
              "juv_other_count", "priors_count", "c_charge_degree", "days_in_custody", "decile_score",  "two_year_recid"};
  static const std::array<const char*, 6> races{"African-American", "Caucasian", "Hispanic", "Other", "Asian",
                                                "Native American"};
  for (std::size_t i = 0; i < rows; ++i) {
    const bool male = uniform01(rng) < 0.8;
    const auto age = static_cast<int>(std::clamp(18.0 + std::abs(normal(rng)) * 20.0, 18.0, 80.0));
    const char* age_cat = age < 25 ? "Less than 25" : age <= 45 ? "25 - 45" : "Greater than 45";
    const std::size_t race = pick(rng, std::array<double, 6>{0.51, 0.34, 0.08, 0.05, 0.01, 0.01});
    const double youth = age < 25 ? 1.0 : 0.3;
    const std::size_t juv_fel = poisson(rng, 0.06 * youth * 2);
    const std::size_t juv_misd = poisson(rng, 0.09 * youth * 2);
    const std::size_t juv_other = poisson(rng, 0.1 * youth * 2);
    const double risk = normal(rng);  // latent criminal-history factor
    const std::size_t priors = poisson(rng, std::exp(0.9 + 0.8 * risk) * (male ? 1.2 : 0.8));
    const bool felony = uniform01(rng) < 0.62 + 0.05 * risk;
    const double custody = std::round(std::exp(1.0 + 1.1 * std::abs(normal(rng)) + 0.3 * risk));
    const double z = -1.35 + 0.16 * static_cast<double>(std::min<std::size_t>(priors, 20)) - 0.045 * (age - 35) +
                     0.35 * static_cast<double>(juv_fel + juv_misd) + (male ? 0.3 : -0.3) + (felony ? 0.15 : 0.0) +
                     0.08 * std::log1p(custody) + 0.9 * normal(rng);
    const double p = 1.0 / (1.0 + std::exp(-z));
    const bool recid = uniform01(rng) < p;
    const double decile = std::clamp(std::round(1.0 + 9.0 * (1.0 / (1.0 + std::exp(-(z + normal(rng) * 0.8))))), 1.0, 10.0);
    t.rows.push_back({male ? "Male" : "Female", std::to_string(age), age_cat, races[race], std::to_string(juv_fel),
                      std::to_string(juv_misd), std::to_string(juv_other), std::to_string(priors), felony ? "F" : "M",
                      fmt(custody), fmt(decile), recid ? "1" : "0"});
  }
  return t;
}

csv::Table two_clusters(std::size_t rows, std::size_t features, double separation, std::uint64_t seed) {
  Rng rng(seed);
  csv::Table t;
  for (std::size_t j = 0; j < features; ++j) t.header.push_back("x" + std::to_string(j));
  t.header.push_back("label");
  for (std::size_t i = 0; i < rows; ++i) {
    const bool b = i % 2 == 1;
    std::vector<std::string> row;
    for (std::size_t j = 0; j < features; ++j) row.push_back(fmt((b ? separation : 0.0) + normal(rng)));
    row.push_back(b ? "b" : "a");
    t.rows.push_back(std::move(row));
  }
  return t;
}

csv::Table xor_points() {
  csv::Table t;
  t.header = {"x0", "x1", "label"};
  t.rows = {{"0.1", "0.1", "A"}, {"0.9", "0.9", "A"}, {"0.1", "0.9", "B"}, {"0.9", "0.1", "B"}};
  return t;
}

}  // namespace minleaf::synth
