#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic dataset generator for minleaf"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out;
  std::size_t rows = 1000;
  std::size_t features = 2;
  double separation = 3.0;
  std::uint64_t seed = 7;
  app.add_option("--out,-o", out, "Output CSV path (default: stdout)");
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();

  auto* compas = app.add_subcommand("compas", "Recidivism-style mixed tabular data");
  compas->add_option("--rows", rows, "Number of rows")->capture_default_str();
  auto* clusters = app.add_subcommand("clusters", "Two Gaussian clusters");
  clusters->add_option("--rows", rows, "Number of rows")->capture_default_str();
  clusters->add_option("--features", features, "Number of features")->capture_default_str();
  clusters->add_option("--separation", separation, "Distance between cluster means per axis")->capture_default_str();
  app.add_subcommand("xor", "Four-point XOR layout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  minleaf::csv::Table table;
  if (compas->parsed()) {
    table = minleaf::synth::compas_like(rows, seed);
  } else if (clusters->parsed()) {
    table = minleaf::synth::two_clusters(rows, features, separation, seed);
  } else {
    table = minleaf::synth::xor_points();
  }
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) {
      std::cerr << "error: cannot write '" << out << "'\n";
      return 2;
    }
  }
  std::ostream& sink = out.empty() ? std::cout : file;
  minleaf::csv::write_row(sink, table.header);
  for (const auto& row : table.rows) minleaf::csv::write_row(sink, row);
  return 0;
}
