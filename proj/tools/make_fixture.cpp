// Writes a synthetic genes x conditions FPKM table shaped like a plant
// expression atlas export: GeneID column, one column per tissue/treatment
// condition, nonnegative values with a heavy upper tail and some dropouts.
//
// log FPKM = gene level + gene x tissue + gene x treatment + library factor + noise

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic expression fixture", "make_fixture"};
  std::string out_path;
  int genes = 200;
  int conditions = 74;
  std::uint64_t seed = 20240917;
  app.add_option("out", out_path, "Output TSV path")->required();
  app.add_option("--genes", genes, "Gene rows")->check(CLI::PositiveNumber);
  app.add_option("--conditions", conditions, "Condition columns")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::string> tissues = {"shoot", "leaf", "stem", "root", "spikelet"};
  const std::vector<std::string> treatments = {"control", "light", "dark", "cold",
                                               "heat",    "nitrogen", "phosphate", "drought"};

  struct Condition {
    std::string name;
    int tissue;
    int treatment;
  };
  std::vector<Condition> conds;
  for (int rep = 1; static_cast<int>(conds.size()) < conditions; ++rep) {
    for (int t = 0; t < static_cast<int>(tissues.size()); ++t) {
      for (int k = 0; k < static_cast<int>(treatments.size()); ++k) {
        if (static_cast<int>(conds.size()) == conditions) break;
        conds.push_back({tissues[t] + "_" + treatments[k] + "_r" + std::to_string(rep), t, k});
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution dropout(0.05);

  std::vector<double> library(conds.size());
  for (auto& s : library) s = 0.2 * normal(rng);

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "make_fixture: cannot write " << out_path << '\n';
    return 2;
  }
  out << "GeneID";
  for (const auto& c : conds) out << '\t' << c.name;
  out << '\n';

  char buf[32];
  for (int g = 0; g < genes; ++g) {
    const double level = 1.5 + 1.5 * normal(rng);
    std::vector<double> tissue_effect(tissues.size());
    for (auto& e : tissue_effect) e = 0.8 * normal(rng);
    std::vector<double> treatment_effect(treatments.size());
    for (auto& e : treatment_effect) e = 0.4 * normal(rng);

    std::snprintf(buf, sizeof(buf), "Bradi%dg%05d", 1 + g % 5, 10 * (g + 1));
    out << buf;
    for (std::size_t c = 0; c < conds.size(); ++c) {
      const double log_fpkm = level + tissue_effect[static_cast<std::size_t>(conds[c].tissue)] +
                              treatment_effect[static_cast<std::size_t>(conds[c].treatment)] +
                              library[c] + 0.3 * normal(rng);
      const double v = dropout(rng) ? 0.0 : std::exp(log_fpkm);
      std::snprintf(buf, sizeof(buf), "%.3f", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
  return 0;
}
