#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "hdpca/cli.hpp"
#include "hdpca/io.hpp"
#include "hdpca/levene.hpp"
#include "hdpca/metrics.hpp"

namespace hdpca::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::string in;
  std::string format = "csv";
  std::string data;
  std::string delimiter;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<Index> pcs;
  int verbosity = 0;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  fn(out);
  if (!out) throw InputError("error writing '" + path.string() + "'");
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("output directory '" + dir + "' is not usable");
  return fs::path(dir);
}

ExperimentConfig load_config(const Options& opt, ExperimentConfig base) {
  ExperimentConfig cfg =
      opt.config.empty() ? std::move(base) : parse_config(read_text(opt.config), std::move(base));
  if (opt.seed) cfg.master_seed = *opt.seed;
  if (opt.pcs) cfg.pcs_reported = *opt.pcs;
  if (!opt.data.empty()) {
    cfg.data_source.kind = DataSource::Kind::File;
    cfg.data_source.path = opt.data;
  }
  if (opt.delimiter == "tab") cfg.data_source.delimiter = '\t';
  else if (opt.delimiter == "comma") cfg.data_source.delimiter = ',';
  return cfg;
}

void log(const Options& opt, const std::string& msg) {
  if (opt.verbosity > 0) std::cerr << "hdpca: " << msg << '\n';
}

std::string manifest_json(const std::string& command, const ExperimentConfig& cfg,
                          const std::string& hash, unsigned threads, double seconds,
                          const std::vector<std::string>& outputs) {
  nlohmann::ordered_json j;
  j["tool"] = "hdpca";
  j["command"] = command;
  j["config_hash"] = hash;
  j["config"] = canonical_config(cfg);
  j["master_seed"] = cfg.master_seed;
  j["sigma_seed"] = cfg.sigma_seed;
  j["threads"] = threads;
  j["wall_time_seconds"] = seconds;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

int write_sweep_outputs(const std::string& command, const ExperimentConfig& cfg,
                        const Population& population, const Options& opt) {
  const auto dir = prepare_out_dir(opt.out);
  const auto start = std::chrono::steady_clock::now();
  const unsigned threads = resolve_threads(opt.threads);
  log(opt, command + ": p=" + std::to_string(population.sigma.dim()) + ", " +
               std::to_string(cfg.n_values.size()) + " n values, m=" + std::to_string(cfg.m) +
               ", " + std::to_string(threads) + " threads");
  const SweepResult result = run_sweep(cfg, population, threads);
  const std::string hash = config_hash(cfg);

  std::vector<std::string> outputs;
  for (auto metric : kTableMetrics) {
    const auto table = table_from_sweep(result, metric, hash);
    const std::string stem = table_file_stem(metric);
    write_file(dir / (stem + ".csv"), [&](std::ostream& os) { write_table_csv(os, table); });
    outputs.push_back(stem + ".csv");
    if (opt.format == "markdown") {
      write_file(dir / (stem + ".md"), [&](std::ostream& os) {
        os << "<!-- manifest_hash=" << hash << " -->\n";
        write_table_markdown(os, table, false);
      });
      outputs.push_back(stem + ".md");
    }
  }
  write_file(dir / "sweep.csv", [&](std::ostream& os) {
    os << "# manifest_hash=" << hash << '\n';
    write_sweep_csv(os, result);
  });
  outputs.push_back("sweep.csv");
  write_file(dir / "run.cfg", [&](std::ostream& os) { os << canonical_config(cfg); });
  outputs.push_back("run.cfg");

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(dir / "manifest.json", [&](std::ostream& os) {
    os << manifest_json(command, cfg, hash, threads, seconds, outputs);
  });
  log(opt, command + ": wrote " + std::to_string(outputs.size() + 1) + " files to " + dir.string());
  return kExitOk;
}

ExperimentConfig simulate_defaults() {
  ExperimentConfig cfg;
  cfg.p = 20;
  cfg.n_values = parse_index_list("3..20");
  cfg.m = 500;
  cfg.estimators = all_estimators();
  return cfg;
}

int cmd_simulate(const Options& opt) {
  ExperimentConfig cfg = load_config(opt, simulate_defaults());
  if (cfg.data_source.kind != DataSource::Kind::Synthetic) {
    throw InputError("simulate needs a synthetic data source (use 'analyze' for files)");
  }
  cfg.validate();
  return write_sweep_outputs("simulate", cfg, make_population(cfg), opt);
}

int cmd_analyze(const Options& opt) {
  ExperimentConfig base;
  base.n_values = parse_index_list("5..15");
  base.m = 100;
  base.estimators = all_estimators();
  ExperimentConfig cfg = load_config(opt, base);
  if (cfg.data_source.kind != DataSource::Kind::File) {
    throw InputError("analyze needs a data file (--data PATH or data_source = file:PATH)");
  }
  cfg.validate();
  Population population = make_population(cfg);
  cfg.p = population.sigma.dim();
  return write_sweep_outputs("analyze", cfg, population, opt);
}

nlohmann::ordered_json levene_json(const LeveneResult& r) {
  nlohmann::ordered_json j;
  j["statistic"] = std::isinf(r.statistic) ? nlohmann::ordered_json("inf")
                                           : nlohmann::ordered_json(r.statistic);
  j["p_value"] = r.p_value;
  j["p_value_underflow"] = r.p_value_underflow;
  j["df1"] = r.df1;
  j["df2"] = r.df2;
  return j;
}

int cmd_estimate(const Options& opt) {
  ExperimentConfig base;
  base.p = 20;
  base.n_values = {5};
  base.m = 1;
  base.estimators = {EstimatorSpec{Method::Mle}, EstimatorSpec{Method::Pdc}};
  ExperimentConfig cfg = load_config(opt, base);
  cfg.validate();
  if (cfg.n_values.size() != 1) throw InputError("estimate needs exactly one value in n_values");
  const Index n = cfg.n_values.front();

  const Population population = make_population(cfg);
  if (population.table && n > population.table->genes()) {
    throw InputError("n=" + std::to_string(n) + " exceeds the rows in the data file");
  }
  const DataMatrix<double> data = population.table
                                      ? subsample_rows(*population.table, n, cfg.master_seed)
                                      : sample_mvn(population.sigma, n, cfg.master_seed);
  cfg.p = population.sigma.dim();

  const auto dir = prepare_out_dir(opt.out);
  const std::string hash = config_hash(cfg);
  std::vector<std::string> outputs;

  write_file(dir / "population.csv",
             [&](std::ostream& os) { write_matrix_csv(os, population.sigma); });
  outputs.push_back("population.csv");

  std::vector<CovarianceEstimate<double>> estimates;
  std::vector<std::string> names;
  std::map<std::string, int> seen;
  for (const auto& spec : cfg.estimators) {
    estimates.push_back(estimate(data, spec));
    std::string name(to_string(spec.method));
    if (const int k = ++seen[name]; k > 1) name += "_" + std::to_string(k);
    names.push_back(name);
    write_file(dir / (name + ".csv"),
               [&](std::ostream& os) { write_matrix_csv(os, estimates.back().matrix); });
    outputs.push_back(name + ".csv");
  }

  nlohmann::ordered_json summary;
  summary["manifest_hash"] = hash;
  summary["p"] = cfg.p;
  summary["n"] = n;
  summary["population_known"] = true;
  summary["estimators"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto eig = sym_eigen(estimates[i].matrix);
    const double cond = condition_number(eig);
    nlohmann::ordered_json e;
    e["name"] = names[i];
    e["method"] = std::string(to_string(estimates[i].method));
    e["frobenius_to_population"] = frobenius_distance(estimates[i].matrix, population.sigma);
    e["condition_number"] =
        std::isinf(cond) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(cond);
    e["numerical_rank"] = numerical_rank(eig);
    summary["estimators"].push_back(e);
  }
  if (estimates.size() >= 2) {
    summary["levene"] = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < estimates.size(); ++a) {
      for (std::size_t b = a + 1; b < estimates.size(); ++b) {
        const auto groups = matrix_element_groups(estimates[a].matrix, estimates[b].matrix);
        nlohmann::ordered_json pair;
        pair["a"] = names[a];
        pair["b"] = names[b];
        pair["diagonal"] = levene_json(levene_test(groups.diagonal));
        pair["off_diagonal"] = levene_json(levene_test(groups.off_diagonal));
        summary["levene"].push_back(pair);
      }
    }
  }
  write_file(dir / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  outputs.push_back("summary.json");

  if (opt.format == "markdown") {
    write_file(dir / "summary.md", [&](std::ostream& os) {
      os << "<!-- manifest_hash=" << hash << " -->\n# Estimate summary (p=" << cfg.p
         << ", n=" << n << ")\n\n| estimator | Frobenius to population | condition number | rank |\n"
         << "|---|---|---|---|\n";
      for (const auto& e : summary["estimators"]) {
        const auto& c = e["condition_number"];
        os << "| " << e["name"].get<std::string>() << " | "
           << format_number(e["frobenius_to_population"].get<double>()) << " | "
           << (c.is_string() ? std::string("inf") : format_number(c.get<double>())) << " | "
           << e["numerical_rank"].get<Index>() << " |\n";
      }
      if (summary.contains("levene")) {
        os << "\n## Levene tests\n\n| a | b | diagonal statistic | diagonal p | off-diagonal "
              "statistic | off-diagonal p |\n|---|---|---|---|---|---|\n";
        for (const auto& l : summary["levene"]) {
          auto stat = [](const nlohmann::ordered_json& s) {
            return s.is_string() ? std::string("inf") : format_number(s.get<double>());
          };
          os << "| " << l["a"].get<std::string>() << " | " << l["b"].get<std::string>() << " | "
             << stat(l["diagonal"]["statistic"]) << " | "
             << format_number(l["diagonal"]["p_value"].get<double>()) << " | "
             << stat(l["off_diagonal"]["statistic"]) << " | "
             << format_number(l["off_diagonal"]["p_value"].get<double>()) << " |\n";
        }
      }
    });
    outputs.push_back("summary.md");
  }
  write_file(dir / "run.cfg", [&](std::ostream& os) { os << canonical_config(cfg); });
  outputs.push_back("run.cfg");
  write_file(dir / "manifest.json", [&](std::ostream& os) {
    os << manifest_json("estimate", cfg, hash, 1, 0.0, outputs);
  });
  log(opt, "estimate: wrote " + std::to_string(outputs.size() + 1) + " files to " + dir.string());
  return kExitOk;
}

int cmd_report(const Options& opt) {
  const fs::path in_dir = opt.in.empty() ? fs::path(opt.out) : fs::path(opt.in);
  std::vector<MetricTable> tables;
  for (auto metric : kTableMetrics) {
    const auto path = in_dir / (table_file_stem(metric) + ".csv");
    if (!fs::exists(path)) continue;
    std::ifstream in(path);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    tables.push_back(read_table_csv(in, metric));
  }
  if (tables.empty()) {
    throw InputError("no overdispersion.csv, explained.csv or cse.csv in '" + in_dir.string() + "'");
  }
  const auto dir = prepare_out_dir(opt.out);
  write_file(dir / "report.md", [&](std::ostream& os) { write_report_markdown(os, tables); });
  log(opt, "report: wrote " + (dir / "report.md").string());
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Covariance estimators for PCA when n < p: sweeps, real-data runs and reports",
               "hdpca"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Key-value config file");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "markdown"}));
    sub->add_option("--seed", opt.seed, "Override master_seed");
    sub->add_option("--threads", opt.threads, "Worker threads (0 = auto)");
    sub->add_option("--pcs", opt.pcs, "Number of PCs to report")->check(CLI::PositiveNumber);
    sub->add_flag("-v,--verbose", opt.verbosity, "Progress on stderr");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", opt.data, "Expression table (overrides data_source)");
    sub->add_option("--delimiter", opt.delimiter, "Field delimiter")
        ->check(CLI::IsMember({"tab", "comma", "auto"}));
  };

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo sweep on synthetic N(0, Sigma) data");
  add_common(simulate);
  auto* analyze = app.add_subcommand("analyze", "Subsampling sweep on an expression table");
  add_common(analyze);
  add_data(analyze);
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate and compare covariance matrices");
  add_common(estimate_cmd);
  add_data(estimate_cmd);
  auto* report = app.add_subcommand("report", "Merge table CSVs into a ranked markdown report");
  add_common(report);
  report->add_option("--in", opt.in, "Directory with overdispersion.csv / explained.csv / cse.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*simulate) return cmd_simulate(opt);
    if (*analyze) return cmd_analyze(opt);
    if (*estimate_cmd) return cmd_estimate(opt);
    if (*report) return cmd_report(opt);
  } catch (const InputError& e) {
    std::cerr << "hdpca: error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SweepFailure& e) {
    std::cerr << "hdpca: failure budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const NumericalError& e) {
    std::cerr << "hdpca: numerical failure: " << e.what() << '\n';
    return kExitBudget;
  }
  return kExitInput;
}

}  // namespace hdpca::cli
