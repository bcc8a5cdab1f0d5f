#include "hdpca/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "hdpca/io.hpp"
#include "hdpca/metrics.hpp"

namespace hdpca {

unsigned resolve_threads(unsigned threads) {
  if (threads != 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& fn) {
  if (count <= 0) return;
  const unsigned workers =
      static_cast<unsigned>(std::min<Index>(resolve_threads(threads), count));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (Index i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::string_view to_string(SigmaEntries e) {
  return e == SigmaEntries::Uniform ? "uniform" : "normal";
}

SymmetricMatrix<double> generate_population_sigma(Index p, std::uint64_t seed,
                                                  SigmaEntries entries) {
  if (p < 2) throw InputError("generate_population_sigma: need p >= 2");
  std::mt19937_64 rng(seed);
  Matrix<double> t(p, p);
  if (entries == SigmaEntries::Uniform) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j) t(i, j) = dist(rng);
  } else {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j) t(i, j) = dist(rng);
  }
  return SymmetricMatrix<double>(t * t.transpose());
}

namespace {

// F with F F^T = Sigma. Cholesky when Sigma is positive definite, otherwise a
// pivoted LDL^T square root P^T L sqrt(D) for the semidefinite case.
Matrix<double> mvn_factor(const SymmetricMatrix<double>& sigma) {
  const Index p = sigma.dim();
  Eigen::LLT<Matrix<double>> llt(sigma.values());
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::LDLT<Matrix<double>> ldlt(sigma.values());
  if (ldlt.info() != Eigen::Success) throw InputError("sample_mvn: covariance factorisation failed");
  Vector<double> d = ldlt.vectorD();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Index k = 0; k < p; ++k) {
    if (d(k) < -1e-10 * scale) throw InputError("sample_mvn: covariance is indefinite");
    d(k) = std::sqrt(std::max(d(k), 0.0));
  }
  Matrix<double> l = ldlt.matrixL();
  Matrix<double> f = l * d.asDiagonal();
  return ldlt.transpositionsP().transpose() * f;
}

}  // namespace

DataMatrix<double> sample_mvn(const SymmetricMatrix<double>& sigma, Index n, std::uint64_t seed,
                              unsigned threads) {
  if (n < 1) throw InputError("sample_mvn: need n >= 1");
  const Index p = sigma.dim();
  const Matrix<double> f = mvn_factor(sigma);
  Matrix<double> x(n, p);
  parallel_for(n, threads, [&](Index r) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r), 0x6d766eULL));
    std::normal_distribution<double> dist(0.0, 1.0);
    Vector<double> z(p);
    for (Index k = 0; k < p; ++k) z(k) = dist(rng);
    x.row(r) = (f * z).transpose();
  });
  return DataMatrix<double>(x);
}

void ExperimentConfig::validate() const {
  if (data_source.kind == DataSource::Kind::Synthetic && p < 2) {
    throw InputError("config: p must be at least 2");
  }
  if (data_source.kind == DataSource::Kind::File && data_source.path.empty()) {
    throw InputError("config: file data source needs a path");
  }
  if (n_values.empty()) throw InputError("config: n_values is empty");
  for (Index n : n_values) {
    if (n < 2) throw InputError("config: every n must be at least 2");
  }
  if (m < 1) throw InputError("config: m must be at least 1");
  if (estimators.empty()) throw InputError("config: no estimators");
  for (const auto& e : estimators) {
    if (e.method == Method::Pop) throw InputError("config: POP is reported automatically");
  }
  if (pcs_reported < 1) throw InputError("config: pcs_reported must be at least 1");
}

Population make_population(const ExperimentConfig& config) {
  if (config.data_source.kind == DataSource::Kind::Synthetic) {
    auto sigma = generate_population_sigma(config.p, config.sigma_seed, config.sigma_entries);
    auto eig = sym_eigen(sigma);
    auto props = explained_variance_proportions(eig);
    return {std::move(sigma), std::move(eig), std::move(props), std::nullopt};
  }
  LoadOptions opts;
  opts.delimiter = config.data_source.delimiter;
  ExpressionTable table = load_expression_table(config.data_source.path, opts);
  if (table.conditions() < 2) throw InputError("data file needs at least 2 condition columns");
  const auto full = estimate_mle(DataMatrix<double>(table.values));
  auto eig = sym_eigen(full.matrix);
  auto props = explained_variance_proportions(eig);
  return {full.matrix, std::move(eig), std::move(props), std::move(table)};
}

namespace {

struct ReplicateOutcome {
  bool ok = false;
  double trace = 0;
  std::vector<double> lambda;  // top-K clamped eigenvalues
  std::vector<double> cse;     // per PC
};

}  // namespace

const SweepCell& SweepResult::cell(Index n, Method method, Index pc) const {
  for (const auto& c : cells) {
    if (c.n == n && c.method == method && c.pc == pc) return c;
  }
  throw InputError("sweep result has no cell for n=" + std::to_string(n) + " method=" +
                   std::string(to_string(method)) + " pc=" + std::to_string(pc));
}

SweepResult run_sweep(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  return run_sweep(config, make_population(config), threads);
}

SweepResult run_sweep(const ExperimentConfig& config, const Population& population,
                      unsigned threads) {
  config.validate();
  const Index p = population.sigma.dim();
  const Index k_pcs = std::min(config.pcs_reported, p);
  const Index m = config.m;
  const auto& n_values = config.n_values;
  const auto n_est = static_cast<Index>(config.estimators.size());

  if (population.table) {
    for (Index n : n_values) {
      if (n > population.table->genes()) {
        throw InputError("n=" + std::to_string(n) + " exceeds the " +
                         std::to_string(population.table->genes()) + " rows in the data file");
      }
    }
  }

  const Index jobs = static_cast<Index>(n_values.size()) * m;
  std::vector<std::vector<ReplicateOutcome>> outcomes(static_cast<std::size_t>(jobs));

  parallel_for(jobs, threads, [&](Index job) {
    const Index n = n_values[static_cast<std::size_t>(job / m)];
    const Index r = job % m;
    const std::uint64_t seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(n),
                                           static_cast<std::uint64_t>(r));
    auto& slot = outcomes[static_cast<std::size_t>(job)];
    slot.resize(static_cast<std::size_t>(n_est));

    std::optional<DataMatrix<double>> data;
    try {
      data = population.table ? subsample_rows(*population.table, n, seed)
                              : sample_mvn(population.sigma, n, seed);
    } catch (const InputError&) {
      return;
    } catch (const NumericalError&) {
      return;
    }

    for (Index e = 0; e < n_est; ++e) {
      auto& out = slot[static_cast<std::size_t>(e)];
      try {
        const auto est = estimate(*data, config.estimators[static_cast<std::size_t>(e)]);
        const auto eig = sym_eigen(est.matrix);
        const Vector<double> lam = clamped_spectrum(eig);
        const double trace = lam.sum();
        if (!(trace > 0)) continue;
        out.trace = trace;
        for (Index k = 0; k < k_pcs; ++k) {
          out.lambda.push_back(lam(k));
          out.cse.push_back(
              cosine_similarity_error(eig.vectors.col(k), population.eigen.vectors.col(k)));
        }
        out.ok = true;
      } catch (const InputError&) {
      } catch (const NumericalError&) {
      }
    }
  });

  SweepResult result;
  result.p = p;
  result.m = m;
  result.sigma_seed = config.sigma_seed;
  result.master_seed = config.master_seed;
  result.n_values = n_values;
  result.population_proportions = population.proportions;
  result.methods.push_back(Method::Pop);
  for (const auto& e : config.estimators) result.methods.push_back(e.method);

  for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
    const Index n = n_values[ni];
    for (Index k = 0; k < k_pcs; ++k) {
      SweepCell pop;
      pop.n = n;
      pop.method = Method::Pop;
      pop.pc = k + 1;
      pop.explained_pct = 100.0 * population.proportions(k);
      pop.explained_pct_replicate_mean = pop.explained_pct;
      pop.replicates_ok = m;
      result.cells.push_back(pop);
    }
    for (Index e = 0; e < n_est; ++e) {
      const Method method = config.estimators[static_cast<std::size_t>(e)].method;
      for (Index k = 0; k < k_pcs; ++k) {
        const double pi_pop = population.proportions(k);
        double sum_lambda = 0, sum_trace = 0, sum_ratio = 0, sum_od = 0, sum_cse = 0;
        Index ok = 0;
        for (Index r = 0; r < m; ++r) {
          const auto& slot = outcomes[ni * static_cast<std::size_t>(m) + static_cast<std::size_t>(r)];
          if (slot.empty()) continue;
          const auto& o = slot[static_cast<std::size_t>(e)];
          if (!o.ok) continue;
          const double lam = o.lambda[static_cast<std::size_t>(k)];
          sum_lambda += lam;
          sum_trace += o.trace;
          sum_ratio += lam / o.trace;
          sum_od += overdispersion(lam / o.trace, pi_pop, p, n);
          sum_cse += o.cse[static_cast<std::size_t>(k)];
          ++ok;
        }
        SweepCell c;
        c.n = n;
        c.method = method;
        c.pc = k + 1;
        c.replicates_ok = ok;
        c.replicates_failed = m - ok;
        if (static_cast<double>(c.replicates_failed) > kFailureBudget * static_cast<double>(m)) {
          throw SweepFailure(std::string(to_string(method)) + " failed in " +
                             std::to_string(c.replicates_failed) + " of " + std::to_string(m) +
                             " replicates at n=" + std::to_string(n));
        }
        const double pi_bar = sum_lambda / sum_trace;
        c.explained_pct = 100.0 * pi_bar;
        c.overdispersion = overdispersion(pi_bar, pi_pop, p, n);
        c.cse = sum_cse / static_cast<double>(ok);
        c.explained_pct_replicate_mean = 100.0 * sum_ratio / static_cast<double>(ok);
        c.overdispersion_replicate_mean = sum_od / static_cast<double>(ok);
        result.cells.push_back(c);
      }
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "p,n,method,metric,mean_value,m,sigma_seed,master_seed\n";
  for (const auto& c : result.cells) {
    const std::string suffix = c.pc == 1 ? "" : "_pc" + std::to_string(c.pc);
    const std::pair<const char*, double> metrics[] = {
        {"overdispersion", c.overdispersion},
        {"explained_pct", c.explained_pct},
        {"cse", c.cse},
        {"overdispersion_replicate_mean", c.overdispersion_replicate_mean},
        {"explained_pct_replicate_mean", c.explained_pct_replicate_mean},
    };
    for (const auto& [name, value] : metrics) {
      out << result.p << ',' << c.n << ',' << to_string(c.method) << ',' << name << suffix << ','
          << format_number(value) << ',' << c.replicates_ok << ',' << result.sigma_seed << ','
          << result.master_seed << '\n';
    }
  }
}

}  // namespace hdpca
