#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdpca/core.hpp"
#include "hdpca/estimators.hpp"
#include "hdpca/ingest.hpp"

namespace hdpca {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed; independent of evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

/// Runs fn(0..count-1) on up to `threads` workers (0 = hardware concurrency).
/// The first exception thrown by any call is rethrown after all workers stop.
void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& fn);

unsigned resolve_threads(unsigned threads);

/// Distribution of the entries of t in Sigma = t t^T.
enum class SigmaEntries { Uniform, Normal };

std::string_view to_string(SigmaEntries e);

/// Sigma = t t^T, t a p x p matrix of independent draws (row-major fill).
SymmetricMatrix<double> generate_population_sigma(Index p, std::uint64_t seed,
                                                  SigmaEntries entries = SigmaEntries::Uniform);

/// n rows of N(0, Sigma). Row r draws its normals from its own seeded stream,
/// so the output does not depend on `threads`.
DataMatrix<double> sample_mvn(const SymmetricMatrix<double>& sigma, Index n, std::uint64_t seed,
                              unsigned threads = 1);

struct DataSource {
  enum class Kind { Synthetic, File };
  Kind kind = Kind::Synthetic;
  std::string path;
  std::optional<char> delimiter;
};

struct ExperimentConfig {
  Index p = 20;
  std::vector<Index> n_values;
  Index m = 500;
  std::vector<EstimatorSpec> estimators;
  std::uint64_t master_seed = 1;
  std::uint64_t sigma_seed = 1;
  DataSource data_source;
  Index pcs_reported = 1;
  SigmaEntries sigma_entries = SigmaEntries::Uniform;

  /// Throws InputError on any violated invariant.
  void validate() const;
};

/// Population covariance, its eigensystem and (for file sources) the table it came from.
struct Population {
  SymmetricMatrix<double> sigma;
  EigenSystem<double> eigen;
  Vector<double> proportions;
  std::optional<ExpressionTable> table;
};

/// Synthetic: Sigma from sigma_seed. File: MLE covariance of the whole table.
Population make_population(const ExperimentConfig& config);

struct SweepCell {
  Index n = 0;
  Method method = Method::Pop;
  Index pc = 1;
  // 100 * mean(lambda_pc) / mean(trace) over successful replicates.
  double explained_pct = 0;
  // overdispersion(explained_pct / 100, pi_pop, p, n).
  double overdispersion = 0;
  // mean over replicates of 1 - |cos|.
  double cse = 0;
  // mean over replicates of the per-replicate proportion (percent).
  double explained_pct_replicate_mean = 0;
  // mean over replicates of the per-replicate overdispersion.
  double overdispersion_replicate_mean = 0;
  Index replicates_ok = 0;
  Index replicates_failed = 0;
};

struct SweepResult {
  Index p = 0;
  Index m = 0;
  std::uint64_t sigma_seed = 0;
  std::uint64_t master_seed = 0;
  std::vector<Index> n_values;
  std::vector<Method> methods;  // POP first, then the configured estimators
  Vector<double> population_proportions;
  std::vector<SweepCell> cells;  // ordered by (n, method position, pc)

  const SweepCell& cell(Index n, Method method, Index pc = 1) const;
};

/// Raised when more than 1% of a cell's replicates fail.
class SweepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kFailureBudget = 0.01;

SweepResult run_sweep(const ExperimentConfig& config, unsigned threads = 1);
SweepResult run_sweep(const ExperimentConfig& config, const Population& population,
                      unsigned threads = 1);

/// Long form: p,n,method,metric,mean_value,m,sigma_seed,master_seed.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace hdpca
