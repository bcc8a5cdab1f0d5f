#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hdpca/simlab.hpp"

namespace hdpca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitBudget = 3;

/// Flat `key = value` text mapped onto ExperimentConfig; `#` starts a comment.
///
/// Keys: p, n_values (e.g. `3..20` or `5,8,10..12`), m, estimators
/// (comma list of MLE, LW, PDC, SPDC, LSPDC, MAXPDC, RPDC), master_seed,
/// sigma_seed, data_source (`synthetic` or `file:PATH`), pcs_reported,
/// sigma_entries (`uniform`, `normal`), pdc_normalization (`LISTING`, `EQ1`),
/// epsilon_floor, delimiter (`tab`, `comma`), scope.METHOD (`PER_DIMENSION`,
/// `GLOBAL_SCALAR`, `PER_PAIR`). Unknown or repeated keys are errors.
/// Keys absent from the text keep the values already in `base`.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base);

/// Every field, one key per line, fixed key order. parse_config(canonical) round-trips.
std::string canonical_config(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical text, 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::vector<Index> parse_index_list(std::string_view text);

/// All seven estimators in the fixed method order, default options.
std::vector<EstimatorSpec> all_estimators();

/// One metric laid out as rows = n, columns = methods (POP first).
struct MetricTable {
  std::string metric;  // overdispersion | explained_pct | cse
  std::string manifest_hash;
  std::vector<std::string> columns;
  std::vector<Index> n;
  std::vector<std::vector<double>> values;
};

inline constexpr std::string_view kTableMetrics[] = {"overdispersion", "explained_pct", "cse"};

/// Output file stem for a metric (overdispersion, explained, cse).
std::string table_file_stem(std::string_view metric);

MetricTable table_from_sweep(const SweepResult& result, std::string_view metric,
                             const std::string& manifest_hash);

void write_table_csv(std::ostream& out, const MetricTable& table);
MetricTable read_table_csv(std::istream& in, std::string_view metric);

/// Column indices of the methods in a row, best first (POP excluded).
/// overdispersion / cse rank ascending; explained_pct ranks by distance to
/// the POP column (no ranking without POP). Ties fall back to the fixed
/// method order MLE, LW, PDC, SPDC, LSPDC, MAXPDC, RPDC.
std::vector<std::size_t> rank_row(const MetricTable& table, std::size_t row);

/// Markdown table; with `annotate`, the top three per row are marked.
void write_table_markdown(std::ostream& out, const MetricTable& table, bool annotate);

/// Full report: one section per table plus a per-row ranking section when
/// the table has at least two methods.
void write_report_markdown(std::ostream& out, const std::vector<MetricTable>& tables);

/// Entry point shared by the `hdpca` executable and the tests.
int run(int argc, const char* const* argv);

}  // namespace hdpca::cli
