#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdpca/core.hpp"

namespace hdpca {

/// Genes (rows) by experimental conditions (columns), FPKM values.
struct ExpressionTable {
  std::vector<std::string> gene_ids;
  std::vector<std::string> condition_names;
  Matrix<double> values;

  Index genes() const { return values.rows(); }
  Index conditions() const { return values.cols(); }
};

struct LoadOptions {
  std::optional<char> delimiter;  // auto-detected (tab, then comma) when empty
};

/// Environment variable naming the fallback directory for relative data paths.
inline constexpr const char* kDataDirEnv = "HDPCA_DATA_DIR";

/// `path` if it exists; otherwise, for relative paths, $HDPCA_DATA_DIR/path.
std::filesystem::path resolve_data_path(const std::filesystem::path& path);

/// Delimited text: header row of condition names (first cell is the GeneID
/// column title), then one row per gene: GeneID followed by one value per condition.
ExpressionTable parse_expression_table(std::istream& in, const LoadOptions& options = {},
                                       std::string_view source = "<stream>");

ExpressionTable load_expression_table(const std::filesystem::path& path,
                                      const LoadOptions& options = {});

void write_expression_table(std::ostream& out, const ExpressionTable& table, char delimiter = '\t');

/// n distinct genes drawn uniformly without replacement, in ascending row order.
DataMatrix<double> subsample_rows(const ExpressionTable& table, Index n, std::uint64_t seed);

}  // namespace hdpca
