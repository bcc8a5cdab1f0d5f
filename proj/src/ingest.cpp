#include "hdpca/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "hdpca/io.hpp"

namespace hdpca {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string at_line(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::filesystem::path resolve_data_path(const std::filesystem::path& path) {
  if (std::filesystem::exists(path) || path.is_absolute()) return path;
  if (const char* dir = std::getenv(kDataDirEnv); dir && *dir) {
    auto candidate = std::filesystem::path(dir) / path;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return path;
}

ExpressionTable parse_expression_table(std::istream& in, const LoadOptions& options,
                                       std::string_view source) {
  std::string line;
  std::size_t line_no = 0;

  std::string header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = line;
      break;
    }
  }
  if (header.empty()) throw InputError(std::string(source) + ": empty file");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  char delim = '\t';
  if (options.delimiter) {
    delim = *options.delimiter;
  } else if (header.find('\t') != std::string::npos) {
    delim = '\t';
  } else if (header.find(',') != std::string::npos) {
    delim = ',';
  } else {
    throw InputError(at_line(source, line_no) + "cannot detect delimiter (expected tab or comma)");
  }

  ExpressionTable table;
  const auto head = split(header, delim);
  if (head.size() < 2) throw InputError(at_line(source, line_no) + "header has no condition columns");
  for (std::size_t c = 1; c < head.size(); ++c) table.condition_names.emplace_back(trim(head[c]));
  const std::size_t width = head.size();

  std::vector<double> values;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, delim);
    if (cells.size() != width) {
      throw InputError(at_line(source, line_no) + "expected " + std::to_string(width) +
                       " fields, found " + std::to_string(cells.size()));
    }
    std::string id(trim(cells[0]));
    if (id.empty()) throw InputError(at_line(source, line_no) + "empty GeneID");
    if (!seen.insert(id).second) {
      throw InputError(at_line(source, line_no) + "duplicate GeneID '" + id + "'");
    }
    for (std::size_t c = 1; c < width; ++c) {
      const auto cell = trim(cells[c]);
      double v = 0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw InputError(at_line(source, line_no) + "non-numeric value '" + std::string(cell) +
                         "' in column " + std::to_string(c + 1));
      }
      if (v < 0) {
        throw InputError(at_line(source, line_no) + "negative expression value '" +
                         std::string(cell) + "'");
      }
      values.push_back(v);
    }
    table.gene_ids.push_back(std::move(id));
  }
  if (table.gene_ids.empty()) throw InputError(std::string(source) + ": no data rows");

  const auto genes = static_cast<Index>(table.gene_ids.size());
  const auto conds = static_cast<Index>(width - 1);
  table.values =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), genes, conds);
  return table;
}

ExpressionTable load_expression_table(const std::filesystem::path& path,
                                      const LoadOptions& options) {
  const auto resolved = resolve_data_path(path);
  std::ifstream in(resolved);
  if (!in) throw InputError("cannot open data file '" + path.string() + "'");
  return parse_expression_table(in, options, resolved.string());
}

void write_expression_table(std::ostream& out, const ExpressionTable& table, char delimiter) {
  out << "GeneID";
  for (const auto& c : table.condition_names) out << delimiter << c;
  out << '\n';
  for (Index g = 0; g < table.genes(); ++g) {
    out << table.gene_ids[static_cast<std::size_t>(g)];
    for (Index c = 0; c < table.conditions(); ++c) {
      out << delimiter << format_number(table.values(g, c));
    }
    out << '\n';
  }
}

DataMatrix<double> subsample_rows(const ExpressionTable& table, Index n, std::uint64_t seed) {
  const Index genes = table.genes();
  if (n < 2 || n > genes) {
    throw InputError("subsample_rows: n=" + std::to_string(n) + " outside [2, " +
                     std::to_string(genes) + "]");
  }
  std::vector<Index> idx(static_cast<std::size_t>(genes));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (Index k = 0; k < n; ++k) {
    std::uniform_int_distribution<Index> pick(k, genes - 1);
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(n));
  std::sort(idx.begin(), idx.end());

  Matrix<double> rows(n, table.conditions());
  std::vector<std::string> labels;
  labels.reserve(idx.size());
  for (Index k = 0; k < n; ++k) {
    rows.row(k) = table.values.row(idx[static_cast<std::size_t>(k)]);
    labels.push_back(table.gene_ids[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]);
  }
  return DataMatrix<double>(rows, std::move(labels), table.condition_names);
}

}  // namespace hdpca
