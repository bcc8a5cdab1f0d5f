#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hdpca/cli.hpp"
#include "hdpca/io.hpp"

namespace hdpca::cli {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

double parse_cell(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("table: non-numeric cell '" + s + "'");
  }
  return v;
}

int column_order(const std::string& name) {
  const auto m = parse_method(name);
  return m ? method_rank(*m) : 1000;
}

}  // namespace

std::string table_file_stem(std::string_view metric) {
  if (metric == "explained_pct") return "explained";
  return std::string(metric);
}

MetricTable table_from_sweep(const SweepResult& result, std::string_view metric,
                             const std::string& manifest_hash) {
  MetricTable t;
  t.metric = std::string(metric);
  t.manifest_hash = manifest_hash;
  for (Method m : result.methods) t.columns.emplace_back(to_string(m));
  for (Index n : result.n_values) {
    t.n.push_back(n);
    std::vector<double> row;
    for (Method m : result.methods) {
      const auto& c = result.cell(n, m, 1);
      if (metric == "overdispersion") row.push_back(c.overdispersion);
      else if (metric == "explained_pct") row.push_back(c.explained_pct);
      else if (metric == "cse") row.push_back(c.cse);
      else throw InputError("unknown metric '" + std::string(metric) + "'");
    }
    t.values.push_back(std::move(row));
  }
  return t;
}

void write_table_csv(std::ostream& out, const MetricTable& t) {
  out << "# manifest_hash=" << t.manifest_hash << '\n';
  out << 'n';
  for (const auto& c : t.columns) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < t.n.size(); ++r) {
    out << t.n[r];
    for (double v : t.values[r]) out << ',' << format_number(v);
    out << '\n';
  }
}

MetricTable read_table_csv(std::istream& in, std::string_view metric) {
  MetricTable t;
  t.metric = std::string(metric);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# manifest_hash=";
      if (line.rfind(key, 0) == 0) t.manifest_hash = line.substr(key.size());
      continue;
    }
    auto cells = split_csv(line);
    if (!have_header) {
      if (cells.size() < 2 || cells[0] != "n") throw InputError("table: header must start with 'n'");
      t.columns.assign(cells.begin() + 1, cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size() + 1) throw InputError("table: ragged row '" + line + "'");
    t.n.push_back(static_cast<Index>(parse_cell(cells[0])));
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_cell(cells[c]));
    t.values.push_back(std::move(row));
  }
  if (!have_header) throw InputError("table: no header row");
  return t;
}

std::vector<std::size_t> rank_row(const MetricTable& t, std::size_t row) {
  std::optional<std::size_t> pop;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (t.columns[c] == "POP") pop = c;
    else cols.push_back(c);
  }
  const auto& v = t.values[row];
  std::vector<double> key(t.columns.size(), 0.0);
  if (t.metric == "explained_pct") {
    if (!pop) return {};
    for (std::size_t c : cols) key[c] = std::abs(v[c] - v[*pop]);
  } else {
    for (std::size_t c : cols) key[c] = v[c];
  }
  std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return column_order(t.columns[a]) < column_order(t.columns[b]);
  });
  return cols;
}

namespace {

std::size_t method_count(const MetricTable& t) {
  return static_cast<std::size_t>(
      std::count_if(t.columns.begin(), t.columns.end(), [](const auto& c) { return c != "POP"; }));
}

std::string title_of(std::string_view metric) {
  if (metric == "overdispersion") return "Average overdispersion of PC1";
  if (metric == "explained_pct") return "Average percentage of explained variance of PC1";
  if (metric == "cse") return "Average CSE of PC1";
  return std::string(metric);
}

}  // namespace

void write_table_markdown(std::ostream& out, const MetricTable& t, bool annotate) {
  const bool rank = annotate && method_count(t) >= 2;
  out << "| n |";
  for (const auto& c : t.columns) out << ' ' << c << " |";
  out << "\n|---|";
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << "---|";
  out << '\n';
  for (std::size_t r = 0; r < t.n.size(); ++r) {
    std::vector<int> place(t.columns.size(), 0);
    if (rank) {
      const auto order = rank_row(t, r);
      for (std::size_t k = 0; k < order.size() && k < 3; ++k) place[order[k]] = static_cast<int>(k + 1);
    }
    out << "| " << t.n[r] << " |";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const std::string v = format_number(t.values[r][c]);
      if (place[c] == 1) out << " **" << v << "** (1) |";
      else if (place[c] > 1) out << ' ' << v << " (" << place[c] << ") |";
      else out << ' ' << v << " |";
    }
    out << '\n';
  }
}

void write_report_markdown(std::ostream& out, const std::vector<MetricTable>& tables) {
  out << "# PCA covariance estimator report\n\n";
  for (const auto& t : tables) {
    if (!t.manifest_hash.empty()) {
      out << "<!-- manifest_hash=" << t.manifest_hash << " -->\n";
      break;
    }
  }
  const bool any_rank = std::any_of(tables.begin(), tables.end(),
                                    [](const auto& t) { return method_count(t) >= 2; });
  if (any_rank) {
    out << "Legend: **bold** (1) best, (2) second best, (3) third best per row. "
           "Overdispersion and CSE rank ascending; explained variance ranks by distance "
           "to POP. Ties break in the order MLE, LW, PDC, SPDC, LSPDC, MAXPDC, RPDC.\n\n";
  }
  for (const auto& t : tables) {
    out << "## " << title_of(t.metric) << "\n\n";
    write_table_markdown(out, t, true);
    out << '\n';
  }
  if (!any_rank) return;
  out << "## Rankings\n\n";
  for (const auto& t : tables) {
    if (method_count(t) < 2) continue;
    out << "### " << title_of(t.metric) << "\n\n";
    for (std::size_t r = 0; r < t.n.size(); ++r) {
      const auto order = rank_row(t, r);
      if (order.empty()) continue;
      out << "- n=" << t.n[r] << ':';
      static constexpr const char* kPlace[] = {" best ", ", second ", ", third "};
      for (std::size_t k = 0; k < order.size() && k < 3; ++k) out << kPlace[k] << t.columns[order[k]];
      out << '\n';
    }
    out << '\n';
  }
}

}  // namespace hdpca::cli
